"""Surface models: charted conformal metrics, volumes, and geodesics.

Built-in closed surfaces: the unit sphere (two stereographic charts) and
flat tori C/(Z + tau Z) (one wrapped chart).  Geodesics are integrated in
chart coordinates from z'' + r(z) z'^2 = 0 with r the metric's affine
connection.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, List, Sequence

import numpy as np
from scipy.integrate import quad

from .connections import HolomorphicMap
from .errors import ChartError, StepFailureError


@dataclass(frozen=True)
class ChartPoint:
    chart: str
    z: complex


@dataclass(frozen=True)
class GeodesicState:
    point: ChartPoint
    velocity: complex
    t: float


class Surface:
    """Base class: a closed surface with a conformal metric per chart."""

    genus: int = 0
    charts: Sequence[str] = ()

    def metric_density(self, p: ChartPoint) -> float:
        raise NotImplementedError

    def log_density_dz(self, p: ChartPoint) -> complex:
        """d/dz log(metric density) at p, analytic per chart."""
        raise NotImplementedError

    def affine_connection(self, p: ChartPoint) -> complex:
        return 2.0 * self.log_density_dz(p)

    @property
    def volume(self) -> float:
        raise NotImplementedError

    def volume_quadrature(self) -> float:
        raise NotImplementedError

    def to_chart(self, p: ChartPoint, chart: str) -> ChartPoint:
        raise NotImplementedError

    def transition_derivative(self, p: ChartPoint, chart: str) -> complex:
        """dz_target/dz_source for moving p into the target chart."""
        raise NotImplementedError

    def canonical(self, p: ChartPoint) -> ChartPoint:
        """Preferred-chart representative of p (wraps or switches charts)."""
        return p

    def distance(self, p: ChartPoint, q: ChartPoint) -> float:
        raise NotImplementedError

    def transition_map(self, source: str, target: str) -> HolomorphicMap:
        """Chart transition as a HolomorphicMap (identity if same chart)."""
        raise NotImplementedError

    def _check_chart(self, p: ChartPoint) -> None:
        if p.chart not in self.charts:
            raise ChartError(f"unknown chart {p.chart!r} for {type(self).__name__}")


class Sphere(Surface):
    """Unit sphere in two stereographic charts N and S, transition z -> 1/z.

    Metric density 2/(1+|z|^2) in either chart; chart switch is triggered
    once |z| exceeds 2 so the point at infinity is never touched.
    """

    genus = 0
    charts = ("N", "S")
    switch_radius = 2.0

    def metric_density(self, p: ChartPoint) -> float:
        self._check_chart(p)
        return 2.0 / (1.0 + abs(p.z) ** 2)

    def log_density_dz(self, p: ChartPoint) -> complex:
        self._check_chart(p)
        return -np.conj(p.z) / (1.0 + abs(p.z) ** 2)

    @property
    def volume(self) -> float:
        return 4.0 * np.pi

    def volume_quadrature(self) -> float:
        # lambda^2 integrated over |z| <= 1 in each chart covers the sphere
        radial, _ = quad(lambda r: 4.0 * r / (1.0 + r * r) ** 2, 0.0, 1.0)
        return 2.0 * 2.0 * np.pi * radial

    def to_chart(self, p: ChartPoint, chart: str) -> ChartPoint:
        self._check_chart(p)
        if chart not in self.charts:
            raise ChartError(f"unknown chart {chart!r}")
        if p.chart == chart:
            return p
        if p.z == 0:
            raise ChartError("chart origin maps to infinity in the other chart")
        return ChartPoint(chart, 1.0 / p.z)

    def transition_derivative(self, p: ChartPoint, chart: str) -> complex:
        self._check_chart(p)
        if p.chart == chart:
            return 1.0 + 0j
        if p.z == 0:
            raise ChartError("chart origin maps to infinity in the other chart")
        return -1.0 / (p.z * p.z)

    def transition_map(self, source: str, target: str) -> HolomorphicMap:
        if source == target:
            from .connections import identity_map

            return identity_map()
        return HolomorphicMap(
            f=lambda z: 1.0 / z,
            df=lambda z: -1.0 / z**2,
            d2f=lambda z: 2.0 / z**3,
            d3f=lambda z: -6.0 / z**4,
        )

    def canonical(self, p: ChartPoint) -> ChartPoint:
        self._check_chart(p)
        if abs(p.z) > self.switch_radius:
            other = "S" if p.chart == "N" else "N"
            return ChartPoint(other, 1.0 / p.z)
        return p

    def chordal_distance(self, p: ChartPoint, q: ChartPoint) -> float:
        if q.chart != p.chart and q.z == 0:
            # q is the point at infinity of p's chart
            return 2.0 / np.sqrt(1.0 + abs(p.z) ** 2)
        qc = q if q.chart == p.chart else self.to_chart(q, p.chart)
        num = 2.0 * abs(p.z - qc.z)
        den = np.sqrt((1.0 + abs(p.z) ** 2) * (1.0 + abs(qc.z) ** 2))
        return num / den

    def distance(self, p: ChartPoint, q: ChartPoint) -> float:
        half = 0.5 * self.chordal_distance(p, q)
        return 2.0 * np.arcsin(min(1.0, half))


class FlatTorus(Surface):
    """Flat torus C/(Z + tau Z) with unit metric density, Im tau > 0."""

    genus = 1
    charts = ("cell",)

    def __init__(self, tau: complex = 1j):
        if np.imag(tau) <= 0:
            raise ChartError("torus modulus needs positive imaginary part")
        self.tau = complex(tau)

    def lattice_coords(self, z: complex) -> tuple[float, float]:
        """(s, u) with z = s + u*tau."""
        u = np.imag(z) / np.imag(self.tau)
        s = np.real(z) - u * np.real(self.tau)
        return s, u

    def wrap(self, z: complex) -> complex:
        s, u = self.lattice_coords(z)
        return (s % 1.0) + (u % 1.0) * self.tau

    def metric_density(self, p: ChartPoint) -> float:
        self._check_chart(p)
        return 1.0

    def log_density_dz(self, p: ChartPoint) -> complex:
        self._check_chart(p)
        return 0j

    @property
    def volume(self) -> float:
        return float(np.imag(self.tau))

    def volume_quadrature(self) -> float:
        # midpoint rule for lambda^2 over the cell; cell area is Im tau
        n = 64
        s = (np.arange(n) + 0.5) / n
        u = (np.arange(n) + 0.5) / n
        ss, uu = np.meshgrid(s, u)
        pts = ss + uu * self.tau
        vals = np.array(
            [self.metric_density(ChartPoint("cell", z)) ** 2 for z in pts.ravel()]
        )
        return float(vals.mean() * np.imag(self.tau))

    def to_chart(self, p: ChartPoint, chart: str) -> ChartPoint:
        self._check_chart(p)
        if chart != "cell":
            raise ChartError(f"unknown chart {chart!r}")
        return p

    def transition_derivative(self, p: ChartPoint, chart: str) -> complex:
        self._check_chart(p)
        return 1.0 + 0j

    def transition_map(self, source: str, target: str) -> HolomorphicMap:
        from .connections import identity_map

        return identity_map()

    def canonical(self, p: ChartPoint) -> ChartPoint:
        self._check_chart(p)
        return ChartPoint("cell", self.wrap(p.z))

    def reduce(self, dz):
        """Lattice representative of dz closest to zero; scalar or array."""
        u = np.imag(dz) / np.imag(self.tau)
        s = np.real(dz) - u * np.real(self.tau)
        u = u - np.round(u)
        s = s - np.round(s)
        return s + u * self.tau

    def distance(self, p: ChartPoint, q: ChartPoint) -> float:
        self._check_chart(p)
        self._check_chart(q)
        return abs(self.reduce(p.z - q.z))


def metric_speed(s: Surface, g: GeodesicState) -> float:
    """lambda(z) |z'|: constant along arc-length parametrized geodesics."""
    return s.metric_density(g.point) * abs(g.velocity)


def _canonical_state(s: Surface, g: GeodesicState) -> GeodesicState:
    p2 = s.canonical(g.point)
    if p2.chart == g.point.chart and p2.z == g.point.z:
        return g
    dzdz = s.transition_derivative(g.point, p2.chart) if p2.chart != g.point.chart else 1.0
    return GeodesicState(point=p2, velocity=g.velocity * dzdz, t=g.t)


def geodesic_integrate(
    s: Surface, g0: GeodesicState, T: float, dt: float
) -> List[GeodesicState]:
    """Integrate the geodesic equation with classical RK4, fixed step.

    Returns states at every step, chart-switched as needed.  The last step
    is shortened to land exactly on T.
    """
    if dt <= 0:
        raise StepFailureError("dt must be positive")

    def rhs(chart: str, z: complex, v: complex) -> tuple[complex, complex]:
        r = s.affine_connection(ChartPoint(chart, z))
        return v, -r * v * v

    out = [_canonical_state(s, g0)]
    t, t_end = g0.t, g0.t + T
    state = out[0]
    while t < t_end - 1e-15:
        step = min(dt, t_end - t)
        chart, z, v = state.point.chart, state.point.z, state.velocity
        k1 = rhs(chart, z, v)
        k2 = rhs(chart, z + 0.5 * step * k1[0], v + 0.5 * step * k1[1])
        k3 = rhs(chart, z + 0.5 * step * k2[0], v + 0.5 * step * k2[1])
        k4 = rhs(chart, z + step * k3[0], v + step * k3[1])
        z_new = z + step * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
        v_new = v + step * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
        t += step
        state = _canonical_state(
            s, GeodesicState(point=ChartPoint(chart, z_new), velocity=v_new, t=t)
        )
        out.append(state)
    return out


def geodesic_residual(s: Surface, path: Sequence[GeodesicState]) -> float:
    """Max over interior samples of |d/dt arg z' + Im(r(z) z')|.

    Parameter-invariant geodesic diagnostic built from centered differences
    of the sampled positions; zero (to discretization error) exactly on
    geodesics under any parametrization.
    """
    if len(path) < 5:
        raise StepFailureError("need at least 5 samples")
    worst = 0.0
    for i in range(1, len(path) - 1):
        center = path[i]
        prev_p = s.to_chart(path[i - 1].point, center.point.chart)
        next_p = s.to_chart(path[i + 1].point, center.point.chart)
        dt_plus = path[i + 1].t - center.t
        dt_minus = center.t - path[i - 1].t
        delta_plus = next_p.z - center.point.z
        delta_minus = center.point.z - prev_p.z
        if isinstance(s, FlatTorus):
            delta_plus = s.reduce(delta_plus)
            delta_minus = s.reduce(delta_minus)
        v_plus = delta_plus / dt_plus
        v_minus = delta_minus / dt_minus
        if abs(v_plus) == 0 or abs(v_minus) == 0:
            raise StepFailureError("vanishing discrete velocity")
        dang = np.angle(v_plus / v_minus) / (0.5 * (dt_plus + dt_minus))
        zdot = 0.5 * (v_plus + v_minus)
        r = s.affine_connection(center.point)
        worst = max(worst, abs(dang + np.imag(r * zdot)))
    return worst
