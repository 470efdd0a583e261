"""Schottky double of the unit disk: a closed genus-0 surface glued from
the disk and its mirror image along |z| = 1.

In the extended coordinate the metric is |dz| for |z| <= 1 and
|z|^{-2} |dz| for |z| > 1: Lipschitz but not smooth across the circle.
The affine connection is 0 inside, S''/S' = -2/z outside (with Schwarz
function S(z) = 1/z), and takes its mean value -1/z on the circle; the
mean value is exactly what makes the boundary a geodesic of the double.
"""

from __future__ import annotations

import numpy as np

from .errors import ChartError, CoincidentPointsError, SingularMapError
from .surface import ChartPoint, Surface

BOUNDARY_BAND = 1e-12
# singular curvature concentrated on the gluing circle, density 2*kappa
BOUNDARY_CURVATURE_DENSITY = 2.0


def schwarz_function(z: complex) -> complex:
    """S(z) = 1/z for the unit disk: holomorphic with S(z) = conj(z) on |z|=1."""
    if z == 0:
        raise SingularMapError("Schwarz function is singular at 0")
    return 1.0 / z


def reflect(z: complex) -> complex:
    """Anti-conformal reflection conj(S(z)) = 1/conj(z); fixes |z| = 1."""
    if z == 0:
        raise SingularMapError("reflection is singular at 0")
    return 1.0 / np.conj(z)


def double_metric(z: complex) -> float:
    """Metric density in the extended coordinate: 1 inside, |z|^-2 outside."""
    r = abs(z)
    return 1.0 if r <= 1.0 else 1.0 / (r * r)


def double_connection(z: complex) -> complex:
    """Piecewise affine connection in the extended coordinate.

    0 for |z| < 1, S''(z)/S'(z) = -2/z for |z| > 1, and the arithmetic
    mean -1/z on the circle itself.
    """
    if z == 0:
        return 0j
    r = abs(z)
    if r < 1.0 - BOUNDARY_BAND:
        return 0j
    if r > 1.0 + BOUNDARY_BAND:
        return -2.0 / z
    return -1.0 / z


def boundary_tangent(z: complex) -> complex:
    """Positively oriented unit tangent T(z) = iz along |z| = 1."""
    return 1j * z


def boundary_tangent_derivative(z: complex) -> complex:
    """T'(z) = i: purely imaginary, encoding unit circle curvature."""
    return 1j


def boundary_geodesic_residual(n_samples: int, normalize_velocity: bool = True) -> float:
    """Geodesic residual of the arc-length parametrized circle |z| = 1.

    max over samples of |d/dt arg z' + Im(r(z) z')| with z' from centered
    differences and r the mean-value connection.  With the velocity
    normalized to unit modulus the residual sits at roundoff; the raw
    centered-difference velocity leaves an O(n^-2) remainder from its
    modulus defect.
    """
    if n_samples < 16:
        raise ChartError("need at least 16 boundary samples")
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    z = np.exp(1j * theta)
    dt = 2.0 * np.pi / n_samples
    worst = 0.0
    for j in range(n_samples):
        vp = (z[(j + 1) % n_samples] - z[j]) / dt
        vm = (z[j] - z[j - 1]) / dt
        dang = np.angle(vp / vm) / dt
        v = 0.5 * (vp + vm)
        if normalize_velocity:
            v = v / abs(v)
        r = double_connection(z[j])
        worst = max(worst, abs(dang + np.imag(r * v)))
    return float(worst)


def boundary_residual_one_sided(n_samples: int) -> float:
    """Same residual but with the inside connection 0: returns the circle
    curvature (about 1), showing the mean value is what kills it."""
    if n_samples < 16:
        raise ChartError("need at least 16 boundary samples")
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    z = np.exp(1j * theta)
    dt = 2.0 * np.pi / n_samples
    worst = 0.0
    for j in range(n_samples):
        vp = (z[(j + 1) % n_samples] - z[j]) / dt
        vm = (z[j] - z[j - 1]) / dt
        dang = np.angle(vp / vm) / dt
        worst = max(worst, abs(dang))
    return float(worst)


def disk_green(z: complex, w: complex) -> float:
    """Ordinary Green function of the unit disk."""
    if abs(z - w) < 1e-12:
        raise CoincidentPointsError("green evaluated at coincident points")
    return float(
        (-np.log(abs(z - w)) + np.log(abs(1.0 - z * np.conj(w)))) / (2.0 * np.pi)
    )


def double_green(z: complex, w: complex) -> float:
    """Green function of the double: disk Green on the front, extended
    antisymmetrically, G(reflect z, w) = -G(z, w).  Vanishes on |z| = 1."""
    sign = 1.0
    if abs(w) > 1.0:
        w = reflect(w)
        sign = -sign
    if abs(z) > 1.0:
        z = reflect(z)
        sign = -sign
    return sign * disk_green(z, w)


class DiskDouble(Surface):
    """The Schottky double as a charted surface.

    Chart "front" is the original disk, chart "back" its mirror copy;
    each carries the flat metric |dz| on its own closed unit disk, and
    the transition is z -> 1/z across the gluing circle.  Points with
    |z| > 1 in a chart are read in the extended coordinate, where the
    metric density is |z|^-2.
    """

    genus = 0
    charts = ("front", "back")

    def metric_density(self, p: ChartPoint) -> float:
        self._check_chart(p)
        return double_metric(p.z)

    def log_density_dz(self, p: ChartPoint) -> complex:
        self._check_chart(p)
        return 0.5 * double_connection(p.z)

    @property
    def volume(self) -> float:
        return 2.0 * np.pi

    def volume_quadrature(self) -> float:
        # each chart contributes the unit disk, area pi under |dz|
        n = 256
        r = (np.arange(n) + 0.5) / n
        return float(2.0 * 2.0 * np.pi * np.sum(r) / n)

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

    def transition_map(self, source: str, target: str):
        from .connections import HolomorphicMap, identity_map

        if source == target:
            return identity_map()
        return HolomorphicMap(
            f=lambda z: 1.0 / z,
            df=lambda z: -1.0 / z**2,
            d2f=lambda z: 2.0 / z**3,
            d3f=lambda z: -6.0 / z**4,
        )

    def canonical(self, p: ChartPoint) -> ChartPoint:
        self._check_chart(p)
        if abs(p.z) > 1.0:
            other = "back" if p.chart == "front" else "front"
            return ChartPoint(other, 1.0 / p.z)
        return p

    def distance(self, p: ChartPoint, q: ChartPoint) -> float:
        """Metric length of the straight extended-coordinate segment;
        an upper bound on the geodesic distance, exact within one flat
        piece."""
        qc = self.to_chart(q, p.chart)
        n = 512
        t = (np.arange(n) + 0.5) / n
        seg = p.z + t * (qc.z - p.z)
        dens = np.array([double_metric(zz) for zz in seg])
        return float(np.mean(dens) * abs(qc.z - p.z))
