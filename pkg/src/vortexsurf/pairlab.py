"""Vortex-pair and dipole experiments: center-arrow coordinates, pair
invariants, geodesic-deviation sweeps, and the static dipole field.

A pair is two vortices of strengths +Gamma1 and -Gamma1 at w +/- u.  As
the separation shrinks the center w follows a geodesic of the surface
metric, the metric separation |u| lambda(w) is near-constant, and the
arrow u stays perpendicular to the center velocity (arg u - arg w' =
+pi/2 for Gamma1 > 0).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import PhaseState, Trajectory, VortexSystem
from .errors import ChartError, CoincidentPointsError, StepFailureError
from .greens import GreenModel
from .surface import ChartPoint, FlatTorus, GeodesicState, Surface, geodesic_integrate

ARC_MARGIN = 1.3


def center_arrow(s: Surface, w1: ChartPoint, w2: ChartPoint) -> Tuple[ChartPoint, complex]:
    """(w, u) with w1 = w + u and w2 = w - u in a common chart.

    On a torus the arrow is the lattice-reduced half-difference, so the
    pair is interpreted through the nearest representatives.
    """
    w2c = s.to_chart(w2, w1.chart)
    delta = w1.z - w2c.z
    if isinstance(s, FlatTorus):
        delta = s.reduce(delta)
    u = delta / 2.0
    return ChartPoint(w1.chart, w1.z - u), u


@dataclass
class PairRun:
    """A separation sweep for one pair configuration.

    u0 is a direction only (normalized at construction); the actual
    initial arrows are eps * u0.  Step sizes are expressed through
    dt_factor: the chart step of the center is about dt_factor * eps per
    time step, resolving the pair scale uniformly across the sweep.
    """

    surface: Surface
    w0: ChartPoint
    u0: complex
    gamma1: float
    epsilons: Sequence[float]
    dt_factor: float = 0.01
    window: float = 1.0
    stride: int = 5
    geodesic_dt: float = 1e-3

    def __post_init__(self):
        if abs(self.u0) == 0:
            raise StepFailureError("pair direction must be nonzero")
        self.u0 = self.u0 / abs(self.u0)
        if self.gamma1 == 0:
            raise StepFailureError("pair strength must be nonzero")
        eps = list(self.epsilons)
        if not eps or any(e <= 0 for e in eps):
            raise StepFailureError("separations must be positive")
        if any(eps[i] <= eps[i + 1] for i in range(len(eps) - 1)):
            raise StepFailureError("separations must be strictly decreasing")
        self.epsilons = eps


@dataclass
class PairDiagnostics:
    """Per-sample pair observables along one trajectory.

    speeds holds |u| lambda(w), angles holds arg u - arg w' (centered
    differences, wrapped to (-pi, pi]), residuals the pointwise geodesic
    residual of the center path.  Entries cover the interior samples.
    """

    times: List[float] = field(default_factory=list)
    centers: List[ChartPoint] = field(default_factory=list)
    arrows: List[complex] = field(default_factory=list)
    speeds: List[float] = field(default_factory=list)
    angles: List[float] = field(default_factory=list)
    residuals: List[float] = field(default_factory=list)

    def speed_drift(self) -> float:
        """Max relative drift of |u| lambda(w) from its first sample."""
        sp = np.asarray(self.speeds)
        return float(np.max(np.abs(sp - sp[0])) / abs(sp[0]))

    def angle_defect(self, gamma1: float) -> float:
        """Max deviation of arg u - arg w' from the predicted +/- pi/2."""
        target = np.pi / 2 if gamma1 > 0 else -np.pi / 2
        ang = np.asarray(self.angles)
        wrapped = np.angle(np.exp(1j * (ang - target)))
        return float(np.max(np.abs(wrapped)))


def pair_state(s: Surface, w0: ChartPoint, u: complex, gamma1: float) -> PhaseState:
    g = s.genus
    return PhaseState(
        vortices=[
            (s.canonical(ChartPoint(w0.chart, w0.z + u)), gamma1),
            (s.canonical(ChartPoint(w0.chart, w0.z - u)), -gamma1),
        ],
        a=np.zeros(g),
        b=np.zeros(g),
    )


def integrate_pair(run: PairRun, eps: float) -> Tuple[Trajectory, VortexSystem]:
    """Integrate one pair until the center covers the comparison window.

    The time step is normalized by the initial center speed so the chart
    displacement per step is about dt_factor * eps; the metric center
    speed is near-constant along the run, so a fixed total time covers
    the requested arc length with margin.
    """
    s = run.surface
    st0 = pair_state(s, run.w0, eps * run.u0, run.gamma1)
    system = VortexSystem(s, [p for p, _ in st0.vortices])
    v = system.velocities(st0)
    c0 = abs(v[0] + v[1]) / 2.0
    if c0 == 0:
        raise StepFailureError("pair center velocity vanishes")
    dt = run.dt_factor * eps / c0
    m0 = s.metric_density(run.w0) * c0
    T = ARC_MARGIN * run.window / m0
    n_steps = int(np.ceil(T / dt))
    traj = system.integrate(st0, dt=dt, T=n_steps * dt, stride=run.stride)
    return traj, system


def pair_diagnostics(traj: Trajectory, s: Surface) -> PairDiagnostics:
    """Pair observables from a sampled two-vortex trajectory."""
    if len(traj.states) < 3:
        raise StepFailureError("need at least 3 samples")
    if len(traj.states[0].vortices) != 2:
        raise StepFailureError("pair diagnostics need exactly 2 vortices")
    g1 = traj.states[0].vortices[0][1]
    g2 = traj.states[0].vortices[1][1]
    if g1 + g2 != 0.0:
        raise StepFailureError("pair strengths must be opposite")
    centers, arrows = [], []
    for st in traj.states:
        w, u = center_arrow(s, st.vortices[0][0], st.vortices[1][0])
        centers.append(w)
        arrows.append(u)
    out = PairDiagnostics()
    for i in range(1, len(centers) - 1):
        c = centers[i]
        prev = s.to_chart(centers[i - 1], c.chart)
        nxt = s.to_chart(centers[i + 1], c.chart)
        dtp = traj.times[i + 1] - traj.times[i]
        dtm = traj.times[i] - traj.times[i - 1]
        dp, dm = nxt.z - c.z, c.z - prev.z
        if isinstance(s, FlatTorus):
            dp, dm = s.reduce(dp), s.reduce(dm)
        vp, vm = dp / dtp, dm / dtm
        if abs(vp) == 0 or abs(vm) == 0:
            raise StepFailureError("vanishing center velocity")
        wdot = 0.5 * (vp + vm)
        dang = np.angle(vp / vm) / (0.5 * (dtp + dtm))
        r = s.affine_connection(c)
        out.times.append(traj.times[i])
        out.centers.append(c)
        out.arrows.append(arrows[i])
        out.speeds.append(abs(arrows[i]) * s.metric_density(c))
        out.angles.append(float(np.angle(arrows[i] / wdot)))
        out.residuals.append(float(abs(dang + np.imag(r * wdot))))
    return out


def _cumulative_arc(s: Surface, points: Sequence[ChartPoint]) -> np.ndarray:
    """Cumulative metric arc length along a sampled chart path."""
    arcs = [0.0]
    for i in range(1, len(points)):
        a = points[i - 1]
        b = s.to_chart(points[i], a.chart)
        dz = b.z - a.z
        if isinstance(s, FlatTorus):
            dz = s.reduce(dz)
        lam = s.metric_density(ChartPoint(a.chart, a.z + dz / 2.0))
        arcs.append(arcs[-1] + lam * abs(dz))
    return np.asarray(arcs)


def _point_at_arc(
    s: Surface, points: Sequence[ChartPoint], arcs: np.ndarray, target: float
) -> ChartPoint:
    """Linear chart interpolation of a sampled path at a given arc length."""
    if target > arcs[-1]:
        raise StepFailureError("path shorter than the requested arc length")
    i = int(np.searchsorted(arcs, target))
    if i == 0:
        return points[0]
    a = points[i - 1]
    b = s.to_chart(points[i], a.chart)
    dz = b.z - a.z
    if isinstance(s, FlatTorus):
        dz = s.reduce(dz)
    frac = (target - arcs[i - 1]) / (arcs[i] - arcs[i - 1])
    return s.canonical(ChartPoint(a.chart, a.z + frac * dz))


def geodesic_from_pair(run: PairRun) -> List[GeodesicState]:
    """Unit-speed geodesic matched to the pair's initial center motion.

    The center moves perpendicular to the arrow: arg w' = arg u - pi/2
    for Gamma1 > 0 (the opposite sign otherwise).
    """
    s = run.surface
    direction = -1j * run.u0 if run.gamma1 > 0 else 1j * run.u0
    v0 = direction / s.metric_density(run.w0)
    g0 = GeodesicState(point=run.w0, velocity=v0, t=0.0)
    return geodesic_integrate(s, g0, ARC_MARGIN * run.window, run.geodesic_dt)


def kimura_table(run: PairRun) -> List[dict]:
    """Per-separation sweep results against the matched geodesic.

    Each entry holds the separation, the max metric distance between the
    pair's center path and the geodesic (both parametrized by metric arc
    length, compared over one window), the drift of |u| lambda(w), the
    defect of arg u - arg w' from +/- pi/2, and the Hamiltonian drift of
    the underlying run.  Sweep entries run concurrently; the table keeps
    the input eps order.
    """
    s = run.surface
    geo = geodesic_from_pair(run)
    geo_pts = [g.point for g in geo]
    geo_arcs = _cumulative_arc(s, geo_pts)
    grid = np.linspace(0.0, run.window, 201)

    def entry(eps: float) -> dict:
        traj, _ = integrate_pair(run, eps)
        diag = pair_diagnostics(traj, s)
        centers = []
        for st in traj.states:
            w, _ = center_arrow(s, st.vortices[0][0], st.vortices[1][0])
            centers.append(w)
        arcs = _cumulative_arc(s, centers)
        worst = 0.0
        for t in grid:
            p = _point_at_arc(s, centers, arcs, t)
            q = _point_at_arc(s, geo_pts, geo_arcs, t)
            worst = max(worst, s.distance(p, q))
        return {
            "eps": eps,
            "deviation": worst,
            "speed_drift": diag.speed_drift(),
            "angle_defect": diag.angle_defect(run.gamma1),
            "hamiltonian_drift_rel": traj.diagnostics["hamiltonian_drift_rel"],
        }

    with ThreadPoolExecutor(max_workers=min(4, len(run.epsilons))) as ex:
        return list(ex.map(entry, run.epsilons))


def kimura_deviation(run: PairRun) -> List[Tuple[float, float]]:
    """(eps, deviation) pairs from the sweep table."""
    return [(row["eps"], row["deviation"]) for row in kimura_table(run)]


def q_robin(m: GreenModel, w: ChartPoint, h: float = 1e-4) -> complex:
    """Projective connection built from the Robin-energy coefficients.

    q_robin = -6 (dh1/dw - 2 h2), with dh1/dw the Wirtinger derivative
    taken by central differences of the regular-part coefficients.
    """
    def h1_at(z: complex) -> complex:
        return m.regular_coeffs(ChartPoint(w.chart, z)).h1

    dx = (h1_at(w.z + h) - h1_at(w.z - h)) / (2.0 * h)
    dy = (h1_at(w.z + 1j * h) - h1_at(w.z - 1j * h)) / (2.0 * h)
    dh1_dw = 0.5 * (dx - 1j * dy)
    h2 = m.regular_coeffs(w).h2
    return -6.0 * (dh1_dw - 2.0 * h2)


def dipole_field(w: ChartPoint, m_dir: complex, z: ChartPoint) -> np.ndarray:
    """Singular dipole one-form Im(m dz / (z-w)^2) as a covector (p, q).

    m_dir is the complex dipole moment; a vortex pair of strengths
    +/-Gamma at w +/- eps*u produces the moment Gamma * eps * u / pi in
    the coalescence limit.  Both points must share a chart.
    """
    if z.chart != w.chart:
        raise ChartError("dipole field needs both points in one chart")
    dz = z.z - w.z
    if abs(dz) < 1e-12:
        raise CoincidentPointsError("dipole field evaluated at its singularity")
    g = m_dir / (dz * dz)
    return np.array([np.imag(g), np.real(g)])
