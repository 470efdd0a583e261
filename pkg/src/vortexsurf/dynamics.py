"""Phase space, Hamiltonian, vortex velocities, and time integration.

The phase space of n vortices on a genus-g surface is
(w_1..w_n; a_1..a_g, b_1..b_g), dimension 2n + 2g.  With

    A = a + oint_alpha *dG^omega,    B = b + oint_beta *dG^omega

(recomputed from the current positions at every evaluation, never stepped)
the equations of motion are

    lambda(w_k)^2 w_k' = (Gamma_k / 2 pi i)(conj h1(w_k) + d/d(conj w) log lambda)
                         - 2i sum_{j != k} Gamma_j dG(w_k,w_j)/d(conj w_k)
                         + 2 (B^T, -A^T) (dU_alpha/d(conj w); dU_beta/d(conj w)),

    (a'; b') = (Gamma/V) [[-R^T, -Q], [P, R]] (A; B),

and the conserved Hamiltonian is

    H = sum Gamma_k^2 R_robin(w_k) + (1/2) sum_{k != j} Gamma_k Gamma_j G(w_k,w_j)
        + (1/2) (A^T, B^T) [[P, R], [R^T, Q]] (A; B).

The self-energy diagonal carries weight one, so a single vortex of strength
Gamma has energy Gamma^2 R_robin.  On the built-in surfaces R_robin is
position-independent, so this normalization shifts H only by a constant
and Hamilton's equations reproduce the velocity formula above exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import CollisionError, StepFailureError
from .greens import GreenModel, green_model
from .homology import (
    HarmonicBasis,
    PeriodMatrix,
    conjugate_green_periods,
    harmonic_basis,
    period_matrix,
)
from .surface import ChartPoint, Surface

MIN_SEPARATION = 1e-8
CYCLE_SHIFT_DISTANCE = 0.02


@dataclass
class PhaseState:
    """Vortex positions with strengths plus circulation vectors."""

    vortices: List[Tuple[ChartPoint, float]]
    a: np.ndarray
    b: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.a = np.atleast_1d(np.asarray(self.a, dtype=float))
        self.b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if self.a.size == 0:
            self.a = np.zeros(0)
        if self.b.size == 0:
            self.b = np.zeros(0)

    @property
    def total_strength(self) -> float:
        return float(sum(g for _, g in self.vortices))

    def copy(self) -> "PhaseState":
        return PhaseState(
            vortices=list(self.vortices), a=self.a.copy(), b=self.b.copy(), t=self.t
        )


@dataclass(frozen=True)
class CirculationState:
    A: np.ndarray
    B: np.ndarray


@dataclass
class Trajectory:
    times: List[float] = field(default_factory=list)
    states: List[PhaseState] = field(default_factory=list)
    hamiltonians: List[float] = field(default_factory=list)
    diagnostics: Dict = field(default_factory=dict)


def check_separation(s: Surface, st: PhaseState) -> None:
    n = len(st.vortices)
    for i in range(n):
        for j in range(i + 1, n):
            if s.distance(st.vortices[i][0], st.vortices[j][0]) < MIN_SEPARATION:
                raise CollisionError(
                    f"vortices {i} and {j} closer than {MIN_SEPARATION}"
                )


def circulation_state(m: GreenModel, b: HarmonicBasis, st: PhaseState) -> CirculationState:
    pa, pb = conjugate_green_periods(m, b, st.vortices)
    return CirculationState(A=st.a + pa, B=st.b + pb)


def hamiltonian(
    m: GreenModel, b: HarmonicBasis, pm: Optional[PeriodMatrix], st: PhaseState
) -> float:
    check_separation(m.surface, st)
    total = 0.0
    for k, (pk, gk) in enumerate(st.vortices):
        total += gk * gk * m.robin_function(pk)
        for j, (pj, gj) in enumerate(st.vortices):
            if j != k:
                total += 0.5 * gk * gj * m.green(pk, pj)
    if b.genus > 0:
        cs = circulation_state(m, b, st)
        ab = np.concatenate([cs.A, cs.B])
        total += 0.5 * float(ab @ pm.full() @ ab)
    return total


def vortex_velocities(
    m: GreenModel, b: HarmonicBasis, pm: Optional[PeriodMatrix], st: PhaseState
) -> List[complex]:
    check_separation(m.surface, st)
    s = m.surface
    cs = circulation_state(m, b, st) if b.genus > 0 else None
    out = []
    for k, (pk, gk) in enumerate(st.vortices):
        lam2 = s.metric_density(pk) ** 2
        rc = m.regular_coeffs(pk)
        total = gk / (2j * np.pi) * (np.conj(rc.h1) + np.conj(s.log_density_dz(pk)))
        for j, (pj, gj) in enumerate(st.vortices):
            if j != k and gj != 0.0:
                total += -2j * gj * np.conj(m.green_gradient(pk, pj))
        if b.genus > 0:
            for j in range(b.genus):
                total += 2.0 * (
                    cs.B[j] * b.dU_dwbar("alpha", j, pk)
                    - cs.A[j] * b.dU_dwbar("beta", j, pk)
                )
        out.append(total / lam2)
    return out


def circulation_rates(
    pm: PeriodMatrix, cs: CirculationState, V: float, total_strength: float
) -> Tuple[np.ndarray, np.ndarray]:
    adot = (total_strength / V) * (-pm.R.T @ cs.A - pm.Q @ cs.B)
    bdot = (total_strength / V) * (pm.P @ cs.A + pm.R @ cs.B)
    return adot, bdot


def flow_field(
    m: GreenModel,
    b: HarmonicBasis,
    st: PhaseState,
    cs: Optional[CirculationState],
    z: ChartPoint,
) -> np.ndarray:
    """The flow one-form nu = eta - *dG^omega at z as (coeff dx, coeff dy)."""
    nx, ny = 0.0, 0.0
    if b.genus > 0:
        if cs is None:
            cs = circulation_state(m, b, st)
        for j in range(b.genus):
            pa, qa = b.one_form("alpha", j, z)
            pb_, qb = b.one_form("beta", j, z)
            nx += cs.B[j] * pa - cs.A[j] * pb_
            ny += cs.B[j] * qa - cs.A[j] * qb
    for pk, gk in st.vortices:
        if gk == 0.0:
            continue
        f = m.green_gradient(z, pk)
        nx -= gk * 2.0 * np.imag(f)
        ny -= gk * 2.0 * np.real(f)
    return np.array([nx, ny])


def _pack(st: PhaseState) -> np.ndarray:
    parts = []
    for pk, _ in st.vortices:
        parts.extend([np.real(pk.z), np.imag(pk.z)])
    return np.concatenate([np.array(parts), st.a, st.b])


def _unpack(y: np.ndarray, template: PhaseState, charts: Sequence[str], t: float) -> PhaseState:
    n = len(template.vortices)
    g = template.a.size
    vort = []
    for k in range(n):
        z = complex(y[2 * k], y[2 * k + 1])
        vort.append((ChartPoint(charts[k], z), template.vortices[k][1]))
    a = y[2 * n : 2 * n + g].copy()
    b = y[2 * n + g :].copy()
    return PhaseState(vortices=vort, a=a, b=b, t=t)


class VortexSystem:
    """Bundles surface, Green model, harmonic basis, and period matrix.

    Homology cycles are placed clear of the initial vortex positions.
    During integration the cycle representatives are moved within their
    homology class whenever a vortex drifts too close; the circulation
    offsets (a, b) are re-baselined by the period difference so A and B,
    and hence the dynamics, are unaffected.
    """

    def __init__(
        self,
        surface: Surface,
        initial_vortices: Optional[Sequence[ChartPoint]] = None,
        model: Optional[GreenModel] = None,
    ):
        self.surface = surface
        self.model = model if model is not None else green_model(surface)
        self.basis = harmonic_basis(surface, initial_vortices)
        self.pm = period_matrix(self.basis) if surface.genus > 0 else None

    def hamiltonian(self, st: PhaseState) -> float:
        return hamiltonian(self.model, self.basis, self.pm, st)

    def velocities(self, st: PhaseState) -> List[complex]:
        return vortex_velocities(self.model, self.basis, self.pm, st)

    def circulation_state(self, st: PhaseState) -> CirculationState:
        return circulation_state(self.model, self.basis, st)

    def rates(self, st: PhaseState) -> Tuple[np.ndarray, np.ndarray]:
        if self.surface.genus == 0:
            return np.zeros(0), np.zeros(0)
        cs = self.circulation_state(st)
        return circulation_rates(self.pm, cs, self.surface.volume, st.total_strength)

    def flow_field(self, st: PhaseState, z: ChartPoint) -> np.ndarray:
        return flow_field(self.model, self.basis, st, None, z)

    def _rhs(
        self, y: np.ndarray, template: PhaseState, charts: Sequence[str], basis: HarmonicBasis
    ) -> np.ndarray:
        st = _unpack(y, template, charts, template.t)
        vel = vortex_velocities(self.model, basis, self.pm, st)
        parts = []
        for v in vel:
            parts.extend([np.real(v), np.imag(v)])
        if self.surface.genus > 0:
            cs = circulation_state(self.model, basis, st)
            adot, bdot = circulation_rates(
                self.pm, cs, self.surface.volume, st.total_strength
            )
        else:
            adot, bdot = np.zeros(0), np.zeros(0)
        return np.concatenate([np.array(parts), adot, bdot])

    def _min_cycle_distance(self, basis: HarmonicBasis, st: PhaseState) -> float:
        """Smallest chart distance from an active vortex to a cycle line."""
        s = self.surface
        t2 = float(np.imag(s.tau))
        best = np.inf
        for p, g in st.vortices:
            if g == 0.0:
                continue
            sv, uv = s.lattice_coords(s.canonical(p).z)
            for cyc in basis.alpha_cycles:
                du = abs(uv - s.lattice_coords(cyc.base)[1]) % 1.0
                best = min(best, min(du, 1.0 - du) * t2)
            for cyc in basis.beta_cycles:
                ds = abs(sv - s.lattice_coords(cyc.base)[0]) % 1.0
                best = min(best, min(ds, 1.0 - ds) * t2 / abs(s.tau))
        return best

    def _shift_cycles(
        self, basis: HarmonicBasis, st: PhaseState, events: List[Tuple]
    ) -> HarmonicBasis:
        """Move cycle representatives away from the vortices.

        A = a + oint_alpha *dG^omega depends only on the homology class, so
        re-baselining a (and b) by the period difference between the old
        and new representatives leaves the dynamics untouched.  The system
        basis is updated so later calls interpret (a, b) consistently.
        """
        new_basis = harmonic_basis(self.surface, [p for p, _ in st.vortices])
        pa_old, pb_old = conjugate_green_periods(self.model, basis, st.vortices)
        pa_new, pb_new = conjugate_green_periods(self.model, new_basis, st.vortices)
        st.a += pa_old - pa_new
        st.b += pb_old - pb_new
        events.append(
            (st.t, "cycle-shift", float(np.max(np.abs(pa_old - pa_new))), float(np.max(np.abs(pb_old - pb_new))))
        )
        self.basis = new_basis
        return new_basis

    def _rebaseline(self, st: PhaseState, basis: HarmonicBasis, prev_periods, events) -> Tuple[PhaseState, Tuple]:
        """Absorb cycle-crossing jumps of oint *dG^omega into (a, b).

        A and B are continuous in time, while the conjugate periods jump by
        combinations of vortex strengths when a vortex crosses a cycle; the
        matching jump is subtracted from a or b and logged.
        """
        pa, pb = conjugate_green_periods(self.model, basis, st.vortices)
        if prev_periods is None:
            return st, (pa, pb)
        strengths = [g for _, g in st.vortices if g != 0.0]
        candidates = {0.0}
        for g in strengths:
            candidates |= {c + s * g for c in list(candidates) for s in (-1.0, 1.0)}
        candidates = sorted(candidates)
        for vec, prev, circ, name in ((pa, prev_periods[0], st.a, "a"), (pb, prev_periods[1], st.b, "b")):
            for j in range(vec.size):
                delta = vec[j] - prev[j]
                best = min(candidates, key=lambda c: abs(delta - c))
                if best != 0.0:
                    circ[j] -= best
                    events.append((st.t, name, j, best))
        return st, (pa, pb)

    def integrate(
        self,
        st0: PhaseState,
        dt: float,
        T: float,
        scheme: str = "rk4",
        stride: int = 1,
    ) -> Trajectory:
        """Advance positions and circulations jointly; T < 0 runs backward.

        Samples every `stride` steps (plus the final state); halts with
        CollisionError when vortices fall below the minimum separation.
        The (a, b) of a sampled state refer to the cycle representatives
        current at its sample time; the final state matches `self.basis`.
        """
        if dt <= 0:
            raise StepFailureError("dt must be positive")
        if scheme not in ("rk4", "midpoint"):
            raise StepFailureError(f"unknown scheme {scheme!r}")
        direction = 1.0 if T >= 0 else -1.0
        n_steps = int(round(abs(T) / dt))
        st = st0.copy()
        st.vortices = [(self.surface.canonical(p), g) for p, g in st.vortices]
        check_separation(self.surface, st)
        events: List[Tuple] = []
        basis = self.basis
        prev_periods = None
        if self.surface.genus > 0:
            if self._min_cycle_distance(basis, st) < CYCLE_SHIFT_DISTANCE:
                basis = self._shift_cycles(basis, st, events)
            st, prev_periods = self._rebaseline(st, basis, None, events)
        traj = Trajectory()
        traj.times.append(st.t)
        traj.states.append(st.copy())
        traj.hamiltonians.append(hamiltonian(self.model, basis, self.pm, st))
        for i in range(n_steps):
            h = direction * dt
            charts = [p.chart for p, _ in st.vortices]
            y0 = _pack(st)
            if scheme == "rk4":
                k1 = self._rhs(y0, st, charts, basis)
                k2 = self._rhs(y0 + 0.5 * h * k1, st, charts, basis)
                k3 = self._rhs(y0 + 0.5 * h * k2, st, charts, basis)
                k4 = self._rhs(y0 + h * k3, st, charts, basis)
                y1 = y0 + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            else:
                ymid = y0.copy()
                for _ in range(25):
                    ynew = y0 + 0.5 * h * self._rhs(ymid, st, charts, basis)
                    if np.max(np.abs(ynew - ymid)) < 1e-14:
                        ymid = ynew
                        break
                    ymid = ynew
                y1 = 2.0 * ymid - y0
            st = _unpack(y1, st, charts, st.t + h)
            st.vortices = [(self.surface.canonical(p), g) for p, g in st.vortices]
            check_separation(self.surface, st)
            if self.surface.genus > 0:
                if self._min_cycle_distance(basis, st) < CYCLE_SHIFT_DISTANCE:
                    basis = self._shift_cycles(basis, st, events)
                    prev_periods = None
                st, prev_periods = self._rebaseline(st, basis, prev_periods, events)
            if (i + 1) % stride == 0 or i == n_steps - 1:
                traj.times.append(st.t)
                traj.states.append(st.copy())
                traj.hamiltonians.append(hamiltonian(self.model, basis, self.pm, st))
        hvals = np.array(traj.hamiltonians)
        href = max(abs(hvals[0]), 1e-30)
        traj.diagnostics = {
            "rebaseline_events": events,
            "hamiltonian_drift_rel": float(np.max(np.abs(hvals - hvals[0])) / href),
        }
        return traj
