"""Harmonic one-form basis, period matrices, and Green-differential periods.

For a genus-g surface the 2g harmonic one-forms dU_alpha_j, dU_beta_j are
normalized against a canonical homology basis:

    oint_{alpha_k} (-dU_{beta_j}) = delta_kj,   oint_{beta_k} dU_{alpha_j} = delta_kj,

all cross-periods zero.  The period matrix blocks are the Hodge-star
pairings P_kj = -oint_{beta_k} *dU_{beta_j}, R_kj = oint_{beta_k} *dU_{alpha_j},
Q_kj = -oint_{alpha_k} *dU_{alpha_j}; the assembled [[P, R], [R^T, Q]] is
symmetric positive definite.

Only the flat torus carries built-in cycles; genus 0 yields empty bases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ChartError, VortexOnCycleError
from .greens import GreenModel, TorusGreen
from .surface import ChartPoint, FlatTorus, Surface

CYCLE_CLEARANCE = 1e-3


@dataclass(frozen=True)
class Cycle:
    """Closed curve z(t) = base + t * period, t in [0, 1)."""

    name: str
    index: int
    base: complex
    period: complex

    def points(self, n: int) -> np.ndarray:
        t = np.arange(n) / n
        return self.base + t * self.period


@dataclass(frozen=True)
class HarmonicBasis:
    """Constant-coefficient harmonic one-forms on a torus (or empty, g=0).

    Forms are stored as real covector pairs (p, q) meaning p dx + q dy in
    the chart; the torus basis is constant so the pairs carry no point
    dependence.
    """

    surface: Surface
    genus: int
    alpha_cycles: List[Cycle]
    beta_cycles: List[Cycle]
    alpha_forms: List[Tuple[float, float]]
    beta_forms: List[Tuple[float, float]]

    def _forms(self, kind: str) -> List[Tuple[float, float]]:
        if kind == "alpha":
            return self.alpha_forms
        if kind == "beta":
            return self.beta_forms
        raise ChartError(f"unknown one-form kind {kind!r}")

    def cycles(self, kind: str) -> List[Cycle]:
        return self.alpha_cycles if kind == "alpha" else self.beta_cycles

    def one_form(self, kind: str, j: int, p: ChartPoint) -> Tuple[float, float]:
        self.surface._check_chart(p)
        return self._forms(kind)[j]

    def star_one_form(self, kind: str, j: int, p: ChartPoint) -> Tuple[float, float]:
        """Hodge star: *(p dx + q dy) = -q dx + p dy (flat chart, lambda=1)."""
        pc, qc = self.one_form(kind, j, p)
        return (-qc, pc)

    def dU_dwbar(self, kind: str, j: int, p: ChartPoint) -> complex:
        """dU/d(conj w) for the harmonic function behind the form."""
        pc, qc = self.one_form(kind, j, p)
        return 0.5 * (pc + 1j * qc)


def _largest_gap_midpoint(coords: Sequence[float]) -> float:
    """Midpoint of the largest circular gap in fractional coordinates."""
    if not coords:
        return 0.25
    fr = np.sort(np.mod(coords, 1.0))
    gaps = np.diff(np.concatenate([fr, [fr[0] + 1.0]]))
    i = int(np.argmax(gaps))
    return float(np.mod(fr[i] + 0.5 * gaps[i], 1.0))


def harmonic_basis(
    s: Surface,
    vortices: Optional[Sequence[ChartPoint]] = None,
    clearance: float = CYCLE_CLEARANCE,
) -> HarmonicBasis:
    """Build the harmonic basis; cycle positions keep clear of vortices.

    Torus cycles: alpha runs along the lattice direction 1 at constant
    lattice coordinate u0, beta along tau at constant s0; u0 and s0 sit in
    the largest gaps of the vortex coordinates.
    """
    if s.genus == 0:
        return HarmonicBasis(s, 0, [], [], [], [])
    if not isinstance(s, FlatTorus):
        raise ChartError(f"no homology cycles registered for {type(s).__name__}")
    tau = s.tau
    t2 = float(np.imag(tau))
    coords = []
    for p in vortices or []:
        coords.append(s.lattice_coords(s.canonical(p).z))
    u0 = _largest_gap_midpoint([c[1] for c in coords])
    s0 = _largest_gap_midpoint([c[0] for c in coords])
    for sv, uv in coords:
        du = abs(uv - u0) % 1.0
        ds = abs(sv - s0) % 1.0
        if min(du, 1.0 - du) * t2 < clearance or min(ds, 1.0 - ds) * t2 / abs(tau) < clearance:
            raise VortexOnCycleError("cannot place cycles clear of the vortices")
    alpha = [Cycle("alpha", 0, u0 * tau, 1.0 + 0j)]
    beta = [Cycle("beta", 0, s0 + 0j, tau)]
    # constant coefficients solved from the normalization periods
    alpha_forms = [(0.0, 1.0 / t2)]
    beta_forms = [(-1.0, float(np.real(tau)) / t2)]
    return HarmonicBasis(s, 1, alpha, beta, alpha_forms, beta_forms)


@dataclass(frozen=True)
class PeriodMatrix:
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    def full(self) -> np.ndarray:
        top = np.hstack([self.P, self.R])
        bottom = np.hstack([self.R.T, self.Q])
        return np.vstack([top, bottom])


def contour_integral(cycle: Cycle, covector, n: int = 512) -> float:
    """Trapezoid quadrature of a real one-form (p dx + q dy) over a cycle.

    covector: callable z -> (p, q); periodic integrand, so the plain
    trapezoid rule is spectrally accurate.
    """
    zs = cycle.points(n)
    dx, dy = np.real(cycle.period), np.imag(cycle.period)
    total = 0.0
    for z in zs:
        p, q = covector(z)
        total += p * dx + q * dy
    return total / n


def period_matrix(b: HarmonicBasis, n: int = 512) -> PeriodMatrix:
    g = b.genus
    P = np.zeros((g, g))
    Q = np.zeros((g, g))
    R = np.zeros((g, g))
    chart = b.surface.charts[0]
    for k in range(g):
        for j in range(g):
            star_a = lambda z, j=j: b.star_one_form("alpha", j, ChartPoint(chart, z))
            star_b = lambda z, j=j: b.star_one_form("beta", j, ChartPoint(chart, z))
            P[k, j] = -contour_integral(b.beta_cycles[k], star_b, n)
            R[k, j] = contour_integral(b.beta_cycles[k], star_a, n)
            Q[k, j] = -contour_integral(b.alpha_cycles[k], star_a, n)
    return PeriodMatrix(P=P, Q=Q, R=R)


def star_basis_transform(
    b: HarmonicBasis, pm: PeriodMatrix, p: ChartPoint
) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float]]]:
    """(*dU_alpha, *dU_beta) at p via the period-matrix block relation

    (*dU_alpha; *dU_beta) = (R^T  Q; -P  -R)(dU_alpha; dU_beta).
    """
    g = b.genus
    dua = np.array([b.one_form("alpha", j, p) for j in range(g)]).reshape(g, 2)
    dub = np.array([b.one_form("beta", j, p) for j in range(g)]).reshape(g, 2)
    star_a = pm.R.T @ dua + pm.Q @ dub
    star_b = -pm.P @ dua - pm.R @ dub
    return ([tuple(row) for row in star_a], [tuple(row) for row in star_b])


def _cycle_quadrature_nodes(
    s: FlatTorus, cycle: Cycle, vortices: Sequence[ChartPoint]
) -> int:
    """Deterministic node count from the vortex clearance.

    Quadrature error decays like exp(-2 pi n d) with d the nearest-vortex
    distance as a fraction of the cycle; n is the smallest power of two
    with n d >= 8 so the error sits below machine precision and stays
    smooth under small vortex displacements.
    """
    t2 = float(np.imag(s.tau))
    strip = 0.5
    for p in vortices:
        sv, uv = s.lattice_coords(s.canonical(p).z)
        if cycle.name == "alpha":
            du = abs(uv - s.lattice_coords(cycle.base)[1]) % 1.0
            d_chart = min(du, 1.0 - du) * t2
        else:
            ds = abs(sv - s.lattice_coords(cycle.base)[0]) % 1.0
            d_chart = min(ds, 1.0 - ds) * t2 / abs(s.tau)
        if d_chart < CYCLE_CLEARANCE:
            raise VortexOnCycleError(
                f"vortex within clearance of cycle {cycle.name}_{cycle.index}"
            )
        strip = min(strip, d_chart / abs(cycle.period))
    n = 64
    while n * strip < 8.0 and n < 65536:
        n *= 2
    return n


def conjugate_green_periods(
    m: GreenModel,
    b: HarmonicBasis,
    vortices: Sequence[Tuple[ChartPoint, float]],
) -> Tuple[np.ndarray, np.ndarray]:
    """(oint_alpha *dG^omega, oint_beta *dG^omega) by contour quadrature.

    *dG integrates as Re(-2i oint dG/dz dz); the integrand is periodic and
    vectorized over the cycle nodes.
    """
    if b.genus == 0:
        return np.zeros(0), np.zeros(0)
    assert isinstance(m, TorusGreen)
    s = m.surface
    active = [(p, g) for p, g in vortices if g != 0.0]
    out = []
    for cycles in (b.alpha_cycles, b.beta_cycles):
        vals = np.zeros(len(cycles))
        for i, cyc in enumerate(cycles):
            n = _cycle_quadrature_nodes(s, cyc, [p for p, _ in active])
            zs = cyc.points(n)
            total = 0.0
            for p, gamma in active:
                grads = m.gradient_raw(s.reduce(zs - s.canonical(p).z))
                total += gamma * float(
                    np.real(-2j * np.sum(grads) * cyc.period / n)
                )
            vals[i] = total
        out.append(vals)
    return out[0], out[1]


def integrate_one_form(
    b: HarmonicBasis, kind: str, j: int, start: ChartPoint, end: ChartPoint
) -> float:
    """Integral of a (constant-coefficient) basis form along the straight
    chart segment from start to end; no lattice reduction is applied, so
    the caller controls which homotopy class the path represents."""
    p, q = b.one_form(kind, j, start)
    delta = end.z - start.z
    return p * float(np.real(delta)) + q * float(np.imag(delta))
