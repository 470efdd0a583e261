"""Complex-analytic connection calculus.

Bracket operators of orders 0, 1, 2 (log-derivative, pre-Schwarzian and
Schwarzian), affine and projective connections attached to conformal metric
densities, Gaussian curvature, and the transformation rules that glue chart
representatives together.

Conventions.  A 0-connection transforms as ``c~ = c + Re{z~,z}_0``; an affine
(1-)connection as ``r~ dz~ = r dz - {z~,z}_1 dz``; a projective
(2-)connection as ``q~ dz~^2 = q dz^2 - {z~,z}_2 dz^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidMetricError, SingularMapError

SINGULAR_DERIVATIVE = 1e-12

ComplexFunc = Callable[[complex], complex]


def _central_d1(f: ComplexFunc, z: complex, h: float) -> complex:
    return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h)


def _central_d2(f: ComplexFunc, z: complex, h: float) -> complex:
    return (
        -f(z + 2 * h) + 16 * f(z + h) - 30 * f(z) + 16 * f(z - h) - f(z - 2 * h)
    ) / (12 * h * h)


def _central_d3(f: ComplexFunc, z: complex, h: float) -> complex:
    return (
        -f(z + 3 * h)
        + 8 * f(z + 2 * h)
        - 13 * f(z + h)
        + 13 * f(z - h)
        - 8 * f(z - 2 * h)
        + f(z - 3 * h)
    ) / (8 * h * h * h)


def holomorphic_derivative(f: ComplexFunc, z: complex, order: int = 1) -> complex:
    """Finite-difference derivative of a holomorphic function.

    Uses 4th-order central differences along the real direction (legitimate
    for holomorphic f) with one Richardson refinement.  Step sizes grow with
    the derivative order to keep roundoff below truncation.
    """
    scale = max(1.0, abs(z))
    if order == 1:
        h = 1e-5 * scale
        stencil = _central_d1
    elif order == 2:
        h = 1e-4 * scale
        stencil = _central_d2
    elif order == 3:
        h = 2e-3 * scale
        stencil = _central_d3
    else:
        raise ValueError(f"unsupported derivative order {order}")
    coarse = stencil(f, z, h)
    fine = stencil(f, z, h / 2)
    return (16 * fine - coarse) / 15


def wirtinger_dz(f: Callable[[complex], complex], z: complex, h: float = 1e-3) -> complex:
    """d/dz of a smooth (not necessarily holomorphic) scalar field.

    4th-order central differences in x and y; f may return complex values.
    """
    dfdx = _central_d1(f, z, h)
    dfdy = (-f(z + 2j * h) + 8 * f(z + 1j * h) - 8 * f(z - 1j * h) + f(z - 2j * h)) / (
        12 * h
    )
    return 0.5 * (dfdx - 1j * dfdy)


def laplacian(f: Callable[[complex], float], z: complex, h: float = 1e-3) -> float:
    """Flat-chart Laplacian f_xx + f_yy by 4th-order central differences."""
    fxx = _central_d2(f, z, h)
    fyy = (
        -f(z + 2j * h) + 16 * f(z + 1j * h) - 30 * f(z) + 16 * f(z - 1j * h) - f(z - 2j * h)
    ) / (12 * h * h)
    return float(np.real(fxx + fyy))


@dataclass(frozen=True)
class HolomorphicMap:
    """A local holomorphic change of coordinate with derivative evaluators.

    Derivatives fall back to finite differences when not supplied, so any
    callable can be wrapped; maps with closed-form derivatives should pass
    them for full accuracy.
    """

    f: ComplexFunc
    df: Optional[ComplexFunc] = None
    d2f: Optional[ComplexFunc] = None
    d3f: Optional[ComplexFunc] = None

    def __call__(self, z: complex) -> complex:
        return self.f(z)

    def d1(self, z: complex) -> complex:
        if self.df is not None:
            return self.df(z)
        return holomorphic_derivative(self.f, z, 1)

    def d2(self, z: complex) -> complex:
        if self.d2f is not None:
            return self.d2f(z)
        return holomorphic_derivative(self.f, z, 2)

    def d3(self, z: complex) -> complex:
        if self.d3f is not None:
            return self.d3f(z)
        return holomorphic_derivative(self.f, z, 3)


def identity_map() -> HolomorphicMap:
    return HolomorphicMap(
        f=lambda z: z,
        df=lambda z: 1.0 + 0j,
        d2f=lambda z: 0j,
        d3f=lambda z: 0j,
    )


def mobius_map(a: complex, b: complex, c: complex, d: complex) -> HolomorphicMap:
    """(az+b)/(cz+d) with analytic derivatives; requires ad - bc != 0."""
    det = a * d - b * c
    if abs(det) < SINGULAR_DERIVATIVE:
        raise SingularMapError("degenerate coefficient matrix")
    return HolomorphicMap(
        f=lambda z: (a * z + b) / (c * z + d),
        df=lambda z: det / (c * z + d) ** 2,
        d2f=lambda z: -2 * c * det / (c * z + d) ** 3,
        d3f=lambda z: 6 * c * c * det / (c * z + d) ** 4,
    )


def mobius_inverse(a: complex, b: complex, c: complex, d: complex) -> HolomorphicMap:
    return mobius_map(d, -b, -c, a)


def compose(outer: HolomorphicMap, inner: HolomorphicMap) -> HolomorphicMap:
    """outer(inner(z)) with chain-rule derivatives."""

    def df(z):
        return outer.d1(inner(z)) * inner.d1(z)

    def d2f(z):
        u = inner(z)
        return outer.d2(u) * inner.d1(z) ** 2 + outer.d1(u) * inner.d2(z)

    def d3f(z):
        u = inner(z)
        p1, p2, p3 = inner.d1(z), inner.d2(z), inner.d3(z)
        return (
            outer.d3(u) * p1**3
            + 3 * outer.d2(u) * p1 * p2
            + outer.d1(u) * p3
        )

    return HolomorphicMap(f=lambda z: outer(inner(z)), df=df, d2f=d2f, d3f=d3f)


def bracket(k: int, phi: HolomorphicMap, z: complex) -> complex:
    """The bracket {phi(z), z}_k for k = 0, 1, 2.

    k=0: log phi' (principal branch; only the real part is chart-invariant
    in general).  k=1: phi''/phi'.  k=2: the Schwarzian derivative.
    """
    d1 = phi.d1(z)
    if abs(d1) < SINGULAR_DERIVATIVE:
        raise SingularMapError(f"map not conformal at {z}")
    if k == 0:
        return np.log(complex(d1))
    if k == 1:
        return phi.d2(z) / d1
    if k == 2:
        s1 = phi.d2(z) / d1
        return phi.d3(z) / d1 - 1.5 * s1 * s1
    raise ValueError(f"bracket order must be 0, 1 or 2, got {k}")


def affine_from_metric(
    lam: Callable[[complex], float],
    z: complex,
    h: float = 1e-3,
) -> complex:
    """r(z) = 2 d/dz log lam for a positive metric density lam.

    Finite-difference based; surfaces with closed forms provide their own
    analytic connection and only use this as a cross-check.
    """
    if lam(z) <= 0:
        raise InvalidMetricError(f"nonpositive metric density at {z}")
    return 2.0 * wirtinger_dz(lambda u: np.log(lam(u)), z, h)


def gaussian_curvature(
    lam: Callable[[complex], float],
    z: complex,
    h: float = 1e-3,
) -> float:
    """kappa = -4 lam^-2 d_z d_zbar log lam (flat-chart Laplacian / 4)."""
    lz = lam(z)
    if lz <= 0:
        raise InvalidMetricError(f"nonpositive metric density at {z}")
    return -laplacian(lambda u: np.log(lam(u)), z, h) / (lz * lz)


def projective_from_affine(
    r: Callable[[complex], complex],
    z: complex,
    r_dz: Optional[Callable[[complex], complex]] = None,
    h: float = 1e-3,
) -> complex:
    """q(z) = d/dz r(z) - r(z)^2 / 2."""
    dr = r_dz(z) if r_dz is not None else wirtinger_dz(r, z, h)
    rz = r(z)
    return dr - 0.5 * rz * rz


def projective_polarized(
    r: Callable[[complex], complex],
    z: complex,
    w: complex,
    r_dz: Optional[Callable[[complex], complex]] = None,
    h: float = 1e-3,
) -> complex:
    """Two-point form q(z,w) = (d_z r(z) + d_w r(w) - r(z) r(w)) / 2."""
    if r_dz is not None:
        drz, drw = r_dz(z), r_dz(w)
    else:
        drz, drw = wirtinger_dz(r, z, h), wirtinger_dz(r, w, h)
    return 0.5 * (drz + drw - r(z) * r(w))


def transform_connection(
    kind: int,
    value: complex,
    phi: HolomorphicMap,
    w: complex,
) -> complex:
    """Push a connection coefficient at w to the chart z~ = phi(z).

    kind 0: c~ = c + Re{w~,w}_0; kind 1: r~ = (r - {w~,w}_1)/phi';
    kind 2: q~ = (q - {w~,w}_2)/phi'^2.
    """
    d1 = phi.d1(w)
    if abs(d1) < SINGULAR_DERIVATIVE:
        raise SingularMapError(f"map not conformal at {w}")
    if kind == 0:
        return value + np.real(bracket(0, phi, w))
    if kind == 1:
        return (value - bracket(1, phi, w)) / d1
    if kind == 2:
        return (value - bracket(2, phi, w)) / (d1 * d1)
    raise ValueError(f"connection kind must be 0, 1 or 2, got {kind}")
