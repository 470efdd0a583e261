"""Green functions of the Laplace-Beltrami operator on built-in surfaces.

The Green function G(z,w) has a -log|z-w|/(2pi) pole, a uniform
counter-term making the Laplacian integrate to zero, and mean-zero
normalization.  The regular part H = 2 pi G + log|z-w| expands as

    H(z,w) = h0 + Re(h1 (z-w)) + Re(h2 (z-w)^2) + h11 |z-w|^2 + O(|z-w|^3)

and the four coefficients drive both the vortex velocity and the energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .errors import ChartError, CoincidentPointsError
from .surface import ChartPoint, FlatTorus, Sphere, Surface
from .theta import theta1, theta1_dz, theta1_prime0, theta1_triple0

COINCIDENCE_THRESHOLD = 1e-12


@dataclass(frozen=True)
class RegularExpansion:
    """Taylor data of the regular part at a base point w."""

    h0: float
    h1: complex
    h2: complex
    h11: float
    w: ChartPoint


class GreenModel:
    """Green-function evaluator bound to one surface."""

    surface: Surface

    def green(self, z: ChartPoint, w: ChartPoint) -> float:
        raise NotImplementedError

    def green_gradient(self, z: ChartPoint, w: ChartPoint) -> complex:
        """dG/dz at z, expressed in z's own chart."""
        raise NotImplementedError

    def regular_coeffs(self, w: ChartPoint) -> RegularExpansion:
        raise NotImplementedError

    def robin_function(self, w: ChartPoint) -> float:
        h0 = self.regular_coeffs(w).h0
        lam = self.surface.metric_density(w)
        return (h0 + np.log(lam)) / (2.0 * np.pi)

    def regular_part(self, z: ChartPoint, w: ChartPoint) -> float:
        """H(z,w) = 2 pi G + log|z-w| in w's chart."""
        zc = self.surface.to_chart(z, w.chart)
        return 2.0 * np.pi * self.green(zc, w) + np.log(abs(zc.z - w.z))


class SphereGreen(GreenModel):
    """Closed-form Green data for the unit sphere."""

    def __init__(self, surface: Sphere):
        self.surface = surface

    def _common_chart(self, z: ChartPoint, w: ChartPoint):
        """Coordinates of both points in z's chart (or w's as fallback)."""
        try:
            wc = self.surface.to_chart(w, z.chart)
            return z.chart, z.z, wc.z
        except ChartError:
            zc = self.surface.to_chart(z, w.chart)
            return w.chart, zc.z, w.z

    def green(self, z: ChartPoint, w: ChartPoint) -> float:
        _, a, b = self._common_chart(z, w)
        chord2 = abs(a - b) ** 2 / ((1.0 + abs(a) ** 2) * (1.0 + abs(b) ** 2))
        if chord2 < COINCIDENCE_THRESHOLD**2:
            raise CoincidentPointsError("green evaluated at coincident points")
        return -(np.log(chord2) + 1.0) / (4.0 * np.pi)

    def green_gradient(self, z: ChartPoint, w: ChartPoint) -> complex:
        chart, a, b = self._common_chart(z, w)
        if abs(a - b) < COINCIDENCE_THRESHOLD:
            raise CoincidentPointsError("gradient at coincident points")
        grad = -(1.0 / (a - b) - np.conj(a) / (1.0 + abs(a) ** 2)) / (4.0 * np.pi)
        if chart != z.chart:
            # covector: dG/dz = (dG/dz~) (dz~/dz)
            grad *= self.surface.transition_derivative(z, chart)
        return grad

    def regular_coeffs(self, w: ChartPoint) -> RegularExpansion:
        a2 = abs(w.z) ** 2
        wb = np.conj(w.z)
        return RegularExpansion(
            h0=float(np.log(1.0 + a2) - 0.5),
            h1=wb / (1.0 + a2),
            h2=-(wb * wb) / (2.0 * (1.0 + a2) ** 2),
            h11=0.5 / (1.0 + a2) ** 2,
            w=w,
        )


class TorusGreen(GreenModel):
    """Theta-function Green data for a flat torus C/(Z + tau Z).

    G(z,w) = -(1/2pi)(log|theta1(z-w)| - pi Im(z-w)^2 / Im tau) + C with C
    the mean-zero normalization constant, computed once by quadrature at
    construction.
    """

    def __init__(self, surface: FlatTorus):
        self.surface = surface
        self.tau = surface.tau
        self.normalization = self._mean_zero_constant()
        t1p = theta1_prime0(self.tau)
        t1ppp = theta1_triple0(self.tau)
        t2 = float(np.imag(self.tau))
        self._h0 = float(-np.log(abs(t1p)) + 2.0 * np.pi * self.normalization)
        self._h2 = complex(-t1ppp / (6.0 * t1p) - np.pi / (2.0 * t2))
        self._h11 = float(np.pi / (2.0 * t2))

    def _mean_zero_constant(self) -> float:
        """C = mean of (log|theta1| - pi y^2/Im tau)/(2 pi) over the cell.

        Gauss-Legendre in the lattice direction u (interior nodes avoid the
        theta zero at u=0), periodic trapezoid in s with node count raised
        near u=0,1 where the integrand loses smoothness in s.
        """
        t2 = float(np.imag(self.tau))
        nodes, weights = roots_legendre(24)
        u = 0.5 * (nodes + 1.0)
        uw = 0.5 * weights
        total = 0.0
        for ui, wi in zip(u, uw):
            margin = min(ui, 1.0 - ui) * t2
            ns = int(max(256, np.ceil(6.0 / max(margin, 1e-3))))
            s = np.arange(ns) / ns
            zeta = s + ui * self.tau
            vals = np.log(np.abs(theta1(zeta, self.tau))) - np.pi * (ui * t2) ** 2 / t2
            total += wi * float(vals.mean())
        return total / (2.0 * np.pi)

    def _reduced(self, z: ChartPoint, w: ChartPoint) -> complex:
        zc = self.surface.to_chart(z, w.chart)
        zeta = self.surface.reduce(zc.z - w.z)
        if abs(zeta) < COINCIDENCE_THRESHOLD:
            raise CoincidentPointsError("green evaluated at coincident points")
        return zeta

    def green_raw(self, zeta) -> np.ndarray:
        """Vectorized G as a function of the reduced difference z - w."""
        zeta = np.asarray(zeta, dtype=complex)
        t2 = float(np.imag(self.tau))
        y = np.imag(zeta)
        vals = np.log(np.abs(theta1(zeta, self.tau))) - np.pi * y * y / t2
        return -vals / (2.0 * np.pi) + self.normalization

    def gradient_raw(self, zeta) -> np.ndarray:
        """Vectorized dG/dz as a function of the reduced difference."""
        zeta = np.asarray(zeta, dtype=complex)
        t2 = float(np.imag(self.tau))
        logderiv = theta1_dz(zeta, self.tau) / theta1(zeta, self.tau)
        return -logderiv / (4.0 * np.pi) - 1j * np.imag(zeta) / (2.0 * t2)

    def green(self, z: ChartPoint, w: ChartPoint) -> float:
        return float(self.green_raw(self._reduced(z, w)))

    def green_gradient(self, z: ChartPoint, w: ChartPoint) -> complex:
        return complex(self.gradient_raw(self._reduced(z, w)))

    def regular_coeffs(self, w: ChartPoint) -> RegularExpansion:
        self.surface._check_chart(w)
        return RegularExpansion(h0=self._h0, h1=0j, h2=self._h2, h11=self._h11, w=w)


def green_model(surface: Surface) -> GreenModel:
    if isinstance(surface, Sphere):
        return SphereGreen(surface)
    if isinstance(surface, FlatTorus):
        return TorusGreen(surface)
    raise ChartError(f"no Green model registered for {type(surface).__name__}")


def green_mean(m: GreenModel, w: ChartPoint) -> float:
    """Surface mean of G(., w) by adaptive quadrature; should vanish.

    Sphere: rotational invariance reduces the mean to a 1D integral over
    the geodesic distance, with the log endpoint singularity left to the
    adaptive rule.  Torus: outer adaptive integral over the lattice
    coordinate u with a periodic trapezoid in s, splitting at the
    singular line u = u_w.
    """
    from scipy.integrate import quad

    s = m.surface
    if isinstance(s, Sphere):
        wc = s.canonical(w)
        # Moebius rotation taking 0 to w: distance-theta points are images
        # of the circle |zeta| = tan(theta/2)
        def ring_mean(theta: float) -> float:
            if theta >= np.pi - 1e-9:
                zeta = 1e9
                z = (zeta + wc.z) / (1.0 - np.conj(wc.z) * zeta)
                return m.green(s.canonical(ChartPoint(wc.chart, z)), wc)
            rho = np.tan(theta / 2.0)
            n = 32
            total = 0.0
            for k in range(n):
                zeta = rho * np.exp(2j * np.pi * k / n)
                z = (zeta + wc.z) / (1.0 - np.conj(wc.z) * zeta)
                total += m.green(s.canonical(ChartPoint(wc.chart, z)), wc)
            return total / n

        val, _ = quad(lambda th: ring_mean(th) * np.sin(th), 0.0, np.pi, limit=200)
        return 0.5 * val
    if isinstance(s, FlatTorus):
        t2 = float(np.imag(s.tau))
        wc = s.canonical(w)
        _, uw = s.lattice_coords(wc.z)

        def line_mean(u: float) -> float:
            du = abs(u - uw) % 1.0
            margin = min(du, 1.0 - du) * t2
            ns = int(min(16384, max(512, np.ceil(8.0 / max(margin, 1e-3)))))
            grid = np.arange(ns) / ns
            zeta = s.reduce(grid + u * s.tau - wc.z)
            return float(np.mean(m.green_raw(zeta)))

        val, _ = quad(line_mean, 0.0, 1.0, points=[uw], limit=200)
        return val
    raise ChartError(f"no mean quadrature for {type(s).__name__}")


def numerical_regular_coeffs(
    m: GreenModel, w: ChartPoint, rho: float = 1e-2, n: int = 64
) -> RegularExpansion:
    """Extract (h0, h1, h2, h11) from circle samples of the regular part.

    Fourier modes 0, 1, 2 of H on circles of radii rho, rho/2, rho/4 around
    w; Richardson combinations remove the next-order contamination.  Used
    when no closed form is registered and as a cross-check when one is.
    """
    radii = [rho, rho / 2, rho / 4]
    modes = []
    for r in radii:
        theta_s = 2.0 * np.pi * np.arange(n) / n
        ring = w.z + r * np.exp(1j * theta_s)
        hvals = np.array(
            [m.regular_part(ChartPoint(w.chart, zz), w) for zz in ring]
        )
        phase = np.exp(-1j * np.outer([0, 1, 2], theta_s))
        modes.append(phase @ hvals / n)
    c0 = np.array([mo[0].real for mo in modes])
    # c0(r) = h0 + h11 r^2 + (4th order) r^4: solve the 3x3 system
    r2 = np.array([r * r for r in radii])
    vander = np.vander(r2, 3, increasing=True)
    h0, h11, _ = np.linalg.solve(vander, c0)
    # c1(r)/r = h1/2 + O(r^2), c2(r)/r^2 = h2/2 + O(r^2): Richardson
    h1_est = [2.0 * mo[1] / r for mo, r in zip(modes, radii)]
    h2_est = [2.0 * mo[2] / (r * r) for mo, r in zip(modes, radii)]
    h1 = (4.0 * h1_est[1] - h1_est[0]) / 3.0
    h2 = (4.0 * h2_est[1] - h2_est[0]) / 3.0
    return RegularExpansion(h0=float(h0), h1=complex(h1), h2=complex(h2), h11=float(h11), w=w)
