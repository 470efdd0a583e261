"""Shared numerical oracles for the test suite.

The torus Green oracle is an Ewald-summed lattice representation built
from scipy's exponential integral and a dual-lattice Fourier sum; it
shares no code or special functions with the theta-based implementation.
"""

import numpy as np
from scipy.special import exp1


def ewald_green(zeta: complex, tau: complex, eta: float = None, nmax: int = 8) -> float:
    """Mean-zero periodic Green function of the flat torus C/(Z + tau Z).

    Satisfies Delta G = -delta + 1/V with V = Im tau, computed by Ewald
    splitting: screened real-space lattice sum plus a Gaussian-filtered
    dual-lattice Fourier sum, minus the screening mean.  The k=0 Fourier
    term is dropped, which is exactly the mean-zero normalization.
    """
    t1, t2 = np.real(tau), np.imag(tau)
    V = t2
    if eta is None:
        eta = 2.0 * np.sqrt(np.pi / V)
    total = 0.0
    for m in range(-nmax, nmax + 1):
        for n in range(-nmax, nmax + 1):
            r2 = abs(zeta - (m + n * tau)) ** 2
            total += exp1(eta * eta * r2) / (4.0 * np.pi)
    x, y = np.real(zeta), np.imag(zeta)
    for p in range(-nmax, nmax + 1):
        for q in range(-nmax, nmax + 1):
            if p == 0 and q == 0:
                continue
            kx = 2.0 * np.pi * p
            ky = 2.0 * np.pi * (-p * t1 / t2 + q / t2)
            k2 = kx * kx + ky * ky
            total += np.exp(-k2 / (4.0 * eta * eta)) / (V * k2) * np.cos(kx * x + ky * y)
    return total - 1.0 / (4.0 * eta * eta * V)


def wirtinger_fd(f, z: complex, h: float = 1e-5) -> complex:
    """d/dz of a real or complex function of position, central differences."""
    fx = (f(z + h) - f(z - h)) / (2.0 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2.0 * h)
    return 0.5 * (fx - 1j * fy)
