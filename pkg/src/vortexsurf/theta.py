"""First Jacobi theta function by its q-series, vectorized over z.

theta1(z | tau) = 2 sum_{n>=0} (-1)^n q^{(n+1/2)^2} sin((2n+1) pi z),
q = exp(i pi tau).  Arguments are expected lattice-reduced (|Im z| of order
Im tau); the truncation picks enough terms for ~1e-16 tails in that range.
"""

from __future__ import annotations

import numpy as np


def _num_terms(tau: complex) -> int:
    t2 = float(np.imag(tau))
    n = 6
    while np.pi * t2 * (n - 0.5) * (n + 0.5) < 45.0 and n < 64:
        n += 1
    return n


def theta1(z, tau: complex):
    """theta1(z | tau); z scalar or ndarray of complex."""
    z = np.asarray(z, dtype=complex)
    q = np.exp(1j * np.pi * tau)
    n = np.arange(_num_terms(tau))
    coeff = (-1.0) ** n * q ** ((n + 0.5) ** 2)
    phases = np.sin((2 * n + 1)[:, None] * np.pi * z.ravel()[None, :])
    vals = 2.0 * (coeff[:, None] * phases).sum(axis=0)
    return vals.reshape(z.shape) if z.shape else vals[0]


def theta1_dz(z, tau: complex):
    """d/dz theta1(z | tau)."""
    z = np.asarray(z, dtype=complex)
    q = np.exp(1j * np.pi * tau)
    n = np.arange(_num_terms(tau))
    coeff = (-1.0) ** n * (2 * n + 1) * q ** ((n + 0.5) ** 2)
    phases = np.cos((2 * n + 1)[:, None] * np.pi * z.ravel()[None, :])
    vals = 2.0 * np.pi * (coeff[:, None] * phases).sum(axis=0)
    return vals.reshape(z.shape) if z.shape else vals[0]


def theta1_prime0(tau: complex) -> complex:
    """theta1'(0 | tau)."""
    q = np.exp(1j * np.pi * tau)
    n = np.arange(_num_terms(tau))
    return complex(2.0 * np.pi * np.sum((-1.0) ** n * (2 * n + 1) * q ** ((n + 0.5) ** 2)))


def theta1_triple0(tau: complex) -> complex:
    """theta1'''(0 | tau)."""
    q = np.exp(1j * np.pi * tau)
    n = np.arange(_num_terms(tau))
    return complex(
        -2.0 * np.pi**3 * np.sum((-1.0) ** n * (2 * n + 1) ** 3 * q ** ((n + 0.5) ** 2))
    )
