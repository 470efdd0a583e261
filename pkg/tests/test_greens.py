"""Green functions: lattice-sum oracle, expansions, and invariances."""

import numpy as np
import pytest
from conftest import ewald_green, wirtinger_fd

from vortexsurf.connections import bracket, laplacian
from vortexsurf.errors import CoincidentPointsError
from vortexsurf.greens import (
    green_mean,
    green_model,
    numerical_regular_coeffs,
)
from vortexsurf.surface import ChartPoint, FlatTorus, Sphere

TAUS = (1j, 2j, 0.3 + 1.1j)


def test_torus_green_matches_ewald_oracle():
    rng = np.random.default_rng(0)
    for tau in TAUS:
        s = FlatTorus(tau)
        m = green_model(s)
        w = ChartPoint("cell", 0.13 + 0.29 * tau)
        for _ in range(8):
            z = ChartPoint("cell", rng.uniform(0, 1) + rng.uniform(0, 1) * tau)
            if s.distance(z, w) < 0.05:
                continue
            ref = ewald_green(s.reduce(z.z - w.z), tau)
            assert abs(m.green(z, w) - ref) < 1e-13


def test_torus_green_periodicity():
    s = FlatTorus(0.3 + 1.1j)
    m = green_model(s)
    w = ChartPoint("cell", 0.4 + 0.2j)
    z = ChartPoint("cell", 0.1 + 0.7j)
    base = m.green(z, w)
    for shift in (1.0, s.tau, 2.0 - s.tau):
        moved = ChartPoint("cell", s.wrap(z.z + shift))
        assert abs(m.green(moved, w) - base) < 1e-13


def test_green_symmetry():
    rng = np.random.default_rng(1)
    for s in (Sphere(), FlatTorus(1j), FlatTorus(0.3 + 1.1j)):
        m = green_model(s)
        for _ in range(10):
            if isinstance(s, FlatTorus):
                z = ChartPoint("cell", rng.uniform(0, 1) + rng.uniform(0, 1) * s.tau)
                w = ChartPoint("cell", rng.uniform(0, 1) + rng.uniform(0, 1) * s.tau)
            else:
                z = ChartPoint("N", complex(rng.normal(), rng.normal()))
                w = ChartPoint("S", complex(rng.normal(), rng.normal()) * 0.5)
            if s.distance(z, w) < 1e-3:
                continue
            assert abs(m.green(z, w) - m.green(w, z)) < 1e-12


def test_green_gradient_matches_fd():
    rng = np.random.default_rng(2)
    for s in (Sphere(), FlatTorus(0.3 + 1.1j)):
        m = green_model(s)
        chart = s.charts[0]
        w = ChartPoint(chart, 0.31 + 0.22j)
        for _ in range(5):
            z = ChartPoint(chart, complex(rng.uniform(-0.8, 0.8) % 1.0, rng.uniform(0.1, 0.9)))
            if s.distance(z, w) < 0.05:
                continue
            fd = wirtinger_fd(lambda zz: m.green(ChartPoint(chart, zz), w), z.z)
            assert abs(m.green_gradient(z, w) - fd) < 1e-9


def test_sphere_gradient_chart_covariance():
    s = Sphere()
    m = green_model(s)
    w = ChartPoint("N", 0.2 + 0.1j)
    z = ChartPoint("N", 1.4 - 0.8j)
    zs = s.to_chart(z, "S")
    grad_n = m.green_gradient(z, w)
    grad_s = m.green_gradient(zs, w)
    # covector transformation dG/dz_N = dG/dz_S * dz_S/dz_N
    assert abs(grad_n - grad_s * s.transition_derivative(z, "S")) < 1e-12


def test_green_mean_zero():
    s = Sphere()
    assert abs(green_mean(green_model(s), ChartPoint("N", 0.3 + 0.4j))) < 1e-8
    for tau in (1j, 0.3 + 1.1j):
        t = FlatTorus(tau)
        assert abs(green_mean(green_model(t), ChartPoint("cell", 0.7 + 0.1j))) < 1e-8


def test_laplacian_identity_off_singularity():
    """Euclidean Laplacian of G equals lambda^2 / V away from the vortex."""
    for s in (Sphere(), FlatTorus(0.3 + 1.1j)):
        m = green_model(s)
        chart = s.charts[0]
        w = ChartPoint(chart, 0.25 + 0.55j)
        for zz in (0.7 - 0.2j, 0.1 + 0.15j):
            z = ChartPoint(chart, zz)
            lam2 = s.metric_density(z) ** 2
            lap = laplacian(lambda u: m.green(ChartPoint(chart, u), w), zz, h=1e-3)
            assert abs(lap - lam2 / s.volume) < 1e-6


def test_coincident_points_rejected():
    for s in (Sphere(), FlatTorus(1j)):
        m = green_model(s)
        p = ChartPoint(s.charts[0], 0.3 + 0.3j)
        with pytest.raises(CoincidentPointsError):
            m.green(p, p)
        with pytest.raises(CoincidentPointsError):
            m.green_gradient(p, p)


def test_sphere_regular_coeffs_against_extractor():
    s = Sphere()
    m = green_model(s)
    for wz in (0j, 0.4 + 0.3j, -0.9 + 0.5j):
        w = ChartPoint("N", wz)
        closed = m.regular_coeffs(w)
        num = numerical_regular_coeffs(m, w)
        assert abs(closed.h0 - num.h0) < 1e-9
        assert abs(closed.h1 - num.h1) < 1e-9
        assert abs(closed.h2 - num.h2) < 1e-7
        assert abs(closed.h11 - num.h11) < 1e-7


def test_torus_regular_coeffs_against_extractor():
    for tau in TAUS:
        s = FlatTorus(tau)
        m = green_model(s)
        w = ChartPoint("cell", 0.37 + 0.21 * tau)
        closed = m.regular_coeffs(w)
        num = numerical_regular_coeffs(m, w)
        assert abs(closed.h0 - num.h0) < 1e-9
        assert abs(closed.h1 - num.h1) < 1e-9
        assert abs(closed.h2 - num.h2) < 1e-7
        assert abs(closed.h11 - num.h11) < 1e-7


def test_robin_function_is_constant():
    """Both built-in surfaces are homogeneous, so the Robin function
    (which is coordinate-free) cannot depend on position."""
    s = Sphere()
    m = green_model(s)
    vals = [m.robin_function(ChartPoint("N", z)) for z in (0j, 0.5 + 0.1j, 1.5 - 0.7j)]
    assert max(vals) - min(vals) < 1e-12
    t = FlatTorus(0.3 + 1.1j)
    mt = green_model(t)
    vals = [mt.robin_function(ChartPoint("cell", z)) for z in (0.1 + 0.2j, 0.8 + 0.9j)]
    assert max(vals) - min(vals) < 1e-15


def test_sphere_robin_value():
    # (h0 + log lam)/(2 pi) at the origin: (log 1 - 1/2 + log 2)/(2 pi)
    m = green_model(Sphere())
    expected = (np.log(2.0) - 0.5) / (2.0 * np.pi)
    assert abs(m.robin_function(ChartPoint("N", 0j)) - expected) < 1e-14


def test_h11_proportional_to_metric():
    for s in (Sphere(), FlatTorus(1j), FlatTorus(0.3 + 1.1j)):
        m = green_model(s)
        w = ChartPoint(s.charts[0], 0.3 + 0.45j)
        lam = s.metric_density(w)
        assert abs(m.regular_coeffs(w).h11 - np.pi * lam * lam / (2.0 * s.volume)) < 1e-10


def test_regular_part_expansion():
    """H(z,w) matches its quadratic Taylor data to cubic remainder."""
    for s in (Sphere(), FlatTorus(0.3 + 1.1j)):
        m = green_model(s)
        w = ChartPoint(s.charts[0], 0.3 + 0.35j)
        c = m.regular_coeffs(w)
        rho = 1e-3
        worst = 0.0
        for ang in np.linspace(0, 2 * np.pi, 12, endpoint=False):
            zeta = rho * np.exp(1j * ang)
            z = ChartPoint(w.chart, w.z + zeta)
            model = (
                c.h0
                + np.real(c.h1 * zeta)
                + np.real(c.h2 * zeta * zeta)
                + c.h11 * abs(zeta) ** 2
            )
            worst = max(worst, abs(m.regular_part(z, w) - model))
        assert worst < 50.0 * rho**3


def test_second_derivative_identities():
    """Mixed derivatives of H at z = w pin h2 and h11:
    d2H/dzdw = h1'/2 - h2 and d2H/dzdwbar = h1'(wbar)/2 - h11."""
    hz, hw = 1e-4, 2.3e-4  # incommensurate steps keep z != w off-diagonal
    for s in (Sphere(), FlatTorus(0.3 + 1.1j)):
        m = green_model(s)
        chart = s.charts[0]
        wz = 0.3 + 0.35j

        def H(z, w):
            return m.regular_part(ChartPoint(chart, z), ChartPoint(chart, w))

        def dz_H(w):
            return wirtinger_fd(lambda z: H(z, w), wz, h=hz)

        mixed_w = wirtinger_fd(dz_H, wz, h=hw)
        mixed_wbar = np.conj(wirtinger_fd(lambda w: np.conj(dz_H(w)), wz, h=hw))
        c = m.regular_coeffs(ChartPoint(chart, wz))
        dh1_dw = wirtinger_fd(
            lambda w: m.regular_coeffs(ChartPoint(chart, w)).h1, wz, h=hw
        )
        dh1_dwbar = np.conj(
            wirtinger_fd(lambda w: np.conj(m.regular_coeffs(ChartPoint(chart, w)).h1), wz, h=hw)
        )
        assert abs(mixed_w - (0.5 * dh1_dw - c.h2)) < 1e-4
        assert abs(mixed_wbar - (0.5 * dh1_dwbar - c.h11)) < 1e-4


def test_coefficient_transformation_laws():
    """Under the sphere chart swap the expansion coefficients transform
    with the bracket defects of the transition map."""
    s = Sphere()
    m = green_model(s)
    phi = s.transition_map("N", "S")
    h = 1e-4
    for wz in (0.8 + 0.9j, 1.2 - 0.6j):
        w = ChartPoint("N", wz)
        wt = s.to_chart(w, "S")
        c = m.regular_coeffs(w)
        ct = m.regular_coeffs(wt)
        d1 = phi.d1(wz)
        assert abs(ct.h0 - (c.h0 + np.real(bracket(0, phi, wz)))) < 1e-12
        assert abs(ct.h1 * d1 - (c.h1 + 0.5 * bracket(1, phi, wz))) < 1e-12
        assert abs(ct.h11 * abs(d1) ** 2 - c.h11) < 1e-12

        def dh1(chart, z):
            return wirtinger_fd(
                lambda u: m.regular_coeffs(ChartPoint(chart, u)).h1, z, h=h
            )

        lhs = (dh1("S", wt.z) - 2.0 * ct.h2) * d1 * d1
        rhs = (dh1("N", wz) - 2.0 * c.h2) + bracket(2, phi, wz) / 6.0
        assert abs(lhs - rhs) < 1e-7
