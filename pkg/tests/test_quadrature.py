import math

import numpy as np
import pytest
from scipy import integrate

from avgsection.bodies import (Ball, CrossPolytope, Cube, Ellipsoid, LinearImage, LpBall,
                               RegularSimplex, Subspace, dilate, unit_ball_volume)
from avgsection.functionals import avg_section
from avgsection.quadrature import (Gaussian, NormPower, One, density_from_spec, mean_width,
                                   m_value, radial_moment, section_volume, volume,
                                   weighted_radial_integral)
from avgsection.sampling import RngStream, grassmann_subspace



def within(est, truth, z=3.0, floor=0.0):
    return abs(est.value - truth) <= max(z * est.stderr, floor)


def test_unit_ball_volume():
    assert unit_ball_volume(0) == 1.0
    assert unit_ball_volume(1) == pytest.approx(2.0, rel=1e-15)
    assert unit_ball_volume(2) == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-15)


def test_radial_moment_ball_constant():
    e = radial_moment(Ball(4, 1.7), 3.5, 1000, RngStream(1))
    assert e.value == pytest.approx(1.7**3.5, rel=1e-14) and e.stderr <= 1e-14
    e = radial_moment(Ball(4, 1.7), 3.5, 1000, RngStream(1), method="mc")
    assert e.value == pytest.approx(1.7**3.5, rel=1e-14) and e.stderr <= 1e-14


def test_radial_moment_square():
    e = radial_moment(Cube(2), 2, 100_000, RngStream(2))
    assert not e.exact and within(e, 1 / math.pi)


def test_radial_moment_ellipsoid():
    g = np.random.default_rng(3)
    A = g.standard_normal((4, 4))
    M = A @ A.T + np.eye(4)
    e = radial_moment(Ellipsoid(M), 4, 100_000, RngStream(3), method="mc")
    assert within(e, np.linalg.det(M) ** -0.5)


def test_closed_form_volumes():
    assert volume(Cube(5), 10, RngStream(0)).value == pytest.approx(1.0, rel=1e-14)
    v = volume(CrossPolytope(3), 10, RngStream(0))
    assert v.exact and v.value == pytest.approx(4 / 3, rel=1e-14)
    T = np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 0.5], [0.3, 0.0, 1.0]])
    v = volume(LinearImage(T, Ball(3)), 10, RngStream(0))
    assert v.exact and v.value == pytest.approx(abs(np.linalg.det(T)) * 4 * math.pi / 3)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_mc_volume_matches_closed_form(n):
    bodies = [Cube(n), CrossPolytope(n), LpBall(n, 1.5), LpBall(n, 3.0), RegularSimplex(n),
              Ellipsoid(np.diag(np.arange(1.0, n + 1)))]
    for i, K in enumerate(bodies):
        exact = volume(K, 10, RngStream(0))
        assert exact.exact
        mc = volume(K, 100_000, RngStream(4, n, (i,)), method="mc")
        assert within(mc, exact.value, z=4), type(K).__name__


def test_lp_volume_against_integral():
    # |B_p^2| = 4 Gamma(1+1/p)^2 / Gamma(1+2/p)
    p = 1.5
    v = volume(LpBall(2, p), 10, RngStream(0)).value
    assert v == pytest.approx(4 * math.gamma(1 + 1 / p) ** 2 / math.gamma(1 + 2 / p), rel=1e-13)


def test_section_volume_examples():
    E = grassmann_subspace(5, 4, RngStream(5))
    e = section_volume(Ball(5), E, 1000, RngStream(6))
    assert e.value == pytest.approx(unit_ball_volume(4), rel=1e-14) and e.stderr == 0
    e = section_volume(Cube(3), Subspace(np.eye(3)[:, :2]), 1000, RngStream(6))
    assert e.exact and e.value == pytest.approx(1.0, rel=1e-14)


def test_section_volume_ellipsoid_hyperplane():
    n = 4
    g = np.random.default_rng(7)
    A = g.standard_normal((n, n))
    M = A @ A.T + np.eye(n)
    E = grassmann_subspace(n, n - 1, RngStream(7))
    B = E.basis
    truth = unit_ball_volume(n - 1) / math.sqrt(np.linalg.det(B.T @ M @ B))
    assert section_volume(Ellipsoid(M), E, 10, RngStream(8)).value == pytest.approx(truth)
    mc = section_volume(Ellipsoid(M), E, 100_000, RngStream(8), method="mc")
    assert not mc.exact and within(mc, truth)


def test_section_of_full_space_is_volume():
    K = LpBall(3, 1.5)
    full = section_volume(K, Subspace(np.eye(3)), 100_000, RngStream(9), method="mc")
    vol = volume(K, 10, RngStream(0)).value
    assert within(full, vol)


def test_homogeneity():
    K = CrossPolytope(3)
    E = grassmann_subspace(3, 2, RngStream(10))
    a = section_volume(K, E, 50_000, RngStream(11))
    b = section_volume(dilate(K, 2.0), E, 50_000, RngStream(11))
    assert b.value == pytest.approx(4 * a.value, rel=1e-12)
    assert volume(dilate(K, 2.0), 10, RngStream(0)).value == pytest.approx(8 * 4 / 3)


def test_weighted_integral_ball_and_consistency():
    for n in (3, 5):
        e = weighted_radial_integral(Ball(n), One(), 0, 100, RngStream(12))
        assert e.value == pytest.approx(n * unit_ball_volume(n), rel=1e-13)
    # f = 1 reduces to n omega_n int rho^{n-1} dsigma = n omega_n as(K) / omega_{n-1}
    n, N = 4, 50_000
    K = Cube(n)
    w = weighted_radial_integral(K, One(), 0, N, RngStream(13))
    a = avg_section(K, N, RngStream(13))
    assert w.value == pytest.approx(n * unit_ball_volume(n) * a.value / unit_ball_volume(n - 1),
                                    rel=1e-12)


def test_weighted_integral_norm_power_reduces_exponent():
    # f = |x|^{1-r} turns rho^{n-1} f(rho theta) into rho^{n-r}
    n, r, N = 5, 2, 40_000
    K = LpBall(n, 3.0)
    w = weighted_radial_integral(K, NormPower(1 - r), 0, N, RngStream(14))
    m = radial_moment(K, n - r, N, RngStream(14))
    assert w.value == pytest.approx(n * unit_ball_volume(n) * m.value, rel=1e-12)


def test_weighted_integral_over_subspace_ball():
    E = grassmann_subspace(5, 3, RngStream(15))
    e = weighted_radial_integral(Ball(5, 2.0), Gaussian(1.0), 2, 100, RngStream(16), E=E)
    assert e.value == pytest.approx(3 * unit_ball_volume(3) * 4.0 * math.exp(-2.0), rel=1e-12)


def test_density_specs():
    assert density_from_spec("one") == One()
    assert density_from_spec("gaussian:2") == Gaussian(2.0)
    assert density_from_spec("norm_power:-1") == NormPower(-1.0)
    with pytest.raises(ValueError):
        density_from_spec("cauchy")


def test_mean_width_examples():
    assert mean_width(Ball(3, 2.0), 100, RngStream(17)).value == pytest.approx(2.0)
    e = mean_width(Cube(2), 200_000, RngStream(18))
    ref, _ = integrate.quad(lambda t: (abs(math.cos(t)) + abs(math.sin(t))) / 2, 0, 2 * math.pi)
    ref /= 2 * math.pi
    assert ref == pytest.approx(2 / math.pi, rel=1e-12)
    assert within(e, ref)
    e2 = mean_width(dilate(Cube(2), 2.0), 200_000, RngStream(18))
    assert e2.value == pytest.approx(2 * e.value, rel=1e-12)


def test_m_value_examples():
    assert m_value(Ball(4, 2.0), 100, RngStream(19)).value == pytest.approx(0.5)
    a, b = 1.0, 3.0
    K = Ellipsoid(np.diag([a**-2, b**-2]))
    ref, _ = integrate.quad(lambda t: math.sqrt(math.cos(t) ** 2 / a**2 + math.sin(t) ** 2 / b**2),
                            0, math.pi / 2)
    ref *= 2 / math.pi
    e = m_value(K, 200_000, RngStream(20), method="mc")
    assert within(e, ref)
    rho_mean = radial_moment(K, 1, 200_000, RngStream(21))
    assert e.value * rho_mean.value >= 1 - 3 * (e.stderr + rho_mean.stderr)


def test_ball_estimators_zero_variance():
    for n in (2, 4, 7):
        B = Ball(n, 1.5)
        r = RngStream(22)
        for est in (radial_moment(B, 2, 100, r), volume(B, 100, r, method="mc"),
                    mean_width(B, 100, r), m_value(B, 100, r), avg_section(B, 100, r)):
            assert est.stderr <= 1e-14


def test_estimates_are_deterministic():
    a = radial_moment(LpBall(4, 1.5), 3, 10_000, RngStream(23, 1))
    b = radial_moment(LpBall(4, 1.5), 3, 10_000, RngStream(23, 1))
    assert a == b
