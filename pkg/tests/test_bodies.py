import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from avgsection.bodies import (Ball, BodyError, CrossPolytope, Cube, Ellipsoid, HPolytope,
                               LinearImage, LpBall, RegularSimplex, Subspace, UnsupportedOracle,
                               body_from_dict, body_to_dict, circumradius, contains, dilate,
                               inradius, linear_image, radial, radial_distance, radial_sum,
                               section_body, support)
from avgsection.sampling import RngStream, grassmann_subspace, sphere_points

from conftest import unit


def cube_hpoly(n):
    A = np.vstack([np.eye(n), -np.eye(n)])
    return HPolytope(A, np.full(2 * n, 0.5))


def variants(n):
    g = np.random.default_rng(n)
    T = g.standard_normal((n, n)) + 2 * np.eye(n)
    M = g.standard_normal((n, n))
    return [Ball(n, 1.3), Ellipsoid(M @ M.T + np.eye(n)), Cube(n), CrossPolytope(n, 2.0),
            LpBall(n, 1.5), LpBall(n, 4.0), RegularSimplex(n), cube_hpoly(n),
            LinearImage(T, Cube(n)), radial_sum(Cube(n), Ball(n, 0.2))]


# -- spec examples ----------------------------------------------------------

def test_radial_examples():
    assert radial(Cube(3), [1, 0, 0]) == pytest.approx(0.5, abs=1e-15)
    assert radial(Cube(4), [0.5] * 4) == pytest.approx(1.0, abs=1e-15)
    assert radial(Ellipsoid(np.diag([1.0, 4.0])), [0, 1]) == pytest.approx(0.5, abs=1e-15)


def test_support_examples():
    assert support(Ball(3, 2.5), unit([1, 2, 3])) == pytest.approx(2.5)
    assert support(Cube(3), unit([1, 1, 1])) == pytest.approx(math.sqrt(3) / 2)
    assert support(CrossPolytope(2), unit([1, 1])) == pytest.approx(1 / math.sqrt(2))


def test_circumradius_examples():
    assert circumradius(Cube(4)) == pytest.approx(1.0)
    assert circumradius(Ellipsoid(np.diag([1.0, 1 / 9]))) == pytest.approx(3.0)
    assert circumradius(Ball(5, 2.0)) == 2.0


def test_inradius_examples():
    for n in (2, 3, 6):
        assert inradius(Cube(n)) == pytest.approx(0.5)
    assert inradius(CrossPolytope(3)) == pytest.approx(1 / math.sqrt(3))
    assert inradius(Ball(4, 2.0)) == 2.0


def test_linear_image_examples():
    U = sphere_points(4, 50, RngStream(1))
    K = LpBall(4, 3.0)
    assert np.array_equal(radial(linear_image(np.eye(4), K), U), radial(K, U))
    np.testing.assert_allclose(radial(linear_image(2 * np.eye(3), Ball(3)), U[:, :3] /
                                      np.linalg.norm(U[:, :3], axis=1, keepdims=True)), 2.0)
    assert dilate(Ball(3), 3.0).circumradius() == pytest.approx(3.0)


def test_section_body_examples():
    E = grassmann_subspace(5, 3, RngStream(2))
    S = section_body(Ball(5), E)
    assert S.dim == 3 and S.constant_radial() == 1.0
    S = section_body(Cube(3), Subspace(np.eye(3)[:, :2]))
    assert isinstance(S, Cube) and S.dim == 2 and S.half_side == 0.5
    g = np.random.default_rng(3)
    A = g.standard_normal((4, 4))
    M = A @ A.T + np.eye(4)
    B = grassmann_subspace(4, 2, RngStream(3)).basis
    U = sphere_points(2, 20, RngStream(4))
    expect = np.einsum("ij,jk,ik->i", U, B.T @ M @ B, U) ** -0.5
    np.testing.assert_allclose(radial(section_body(Ellipsoid(M), Subspace(B)), U), expect,
                               rtol=1e-12)
    # the unreduced section agrees with the reduced one
    np.testing.assert_allclose(radial(section_body(Ellipsoid(M), Subspace(B), reduce=False), U),
                               expect, rtol=1e-12)


def test_radial_sum_examples():
    U = sphere_points(3, 100, RngStream(5))
    np.testing.assert_allclose(radial(radial_sum(Ball(3), Ball(3, 2.0)), U), 3.0)
    np.testing.assert_allclose(radial(radial_sum(Cube(3), Ball(3, 0.1)), U),
                               radial(Cube(3), U) + 0.1, rtol=1e-14)
    np.testing.assert_allclose(radial(radial_sum(Cube(3), Cube(3)), U), 2 * radial(Cube(3), U),
                               rtol=1e-14)


def test_radial_distance_examples():
    r = RngStream(6)
    assert radial_distance(Cube(3), Cube(3), 1000, r) == 0.0
    assert radial_distance(Ball(3), Ball(3, 2.0), 1000, r) == pytest.approx(1.0)
    d = radial_distance(Cube(2), Ball(2, 0.5), 2000, r)
    assert d == pytest.approx((math.sqrt(2) - 1) / 2, abs=1e-8)


def test_invalid_inputs():
    with pytest.raises(BodyError):
        radial(Cube(3), [1, 0])
    with pytest.raises(BodyError):
        radial(Cube(3), [0, 0, 0])
    with pytest.raises(BodyError):
        Ellipsoid(np.diag([1.0, -1.0]))
    with pytest.raises(BodyError):
        HPolytope(np.eye(2), [1.0, 1.0]).radial([-1.0, 0.0])
    with pytest.raises(UnsupportedOracle):
        support(cube_hpoly(2), [1.0, 0.0])
    with pytest.raises(UnsupportedOracle):
        support(radial_sum(Cube(2), Cube(2)), [1.0, 0.0])


# -- properties -------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 5])
def test_boundary_property(n):
    U = sphere_points(n, 1000, RngStream(7, n))
    for K in variants(n):
        rho = radial(K, U)
        X = rho[:, None] * U
        assert np.all(contains(K, (1 - 1e-9) * X)), type(K).__name__
        assert not np.any(contains(K, (1 + 1e-6) * X)), type(K).__name__


@pytest.mark.parametrize("n", [2, 4])
def test_support_dominates_radial(n):
    U = sphere_points(n, 1000, RngStream(8, n))
    for K in variants(n):
        if isinstance(K, HPolytope) or type(K).__name__ == "RadialSum":
            continue
        assert np.all(support(K, U) >= radial(K, U) * (1 - 1e-12)), type(K).__name__


def test_ball_sections_have_unit_radial():
    r = RngStream(9)
    for i in range(100):
        n = 3 + i % 4
        m = 1 + i % (n - 1)
        E = grassmann_subspace(n, m, r.child(i))
        S = section_body(Ball(n), E, reduce=False)
        U = sphere_points(m, 5, r.child(1000 + i))
        np.testing.assert_allclose(radial(S, U), 1.0, rtol=1e-12)


def test_radial_sum_commutative_associative():
    n = 3
    A, B, C = Cube(n), LpBall(n, 1.5), Ellipsoid(np.diag([1.0, 2.0, 5.0]))
    U = sphere_points(n, 1000, RngStream(10))
    np.testing.assert_allclose(radial(radial_sum(A, B), U), radial(radial_sum(B, A), U),
                               rtol=1e-15)
    np.testing.assert_allclose(radial(radial_sum(radial_sum(A, B), C), U),
                               radial(radial_sum(A, radial_sum(B, C)), U), rtol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_json_round_trip(n):
    U = sphere_points(n, 50, RngStream(11))
    for K in variants(n):
        d = body_to_dict(K)
        K2 = body_from_dict(d)
        assert body_to_dict(K2) == d
        np.testing.assert_array_equal(radial(K2, U), radial(K, U))


@given(p=st.floats(1.0, 12.0), s=st.floats(0.1, 5.0), n=st.integers(2, 6))
def test_lp_radial_is_homogeneous(p, s, n):
    U = sphere_points(n, 20, RngStream(12, n))
    np.testing.assert_allclose(radial(LpBall(n, p, s), U), s * radial(LpBall(n, p), U),
                               rtol=1e-12)


def test_simplex_is_centered_not_symmetric():
    S = RegularSimplex(4)
    bar, _ = S.exact_moments()
    assert np.linalg.norm(bar) < 1e-12
    assert not S.is_symmetric and S.is_convex
    assert Cube(4).is_symmetric and cube_hpoly(3).is_symmetric


def test_hpolytope_radii_match_cube():
    K = cube_hpoly(3)
    assert K.circumradius() == pytest.approx(math.sqrt(3) / 2)
    assert K.inradius() == pytest.approx(0.5)
