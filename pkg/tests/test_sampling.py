import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from avgsection.bodies import Ball, Cube, Ellipsoid, Subspace, contains, unit_ball_volume
from avgsection.sampling import (BudgetError, RngStream, acceptance_rate, body_points,
                                 complement, frame_bases, grassmann_bases, grassmann_subspace,
                                 sphere_point, sphere_points)


def test_sphere_points_unit_norm():
    U = sphere_points(7, 1000, RngStream(1))
    np.testing.assert_allclose(np.linalg.norm(U, axis=1), 1.0, atol=1e-12)
    assert abs(np.linalg.norm(sphere_point(3, RngStream(2))) - 1) < 1e-12


def test_sphere_mean_vector_small():
    U = sphere_points(3, 100_000, RngStream(3))
    assert np.linalg.norm(U.mean(axis=0)) <= 0.02


def test_sphere_quadrant_fraction():
    U = sphere_points(2, 100_000, RngStream(4))
    frac = np.mean((U[:, 0] > 0) & (U[:, 1] > 0))
    assert abs(frac - 0.25) <= 0.005


@pytest.mark.parametrize("n", [2, 3, 6])
def test_sphere_second_moments(n):
    N = 100_000
    U = sphere_points(n, N, RngStream(5, n))
    dirs = sphere_points(n, 5, RngStream(6, n))
    # <theta,u>^2 has mean 1/n and variance 2(n-1)/(n^2 (n+2))
    sd = math.sqrt(2 * (n - 1) / (n**2 * (n + 2)) / N)
    for u in dirs:
        assert abs(np.mean((U @ u) ** 2) - 1 / n) <= 4 * sd


def test_grassmann_orthonormal():
    B = grassmann_bases(6, 3, 200, RngStream(7))
    err = np.abs(np.einsum("kij,kil->kjl", B, B) - np.eye(3)).max()
    assert err < 1e-10


def test_grassmann_full_rotation():
    Q = grassmann_bases(4, 4, 10, RngStream(8))
    np.testing.assert_allclose(np.einsum("kij,kil->kjl", Q, Q), np.broadcast_to(np.eye(4), Q.shape),
                               atol=1e-12)


def test_grassmann_first_column_moment():
    B = grassmann_bases(4, 2, 10_000, RngStream(9))
    assert abs(np.mean(B[:, 0, 0] ** 2) - 0.25) <= 0.015


def test_grassmann_first_column_uniform():
    n, N = 5, 100_000
    B = grassmann_bases(n, 2, N, RngStream(10))
    col = B[:, :, 0]
    assert np.linalg.norm(col.mean(axis=0)) <= 3 * math.sqrt(n / N) * 1.5
    sd = math.sqrt(2 * (n - 1) / (n**2 * (n + 2)) / N)
    for u in sphere_points(n, 5, RngStream(11)):
        assert abs(np.mean((col @ u) ** 2) - 1 / n) <= 4 * sd


def test_frame_bases_marginally_haar():
    n, m = 4, 2
    B, C = frame_bases(n, m, 5000, RngStream(12))
    assert C == 6 and B.shape == (30_000, n, m)
    err = np.abs(np.einsum("kij,kil->kjl", B, B) - np.eye(m)).max()
    assert err < 1e-10
    # projector onto a Haar m-subspace has expectation (m/n) Id
    P = np.einsum("kij,klj->il", B, B) / B.shape[0]
    np.testing.assert_allclose(P, (m / n) * np.eye(n), atol=0.01)
    # within a frame the projectors sum to C(n-1, m-1) Id exactly
    P0 = np.einsum("kij,klj->il", B[:C], B[:C])
    np.testing.assert_allclose(P0, math.comb(n - 1, m - 1) * np.eye(n), atol=1e-12)


def test_complement_examples():
    E = Subspace(np.eye(3)[:, :1])
    C = complement(E)
    assert C.m == 2
    np.testing.assert_allclose(C.projector(), np.diag([0.0, 1.0, 1.0]), atol=1e-12)


@given(n=st.integers(2, 8), m=st.integers(1, 7), seed=st.integers(0, 2**32))
def test_complement_involution(n, m, seed):
    m = min(m, n - 1)
    E = grassmann_subspace(n, m, RngStream(seed))
    C = complement(E)
    assert C.m == n - m
    np.testing.assert_allclose(complement(C).projector(), E.projector(), atol=1e-9)


def test_acceptance_rate_examples():
    r = acceptance_rate(Cube(3), 200_000, RngStream(13))
    expected = 1 / (unit_ball_volume(3) * 3 * math.sqrt(3) / 8)
    assert expected == pytest.approx(0.3676, abs=1e-3)
    assert abs(r - expected) <= 4 * math.sqrt(expected * (1 - expected) / 200_000)
    assert acceptance_rate(Ball(4), 1000, RngStream(14)) == 1.0


def test_body_points_inside_and_moment():
    x, used = body_points(Cube(3), 100_000, RngStream(15))
    assert x.shape == (100_000, 3) and used >= 100_000
    assert np.all(contains(Cube(3), x))
    # per-coordinate second moment of the uniform distribution on [-1/2, 1/2] is 1/12
    sd = math.sqrt((1 / 80 - 1 / 144) / 100_000)
    assert np.all(np.abs((x**2).mean(axis=0) - 1 / 12) <= 4 * sd)


def test_body_points_budget_error():
    thin = Ellipsoid(np.diag([1.0] + [1e8] * 9))
    with pytest.raises(BudgetError):
        body_points(thin, 10, RngStream(16))


def test_streams_are_deterministic_and_distinct():
    a = sphere_points(4, 10, RngStream(1, 2, (3,)))
    b = sphere_points(4, 10, RngStream(1, 2, (3,)))
    c = sphere_points(4, 10, RngStream(1, 2, (4,)))
    d = sphere_points(4, 10, RngStream(1, 3, (3,)))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)
    assert RngStream(1).child(3) == RngStream(1, 0, (3,))


def test_stream_validation():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(2**64)
