"""Deterministic splittable randomness and samplers on the sphere, the
Grassmannian and inside bodies."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .bodies import Subspace, BodyError, unit_ball_volume

MAX_BODY_DIM = 12
MIN_ACCEPTANCE = 1e-7
_BATCH = 1 << 14


class BudgetError(RuntimeError):
    """Rejection sampling would need too many proposals."""


@dataclass(frozen=True)
class RngStream:
    """A random stream identified by (seed, stream id, child path).

    Each stream owns a Philox generator keyed by a SeedSequence whose spawn
    key is ``(stream, *path)``; distinct identities give independent
    sequences and the same identity always reproduces the same sequence.
    """

    seed: int
    stream: int = 0
    path: tuple = ()

    def __post_init__(self):
        if not (0 <= self.seed < 2**64 and 0 <= self.stream < 2**64):
            raise ValueError("seed and stream id must be unsigned 64-bit integers")

    def child(self, i):
        return RngStream(self.seed, self.stream, self.path + (int(i),))

    def children(self, count):
        return [self.child(i) for i in range(count)]

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *self.path))
        return np.random.Generator(np.random.Philox(ss))

    def to_dict(self):
        return {"seed": self.seed, "stream": self.stream, "path": list(self.path)}


def _gen(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return rng.generator()


def sphere_points(n, count, rng):
    """``count`` uniform points on S^{n-1}, shape (count, n)."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    g = _gen(rng).standard_normal((count, n))
    nrm = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero; redraw defensively
    while np.any(nrm == 0):
        bad = nrm[:, 0] == 0
        g[bad] = _gen(rng).standard_normal((int(bad.sum()), n))
        nrm = np.linalg.norm(g, axis=1, keepdims=True)
    return g / nrm


def sphere_point(n, rng):
    return sphere_points(n, 1, rng)[0]


def grassmann_bases(n, m, count, rng):
    """``count`` Haar-distributed orthonormal n x m bases, shape (count, n, m)."""
    if not 1 <= m <= n:
        raise ValueError(f"subspace dimension must satisfy 1 <= m <= n, got m={m}, n={n}")
    G = _gen(rng).standard_normal((count, n, m))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diagonal(R, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    return Q * signs[:, None, :]


def frame_bases(n, m, frames, rng):
    """All C(n, m) coordinate m-subspaces of ``frames`` Haar rotations.

    Each basis is marginally Haar on Gr_m, while the subspaces within a
    frame are negatively correlated, so frame averages of smooth subspace
    functionals have far lower variance than independent draws.  Returns
    (bases of shape (frames * C, n, m), frame size C).
    """
    if not 1 <= m <= n:
        raise ValueError(f"subspace dimension must satisfy 1 <= m <= n, got m={m}, n={n}")
    Q = grassmann_bases(n, n, frames, rng)
    subsets = [list(c) for c in itertools.combinations(range(n), m)]
    bases = np.stack([Q[:, :, c] for c in subsets], axis=1)
    return bases.reshape(frames * len(subsets), n, m), len(subsets)


def grassmann_subspace(n, m, rng):
    return Subspace(grassmann_bases(n, m, 1, rng)[0])


def complement(E):
    """Orthonormal basis of the orthogonal complement of E."""
    B = E.basis if isinstance(E, Subspace) else np.asarray(E, dtype=float)
    n, m = B.shape
    if m >= n:
        raise ValueError("the complement of the full space is trivial")
    Q, _ = np.linalg.qr(B, mode="complete")
    C = Q[:, m:]
    # project out any residue of E for numerical hygiene, then re-orthonormalise
    C = C - B @ (B.T @ C)
    C, _ = np.linalg.qr(C)
    return Subspace(C)


def body_points(body, count, rng):
    """``count`` uniform points of K by rejection from the ball of radius
    ``circumradius_bound``.  Returns (points, proposals used)."""
    n = body.dim
    if n > MAX_BODY_DIM:
        raise BudgetError(f"rejection sampling supports dimension <= {MAX_BODY_DIM}")
    g = _gen(rng)
    R = body.circumradius_bound()
    vol = body.exact_volume()
    if vol is not None:
        rate = vol / (unit_ball_volume(n) * R**n)
        if rate < MIN_ACCEPTANCE:
            raise BudgetError(f"acceptance rate {rate:.3g} below {MIN_ACCEPTANCE:g}")
    out = []
    have = 0
    proposals = 0
    while have < count:
        u = sphere_points(n, _BATCH, g)
        r = R * g.random(_BATCH) ** (1.0 / n)
        x = u * r[:, None]
        acc = x[body._inside(x)]
        proposals += _BATCH
        out.append(acc)
        have += acc.shape[0]
        if proposals >= 10 / MIN_ACCEPTANCE and have < MIN_ACCEPTANCE * proposals:
            raise BudgetError(f"acceptance rate {have / proposals:.3g} below {MIN_ACCEPTANCE:g}")
    pts = np.concatenate(out)[:count]
    return pts, proposals


def body_point(body, rng):
    pts, used = body_points(body, 1, rng)
    return pts[0], used


def acceptance_rate(body, count, rng):
    """Fraction of ball proposals that land in K (for diagnostics)."""
    g = _gen(rng)
    n = body.dim
    R = body.circumradius_bound()
    u = sphere_points(n, count, g)
    r = R * g.random(count) ** (1.0 / n)
    return float(np.mean(body._inside(u * r[:, None])))


__all__ = [
    "RngStream", "BudgetError", "BodyError", "sphere_point", "sphere_points",
    "grassmann_subspace", "grassmann_bases", "complement", "body_point",
    "body_points", "acceptance_rate",
]
