"""Star and convex bodies described by exact oracles.

Every body exposes the radial function, membership and (for convex
variants) the support function as vectorised oracles.  Oracles accept a
single vector of shape ``(n,)`` or a stack of shape ``(..., n)``.
Derived bodies (linear images, sections, radial sums, translates) keep
references to their components so the oracles compose exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from . import _polytope

UNIT_TOL = 1e-9
SYM_TOL = 1e-12
BISECT_RTOL = 1e-12
BISECT_MAXITER = 200
RADIUS_SEARCH_STARTS = 10_000
# fixed key so numerical radii are a deterministic function of the body
_SEARCH_KEY = 0x5EA4C4


class BodyError(ValueError):
    """Invalid body parameters or oracle input."""


class UnsupportedOracle(BodyError):
    """The requested oracle is not available for this variant."""


def unit_ball_volume(m):
    """Volume of the Euclidean unit ball in R^m (1 for m = 0)."""
    if m < 0:
        raise ValueError(f"dimension must be >= 0, got {m}")
    return math.exp(0.5 * m * math.log(math.pi) - math.lgamma(0.5 * m + 1.0))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _check_unit(u, n):
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != n:
        raise BodyError(f"expected vectors of dimension {n}, got shape {u.shape}")
    norms = np.linalg.norm(u, axis=-1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOL):
        raise BodyError("direction is not a unit vector")
    return u


def _check_point(x, n):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise BodyError(f"expected points of dimension {n}, got shape {x.shape}")
    return x


def _flat(fn, arr):
    lead = arr.shape[:-1]
    out = fn(arr.reshape(-1, arr.shape[-1]))
    if lead == ():
        return out[0].item()
    return out.reshape(lead)


def _signed_permutation(B, tol=1e-12):
    """True if every column of B is +-e_j for distinct j."""
    absB = np.abs(B)
    if not np.all((absB < tol) | (np.abs(absB - 1.0) < tol)):
        return False
    ones = absB > 0.5
    return bool(np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) <= 1))


class Body:
    """Base class: a star body in R^dim with the origin in its interior."""

    dim: int

    # -- variant hooks, all on stacks of shape (N, dim) -----------------
    def _rho(self, u):
        raise NotImplementedError

    def _inside(self, x):
        raise NotImplementedError

    def _h(self, u):
        raise UnsupportedOracle(f"{type(self).__name__} has no support oracle")

    # -- public oracles -----------------------------------------------
    def contains(self, x):
        x = _check_point(x, self.dim)
        return _flat(self._inside, x)

    def radial(self, theta):
        u = _check_unit(theta, self.dim)
        return _flat(self._rho, u)

    def support(self, theta):
        u = _check_unit(theta, self.dim)
        return _flat(self._h, u)

    # -- classification -------------------------------------------------
    @property
    def is_convex(self):
        return True

    @property
    def is_symmetric(self):
        return True

    @property
    def is_ellipsoidal(self):
        return False

    def constant_radial(self):
        """The value of the radial function if it is constant, else None."""
        return None

    # -- polytope structure --------------------------------------------
    def halfspaces(self):
        """(A, b) with body = {Ax <= b}, or None."""
        return None

    @cached_property
    def _vertices(self):
        hs = self.halfspaces()
        if hs is None:
            return None
        return _polytope.vertices(*hs)

    def vertices(self):
        return self._vertices

    # -- size functionals ----------------------------------------------
    @cached_property
    def _radii(self):
        V = self.vertices()
        hs = self.halfspaces()
        if V is not None and hs is not None:
            A, b = hs
            R = float(np.max(np.linalg.norm(V, axis=1)))
            r = float(np.min(b / np.linalg.norm(A, axis=1)))
            return R, r, True
        return (_extreme_radius(self, True), _extreme_radius(self, False), False)

    def circumradius(self):
        return self._radii[0]

    def inradius(self):
        return self._radii[1]

    @property
    def radii_exact(self):
        """False when circumradius/inradius come from a numerical search."""
        return self._radii[2]

    def circumradius_bound(self):
        """A guaranteed upper bound on the circumradius (no numerical search)."""
        V = self.vertices()
        if V is not None:
            return float(np.max(np.linalg.norm(V, axis=1)))
        if type(self)._radii is not Body._radii:
            # variant with closed-form radii
            return self.circumradius()
        raise NotImplementedError(f"{type(self).__name__} has no circumradius bound")

    def exact_volume(self):
        """Closed-form volume, or None when only Monte Carlo is available."""
        hs = self.halfspaces()
        if hs is not None:
            return _polytope.volume(*hs)
        return None

    def exact_moments(self):
        """(barycenter, covariance) in closed form, or None."""
        return None

    def to_dict(self):
        raise NotImplementedError


def _extreme_radius(body, maximize, starts=RADIUS_SEARCH_STARTS):
    """Sampled + Nelder-Mead refined extreme of the radial function."""
    n = body.dim
    if n == 1:
        vals = body._rho(np.array([[1.0], [-1.0]]))
        return float(vals.max() if maximize else vals.min())
    gen = np.random.Generator(np.random.Philox(key=_SEARCH_KEY))
    U = gen.standard_normal((starts, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    rho = body._rho(U)
    order = np.argsort(rho)
    picks = order[-8:] if maximize else order[:8]
    sign = -1.0 if maximize else 1.0

    def f(x):
        nx = np.linalg.norm(x)
        if nx == 0:
            return np.inf
        return sign * body._rho((x / nx)[None, :])[0]

    best = rho[order[-1]] if maximize else rho[order[0]]
    for i in picks:
        res = minimize(f, U[i], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400 * n})
        val = sign * res.fun
        best = max(best, val) if maximize else min(best, val)
    return float(best)


# ---------------------------------------------------------------------------
# canonical variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Ball(Body):
    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if self.dim < 1 or self.radius <= 0:
            raise BodyError("Ball needs dim >= 1 and radius > 0")

    def _rho(self, u):
        return np.full(u.shape[0], float(self.radius))

    def _inside(self, x):
        return np.linalg.norm(x, axis=1) <= self.radius

    def _h(self, u):
        return np.full(u.shape[0], float(self.radius))

    @property
    def is_ellipsoidal(self):
        return True

    def constant_radial(self):
        return float(self.radius)

    def as_ellipsoid_matrix(self):
        return np.eye(self.dim) / self.radius**2

    @cached_property
    def _radii(self):
        return float(self.radius), float(self.radius), True

    def exact_volume(self):
        return unit_ball_volume(self.dim) * self.radius**self.dim

    def exact_moments(self):
        return np.zeros(self.dim), np.eye(self.dim) * self.radius**2 / (self.dim + 2)

    def to_dict(self):
        return {"type": "ball", "dim": self.dim, "radius": self.radius}


@dataclass(frozen=True, eq=False)
class Ellipsoid(Body):
    """{x : x^T M x <= 1} for symmetric positive-definite M."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise BodyError("ellipsoid matrix must be square")
        scale = max(np.max(np.abs(M)), 1e-300)
        if np.max(np.abs(M - M.T)) > SYM_TOL * scale:
            raise BodyError("ellipsoid matrix is not symmetric")
        M = 0.5 * (M + M.T)
        evals = np.linalg.eigvalsh(M)
        if evals[0] <= 0:
            raise BodyError("ellipsoid matrix is not positive definite")
        object.__setattr__(self, "matrix", _frozen(M))
        object.__setattr__(self, "_evals", evals)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def _rho(self, u):
        return 1.0 / np.sqrt(np.einsum("ij,jk,ik->i", u, self.matrix, u))

    def _inside(self, x):
        return np.einsum("ij,jk,ik->i", x, self.matrix, x) <= 1.0

    @cached_property
    def _inv(self):
        return np.linalg.inv(self.matrix)

    def _h(self, u):
        return np.sqrt(np.einsum("ij,jk,ik->i", u, self._inv, u))

    @property
    def is_ellipsoidal(self):
        return True

    def as_ellipsoid_matrix(self):
        return np.array(self.matrix)

    @cached_property
    def _radii(self):
        return float(self._evals[0] ** -0.5), float(self._evals[-1] ** -0.5), True

    def exact_volume(self):
        return unit_ball_volume(self.dim) / math.sqrt(float(np.prod(self._evals)))

    def exact_moments(self):
        return np.zeros(self.dim), self._inv / (self.dim + 2)

    def to_dict(self):
        return {"type": "ellipsoid", "dim": self.dim, "matrix": self.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class Cube(Body):
    """[-h, h]^n."""

    dim: int
    half_side: float = 0.5

    def __post_init__(self):
        if self.dim < 1 or self.half_side <= 0:
            raise BodyError("Cube needs dim >= 1 and half_side > 0")

    def _rho(self, u):
        return self.half_side / np.max(np.abs(u), axis=1)

    def _inside(self, x):
        return np.max(np.abs(x), axis=1) <= self.half_side

    def _h(self, u):
        return self.half_side * np.sum(np.abs(u), axis=1)

    def halfspaces(self):
        eye = np.eye(self.dim)
        return np.vstack([eye, -eye]), np.full(2 * self.dim, float(self.half_side))

    @cached_property
    def _vertices(self):
        if self.dim > 12:
            return None
        return self.half_side * np.array(list(product((-1.0, 1.0), repeat=self.dim)))

    @cached_property
    def _radii(self):
        h = float(self.half_side)
        return h * math.sqrt(self.dim), h, True

    def exact_volume(self):
        return (2.0 * self.half_side) ** self.dim

    def exact_moments(self):
        return np.zeros(self.dim), np.eye(self.dim) * self.half_side**2 / 3.0

    def to_dict(self):
        return {"type": "cube", "dim": self.dim, "half_side": self.half_side}


@dataclass(frozen=True, eq=False)
class CrossPolytope(Body):
    """{x : sum |x_i| <= s}."""

    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 1 or self.scale <= 0:
            raise BodyError("CrossPolytope needs dim >= 1 and scale > 0")

    def _rho(self, u):
        return self.scale / np.sum(np.abs(u), axis=1)

    def _inside(self, x):
        return np.sum(np.abs(x), axis=1) <= self.scale

    def _h(self, u):
        return self.scale * np.max(np.abs(u), axis=1)

    def halfspaces(self):
        if self.dim > 12:
            return None
        A = np.array(list(product((-1.0, 1.0), repeat=self.dim)))
        return A, np.full(A.shape[0], float(self.scale))

    @cached_property
    def _vertices(self):
        eye = np.eye(self.dim) * self.scale
        return np.vstack([eye, -eye])

    @cached_property
    def _radii(self):
        s = float(self.scale)
        return s, s / math.sqrt(self.dim), True

    def exact_volume(self):
        return (2.0 * self.scale) ** self.dim / math.factorial(self.dim)

    def exact_moments(self):
        n = self.dim
        return np.zeros(n), np.eye(n) * 2.0 * self.scale**2 / ((n + 1) * (n + 2))

    def to_dict(self):
        return {"type": "cross_polytope", "dim": self.dim, "scale": self.scale}


@dataclass(frozen=True, eq=False)
class LpBall(Body):
    """{x : ||x||_p <= s}, 1 <= p <= inf."""

    dim: int
    p: float
    scale: float = 1.0

    def __post_init__(self):
        p = float(self.p)
        if self.dim < 1 or self.scale <= 0 or not (p >= 1.0):
            raise BodyError("LpBall needs dim >= 1, p >= 1 and scale > 0")
        object.__setattr__(self, "p", p)

    def _norm(self, x, p):
        if math.isinf(p):
            return np.max(np.abs(x), axis=1)
        if p == 1.0:
            return np.sum(np.abs(x), axis=1)
        return np.sum(np.abs(x) ** p, axis=1) ** (1.0 / p)

    def _rho(self, u):
        return self.scale / self._norm(u, self.p)

    def _inside(self, x):
        return self._norm(x, self.p) <= self.scale

    def _h(self, u):
        p = self.p
        q = math.inf if p == 1.0 else (1.0 if math.isinf(p) else p / (p - 1.0))
        return self.scale * self._norm(u, q)

    @cached_property
    def _radii(self):
        n, s = self.dim, float(self.scale)
        inv_p = 0.0 if math.isinf(self.p) else 1.0 / self.p
        # ||theta||_p over the sphere ranges between 1 and n^(1/p - 1/2)
        other = n ** (inv_p - 0.5)
        lo, hi = min(1.0, other), max(1.0, other)
        return s / lo, s / hi, True

    def exact_volume(self):
        n, s = self.dim, self.scale
        if math.isinf(self.p):
            return (2.0 * s) ** n
        p = self.p
        log_v = n * (math.log(2.0 * s) + math.lgamma(1.0 + 1.0 / p)) - math.lgamma(1.0 + n / p)
        return math.exp(log_v)

    def exact_moments(self):
        n, s = self.dim, self.scale
        if math.isinf(self.p):
            second = s**2 / 3.0
        else:
            p = self.p
            second = s**2 * math.exp(gammaln(3.0 / p) - gammaln(1.0 / p)
                                     + gammaln(1.0 + n / p) - gammaln(1.0 + (n + 2.0) / p))
        return np.zeros(n), np.eye(n) * second

    def to_dict(self):
        p = "inf" if math.isinf(self.p) else self.p
        return {"type": "lp_ball", "dim": self.dim, "p": p, "scale": self.scale}


def _helmert_vertices(n):
    """Rows: the n+1 centred standard basis vectors of R^(n+1), written in an
    orthonormal basis of the sum-zero hyperplane and scaled to unit norm."""
    H = np.zeros((n + 1, n))
    for j in range(1, n + 1):
        H[:j, j - 1] = 1.0
        H[j, j - 1] = -float(j)
        H[:, j - 1] /= math.sqrt(j * (j + 1))
    return H * math.sqrt((n + 1) / n)


@dataclass(frozen=True, eq=False)
class RegularSimplex(Body):
    """Regular simplex with barycenter 0 and circumradius ``scale``."""

    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 1 or self.scale <= 0:
            raise BodyError("RegularSimplex needs dim >= 1 and scale > 0")
        V = _helmert_vertices(self.dim) * self.scale
        object.__setattr__(self, "_V", _frozen(V))
        object.__setattr__(self, "_offset", self.scale / self.dim)

    def _rho(self, u):
        den = -(u @ self._V.T)
        with np.errstate(divide="ignore"):
            ratio = np.where(den > 0, self._offset / np.where(den > 0, den, 1.0), np.inf)
        return ratio.min(axis=1)

    def _inside(self, x):
        return np.all(-(x @ self._V.T) <= self._offset, axis=1)

    def _h(self, u):
        return np.max(u @ self._V.T, axis=1)

    @property
    def is_symmetric(self):
        return False

    def halfspaces(self):
        return -np.array(self._V), np.full(self.dim + 1, self._offset)

    @cached_property
    def _vertices(self):
        return np.array(self._V)

    @cached_property
    def _radii(self):
        return float(self.scale), float(self._offset), True

    def exact_volume(self):
        V = self._V
        return abs(float(np.linalg.det(V[1:] - V[0]))) / math.factorial(self.dim)

    def exact_moments(self):
        n = self.dim
        V = np.array(self._V)
        return np.zeros(n), V.T @ V / ((n + 1) * (n + 2))

    def to_dict(self):
        return {"type": "simplex", "dim": self.dim, "scale": self.scale}


@dataclass(frozen=True, eq=False)
class HPolytope(Body):
    """{x : <a_i, x> <= b_i for all i}, all b_i > 0, bounded."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.array(self.normals, dtype=float))
        b = np.array(self.offsets, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise BodyError("normals and offsets disagree in length")
        if np.any(b <= 0):
            raise BodyError("HPolytope offsets must be positive (origin interior)")
        object.__setattr__(self, "normals", _frozen(A))
        object.__setattr__(self, "offsets", _frozen(b))

    @property
    def dim(self):
        return self.normals.shape[1]

    def _rho(self, u):
        den = u @ self.normals.T
        with np.errstate(divide="ignore"):
            ratio = np.where(den > 0, self.offsets / np.where(den > 0, den, 1.0), np.inf)
        rho = ratio.min(axis=1)
        if not np.all(np.isfinite(rho)):
            raise BodyError("HPolytope is unbounded in some direction")
        return rho

    def _inside(self, x):
        return np.all(x @ self.normals.T <= self.offsets, axis=1)

    @cached_property
    def is_symmetric(self):
        A, b = self.normals, self.offsets
        rows = {tuple(np.round(np.append(a / bi, 0.0), 12)) for a, bi in zip(A, b)}
        return all(tuple(np.round(np.append(-a / bi, 0.0), 12)) in rows for a, bi in zip(A, b))

    def halfspaces(self):
        return np.array(self.normals), np.array(self.offsets)

    def circumradius_bound(self):
        V = self.vertices()
        if V is not None:
            return float(np.max(np.linalg.norm(V, axis=1)))
        # no vertex enumeration in high dimension: pad the sampled estimate
        return 2.0 * self.circumradius()

    def to_dict(self):
        return {"type": "hpolytope", "dim": self.dim,
                "normals": self.normals.tolist(), "offsets": self.offsets.tolist()}


# ---------------------------------------------------------------------------
# derived bodies
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinearImage(Body):
    """T(K) for invertible T."""

    matrix: np.ndarray
    inner: Body

    def __post_init__(self):
        T = np.array(self.matrix, dtype=float)
        n = self.inner.dim
        if T.shape != (n, n):
            raise BodyError(f"matrix shape {T.shape} does not match body dimension {n}")
        sv = np.linalg.svd(T, compute_uv=False)
        if not sv[-1] > 1e-12 * sv[0]:
            raise BodyError("linear map is singular")
        object.__setattr__(self, "matrix", _frozen(T))
        object.__setattr__(self, "_inv", _frozen(np.linalg.inv(T)))
        object.__setattr__(self, "_smax", float(sv[0]))
        object.__setattr__(self, "_identity", bool(np.array_equal(T, np.eye(n))))

    @property
    def dim(self):
        return self.inner.dim

    def _rho(self, u):
        if self._identity:
            return self.inner._rho(u)
        w = u @ self._inv.T
        nw = np.linalg.norm(w, axis=1)
        return self.inner._rho(w / nw[:, None]) / nw

    def _inside(self, x):
        return self.inner._inside(x @ self._inv.T)

    def _h(self, u):
        if self._identity:
            return self.inner._h(u)
        v = u @ self.matrix
        nv = np.linalg.norm(v, axis=1)
        return nv * self.inner._h(v / nv[:, None])

    @property
    def is_convex(self):
        return self.inner.is_convex

    @property
    def is_symmetric(self):
        return self.inner.is_symmetric

    @property
    def is_ellipsoidal(self):
        return self.inner.is_ellipsoidal

    def as_ellipsoid_matrix(self):
        M = self.inner.as_ellipsoid_matrix()
        return self._inv.T @ M @ self._inv

    def halfspaces(self):
        hs = self.inner.halfspaces()
        if hs is None:
            return None
        A, b = hs
        return A @ self._inv, b

    @cached_property
    def _vertices(self):
        V = self.inner.vertices()
        return None if V is None else V @ self.matrix.T

    @cached_property
    def _radii(self):
        if self.is_ellipsoidal:
            return Ellipsoid(self.as_ellipsoid_matrix())._radii
        T = self.matrix
        G = T @ T.T
        c2 = G[0, 0]
        if np.max(np.abs(G - c2 * np.eye(self.dim))) <= 1e-12 * c2:
            # similarity: radii scale by the common singular value
            R, r, exact = self.inner._radii
            c = math.sqrt(c2)
            return c * R, c * r, exact
        return super()._radii

    def circumradius_bound(self):
        if self.is_ellipsoidal:
            return self.circumradius()
        V = self.vertices()
        if V is not None:
            return float(np.max(np.linalg.norm(V, axis=1)))
        return self._smax * self.inner.circumradius_bound()

    def exact_volume(self):
        v = self.inner.exact_volume()
        if v is None:
            return None
        return abs(float(np.linalg.det(self.matrix))) * v

    def exact_moments(self):
        m = self.inner.exact_moments()
        if m is None:
            return None
        bar, cov = m
        T = self.matrix
        return T @ bar, T @ cov @ T.T

    def to_dict(self):
        return {"type": "linear_image", "dim": self.dim,
                "matrix": self.matrix.tolist(), "inner": self.inner.to_dict()}


@dataclass(frozen=True, eq=False)
class SectionBody(Body):
    """K ∩ E written in the coordinates of an orthonormal basis of E."""

    inner: Body
    basis: np.ndarray

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim != 2 or B.shape[0] != self.inner.dim:
            raise BodyError("section basis does not match body dimension")
        object.__setattr__(self, "basis", _frozen(B))

    @property
    def dim(self):
        return self.basis.shape[1]

    def _rho(self, u):
        return self.inner._rho(u @ self.basis.T)

    def _inside(self, y):
        return self.inner._inside(y @ self.basis.T)

    @property
    def is_convex(self):
        return self.inner.is_convex

    @property
    def is_symmetric(self):
        return self.inner.is_symmetric

    def halfspaces(self):
        hs = self.inner.halfspaces()
        if hs is None:
            return None
        A, b = hs
        return _polytope.drop_trivial(A @ self.basis, b)

    @cached_property
    def _radii(self):
        if self.dim == 1:
            vals = self._rho(np.array([[1.0], [-1.0]]))
            return float(vals.max()), float(vals.min()), True
        return super()._radii

    def circumradius_bound(self):
        if self.dim == 1:
            return self.circumradius()
        return self.inner.circumradius_bound()

    def exact_volume(self):
        if self.dim == 1:
            return float(np.sum(self._rho(np.array([[1.0], [-1.0]]))))
        return super().exact_volume()

    def to_dict(self):
        return {"type": "section", "dim": self.dim,
                "basis": self.basis.tolist(), "inner": self.inner.to_dict()}


@dataclass(frozen=True, eq=False)
class RadialSum(Body):
    """Radial sum: rho = rho_first + rho_second."""

    first: Body
    second: Body

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise BodyError("radial sum of bodies of different dimension")

    @property
    def dim(self):
        return self.first.dim

    def _rho(self, u):
        return self.first._rho(u) + self.second._rho(u)

    def _inside(self, x):
        r = np.linalg.norm(x, axis=1)
        out = np.ones(x.shape[0], dtype=bool)
        nz = r > 0
        if np.any(nz):
            out[nz] = r[nz] <= self._rho(x[nz] / r[nz, None])
        return out

    @property
    def is_convex(self):
        # convexity is not preserved by radial addition in general
        return isinstance(self.first, Ball) and isinstance(self.second, Ball)

    @property
    def is_symmetric(self):
        return self.first.is_symmetric and self.second.is_symmetric

    def constant_radial(self):
        a, b = self.first.constant_radial(), self.second.constant_radial()
        return None if a is None or b is None else a + b

    def circumradius_bound(self):
        return self.first.circumradius_bound() + self.second.circumradius_bound()

    def to_dict(self):
        return {"type": "radial_sum", "dim": self.dim,
                "first": self.first.to_dict(), "second": self.second.to_dict()}


@dataclass(frozen=True, eq=False)
class Translate(Body):
    """K + shift; the shifted body must still contain the origin.

    The radial function has no closed form in general and is found by
    bisection on the membership oracle.
    """

    shift: np.ndarray
    inner: Body

    def __post_init__(self):
        s = np.array(self.shift, dtype=float).reshape(-1)
        if s.shape[0] != self.inner.dim:
            raise BodyError("shift does not match body dimension")
        object.__setattr__(self, "shift", _frozen(s))
        if not self.inner._inside(-s[None, :])[0]:
            raise BodyError("translated body does not contain the origin")

    @property
    def dim(self):
        return self.inner.dim

    def _inside(self, x):
        return self.inner._inside(x - self.shift)

    def _rho(self, u):
        return _bisect_radial(self, u)

    def _h(self, u):
        return self.inner._h(u) + u @ self.shift

    @property
    def is_convex(self):
        return self.inner.is_convex

    @property
    def is_symmetric(self):
        return bool(np.all(self.shift == 0)) and self.inner.is_symmetric

    def halfspaces(self):
        hs = self.inner.halfspaces()
        if hs is None:
            return None
        A, b = hs
        return A, b + A @ self.shift

    def circumradius_bound(self):
        return self.inner.circumradius_bound() + float(np.linalg.norm(self.shift))

    def exact_volume(self):
        return self.inner.exact_volume()

    def exact_moments(self):
        m = self.inner.exact_moments()
        if m is None:
            return None
        return m[0] + self.shift, m[1]

    def to_dict(self):
        return {"type": "translate", "dim": self.dim,
                "shift": self.shift.tolist(), "inner": self.inner.to_dict()}


def _bisect_radial(body, u):
    lo = np.zeros(u.shape[0])
    hi = np.full(u.shape[0], 2.0 * body.circumradius_bound())
    for _ in range(BISECT_MAXITER):
        active = (hi - lo) > BISECT_RTOL * hi
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        inside = body._inside(mid[:, None] * u)
        lo = np.where(active & inside, mid, lo)
        hi = np.where(active & ~inside, mid, hi)
    return lo


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def contains(body, x):
    return body.contains(x)


def radial(body, theta):
    return body.radial(theta)


def support(body, theta):
    return body.support(theta)


def circumradius(body):
    return body.circumradius()


def inradius(body):
    return body.inradius()


def linear_image(T, body):
    return LinearImage(T, body)


def dilate(body, factor):
    """factor * K as a linear image (keeps the oracles of K)."""
    return LinearImage(factor * np.eye(body.dim), body)


@dataclass(frozen=True, eq=False)
class Subspace:
    """m-dimensional subspace of R^n given by an orthonormal basis (n x m)."""

    basis: np.ndarray
    tol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        n, m = B.shape
        if not 1 <= m <= n:
            raise BodyError(f"invalid subspace dimension {m} in R^{n}")
        if np.max(np.abs(B.T @ B - np.eye(m))) > self.tol:
            raise BodyError("subspace basis is not orthonormal")
        object.__setattr__(self, "basis", _frozen(B))

    @property
    def n(self):
        return self.basis.shape[0]

    @property
    def m(self):
        return self.basis.shape[1]

    def projector(self):
        return self.basis @ self.basis.T


def section_body(body, E, reduce=True):
    """K ∩ E as an m-dimensional body in the coordinates of E's basis.

    With ``reduce`` the section is returned as a canonical variant when one
    exists (balls, ellipsoids, coordinate sections of cubes/cross-polytopes/
    l_p balls); otherwise a generic :class:`SectionBody`.
    """
    B = E.basis if isinstance(E, Subspace) else np.asarray(E, dtype=float)
    if B.shape[0] != body.dim:
        raise BodyError(f"subspace lives in R^{B.shape[0]}, body in R^{body.dim}")
    m = B.shape[1]
    if not reduce:
        return SectionBody(body, B)
    if isinstance(body, Ball):
        return Ball(m, body.radius)
    if body.is_ellipsoidal:
        M = body.as_ellipsoid_matrix()
        return Ellipsoid(B.T @ M @ B)
    if isinstance(body, (Cube, CrossPolytope, LpBall)) and _signed_permutation(B):
        if isinstance(body, Cube):
            return Cube(m, body.half_side)
        if isinstance(body, CrossPolytope):
            return CrossPolytope(m, body.scale)
        return LpBall(m, body.p, body.scale)
    if isinstance(body, SectionBody):
        return SectionBody(body.inner, body.basis @ B)
    return SectionBody(body, B)


def radial_sum(K, D):
    return RadialSum(K, D)


def radial_distance(K, D, N, rng):
    """Sampled lower bound on sup |rho_K - rho_D| over the sphere.

    N uniform directions followed by Nelder-Mead refinement from the best
    few; the result is flagged numerical by construction (never exceeds the
    true supremum).
    """
    if K.dim != D.dim:
        raise BodyError("radial distance of bodies of different dimension")
    n = K.dim
    gen = rng.generator()
    U = gen.standard_normal((N, n))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    gap = np.abs(K._rho(U) - D._rho(U))
    best = float(gap.max())

    def f(x):
        nx = np.linalg.norm(x)
        if nx == 0:
            return 0.0
        u = (x / nx)[None, :]
        return -abs(K._rho(u)[0] - D._rho(u)[0])

    for i in np.argsort(gap)[-4:]:
        res = minimize(f, U[i], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 400 * n})
        best = max(best, -float(res.fun))
    return best


# ---------------------------------------------------------------------------
# JSON descriptors
# ---------------------------------------------------------------------------

def body_to_dict(body):
    return body.to_dict()


def body_from_dict(d):
    """Rebuild a body from its JSON descriptor."""
    try:
        kind = d["type"]
    except (KeyError, TypeError):
        raise BodyError("body descriptor needs a 'type' field") from None
    dim = d.get("dim")

    def need_dim():
        if dim is None:
            raise BodyError(f"{kind} descriptor needs 'dim'")
        return int(dim)

    if kind == "ball":
        body = Ball(need_dim(), float(d.get("radius", 1.0)))
    elif kind == "ellipsoid":
        body = Ellipsoid(np.array(d["matrix"], dtype=float))
    elif kind == "cube":
        body = Cube(need_dim(), float(d.get("half_side", 0.5)))
    elif kind == "cross_polytope":
        body = CrossPolytope(need_dim(), float(d.get("scale", 1.0)))
    elif kind == "lp_ball":
        p = d["p"]
        p = math.inf if isinstance(p, str) and p.lower() in ("inf", "infinity") else float(p)
        body = LpBall(need_dim(), p, float(d.get("scale", 1.0)))
    elif kind == "simplex":
        body = RegularSimplex(need_dim(), float(d.get("scale", 1.0)))
    elif kind == "hpolytope":
        body = HPolytope(np.array(d["normals"]), np.array(d["offsets"]))
    elif kind == "linear_image":
        body = LinearImage(np.array(d["matrix"], dtype=float), body_from_dict(d["inner"]))
    elif kind == "section":
        body = SectionBody(body_from_dict(d["inner"]), np.array(d["basis"], dtype=float))
    elif kind == "radial_sum":
        body = RadialSum(body_from_dict(d["first"]), body_from_dict(d["second"]))
    elif kind == "translate":
        body = Translate(np.array(d["shift"], dtype=float), body_from_dict(d["inner"]))
    else:
        raise BodyError(f"unknown body type {kind!r}")
    if dim is not None and body.dim != int(dim):
        raise BodyError(f"descriptor dim {dim} disagrees with body dimension {body.dim}")
    return body
