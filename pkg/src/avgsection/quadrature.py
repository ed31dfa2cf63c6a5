"""Spherical Monte-Carlo integration primitives.

Measure conventions used throughout the package:

* ``sigma`` -- the rotation-invariant probability measure on S^{d-1};
* ``dtheta`` -- the surface measure on S^{d-1}, of total mass d * omega_d;
* ``nu`` -- the Haar probability measure on a Grassmannian.

Every function states which one it integrates against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bodies import section_body, unit_ball_volume
from .estimate import CHUNK, Estimate, RunningMean
from .sampling import sphere_points

__all__ = [
    "unit_ball_volume", "One", "NormPower", "Gaussian", "density_from_spec",
    "sphere_mean", "radial_moment", "volume", "section_volume",
    "weighted_radial_integral", "mean_width", "m_value",
]


# ---------------------------------------------------------------------------
# densities (even, continuous, non-negative, radial)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class One:
    def __call__(self, x):
        return np.ones(x.shape[0])

    def radial_profile(self, r):
        return np.ones_like(r)

    def to_dict(self):
        return {"type": "one"}


@dataclass(frozen=True)
class NormPower:
    """f(x) = |x|^e (only evaluated away from the origin)."""

    exponent: float

    def __call__(self, x):
        return np.linalg.norm(x, axis=1) ** self.exponent

    def radial_profile(self, r):
        return np.asarray(r, dtype=float) ** self.exponent

    def to_dict(self):
        return {"type": "norm_power", "exponent": self.exponent}


@dataclass(frozen=True)
class Gaussian:
    """f(x) = exp(-|x|^2 / (2 s^2))."""

    s: float

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("Gaussian width must be positive")

    def __call__(self, x):
        return np.exp(-np.einsum("ij,ij->i", x, x) / (2.0 * self.s**2))

    def radial_profile(self, r):
        r = np.asarray(r, dtype=float)
        return np.exp(-(r**2) / (2.0 * self.s**2))

    def to_dict(self):
        return {"type": "gaussian", "s": self.s}


def density_from_spec(spec):
    """Parse ``one``, ``norm_power:<e>`` or ``gaussian:<s>`` (or a dict)."""
    if isinstance(spec, dict):
        kind = spec.get("type")
        if kind == "one":
            return One()
        if kind == "norm_power":
            return NormPower(float(spec["exponent"]))
        if kind == "gaussian":
            return Gaussian(float(spec["s"]))
        raise ValueError(f"unknown density {kind!r}")
    name, _, arg = str(spec).partition(":")
    if name == "one":
        return One()
    if name == "norm_power":
        return NormPower(float(arg))
    if name == "gaussian":
        return Gaussian(float(arg))
    raise ValueError(f"unknown density {spec!r}")


# ---------------------------------------------------------------------------
# core sphere averages
# ---------------------------------------------------------------------------

def _check_count(N):
    if N < 2:
        raise ValueError(f"need at least 2 samples, got {N}")


def sphere_mean(fn, d, N, rng):
    """Mean of fn(U) over N sigma-uniform directions U on S^{d-1}.

    Directions are drawn in fixed chunks from a single generator so the
    result is a deterministic function of (fn, d, N, rng).
    """
    _check_count(N)
    g = rng.generator()
    acc = RunningMean()
    left = N
    while left > 0:
        m = min(CHUNK, left)
        acc.push(fn(sphere_points(d, m, g)))
        left -= m
    return acc.estimate()


def radial_moment(body, p, N, rng, method="auto"):
    """int rho_K^p dsigma over S^{n-1}.

    ``method="auto"`` uses the closed form when the radial function is
    constant; ``"mc"`` forces sampling.
    """
    if p < 0:
        raise ValueError("moment order must be >= 0")
    _check_count(N)
    c = body.constant_radial()
    if method == "auto" and c is not None:
        return Estimate.of(c**p, N)
    return sphere_mean(lambda U: body._rho(U) ** p, body.dim, N, rng)


def volume(body, N, rng, method="auto"):
    """|K| = omega_n int rho^n dsigma, closed form where available."""
    _check_count(N)
    if method == "auto":
        v = body.exact_volume()
        if v is not None:
            return Estimate.of(v, N)
    n = body.dim
    return unit_ball_volume(n) * radial_moment(body, n, N, rng, method)


def section_volume(body, E, N, rng, method="auto"):
    """|K ∩ E| = omega_m int_{S_E} rho^m dsigma_E, closed form where available."""
    S = section_body(body, E)
    return volume(S, N, rng, method)


def weighted_radial_integral(body, f, k, N, rng, E=None, method="auto"):
    """int rho_K^{d-1}(t) f(rho_K(t) t) dtheta(t) over S^{d-1}.

    Without ``E`` the integral is over S^{n-1} (d = n); with ``E`` of
    dimension n-k it is over S^{n-1} ∩ E (d = n-k).  ``dtheta`` is the
    surface measure of total mass d * omega_d.
    """
    n = body.dim
    if not 0 <= k <= n - 1:
        raise ValueError(f"codimension must satisfy 0 <= k <= n-1, got {k}")
    if E is None:
        d = n
        B = None
    else:
        B = E.basis if hasattr(E, "basis") else np.asarray(E, dtype=float)
        d = B.shape[1]
        if d != n - k:
            raise ValueError(f"subspace has dimension {d}, expected n-k = {n - k}")
    mass = d * unit_ball_volume(d)
    c = body.constant_radial()
    if method == "auto" and c is not None and hasattr(f, "radial_profile"):
        val = c ** (d - 1) * float(f.radial_profile(np.array([c]))[0])
        return Estimate.of(mass * val, N)

    def integrand(U):
        X = U if B is None else U @ B.T
        rho = body._rho(X)
        return rho ** (d - 1) * f(rho[:, None] * X)

    return mass * sphere_mean(integrand, d, N, rng)


def mean_width(body, N, rng, method="auto"):
    """w(K) = int h_K dsigma."""
    _check_count(N)
    c = body.constant_radial()
    if method == "auto" and c is not None and body.is_convex:
        return Estimate.of(c, N)
    body._h(np.eye(body.dim)[:1])  # raises UnsupportedOracle early
    return sphere_mean(body._h, body.dim, N, rng)


def m_value(body, N, rng, method="auto"):
    """M(K) = int 1/rho_K dsigma."""
    _check_count(N)
    c = body.constant_radial()
    if method == "auto" and c is not None:
        return Estimate.of(1.0 / c, N)
    return sphere_mean(lambda U: 1.0 / body._rho(U), body.dim, N, rng)
