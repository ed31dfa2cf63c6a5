"""Barycenter, covariance, isotropic position and isotropic constant.

The isotropic constant is computed as

    L_K = det(Cov K)^{1/(2n)} / |K|^{1/n}

where Cov K is the covariance of the uniform distribution on K.  This is
invariant under translations, dilations and all of GL(n), and on a
volume-one centered body with Cov = L^2 Id it returns L, so it agrees with
the definition through the isotropic position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import LinearImage, Translate
from .estimate import Estimate
from .quadrature import volume
from .sampling import body_points

EIG_FLOOR = 1e-12
L_BATCHES = 20
_CHUNK = 1 << 16


class SingularCovariance(ValueError):
    pass


@dataclass
class BodyMoments:
    barycenter: np.ndarray
    covariance: np.ndarray
    volume: Estimate
    samples: int
    exact: bool
    # per-batch covariances (MC path only), used for standard errors
    batch_covs: np.ndarray | None = None

    def to_dict(self):
        return {"barycenter": self.barycenter.tolist(), "covariance": self.covariance.tolist(),
                "volume": self.volume.to_dict(), "samples": self.samples, "exact": self.exact}


def body_moments(body, N, rng, method="auto"):
    """Barycenter and covariance of the uniform distribution on K."""
    vol = volume(body, max(N, 2), rng.child(0), method)
    if method == "auto":
        m = body.exact_moments()
        if m is not None:
            bar, cov = m
            return BodyMoments(np.asarray(bar, float), np.asarray(cov, float), vol, N, True)
    n = body.dim
    if N < 2 * L_BATCHES:
        raise ValueError(f"need at least {2 * L_BATCHES} samples for moments")
    g = rng.child(1).generator()
    pts = np.empty((N, n))
    filled = 0
    while filled < N:
        take = min(_CHUNK, N - filled)
        x, _ = body_points(body, take, g)
        pts[filled:filled + take] = x
        filled += take
    bar = pts.mean(axis=0)
    cov = np.cov(pts, rowvar=False, ddof=1).reshape(n, n)
    cov = 0.5 * (cov + cov.T)
    batches = np.array_split(pts, L_BATCHES)
    bcov = np.array([np.cov(b, rowvar=False, ddof=1).reshape(n, n) for b in batches])
    return BodyMoments(bar, cov, vol, N, False, bcov)


def _l_from(cov, vol, n):
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise SingularCovariance("covariance is singular")
    return math.exp(logdet / (2 * n)) / vol ** (1.0 / n)


def isotropic_constant(body, N, rng, method="auto", moments=None):
    """L_K = det(cov)^{1/(2n)} / |K|^{1/n}; stderr from batch means plus the
    volume uncertainty."""
    n = body.dim
    mom = moments if moments is not None else body_moments(body, N, rng, method)
    L = _l_from(mom.covariance, mom.volume.value, n)
    if mom.exact and mom.volume.exact:
        return Estimate.of(L, mom.samples)
    var = 0.0
    if mom.batch_covs is not None:
        # log det is what fluctuates; batches see B times the variance
        logs = np.array([np.linalg.slogdet(c)[1] for c in mom.batch_covs]) / (2 * n)
        var += L**2 * logs.var(ddof=1) / len(logs)
    var += (L / n * mom.volume.rel_stderr) ** 2 if mom.volume.stderr else 0.0
    return Estimate(L, math.sqrt(var), mom.samples, False)


def inv_sqrt_psd(C):
    """C^{-1/2} by symmetric eigendecomposition with a relative eigenvalue floor."""
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    if w[-1] <= 0:
        raise SingularCovariance("covariance is not positive definite")
    w = np.maximum(w, EIG_FLOOR * w[-1])
    return (V / np.sqrt(w)) @ V.T


def isotropy_deviation(cov):
    """||cov - (tr/n) Id||_op / (tr/n)."""
    n = cov.shape[0]
    t = np.trace(cov) / n
    return float(np.linalg.norm(cov - t * np.eye(n), 2) / t)


@dataclass
class IsotropicPosition:
    """T(K - bar) has volume one and (up to sampling error) scalar covariance."""

    matrix: np.ndarray
    shift: np.ndarray
    image: object
    L: Estimate
    certificate: float
    moments: BodyMoments

    def to_dict(self):
        return {"T": self.matrix.tolist(), "shift": self.shift.tolist(),
                "L": self.L.to_dict(), "certificate": self.certificate,
                "exact": self.moments.exact}


def isotropic_position(body, N, rng, method="auto"):
    """Whitening map T = s * cov^{-1/2} (after recentring), with s fixed by
    |T(K - bar)| = 1.  The certificate is measured on fresh samples of the
    image (or exactly when closed-form moments exist)."""
    n = body.dim
    mom = body_moments(body, N, rng.child(0), method)
    W = inv_sqrt_psd(mom.covariance)
    logdetW = np.linalg.slogdet(W)[1]
    s = math.exp(-(logdetW + math.log(mom.volume.value)) / n)
    T = s * W
    # origin-symmetric bodies are centered exactly; do not shift by noise
    shift = np.zeros(n) if body.is_symmetric else -mom.barycenter
    inner = body if np.all(shift == 0) else Translate(shift, body)
    image = LinearImage(T, inner)
    L = isotropic_constant(body, N, rng, method, moments=mom)
    check = body_moments(image, N, rng.child(1), method)
    cert = isotropy_deviation(check.covariance)
    return IsotropicPosition(T, shift, image, L, cert, mom)
