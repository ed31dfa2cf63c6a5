"""Average-section functionals, dual mixed volumes, dual affine
quermassintegrals and Grassmannian scans.

as(K)        = omega_{n-1} int rho_K^{n-1} dsigma
as_r(K)      = omega_{n-r} int rho_K^{n-r} dsigma
as(K ∩ E)    = omega_{m-1} int_{S_E} rho_K^{m-1} dsigma_E      (m = dim E)
V_j(K, D)    = omega_n int rho_K^{n-j} rho_D^j dsigma
R_k(K)       = |K|^{-(n-k)} int_{Gr_{n-k}} |K ∩ E|^n dnu
Phi_k(K)     = (omega_n / omega_{n-k}) (int_{Gr_{n-k}} |K ∩ E|^n dnu)^{1/n}

Two independent estimators are kept for as(K) (one sphere average versus
the average of section volumes over random normals) and for the Haar mean
of as(K ∩ E); each serves as an oracle for the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import BodyError, SectionBody, Subspace, section_body, unit_ball_volume
from .estimate import Estimate, mean_estimate
from .quadrature import One, radial_moment, volume
from .sampling import frame_bases, grassmann_bases, sphere_points

# keep X = (subspaces x directions x n) blocks around this many rows
_ROWS = 1 << 17
# flag R_k / Phi_k when a Monte-Carlo section volume has n * se / v above this
DELTA_FLAG = 0.2
REEVAL_FACTOR = 4
REFINE_STARTS = 8
POLISH_STARTS = 3
# independent subspaces used for the control-variate mean in R_k / Phi_k
CONTROL_SAMPLES = 200_000


def _omega(m):
    return unit_ball_volume(m)


def _check_k(n, k, hi):
    if not 1 <= k <= hi:
        raise ValueError(f"codimension k={k} outside [1, {hi}] for n={n}")


def _basis(E):
    return E.basis if isinstance(E, Subspace) else np.asarray(E, dtype=float)


# ---------------------------------------------------------------------------
# single-sphere estimators
# ---------------------------------------------------------------------------

def avg_section_r(body, r, N, rng, method="auto"):
    """as_r(K) = omega_{n-r} int rho^{n-r} dsigma."""
    n = body.dim
    if not 1 <= r <= n - 1:
        raise ValueError(f"codimension r={r} outside [1, {n - 1}]")
    return _omega(n - r) * radial_moment(body, n - r, N, rng, method)


def avg_section(body, N, rng, method="auto"):
    """as(K), the mean volume of central hyperplane sections."""
    if body.dim < 2:
        raise ValueError("as(K) needs dimension >= 2")
    return avg_section_r(body, 1, N, rng, method)


def avg_section_in_subspace(body, E, N, rng, method="auto"):
    """as(K ∩ E) computed as as() of the section body."""
    m = _basis(E).shape[1]
    if m < 2:
        raise ValueError("as(K ∩ E) is undefined for dim E < 2")
    return avg_section(section_body(body, E), N, rng, method)


def mean_avg_section_sphere(body, k, N, rng, method="auto"):
    """Haar mean of as(K ∩ E) over Gr_{n-k} via omega_{n-k-1} int rho^{n-k-1} dsigma."""
    n = body.dim
    _check_k(n, k, n - 2)
    return _omega(n - k - 1) * radial_moment(body, n - k - 1, N, rng, method)


def dual_mixed_volume(bodies, N, rng, method="auto"):
    """V(K_1, ..., K_n) = omega_n int prod rho_{K_i} dsigma."""
    bodies = list(bodies)
    n = bodies[0].dim
    if len(bodies) != n or any(b.dim != n for b in bodies):
        raise ValueError("dual mixed volume needs n bodies in R^n")
    consts = [b.constant_radial() for b in bodies]
    if method == "auto" and all(c is not None for c in consts):
        return Estimate.of(_omega(n) * math.prod(consts), N)
    from .quadrature import sphere_mean

    def integrand(U):
        out = np.ones(U.shape[0])
        for b in bodies:
            out = out * b._rho(U)
        return out

    return _omega(n) * sphere_mean(integrand, n, N, rng)


def dual_mixed_volume_j(K, D, j, N, rng, method="auto"):
    """V_j(K, D) = omega_n int rho_K^{n-j} rho_D^j dsigma."""
    n = K.dim
    if D.dim != n:
        raise BodyError("bodies of different dimension")
    if not 0 <= j <= n:
        raise ValueError(f"index j={j} outside [0, {n}]")
    cK, cD = K.constant_radial(), D.constant_radial()
    if method == "auto" and cK is not None and cD is not None:
        return Estimate.of(_omega(n) * cK ** (n - j) * cD**j, N)
    from .quadrature import sphere_mean
    return _omega(n) * sphere_mean(lambda U: K._rho(U) ** (n - j) * D._rho(U) ** j, n, N, rng)


# ---------------------------------------------------------------------------
# per-subspace integrals
# ---------------------------------------------------------------------------

def _integrand(body, X, p, density):
    rho = body._rho(X)
    val = rho**p
    if density is not None and not isinstance(density, One):
        val = val * density(rho[:, None] * X)
    return val


def subspace_means(body, bases, phis, p, density=None):
    """Mean over directions of rho(B phi)^p f(rho B phi) for each basis.

    ``phis`` is either (D, m) -- the same directions for every subspace --
    or (S, D, m).  Returns (means, variances) of shape (S,).
    """
    S, n, m = bases.shape
    shared = phis.ndim == 2
    D = phis.shape[-2]
    per = max(1, _ROWS // max(D, 1))
    means = np.empty(S)
    var = np.empty(S)
    for lo in range(0, S, per):
        hi = min(S, lo + per)
        if shared:
            X = np.einsum("snm,dm->sdn", bases[lo:hi], phis)
        else:
            X = np.einsum("snm,sdm->sdn", bases[lo:hi], phis[lo:hi])
        vals = _integrand(body, X.reshape(-1, n), p, density).reshape(hi - lo, D)
        means[lo:hi] = vals.mean(axis=1)
        var[lo:hi] = vals.var(axis=1, ddof=1) if D > 1 else np.inf
    return means, var


def _cheap_closed_form(S):
    return not isinstance(S, SectionBody) or S.dim == 1


def section_volumes(body, bases, Ndir, rng, exact="auto"):
    """|K ∩ E| for each basis in ``bases`` (S, n, m).

    ``exact``: ``"auto"`` uses closed forms and exact polytope sections,
    ``"closed"`` only closed forms of reduced sections, ``"none"`` samples
    every section.  Returns (values, stderrs, exact mask).
    """
    S, n, m = bases.shape
    vals = np.empty(S)
    ses = np.zeros(S)
    is_exact = np.zeros(S, dtype=bool)
    todo = []
    const = body.constant_radial()
    for s in range(S):
        if exact != "none" and const is not None:
            vals[s] = _omega(m) * const**m
            is_exact[s] = True
            continue
        v = None
        if exact != "none":
            sec = section_body(body, bases[s])
            if exact == "auto" or _cheap_closed_form(sec):
                v = sec.exact_volume()
        if v is None:
            todo.append(s)
        else:
            vals[s] = v
            is_exact[s] = True
    if todo:
        g = rng.generator()
        idx = np.array(todo)
        phis = sphere_points(m, len(todo) * Ndir, g).reshape(len(todo), Ndir, m)
        mu, var = subspace_means(body, bases[idx], phis, m)
        w = _omega(m)
        vals[idx] = w * mu
        ses[idx] = w * np.sqrt(var / Ndir)
    return vals, ses, is_exact


# ---------------------------------------------------------------------------
# two-stage estimators (Haar subspaces, then sections)
# ---------------------------------------------------------------------------

def avg_section_two_stage(body, r, Nsub, Ndir, rng, exact="closed"):
    """as_r(K) as the mean of |K ∩ E| over Nsub Haar subspaces E of dim n-r.

    The between-subspace sample variance already contains the per-section
    noise, so stderr = sd / sqrt(Nsub).
    """
    n = body.dim
    if not 1 <= r <= n - 1:
        raise ValueError(f"codimension r={r} outside [1, {n - 1}]")
    if Nsub < 2:
        raise ValueError("need at least 2 subspaces")
    bases = grassmann_bases(n, n - r, Nsub, rng.child(0))
    vals, _, ex = section_volumes(body, bases, Ndir, rng.child(1), exact)
    return mean_estimate(vals, exact=bool(np.all(ex)) and np.ptp(vals) == 0)


def mean_avg_section(body, k, Nsub, Ndir, rng):
    """Haar mean of as(K ∩ E) over Gr_{n-k}, from Nsub subspaces with
    independent direction samples in each."""
    n = body.dim
    _check_k(n, k, n - 2)
    m = n - k
    if Nsub < 2:
        raise ValueError("need at least 2 subspaces")
    c = body.constant_radial()
    if c is not None:
        return Estimate.of(_omega(m - 1) * c ** (m - 1), Nsub)
    bases = grassmann_bases(n, m, Nsub, rng.child(0))
    phis = sphere_points(m, Nsub * Ndir, rng.child(1).generator()).reshape(Nsub, Ndir, m)
    mu, _ = subspace_means(body, bases, phis, m - 1)
    return _omega(m - 1) * mean_estimate(mu)


# ---------------------------------------------------------------------------
# dual affine quermassintegrals
# ---------------------------------------------------------------------------

@dataclass
class SectionPowerSample:
    """Shared draw behind R_k and Phi_k: section volumes over Haar subspaces,
    drawn as whole orthogonal frames of ``group`` subspaces each.

    ``control`` optionally holds the same-subspace values of |Ell ∩ E|^n for
    the body's second-moment ellipsoid, plus an independent large-sample
    estimate of their mean.  ``aux`` optionally holds per-subspace means of
    rho^n over directions in E, whose Haar mean |K| / omega_n is known.
    ``power_mean`` regresses on whichever controls are present.
    """

    n: int
    k: int
    values: np.ndarray
    stderrs: np.ndarray
    exact: np.ndarray
    volume: Estimate
    group: int = 1
    control: np.ndarray | None = None
    control_mean: Estimate | None = None
    aux: np.ndarray | None = None
    aux_mean: Estimate | None = None

    @property
    def delta_ok(self):
        v = self.values
        return bool(np.all(self.n * self.stderrs <= DELTA_FLAG * v))

    def power_mean(self):
        """Estimate of int |K ∩ E|^n dnu (stderr over frame means)."""
        p = self.values**self.n
        if np.all(self.exact) and np.ptp(p) == 0:
            return Estimate.of(float(p[0]), p.size)
        f = p.reshape(-1, self.group).mean(axis=1)
        J = f.size
        cols, means = [], []
        for c, mu in ((self.control, self.control_mean), (self.aux, self.aux_mean)):
            if c is None:
                continue
            c = c.reshape(-1, self.group).mean(axis=1)
            # an isotropic control is constant up to rounding: no information
            if np.ptp(c) <= 1e-9 * abs(c.mean()):
                continue
            cols.append(c)
            means.append(mu)
        if not cols or J <= len(cols) + 1:
            est = mean_estimate(f)
        else:
            C = np.column_stack(cols)
            beta = np.linalg.lstsq(C - C.mean(axis=0), f - f.mean(), rcond=None)[0]
            resid = f - C @ beta
            value = resid.mean() + sum(b * mu.value for b, mu in zip(beta, means))
            var = resid.var(ddof=len(cols) + 1) / J
            var += sum((b * mu.stderr) ** 2 for b, mu in zip(beta, means))
            est = Estimate(float(value), math.sqrt(var), p.size, False)
        est = Estimate(est.value, est.stderr, p.size, False)
        return est if self.delta_ok else est.with_flags("delta-method-unreliable")


def _second_moment_form(body):
    """A = (E x x^T)^{-1} from closed-form moments, or None."""
    mom = body.exact_moments()
    if mom is None:
        return None
    bar, cov = mom
    S = np.asarray(cov, float) + np.outer(bar, bar)
    return np.linalg.inv(0.5 * (S + S.T))


def _ellipsoid_section_powers(A, bases, n):
    """|{x^T A x <= 1} ∩ E|^n for each basis, up to a common factor."""
    G = np.einsum("snm,nk,skl->sml", bases, A, bases)
    _, logdet = np.linalg.slogdet(G)
    return np.exp(-0.5 * n * logdet)


def section_power_sample(body, k, Nsub, Ndir, rng, exact="auto", control=CONTROL_SAMPLES):
    """Section volumes over at least Nsub subspaces of Gr_{n-k}, grouped in
    random orthogonal frames (every coordinate (n-k)-subspace of a Haar
    rotation).  With ``control`` > 0 and closed-form body moments, the
    second-moment ellipsoid serves as a control variate whose mean is
    estimated on ``control`` independent subspaces; with a closed-form
    volume, the section mean of rho^n is a second control with known mean."""
    n = body.dim
    _check_k(n, k, n - 1)
    if Nsub < 2:
        raise ValueError("need at least 2 subspaces")
    m = n - k
    group = math.comb(n, m)
    frames = max(2, -(-Nsub // group))
    bases, group = frame_bases(n, m, frames, rng.child(0))
    vals, ses, ex = section_volumes(body, bases, Ndir, rng.child(1), exact)
    vol = volume(body, max(Ndir * 50, 2), rng.child(2))
    sp = SectionPowerSample(n, k, vals, ses, ex, vol, group)
    if not control or body.constant_radial() is not None:
        return sp
    A = _second_moment_form(body)
    if A is not None:
        sp.control = _ellipsoid_section_powers(A, bases, n)
        big = []
        cf = max(2, -(-control // group))
        gen = rng.child(3).generator()
        for lo in range(0, cf, 4096):
            cb, _ = frame_bases(n, m, min(4096, cf - lo), gen)
            big.append(_ellipsoid_section_powers(A, cb, n).reshape(-1, group).mean(axis=1))
        sp.control_mean = mean_estimate(np.concatenate(big))
    if vol.exact:
        if m == 1:
            # both endpoints of the segment
            phis = np.array([[1.0], [-1.0]])
        else:
            phis = sphere_points(m, len(bases) * Ndir, rng.child(4).generator())
            phis = phis.reshape(len(bases), Ndir, m)
        sp.aux, _ = subspace_means(body, bases, phis, n)
        sp.aux_mean = Estimate.of(vol.value / _omega(n))
    return sp


def dual_quermass_R(body, k, Nsub, Ndir, rng, exact="auto", sample=None):
    """R_k(K) = |K|^{-(n-k)} int |K ∩ E|^n dnu_{n-k}."""
    n = body.dim
    sp = sample if sample is not None else section_power_sample(body, k, Nsub, Ndir, rng, exact)
    return sp.power_mean() / sp.volume ** (n - k)


def dual_affine_quermass_Phi(body, k, Nsub, Ndir, rng, exact="auto", sample=None):
    """Phi_k(K) = (omega_n / omega_{n-k}) (int |K ∩ E|^n dnu)^{1/n}."""
    n = body.dim
    sp = sample if sample is not None else section_power_sample(body, k, Nsub, Ndir, rng, exact)
    return (_omega(n) / _omega(n - k)) * sp.power_mean() ** (1.0 / n)


def ball_R(n, k):
    """R_k of the Euclidean ball: omega_{n-k}^n / omega_n^{n-k}."""
    return math.exp(n * math.log(_omega(n - k)) - (n - k) * math.log(_omega(n)))


# ---------------------------------------------------------------------------
# Grassmannian scans
# ---------------------------------------------------------------------------

@dataclass
class GrassmannScan:
    """Sampled values of a subspace functional over Haar subspaces.

    ``values``/``bases`` are the Haar draws (ranked on shared directions);
    ``argmax`` indexes the best of them.  ``best_basis`` is that subspace
    after local refinement and ``max`` its value re-estimated on fresh,
    larger direction samples.  ``mean`` averages the listed values.
    """

    k: int
    bases: np.ndarray
    values: list
    argmax: int
    max: Estimate
    mean: Estimate
    best_basis: np.ndarray
    refine_steps: int = 0
    candidates_used: int = 0
    extra: dict = field(default_factory=dict)

    def subspaces(self):
        return [Subspace(B) for B in self.bases]

    def to_dict(self, include_values=False):
        d = {
            "k": self.k,
            "nsub": len(self.values),
            "argmax": self.argmax,
            "max": self.max.to_dict(),
            "mean": self.mean.to_dict(),
            "best_basis": self.best_basis.tolist(),
            "refine_steps": self.refine_steps,
        }
        if include_values:
            d["values"] = [v.to_dict() for v in self.values]
        return d


def _cayley(A):
    n = A.shape[0]
    I = np.eye(n)
    return np.linalg.solve(I - 0.5 * A, I + 0.5 * A)


def _random_skew(n, g):
    G = g.standard_normal((n, n))
    A = G - G.T
    return A / np.linalg.norm(A, 2)


def _climb(objective, best, best_val, refine, step, g):
    """Random Cayley-rotation hill climb with step halving on non-improvement."""
    n = best.shape[0]
    steps = 0
    for _ in range(refine):
        A = step * _random_skew(n, g)
        improved = False
        for sign in (1.0, -1.0):
            cand, _ = np.linalg.qr(_cayley(sign * A) @ best)
            val = objective(cand)
            if val > best_val:
                best, best_val = cand, val
                improved = True
                steps += 1
                break
        if not improved:
            step *= 0.5
    return best, best_val, steps


def grassmann_max(body, k, Nsub, Ndir, refine, rng, p=None, weight=None, density=None,
                  candidates=None, step=0.3, starts=REFINE_STARTS):
    """Sampled-and-refined maximum of E -> weight * mean_{S_E} rho^p f(rho t).

    Ranking and refinement use one shared set of directions in R^m so the
    comparison between subspaces is not swamped by independent noise; the
    reported maximum is then re-estimated on REEVAL_FACTOR * Ndir fresh
    directions, so the value carries no selection bias. Its stderr adds the
    noise of the final climbing objective, which bounds how precisely the
    search can locate the maximizer.
    """
    n = body.dim
    m = n - k
    if not 1 <= m <= n:
        raise ValueError("invalid subspace dimension")
    if Nsub < 2 or Ndir < 2:
        raise ValueError("need at least 2 subspaces and 2 directions")
    p = m - 1 if p is None else p
    weight = _omega(m - 1) if weight is None else weight

    bases = grassmann_bases(n, m, Nsub, rng.child(0))
    phis = sphere_points(m, Ndir, rng.child(1).generator())
    mu, var = subspace_means(body, bases, phis, p, density)
    se = np.sqrt(var / Ndir)
    values = [Estimate(float(weight * a), float(weight * b), Ndir, False) for a, b in zip(mu, se)]

    # mean over the crossed (subspace x direction) design: row and column
    # effects both contribute to the variance of the grand mean
    const = body.constant_radial()
    if const is not None and (density is None or isinstance(density, One)):
        exact_val = weight * const**p
        values = [Estimate.of(exact_val, Ndir) for _ in values]
        mean = Estimate.of(exact_val, Nsub)
    else:
        X = np.einsum("snm,dm->sdn", bases, phis).reshape(-1, n)
        grid = _integrand(body, X, p, density).reshape(Nsub, Ndir)
        v_rows = grid.mean(axis=1).var(ddof=1) / Nsub
        v_cols = grid.mean(axis=0).var(ddof=1) / Ndir
        mean = Estimate(float(weight * grid.mean()), float(weight * math.sqrt(v_rows + v_cols)),
                        Nsub * Ndir, False)

    argmax = int(np.argmax(mu))

    def objective(B):
        return float(subspace_means(body, B[None], phis, p, density)[0][0])

    # hill climbing from a single start stalls in whichever basin the best
    # ranked subspace sits in; climbing from several of the top ranked
    # subspaces (and any supplied candidates) finds the global basin far
    # more reliably
    order = np.argsort(-mu, kind="stable")[: max(1, starts)]
    seeds = [(bases[i], float(mu[i])) for i in order]
    used = 0
    for C in candidates or ():
        C = _basis(C)
        seeds.append((C, objective(C)))
        used += 1

    steps = 0
    climbed = []
    for j, (B, val) in enumerate(seeds):
        if const is None:
            B, val, s = _climb(objective, B, val, refine, step, rng.child(2).child(j).generator())
            steps += s
        climbed.append((val, j, B))
    climbed.sort(key=lambda c: (-c[0], c[1]))
    best = climbed[0][2]

    if const is not None and (density is None or isinstance(density, One)):
        top = Estimate.of(weight * const**p, REEVAL_FACTOR * Ndir)
    else:
        # the climb partly follows the noise of its own direction sample;
        # polishing on a larger independent sample halves that offset
        polish = sphere_points(m, REEVAL_FACTOR * Ndir, rng.child(4).generator())

        def polished(B):
            return float(subspace_means(body, B[None], polish, p, density)[0][0])

        if const is None:
            # the shared sample can rank a lesser basin first, so the leading
            # climbers are all polished and compared on the larger sample
            top_val = -math.inf
            for i, (_, _, B) in enumerate(climbed[:POLISH_STARTS]):
                B, val, s = _climb(polished, B, polished(B), refine, 0.25 * step,
                                   rng.child(5).child(i).generator())
                steps += s
                if val > top_val:
                    best, top_val = B, val
        _, pv = subspace_means(body, best[None], polish, p, density)
        fresh = sphere_points(m, REEVAL_FACTOR * Ndir, rng.child(3).generator())
        fm, fv = subspace_means(body, best[None], fresh, p, density)
        # the winner is only located to within the noise of the objective it
        # was selected on, so that noise enters the reported error as well
        se = math.sqrt(fv[0] / fresh.shape[0] + pv[0] / polish.shape[0])
        top = Estimate(float(weight * fm[0]), float(weight * se), fresh.shape[0], False)
    return GrassmannScan(k, bases, values, argmax, top, mean, best, steps, used)


def grassmann_max_avg_section(body, k, Nsub, Ndir, refine, rng, candidates=None):
    """Scan of as(K ∩ E) over E in Gr_{n-k} (1 <= k <= n-2)."""
    n = body.dim
    _check_k(n, k, n - 2)
    return grassmann_max(body, k, Nsub, Ndir, refine, rng, candidates=candidates)


def ellipsoid_axes_candidate(body, k):
    """Span of the n-k longest principal axes of an ellipsoidal body."""
    M = body.as_ellipsoid_matrix()
    _, vecs = np.linalg.eigh(M)
    return vecs[:, : body.dim - k]


def gamma_witness(body, k, Nsub, Ndir, rng, refine=50, N=None, candidates=None, scan=None):
    """[as(K) / (|K|^{k/n} max_E as(K ∩ E))]^{1/k} with the sampled max.

    The sampled max can only fall short of the true max, so this
    over-estimates the body's witness for the smallest admissible constant.
    """
    n = body.dim
    _check_k(n, k, n - 2)
    N = N if N is not None else max(Nsub * Ndir // 10, 10_000)
    a = avg_section(body, N, rng.child(0))
    vol = volume(body, N, rng.child(1))
    if scan is None:
        scan = grassmann_max_avg_section(body, k, Nsub, Ndir, refine, rng.child(2), candidates)
    return (a / (vol ** (k / n) * scan.max)) ** (1.0 / k)
