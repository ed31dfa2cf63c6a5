"""Registered checks: exact-constant inequalities and identities, invariance
tests and empirical estimates of unnamed constants."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..bodies import Ball, CrossPolytope, LinearImage, section_body, unit_ball_volume
from ..estimate import Estimate, delta_method
from ..functionals import (
    avg_section, avg_section_r, ball_R, dual_mixed_volume_j, dual_quermass_R,
    grassmann_max, mean_avg_section, mean_avg_section_sphere,
    avg_section_two_stage, gamma_witness, subspace_means,
)
from ..isotropic import isotropic_constant, isotropic_position
from ..quadrature import density_from_spec, m_value, section_volume, volume
from ..sampling import grassmann_bases, sphere_points
from .constants import h, paper_constant
from .report import (CheckReport, FAIL, PASS, equality_verdict, inequality_verdict,
                     window_verdict)

w = unit_ball_volume


class ClassViolation(ValueError):
    """The body is outside the class a check requires."""


@dataclass(frozen=True)
class Budgets:
    samples: int = 100_000
    subspaces: int = 500
    ndir: int = 1000
    refine: int = 50
    moments: int = 200_000

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not (isinstance(v, int) and v > 0) and not (k == "refine" and v == 0):
                raise ValueError(f"budget {k} must be a positive integer")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {k: int(v) for k, v in (d or {}).items() if k in cls.__dataclass_fields__}
        unknown = set(d or {}) - set(known)
        if unknown:
            raise ValueError(f"unknown budget keys: {sorted(unknown)}")
        return cls(**known)


@dataclass
class Context:
    body: object
    label: str
    n: int
    k: int | None
    r: int | None
    density: str | None
    budgets: Budgets
    rng: object
    T: np.ndarray | None = None
    options: dict = field(default_factory=dict)

    def params(self):
        p = {"n": self.n, "k": self.k, "r": self.r}
        if self.density is not None:
            p["density"] = self.density
        p.update({"seed": self.rng.seed, "stream": self.rng.stream, "path": list(self.rng.path),
                  "budgets": self.budgets.to_dict()})
        if self.T is not None:
            p["T"] = np.asarray(self.T).tolist()
        if self.options:
            p["options"] = dict(self.options)
        return p


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    kind: str              # exact | invariance | empirical
    requires: str          # any | convex | centered | symmetric | ellipsoidal | ball
    k_range: object        # None or callable n -> (lo, hi)
    fn: object
    summary: str
    uses_r: bool = False
    uses_density: bool = False
    window: tuple | None = None

    def ks(self, n, wanted):
        if self.k_range is None:
            return [None]
        lo, hi = self.k_range(n)
        return [k for k in wanted if lo <= k <= hi]


REGISTRY: dict[str, CheckSpec] = {}


def register(check_id, kind, requires, k_range=None, **kw):
    def deco(fn):
        REGISTRY[check_id] = CheckSpec(check_id, kind, requires, k_range, fn, fn.__doc__ or "", **kw)
        return fn
    return deco


def _is_centered(body):
    if body.is_symmetric:
        return True
    m = body.exact_moments()
    if m is None:
        return False
    scale = max(body.circumradius_bound(), 1e-300)
    return bool(np.linalg.norm(m[0]) <= 1e-12 * scale)


def check_class(spec, body):
    req = spec.requires
    if req == "any":
        return
    if req == "ball":
        if body.constant_radial() is None:
            raise ClassViolation(f"{spec.check_id} applies to Euclidean balls only")
        return
    if req == "ellipsoidal":
        if not body.is_ellipsoidal:
            raise ClassViolation(f"{spec.check_id} needs a ball or ellipsoid (known d_ovr = 1)")
        return
    if not body.is_convex:
        raise ClassViolation(f"{spec.check_id} needs a convex body")
    if req == "symmetric" and not body.is_symmetric:
        raise ClassViolation(f"{spec.check_id} needs an origin-symmetric body")
    if req == "centered" and not _is_centered(body):
        raise ClassViolation(f"{spec.check_id} needs a centered body")


def _report(ctx, spec, lhs, rhs, verdict_info, constant=None, **details):
    slack, sig, verdict = verdict_info
    body = ctx.body.to_dict()
    if ctx.label:
        body = dict(body, label=ctx.label)
    return CheckReport(spec.check_id, spec.kind, body, ctx.params(), lhs, rhs, float(slack),
                       float(sig), verdict, None if constant is None else float(constant),
                       details)


def _empirical(ctx, spec, lhs, rhs, constant, **details):
    lo, hi = spec.window if spec.window else (0.0, math.inf)
    closed = spec.window is not None and spec.check_id != "gamma-witness"
    verdict = window_verdict(constant, lo, hi, closed=closed)
    sig = math.hypot(lhs.stderr, rhs.stderr)
    return _report(ctx, spec, lhs, rhs, (rhs.value - lhs.value, sig, verdict), constant,
                   **details)


def _flags(*ests):
    out = []
    for e in ests:
        for f in e.flags:
            if f not in out:
                out.append(f)
    return out


def _scan(ctx, k, **kw):
    b = ctx.budgets
    return grassmann_max(ctx.body, k, b.subspaces, b.ndir, b.refine, ctx.rng.child(90), **kw)


def _mc_n(ctx):
    return ctx.budgets.samples


def random_linear_map(n, cond, g):
    """Haar U, V and singular values spread evenly over [1, cond]."""
    U = np.linalg.qr(g.standard_normal((n, n)))[0]
    V = np.linalg.qr(g.standard_normal((n, n)))[0]
    s = np.linspace(1.0, cond, n)
    return (U * s) @ V.T


def random_rotation(n, g):
    Q, R = np.linalg.qr(g.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


# ---------------------------------------------------------------------------
# exact-constant registry
# ---------------------------------------------------------------------------

@register("ball-equality-1.3", "exact", "ball")
def _ball_equality(ctx, spec):
    """as(B) = b_{n,1} |B|^{1/n} as(B ∩ xi^perp): the sharp case."""
    K, n = ctx.body, ctx.n
    lhs = avg_section(K, _mc_n(ctx), ctx.rng.child(0))
    xi = sphere_points(n, 1, ctx.rng.child(1).generator())[0]
    from ..sampling import complement
    E = complement(xi[:, None])
    sec = avg_section(section_body(K, E), _mc_n(ctx), ctx.rng.child(2))
    vol = volume(K, _mc_n(ctx), ctx.rng.child(3))
    rhs = paper_constant("b1", n) * vol ** (1.0 / n) * sec
    return _report(ctx, spec, lhs, rhs, equality_verdict(lhs, rhs))


def _bp_common(ctx, spec, lhs, const, scan_kw):
    K, n, k = ctx.body, ctx.n, ctx.k
    vol = volume(K, _mc_n(ctx), ctx.rng.child(1))
    scan = _scan(ctx, k, **scan_kw)
    rhs = const**k * vol ** (k / n) * scan.max
    return _report(ctx, spec, lhs, rhs, inequality_verdict(lhs, rhs), d_ovr=1.0,
                   scan_argmax_basis=scan.best_basis.tolist())


@register("thm-1.3-bp", "exact", "ellipsoidal", lambda n: (1, n - 2))
def _thm13(ctx, spec):
    """as(K) <= b_{n,k}^k |K|^{k/n} max_E as(K ∩ E) with d_ovr = 1."""
    lhs = avg_section(ctx.body, _mc_n(ctx), ctx.rng.child(0))
    return _bp_common(ctx, spec, lhs, paper_constant("b", ctx.n, ctx.k), {})


@register("thm-1.2-bp", "exact", "ellipsoidal", lambda n: (1, n - 2), uses_density=True)
def _thm12(ctx, spec):
    """Weighted form: int rho^{n-1} f(rho t) dt <= c^k |K|^{k/n} max_E int_{S_E} rho^{n-k-1} f dt."""
    from ..quadrature import weighted_radial_integral
    K, n, k = ctx.body, ctx.n, ctx.k
    f = density_from_spec(ctx.density or "one")
    lhs = weighted_radial_integral(K, f, 0, _mc_n(ctx), ctx.rng.child(0))
    m = n - k
    return _bp_common(ctx, spec, lhs, paper_constant("c", n, k),
                      {"p": m - 1, "weight": m * w(m), "density": f})


@register("thm-1.5-bp", "exact", "ellipsoidal", lambda n: (1, n - 3), uses_r=True)
def _thm15(ctx, spec):
    """as_r(K) <= phi_{n,k,r}^k |K|^{k/n} max_E as_r(K ∩ E) with d_ovr = 1."""
    K, n, k, r = ctx.body, ctx.n, ctx.k, ctx.r
    if not 1 <= r < n - k:
        raise ClassViolation(f"thm-1.5-bp needs 1 <= r < n-k, got r={r}")
    lhs = avg_section_r(K, r, _mc_n(ctx), ctx.rng.child(0))
    m = n - k
    return _bp_common(ctx, spec, lhs, paper_constant("phi", n, k, r),
                      {"p": m - r, "weight": w(m - r)})


@register("meyer", "exact", "convex")
def _meyer(ctx, spec):
    """(n!/n^n) prod_i |K ∩ e_i^perp| <= |K|^{n-1}, standard basis."""
    K, n = ctx.body, ctx.n
    N = max(_mc_n(ctx) // 4, 1000)
    prod = Estimate.of(math.factorial(n) / n**n)
    I = np.eye(n)
    for i in range(n):
        E = np.delete(I, i, axis=1)
        prod = prod * section_volume(K, E, N, ctx.rng.child(10 + i))
    vol = volume(K, _mc_n(ctx), ctx.rng.child(0))
    rhs = vol ** (n - 1)
    return _report(ctx, spec, prod, rhs, inequality_verdict(prod, rhs), basis="standard")


def _same_sample(ctx, exps):
    """Columns rho^e for each exponent e over one set of sphere directions."""
    K, n = ctx.body, ctx.n
    U = sphere_points(n, _mc_n(ctx), ctx.rng.child(0).generator())
    rho = K._rho(U)
    return np.column_stack([rho**e for e in exps])


@register("holder-bgl11", "exact", "any", lambda n: (1, n - 1))
def _holder(ctx, spec):
    """V(K,...,K,B)^{k+1} <= |K|^k V(K[n-k-1], B[k+1]) on one direction sample."""
    n, k = ctx.n, ctx.k
    X = _same_sample(ctx, [n - 1, n, n - k - 1])
    wn = w(n)
    lhs = delta_method(lambda m: (wn * m[0]) ** (k + 1), X)
    rhs = delta_method(lambda m: (wn * m[1]) ** k * (wn * m[2]), X)
    return _report(ctx, spec, lhs, rhs, inequality_verdict(lhs, rhs, exact_compare=True),
                   comparison="same-sample")


@register("thm-5.2a-explicit", "exact", "centered", lambda n: (1, n - 2))
def _bgl12(ctx, spec):
    """as(K)^{k+1} <= |K|^k omega_{n-1}^{k+1}/(omega_n^k omega_{n-k-1}) int as(K ∩ E) dnu."""
    K, n, k = ctx.body, ctx.n, ctx.k
    b = ctx.budgets
    a = avg_section(K, _mc_n(ctx), ctx.rng.child(0))
    vol = volume(K, _mc_n(ctx), ctx.rng.child(1))
    mean = mean_avg_section(K, k, b.subspaces, b.ndir, ctx.rng.child(2))
    lhs = a ** (k + 1)
    const = w(n - 1) ** (k + 1) / (w(n) ** k * w(n - k - 1))
    rhs = vol**k * const * mean
    return _report(ctx, spec, lhs, rhs, inequality_verdict(lhs, rhs), omega_constant=const)


@register("thm-5.2b-explicit", "exact", "centered", lambda n: (1, n - 2))
def _bgl14(ctx, spec):
    """int as(K ∩ E) dnu <= varrho_{n,k} as(K)^{(n-k-1)/(n-1)}."""
    K, n, k = ctx.body, ctx.n, ctx.k
    b = ctx.budgets
    lhs = mean_avg_section(K, k, b.subspaces, b.ndir, ctx.rng.child(2))
    a = avg_section(K, _mc_n(ctx), ctx.rng.child(0))
    rho = paper_constant("varrho", n, k)
    rhs = rho * a ** ((n - k - 1) / (n - 1))
    return _report(ctx, spec, lhs, rhs, inequality_verdict(lhs, rhs), varrho=rho)


@register("lemma-5.3-explicit", "exact", "convex")
def _lemma53(ctx, spec):
    """as(K) >= omega_{n-1} |K| / (omega_n R(K))."""
    K, n = ctx.body, ctx.n
    R = K.circumradius()
    vol = volume(K, _mc_n(ctx), ctx.rng.child(1))
    lhs = (w(n - 1) / (w(n) * R)) * vol
    rhs = avg_section(K, _mc_n(ctx), ctx.rng.child(0))
    return _report(ctx, spec, lhs, rhs, inequality_verdict(lhs, rhs), circumradius=R,
                   circumradius_exact=K.radii_exact)


def _minkowski_partner(K):
    n = K.dim
    return Ball(n) if isinstance(K, CrossPolytope) else CrossPolytope(n)


@register("dual-minkowski", "exact", "any")
def _dual_minkowski(ctx, spec):
    """V_1(K, D) <= (omega_n int rho_K^n)^{(n-1)/n} (omega_n int rho_D^n)^{1/n}."""
    K, n = ctx.body, ctx.n
    D = _minkowski_partner(K)
    U = sphere_points(n, _mc_n(ctx), ctx.rng.child(0).generator())
    rk, rd = K._rho(U), D._rho(U)
    X = np.column_stack([rk ** (n - 1) * rd, rk**n, rd**n])
    wn = w(n)
    lhs = delta_method(lambda m: wn * m[0], X)
    rhs = delta_method(lambda m: (wn * m[1]) ** ((n - 1) / n) * (wn * m[2]) ** (1 / n), X)
    return _report(ctx, spec, lhs, rhs, inequality_verdict(lhs, rhs, exact_compare=True),
                   partner=D.to_dict(), comparison="same-sample")


@register("grinberg-bound", "exact", "convex", lambda n: (1, n - 1))
def _grinberg(ctx, spec):
    """R_k(K) <= R_k(B_2^n) = omega_{n-k}^n / omega_n^{n-k}."""
    K, n, k = ctx.body, ctx.n, ctx.k
    b = ctx.budgets
    lhs = dual_quermass_R(K, k, b.subspaces, b.ndir, ctx.rng.child(0))
    rhs = Estimate.of(ball_R(n, k))
    return _report(ctx, spec, lhs, rhs, inequality_verdict(lhs, rhs), flags=_flags(lhs))


@register("m-jensen", "exact", "any")
def _m_jensen(ctx, spec):
    """1 <= M(K) int rho dsigma on one direction sample."""
    X = _same_sample(ctx, [-1, 1])
    lhs = Estimate.of(1.0, X.shape[0])
    rhs = delta_method(lambda m: m[0] * m[1], X)
    return _report(ctx, spec, lhs, rhs, inequality_verdict(lhs, rhs, exact_compare=True),
                   comparison="same-sample")


@register("dmx-identity", "exact", "any", lambda n: (0, n - 2))
def _dmx(ctx, spec):
    """k = 0: two-stage as(K) = (omega_{n-1}/omega_n) V_1(K, B);
    k >= 1: Haar mean of as(K ∩ E) = (omega_{n-k-1}/omega_n) V_{k+1}(K, B)."""
    K, n, k = ctx.body, ctx.n, ctx.k
    b = ctx.budgets
    B = Ball(n)
    if k == 0:
        lhs = avg_section_two_stage(K, 1, b.subspaces, b.ndir, ctx.rng.child(0))
    else:
        lhs = mean_avg_section(K, k, b.subspaces, b.ndir, ctx.rng.child(0))
    dmv = dual_mixed_volume_j(K, B, k + 1, _mc_n(ctx), ctx.rng.child(1))
    rhs = (w(n - k - 1) / w(n)) * dmv
    return _report(ctx, spec, lhs, rhs, equality_verdict(lhs, rhs))


# ---------------------------------------------------------------------------
# invariance registry
# ---------------------------------------------------------------------------

def _map(ctx, cond=3.0):
    if ctx.T is not None:
        return np.asarray(ctx.T, dtype=float)
    T = random_linear_map(ctx.n, cond, ctx.rng.child(99).generator())
    ctx.T = T
    return T


def _rel_gap_report(ctx, spec, a, b, rtol, **details):
    gap = abs(a.value - b.value) / abs(b.value)
    verdict = PASS if gap <= rtol else FAIL
    sig = math.hypot(a.stderr, b.stderr)
    return _report(ctx, spec, a, b, (b.value - a.value, sig, verdict), relative_gap=gap,
                   tolerance=rtol, **details)


@register("rk-invariance", "invariance", "convex", lambda n: (1, n - 1))
def _rk_inv(ctx, spec):
    """R_k(T K) = R_k(K)."""
    K, k = ctx.body, ctx.k
    T = _map(ctx)
    b = ctx.budgets
    a = dual_quermass_R(LinearImage(T, K), k, b.subspaces, b.ndir, ctx.rng.child(0))
    c = dual_quermass_R(K, k, b.subspaces, b.ndir, ctx.rng.child(1))
    rtol = 1e-10 if (a.exact and c.exact) else 0.05
    return _rel_gap_report(ctx, spec, a, c, rtol, flags=_flags(a, c))


@register("ik-equivariance", "invariance", "any")
def _ik_eq(ctx, spec):
    """|TK ∩ xi^perp| = |det T| |K ∩ eta^perp| / |T^t xi|, eta = T^t xi / |T^t xi|."""
    from ..sampling import complement
    K, n = ctx.body, ctx.n
    T = _map(ctx)
    TK = LinearImage(T, K)
    det = abs(float(np.linalg.det(T)))
    xis = sphere_points(n, 10, ctx.rng.child(0).generator())
    N = _mc_n(ctx)
    worst = None
    rows = []
    all_exact = True
    ok = True
    for i, xi in enumerate(xis):
        y = T.T @ xi
        ny = np.linalg.norm(y)
        lhs = section_volume(TK, complement(xi[:, None]), N, ctx.rng.child(10 + 2 * i))
        sec = section_volume(K, complement((y / ny)[:, None]), N, ctx.rng.child(11 + 2 * i))
        rhs = (det / ny) * sec
        exact = lhs.exact and rhs.exact
        all_exact &= exact
        gap = abs(lhs.value - rhs.value)
        sig = math.hypot(lhs.stderr, rhs.stderr)
        good = gap <= 1e-10 * abs(rhs.value) if exact else gap <= 3 * sig
        ok &= good
        score = gap / abs(rhs.value) if exact else (gap / sig if sig else math.inf)
        rows.append({"lhs": lhs.value, "rhs": rhs.value, "exact": exact,
                     "relative_gap": gap / abs(rhs.value), "z": gap / sig if sig else None})
        if worst is None or score > worst[0]:
            worst = (score, lhs, rhs)
    _, lhs, rhs = worst
    verdict = PASS if ok else FAIL
    return _report(ctx, spec, lhs, rhs, (rhs.value - lhs.value, math.hypot(lhs.stderr, rhs.stderr),
                                         verdict),
                   directions=rows, exact=all_exact,
                   tolerance="1e-10 relative" if all_exact else "3 stderr")


@register("lk-invariance", "invariance", "convex")
def _lk_inv(ctx, spec):
    """L(T K) = L(K)."""
    K = ctx.body
    T = _map(ctx)
    N = ctx.budgets.moments
    a = isotropic_constant(LinearImage(T, K), N, ctx.rng.child(0))
    c = isotropic_constant(K, N, ctx.rng.child(1))
    rtol = 1e-12 if (a.exact and c.exact) else 0.02
    return _rel_gap_report(ctx, spec, a, c, rtol)


# ---------------------------------------------------------------------------
# empirical registry
# ---------------------------------------------------------------------------

def _gamma(ctx):
    b = ctx.budgets
    return gamma_witness(ctx.body, ctx.k, b.subspaces, b.ndir, ctx.rng.child(0),
                         refine=b.refine, N=_mc_n(ctx))


@register("gamma-witness", "empirical", "centered", lambda n: (1, n - 2), window=(0.0, 3.0))
def _gamma_witness(ctx, spec):
    """gamma = [as(K) / (|K|^{k/n} max_E as(K ∩ E))]^{1/k}."""
    g = _gamma(ctx)
    return _empirical(ctx, spec, g, Estimate.of(1.0), g.value, flags=_flags(g))


@register("thm-1.4-c1", "empirical", "symmetric", lambda n: (1, n - 2), uses_density=True)
def _thm14(ctx, spec):
    """Required c_1 in int rho^{n-1} f <= (c_1 h(n/k))^k |K|^{k/n} max_E int_{S_E} rho^{n-k-1} f."""
    from ..quadrature import weighted_radial_integral
    K, n, k = ctx.body, ctx.n, ctx.k
    f = density_from_spec(ctx.density or "one")
    lhs = weighted_radial_integral(K, f, 0, _mc_n(ctx), ctx.rng.child(0))
    vol = volume(K, _mc_n(ctx), ctx.rng.child(1))
    m = n - k
    scan = _scan(ctx, k, p=m - 1, weight=m * w(m), density=f)
    rhs = vol ** (k / n) * scan.max
    c1 = (lhs / rhs) ** (1.0 / k) / h(n / k)
    return _empirical(ctx, spec, lhs, rhs, c1.value, c1_stderr=c1.stderr, h=h(n / k))


@register("thm-1.6-c2", "empirical", "centered", lambda n: (1, n - 2))
def _thm16(ctx, spec):
    """Required c_2 = gamma / L_K."""
    g = _gamma(ctx)
    L = isotropic_constant(ctx.body, ctx.budgets.moments, ctx.rng.child(5))
    c2 = g / L
    return _empirical(ctx, spec, g, L, c2.value, c2_stderr=c2.stderr, L=L.value)


def _coord(n, idx):
    """Orthonormal basis of span{e_j : j not in idx} (the subspace E_idx)."""
    keep = [j for j in range(n) if j not in set(idx)]
    return np.eye(n)[:, keep]


@register("lemma-4.1-c0", "empirical", "centered", lambda n: (1, n - 2))
def _lemma41(ctx, spec):
    """Required c_0 in |K ∩ E| |K ∩ xi^perp| <= c_0^{k+1} |K ∩ E ∩ xi^perp| |K|,
    E = (e_1..e_k)^perp and xi = e_{k+1}, plus random (E, xi) pairs."""
    K, n, k = ctx.body, ctx.n, ctx.k
    N = max(_mc_n(ctx) // 4, 1000)
    vol = volume(K, _mc_n(ctx), ctx.rng.child(0))
    g = ctx.rng.child(1).generator()
    pairs = int(ctx.options.get("random_pairs", 4))
    frames = [np.eye(n)] + [random_rotation(n, g) for _ in range(pairs)]
    worst = None
    values = []
    for t, Q in enumerate(frames):
        # columns 0..k-1 span E^perp, column k is xi
        E = Q[:, k:]
        H = np.delete(Q, k, axis=1)
        EH = Q[:, k + 1:]
        s = ctx.rng.child(10 + t)
        lhs = section_volume(K, E, N, s.child(0)) * section_volume(K, H, N, s.child(1))
        rhs = section_volume(K, EH, N, s.child(2)) * vol
        c0 = (lhs / rhs) ** (1.0 / (k + 1))
        values.append(c0.value)
        if worst is None or c0.value > worst[0].value:
            worst = (c0, lhs, rhs)
    c0, lhs, rhs = worst
    return _empirical(ctx, spec, lhs, rhs, c0.value, c0_stderr=c0.stderr,
                      coordinate_c0=values[0], all_c0=values)


def _covers(d):
    """(t, s, list of sets) uniform covers of [d]."""
    out = [(2, 1, [list(range(d - 1)), [d - 1]])]
    if d >= 2:
        out.append((d, 1, [[j] for j in range(d)]))
    if d >= 3:
        out.append((d, d - 1, [[i for i in range(d) if i != j] for j in range(d)]))
    return out


@register("uniform-cover-c0", "empirical", "centered")
def _uniform_cover(ctx, spec):
    """Required c_0 in prod |K ∩ E_{s_i}| <= (c_0 t/s)^{ds} |K ∩ E_s|^s |K|^{t-s}
    over coordinate covers of sigma = [d], d = 2..n-1."""
    K, n = ctx.body, ctx.n
    N = max(_mc_n(ctx) // 4, 1000)
    vol = volume(K, _mc_n(ctx), ctx.rng.child(0))
    cache = {}

    def sec(idx):
        key = tuple(sorted(idx))
        if key not in cache:
            cache[key] = section_volume(K, _coord(n, key), N, ctx.rng.child(1000 + len(cache)))
        return cache[key]

    worst = None
    rows = []
    for d in range(2, n):
        for t, s, sets in _covers(d):
            lhs = Estimate.of(1.0)
            for st in sets:
                lhs = lhs * sec(st)
            rhs = sec(range(d)) ** s * vol ** (t - s)
            c0 = (lhs / rhs) ** (1.0 / (d * s)) * (s / t)
            rows.append({"d": d, "t": t, "s": s, "c0": c0.value})
            if worst is None or c0.value > worst[0].value:
                worst = (c0, lhs, rhs)
    if worst is None:
        raise ClassViolation("uniform-cover-c0 needs n >= 3")
    c0, lhs, rhs = worst
    return _empirical(ctx, spec, lhs, rhs, c0.value, c0_stderr=c0.stderr, covers=rows)


@register("thm-4.2-c2", "empirical", "centered", lambda n: (1, n - 2))
def _thm42(ctx, spec):
    """Required c_2 in |K ∩ E| as(K) <= c_2^k as(K ∩ E) |K| over Haar E."""
    K, n, k = ctx.body, ctx.n, ctx.k
    b = ctx.budgets
    m = n - k
    a = avg_section(K, _mc_n(ctx), ctx.rng.child(0))
    vol = volume(K, _mc_n(ctx), ctx.rng.child(1))
    nsub = min(b.subspaces, 50)
    bases = grassmann_bases(n, m, nsub, ctx.rng.child(2))
    from ..functionals import section_volumes
    sv, sse, _ = section_volumes(K, bases, b.ndir, ctx.rng.child(3))
    phis = sphere_points(m, nsub * b.ndir, ctx.rng.child(4).generator()).reshape(nsub, b.ndir, m)
    mu, var = subspace_means(K, bases, phis, m - 1)
    worst = None
    for i in range(nsub):
        secE = Estimate(float(sv[i]), float(sse[i]), b.ndir, bool(sse[i] == 0))
        asE = w(m - 1) * Estimate(float(mu[i]), float(math.sqrt(var[i] / b.ndir)), b.ndir)
        lhs = secE * a
        rhs = asE * vol
        c2 = (lhs / rhs) ** (1.0 / k)
        if worst is None or c2.value > worst[0].value:
            worst = (c2, lhs, rhs)
    c2, lhs, rhs = worst
    return _empirical(ctx, spec, lhs, rhs, c2.value, c2_stderr=c2.stderr, subspaces=nsub)


@register("dp-lower-c4", "empirical", "centered", lambda n: (1, n - 1))
def _dp_lower(ctx, spec):
    """Required c_4 in R_k(K) >= (c_4 / L_K)^{kn}: c_4 = L_K R_k^{1/(kn)}."""
    K, n, k = ctx.body, ctx.n, ctx.k
    b = ctx.budgets
    R = dual_quermass_R(K, k, b.subspaces, b.ndir, ctx.rng.child(0))
    L = isotropic_constant(K, b.moments, ctx.rng.child(1))
    c4 = L * R ** (1.0 / (k * n))
    return _empirical(ctx, spec, L, R, c4.value, c4_stderr=c4.stderr, flags=_flags(R))


def _iso(ctx):
    return isotropic_position(ctx.body, ctx.budgets.moments, ctx.rng.child(50))


@register("prop-4.3-ratios", "empirical", "centered", window=(0.05, 20.0))
def _prop43(ctx, spec):
    """For isotropic K: as(K) L_K and as(K ∩ xi^perp) L_K^2 are of order one."""
    from ..sampling import complement
    n = ctx.n
    iso = _iso(ctx)
    Kp, L = iso.image, iso.L
    a = avg_section(Kp, _mc_n(ctx), ctx.rng.child(0))
    xi = sphere_points(n, 1, ctx.rng.child(1).generator())[0]
    sec = avg_section(section_body(Kp, complement(xi[:, None])), _mc_n(ctx), ctx.rng.child(2))
    r1 = a * L
    r2 = sec * L**2
    lo, hi = spec.window
    both = PASS if (lo <= r1.value <= hi and lo <= r2.value <= hi) else FAIL
    rep = _empirical(ctx, spec, r1, r2, r1.value, as_times_L=r1.value,
                     section_as_times_L2=r2.value, L=L.value, certificate=iso.certificate)
    rep.verdict = both
    return rep


def _p_of(K, vol, n):
    return K.circumradius() / vol.value ** (1.0 / n)


@register("thm-5.4-c", "empirical", "centered", lambda n: (1, n - 2))
def _thm54(ctx, spec):
    """(c_1 sqrt(n)/p)^k as <= |K|^{k/n} int as(K ∩ E) dnu <= (c_2 p/sqrt(n))^{k/(n-1)} as."""
    K, n, k = ctx.body, ctx.n, ctx.k
    a = avg_section(K, _mc_n(ctx), ctx.rng.child(0))
    vol = volume(K, _mc_n(ctx), ctx.rng.child(1))
    mean = mean_avg_section_sphere(K, k, _mc_n(ctx), ctx.rng.child(2))
    mid = vol ** (k / n) * mean
    p = _p_of(K, vol, n)
    ratio = mid / a
    c_lower = ratio ** (1.0 / k) * (p / math.sqrt(n))
    c_upper = ratio ** ((n - 1) / k) * (math.sqrt(n) / p)
    return _empirical(ctx, spec, a, mid, c_lower.value, c_lower=c_lower.value,
                      c_upper=c_upper.value, p=p, circumradius_exact=K.radii_exact)


@register("thm-1.8", "empirical", "centered", lambda n: (1, n - 2))
def _thm18(ctx, spec):
    """Same two-sided bound as thm-5.4-c (constants c_4, c_5)."""
    rep = _thm54(ctx, REGISTRY["thm-5.4-c"])
    rep.check_id = "thm-1.8"
    rep.details = dict(rep.details, c4=rep.details["c_lower"], c5=rep.details["c_upper"])
    return rep


@register("thm-1.9-c6", "empirical", "centered", lambda n: (1, n - 2))
def _thm19(ctx, spec):
    """Isotropic position: |K|^{k/n} int as(K ∩ E) dnu <= c_6^k as(K)."""
    n, k = ctx.n, ctx.k
    iso = _iso(ctx)
    Kp = iso.image
    a = avg_section(Kp, _mc_n(ctx), ctx.rng.child(0))
    vol = volume(Kp, _mc_n(ctx), ctx.rng.child(1))
    mid = vol ** (k / n) * mean_avg_section_sphere(Kp, k, _mc_n(ctx), ctx.rng.child(2))
    c6 = (mid / a) ** (1.0 / k)
    return _empirical(ctx, spec, mid, a, c6.value, c6_stderr=c6.stderr,
                      certificate=iso.certificate)


@register("remark-5.7-iso", "empirical", "centered", lambda n: (1, n - 2))
def _remark57(ctx, spec):
    """Isotropic position: (c sqrt(n) L_K)^{-k} as(K) <= |K|^{k/n} int as(K ∩ E) dnu;
    reports the smallest admissible c."""
    n, k = ctx.n, ctx.k
    iso = _iso(ctx)
    Kp, L = iso.image, iso.L
    a = avg_section(Kp, _mc_n(ctx), ctx.rng.child(0))
    vol = volume(Kp, _mc_n(ctx), ctx.rng.child(1))
    mid = vol ** (k / n) * mean_avg_section_sphere(Kp, k, _mc_n(ctx), ctx.rng.child(2))
    c = (a / mid) ** (1.0 / k) / (math.sqrt(n) * L)
    return _empirical(ctx, spec, a, mid, c.value, c_stderr=c.stderr, c_n=math.sqrt(n) * L.value)


@register("m-restriction-c", "empirical", "symmetric", lambda n: (1, n - 1))
def _m_restriction(ctx, spec):
    """Required c in M(D ∩ F) <= c sqrt(m/s) M(D), F in Gr_s, s = n - k."""
    K, n, k = ctx.body, ctx.n, ctx.k
    s = n - k
    MK = m_value(K, _mc_n(ctx), ctx.rng.child(0))
    bases = grassmann_bases(n, s, 10, ctx.rng.child(1))
    worst = None
    for i, B in enumerate(bases):
        MF = m_value(section_body(K, B), max(_mc_n(ctx) // 10, 1000), ctx.rng.child(10 + i))
        c = MF / (math.sqrt(n / s) * MK)
        if worst is None or c.value > worst[0].value:
            worst = (c, MF)
    c, MF = worst
    rhs = math.sqrt(n / s) * MK
    return _empirical(ctx, spec, MF, rhs, c.value, c_stderr=c.stderr, s=s)


@register("thm-4.6", "empirical", "centered", lambda n: (1, n - 2))
def _thm46(ctx, spec):
    """Required c in gamma <= c sqrt(n/k) log^{3/2}(en/k)."""
    n, k = ctx.n, ctx.k
    g = _gamma(ctx)
    hh = h(n / k)
    c = g / hh
    return _empirical(ctx, spec, g, Estimate.of(hh), c.value, c_stderr=c.stderr)


@register("remark-4.7", "empirical", "centered", lambda n: (1, n - 2))
def _remark47(ctx, spec):
    """Concordance gamma <= c_1 / alpha with alpha = R_k^{1/(kn)}: reports c_1 = gamma R_k^{1/(kn)}."""
    n, k = ctx.n, ctx.k
    b = ctx.budgets
    g = _gamma(ctx)
    R = dual_quermass_R(ctx.body, k, b.subspaces, b.ndir, ctx.rng.child(7))
    alpha = R ** (1.0 / (k * n))
    c1 = g * alpha
    return _empirical(ctx, spec, g, 1.0 / alpha, c1.value, c1_stderr=c1.stderr,
                      alpha=alpha.value, flags=_flags(R))


@register("iso-section-lower", "empirical", "centered", lambda n: (1, n - 1))
def _iso_section(ctx, spec):
    """Isotropic K: |K ∩ E|^{1/k} L_K >= c over sampled E; reports the minimum."""
    n, k = ctx.n, ctx.k
    b = ctx.budgets
    iso = _iso(ctx)
    Kp, L = iso.image, iso.L
    from ..functionals import section_volumes
    bases = grassmann_bases(n, n - k, min(b.subspaces, 100), ctx.rng.child(0))
    sv, sse, _ = section_volumes(Kp, bases, b.ndir, ctx.rng.child(1))
    i = int(np.argmin(sv))
    sec = Estimate(float(sv[i]), float(sse[i]), b.ndir, bool(sse[i] == 0))
    c = sec ** (1.0 / k) * L
    return _empirical(ctx, spec, sec ** (1.0 / k), 1.0 / L, c.value, c_stderr=c.stderr)


EXACT_IDS = [c for c, s in REGISTRY.items() if s.kind == "exact"]
INVARIANCE_IDS = [c for c, s in REGISTRY.items() if s.kind == "invariance"]
EMPIRICAL_IDS = [c for c, s in REGISTRY.items() if s.kind == "empirical"]


def run_check(check_id, body, budgets=None, rng=None, k=None, r=None, density=None, T=None,
              label="", options=None):
    """Evaluate one registered check on one body."""
    from ..sampling import RngStream
    if check_id not in REGISTRY:
        raise KeyError(f"unknown check {check_id!r}")
    spec = REGISTRY[check_id]
    check_class(spec, body)
    n = body.dim
    if spec.k_range is not None:
        lo, hi = spec.k_range(n)
        k = lo if k is None else k
        if not lo <= k <= hi:
            raise ValueError(f"{check_id}: k={k} outside [{lo}, {hi}] for n={n}")
    else:
        k = None
    if spec.uses_r:
        r = 1 if r is None else r
    else:
        r = None
    if spec.uses_density:
        density = density or "one"
    else:
        density = None
    ctx = Context(body, label, n, k, r, density, budgets or Budgets(),
                  rng or RngStream(0), None if T is None else np.asarray(T, float),
                  dict(options or {}))
    return spec.fn(ctx, spec)


def check_exact(check_id, body, params=None, budgets=None, rng=None):
    if REGISTRY[check_id].kind != "exact":
        raise ValueError(f"{check_id} is not an exact-constant check")
    return run_check(check_id, body, budgets, rng, **(params or {}))


def check_invariance(check_id, body, T=None, params=None, budgets=None, rng=None):
    if REGISTRY[check_id].kind != "invariance":
        raise ValueError(f"{check_id} is not an invariance check")
    return run_check(check_id, body, budgets, rng, T=T, **(params or {}))


def estimate_constant(check_id, body, params=None, budgets=None, rng=None):
    if REGISTRY[check_id].kind != "empirical":
        raise ValueError(f"{check_id} is not an empirical check")
    return run_check(check_id, body, budgets, rng, **(params or {}))


def radon_transform(g, E, N, rng):
    """R g(E) = int_{S^{n-1} ∩ E} g dtheta = mean of g over S_E times
    the surface mass m omega_m of S^{m-1}."""
    from ..quadrature import sphere_mean
    B = E.basis if hasattr(E, "basis") else np.asarray(E, dtype=float)
    m = B.shape[1]
    mass = m * w(m)
    return mass * sphere_mean(lambda U: np.asarray(g(U @ B.T), dtype=float), m, N, rng)
