"""Explicit constants of the average-section inequalities."""

import math

from ..bodies import unit_ball_volume as _w

NAMES = ("b", "b1", "c", "phi", "varrho", "h")


def _log_w(m):
    return math.log(_w(m))


def h(t):
    """h(t) = sqrt(t) (log(e t))^{3/2}, t >= 1."""
    if t < 1:
        raise ValueError("h(t) is defined for t >= 1")
    return math.sqrt(t) * (1.0 + math.log(t)) ** 1.5


def paper_constant(name, n, k=1, r=None):
    """Evaluate a named constant.

    b      : b_{n,k} = [omega_{n-1} / (omega_{n-k-1} omega_n^{k/n})]^{1/k}
    b1     : b_{n,1}
    c      : c_{n,k} = [n omega_n^{(n-k)/n} / ((n-k) omega_{n-k})]^{1/k}
    phi    : phi_{n,k,r} = [omega_{n-r} / (omega_{n-k-r} omega_n^{k/n})]^{1/k}
    varrho : omega_{n-k-1} omega_{n-1}^{-(n-k-1)/(n-1)}
    h      : h(n/k)
    """
    if name not in NAMES:
        raise ValueError(f"unknown constant {name!r}; choose from {', '.join(NAMES)}")
    if n < 2:
        raise ValueError("n must be >= 2")
    if name == "b1":
        name, k = "b", 1
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} outside [1, {n - 1}]")
    if name == "b":
        log_bk = _log_w(n - 1) - _log_w(n - k - 1) - (k / n) * _log_w(n)
        return math.exp(log_bk / k)
    if name == "c":
        log_ck = math.log(n) + ((n - k) / n) * _log_w(n) - math.log(n - k) - _log_w(n - k)
        return math.exp(log_ck / k)
    if name == "phi":
        if r is None:
            raise ValueError("phi needs r")
        if not (1 <= r and n - k - r >= 0):
            raise ValueError(f"phi needs 1 <= r <= n-k, got r={r}")
        log_pk = _log_w(n - r) - _log_w(n - k - r) - (k / n) * _log_w(n)
        return math.exp(log_pk / k)
    if name == "varrho":
        return math.exp(_log_w(n - k - 1) - ((n - k - 1) / (n - 1)) * _log_w(n - 1))
    return h(n / k)
