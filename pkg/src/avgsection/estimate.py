"""Monte-Carlo estimates with standard errors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# chunk size for streamed sample means; fixed so results never depend on
# how work is split
CHUNK = 1 << 15


@dataclass(frozen=True)
class Estimate:
    """A value with its CLT standard error.

    ``exact`` marks closed-form values (stderr 0).  Arithmetic between
    estimates treats them as independent and propagates variance to first
    order.
    """

    value: float
    stderr: float = 0.0
    samples: int = 0
    exact: bool = False
    flags: tuple = ()

    @classmethod
    def of(cls, value, samples=0):
        """An exact value."""
        return cls(float(value), 0.0, int(samples), True)

    @property
    def rel_stderr(self):
        return self.stderr / abs(self.value) if self.value else math.inf

    def with_flags(self, *flags):
        new = tuple(f for f in flags if f and f not in self.flags)
        if not new:
            return self
        return Estimate(self.value, self.stderr, self.samples, self.exact, self.flags + new)

    def _combine(self, other, value, d_self, d_other):
        if not isinstance(other, Estimate):
            other = Estimate.of(other)
        se = math.hypot(d_self * self.stderr, d_other * other.stderr)
        return Estimate(float(value), se, max(self.samples, other.samples),
                        self.exact and other.exact, _merge(self.flags, other.flags))

    def __add__(self, other):
        o = other if isinstance(other, Estimate) else Estimate.of(other)
        return self._combine(o, self.value + o.value, 1.0, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        o = other if isinstance(other, Estimate) else Estimate.of(other)
        return self._combine(o, self.value - o.value, 1.0, 1.0)

    def __rsub__(self, other):
        return Estimate.of(other) - self

    def __mul__(self, other):
        o = other if isinstance(other, Estimate) else Estimate.of(other)
        return self._combine(o, self.value * o.value, abs(o.value), abs(self.value))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = other if isinstance(other, Estimate) else Estimate.of(other)
        v = self.value / o.value
        return self._combine(o, v, 1.0 / abs(o.value), abs(v / o.value))

    def __rtruediv__(self, other):
        return Estimate.of(other) / self

    def __pow__(self, p):
        v = self.value ** p
        d = abs(p * self.value ** (p - 1)) if self.value != 0 else 0.0
        return Estimate(float(v), d * self.stderr, self.samples, self.exact, self.flags)

    def __neg__(self):
        return Estimate(-self.value, self.stderr, self.samples, self.exact, self.flags)

    def to_dict(self):
        d = {"value": self.value, "stderr": self.stderr, "n": self.samples, "exact": self.exact}
        if self.flags:
            d["flags"] = list(self.flags)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["value"]), float(d["stderr"]), int(d["n"]), bool(d["exact"]),
                   tuple(d.get("flags", ())))


def _merge(a, b):
    return a + tuple(f for f in b if f not in a)


def mean_estimate(values, exact=False):
    """Sample mean with stderr = sd / sqrt(N)."""
    v = np.asarray(values, dtype=float).ravel()
    n = v.size
    if n == 0:
        raise ValueError("no samples")
    if exact:
        return Estimate(float(v.mean()), 0.0, n, True)
    se = float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
    return Estimate(float(v.mean()), se, n, False)


class RunningMean:
    """Streaming mean/variance (Chan et al. pairwise merge of chunk stats).

    Chunks are merged in the order they are pushed, so identical chunk
    sequences give bit-identical results.
    """

    def __init__(self, width=None):
        self.n = 0
        self.mean = 0.0 if width is None else np.zeros(width)
        self.m2 = 0.0 if width is None else np.zeros(width)

    def push(self, x):
        x = np.asarray(x, dtype=float)
        nb = x.shape[0]
        if nb == 0:
            return
        mb = x.mean(axis=0)
        m2b = ((x - mb) ** 2).sum(axis=0)
        if self.n == 0:
            self.n, self.mean, self.m2 = nb, mb, m2b
            return
        n = self.n + nb
        delta = mb - self.mean
        self.mean = self.mean + delta * (nb / n)
        self.m2 = self.m2 + m2b + delta**2 * (self.n * nb / n)
        self.n = n

    @property
    def var(self):
        return self.m2 / (self.n - 1) if self.n > 1 else np.inf

    def estimate(self, exact=False):
        if exact:
            return Estimate(float(self.mean), 0.0, self.n, True)
        return Estimate(float(self.mean), float(math.sqrt(self.var / self.n)), self.n, False)


def delta_method(fn, samples, eps=1e-6):
    """Estimate for fn(mean_1, ..., mean_q) where the q means come from the
    same N draws (rows of ``samples``), using the sample covariance and a
    central-difference gradient."""
    X = np.asarray(samples, dtype=float)
    n = X.shape[0]
    mu = X.mean(axis=0)
    cov = np.atleast_2d(np.cov(X, rowvar=False)) / n
    val = float(fn(mu))
    grad = np.empty_like(mu)
    for i in range(mu.size):
        h = eps * max(abs(mu[i]), 1e-300)
        up, dn = mu.copy(), mu.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (fn(up) - fn(dn)) / (2 * h)
    var = float(grad @ cov @ grad)
    return Estimate(val, math.sqrt(max(var, 0.0)), n, False)
