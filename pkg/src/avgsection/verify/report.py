"""Check reports and verdict rules."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..estimate import Estimate

Z = 3.0
FP_RTOL = 1e-12

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


def _plain(x):
    """JSON fallback for numpy scalars and arrays."""
    if hasattr(x, "tolist"):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


@dataclass
class CheckReport:
    """One verification.

    ``slack`` is rhs - lhs for an inequality lhs <= rhs, and rhs - lhs for
    an identity lhs = rhs.  ``empirical_constant`` holds the constant the
    body requires for checks that estimate an unnamed constant.
    """

    check_id: str
    kind: str
    body: dict
    params: dict
    lhs: Estimate
    rhs: Estimate
    slack: float
    slack_stderr: float
    verdict: str
    empirical_constant: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "check_id": self.check_id,
            "kind": self.kind,
            "body": self.body,
            "params": self.params,
            "lhs": self.lhs.to_dict(),
            "rhs": self.rhs.to_dict(),
            "slack": self.slack,
            "slack_stderr": self.slack_stderr,
            "verdict": self.verdict,
            "empirical_constant": self.empirical_constant,
            "details": self.details,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), allow_nan=True, default=_plain)

    @classmethod
    def from_dict(cls, d):
        return cls(d["check_id"], d["kind"], d["body"], d["params"],
                   Estimate.from_dict(d["lhs"]), Estimate.from_dict(d["rhs"]),
                   float(d["slack"]), float(d["slack_stderr"]), d["verdict"],
                   d.get("empirical_constant"), d.get("details", {}))

    @classmethod
    def from_json(cls, line):
        return cls.from_dict(json.loads(line))


def _fp_tol(lhs, rhs):
    return FP_RTOL * max(abs(lhs.value), abs(rhs.value), 1e-300)


def inequality_verdict(lhs, rhs, z=Z, exact_compare=False):
    """Verdict for lhs <= rhs.

    pass  : slack >= 0 (up to rounding) and, with noise, slack >= z sigma;
    fail  : slack < -max(z sigma, rounding);
    otherwise indeterminate.  ``exact_compare`` is for comparisons that are
    exact on the drawn sample (e.g. Hoelder on an empirical measure), where
    the only tolerance is rounding.
    """
    slack = rhs.value - lhs.value
    sigma = 0.0 if exact_compare else math.hypot(lhs.stderr, rhs.stderr)
    tol = _fp_tol(lhs, rhs)
    if slack >= -tol and (sigma == 0.0 or slack + tol >= z * sigma):
        v = PASS
    elif slack < -max(z * sigma, tol):
        v = FAIL
    else:
        v = INDETERMINATE
    return slack, math.hypot(lhs.stderr, rhs.stderr), v


def equality_verdict(lhs, rhs, z=Z, rtol=None):
    """Verdict for lhs = rhs: pass when |slack| <= max(rounding, z sigma),
    or <= rtol * |rhs| when a relative tolerance is registered."""
    slack = rhs.value - lhs.value
    sigma = math.hypot(lhs.stderr, rhs.stderr)
    tol = _fp_tol(lhs, rhs) if rtol is None else rtol * max(abs(rhs.value), 1e-300)
    v = PASS if abs(slack) <= max(tol, z * sigma) else FAIL
    return slack, sigma, v


def window_verdict(value, lo, hi, closed=True):
    if value is None or not math.isfinite(value):
        return FAIL
    ok = (lo <= value <= hi) if closed else (lo < value < hi)
    return PASS if ok else FAIL


def summarize(reports):
    counts = {}
    for r in reports:
        key = (r.kind, r.verdict)
        counts[key] = counts.get(key, 0) + 1
    return counts


CSV_COLUMNS = ("check_id", "kind", "body", "n", "k", "r", "lhs", "lhs_stderr", "rhs",
               "rhs_stderr", "slack", "slack_stderr", "verdict", "empirical_constant", "seed")


def _g(x):
    if x is None:
        return ""
    return format(float(x), ".17g")


def csv_row(rep):
    p = rep.params
    return [rep.check_id, rep.kind, rep.body.get("label", rep.body.get("type", "")),
            str(p.get("n", "")), str(p.get("k", "") if p.get("k") is not None else ""),
            str(p.get("r", "") if p.get("r") is not None else ""),
            _g(rep.lhs.value), _g(rep.lhs.stderr), _g(rep.rhs.value), _g(rep.rhs.stderr),
            _g(rep.slack), _g(rep.slack_stderr), rep.verdict, _g(rep.empirical_constant),
            str(p.get("seed", ""))]
