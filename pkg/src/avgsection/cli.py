"""Command-line entry point.

Exit codes: 0 success, 1 an exact-constant check failed, 2 usage or input
error, 3 a sampling budget was exceeded.  Every error is reported as one
line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .bodies import BodyError, UnsupportedOracle, body_from_dict
from .functionals import (avg_section, avg_section_r, dual_affine_quermass_Phi,
                          dual_mixed_volume_j, dual_quermass_R, gamma_witness,
                          grassmann_max_avg_section, mean_avg_section)
from .isotropic import isotropic_position
from .quadrature import m_value, mean_width, volume
from .sampling import BudgetError, RngStream
from .verify.constants import NAMES, paper_constant
from .verify.registry import REGISTRY, Budgets, ClassViolation, check_class, run_check
from .verify.report import CSV_COLUMNS, FAIL, csv_row, summarize
from .verify.suite import TEMPLATES, load_config, run_suite, template_body

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
QUANTITIES = ("volume", "as", "as_r", "mean_as", "dmv", "rk", "phik", "gamma", "scan",
              "m", "width")
GAMMA_COLUMNS = ("body", "n", "k", "gamma", "stderr", "seed")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _json(obj):
    return json.dumps(obj, default=_np_default)


def _np_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x).__name__}")


def parse_body(text, n=None, seed=0):
    """--body accepts a JSON descriptor, @file.json or a template name
    (``cube``, ``rot-cross``, ...) instantiated in dimension --n.  Without
    --body the unit ball of dimension --n is used."""
    if text is None:
        if n is None:
            raise UsageError("give --body or --n")
        return template_body("ball", n, seed)
    text = text.strip()
    if text.startswith("@"):
        with open(text[1:]) as fh:
            text = fh.read()
    if text.startswith("{"):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise UsageError(f"--body is not valid JSON: {e.msg}") from None
        body = body_from_dict(d)
        if n is not None and body.dim != n:
            raise UsageError(f"--n {n} does not match body dimension {body.dim}")
        return body
    if n is None:
        raise UsageError("a template body needs --n")
    return template_body(text, n, seed)


def _budgets(a):
    b = Budgets()
    kw = {k: getattr(a, k) for k in ("samples", "subspaces", "ndir", "refine", "moments")
          if getattr(a, k, None) is not None}
    return Budgets(**{**b.to_dict(), **kw})


def _rng(a):
    return RngStream(a.seed, a.stream)


def _add_common(p, body=True):
    if body:
        p.add_argument("--body", help="JSON descriptor, @file or template name")
        p.add_argument("--n", type=int, help="dimension (templates, default ball)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", "--streams", dest="stream", type=int, default=0,
                   help="base stream id under the seed")
    p.add_argument("--samples", type=int, help="directions / points per estimate")
    p.add_argument("--subspaces", type=int, help="Haar subspaces per estimate")
    p.add_argument("--ndir", type=int, help="directions per subspace")
    p.add_argument("--refine", type=int, help="refinement steps of Grassmann scans")
    p.add_argument("--moments", type=int, help="points for covariance estimates")
    p.add_argument("--out", help="write to this file instead of stdout")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv")


def build_parser():
    p = _Parser(prog="avgsection", description="Average-section functionals of convex and "
                "star bodies: estimators, registered checks and suites.")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    c = sub.add_parser("compute", help="estimate one functional")
    c.add_argument("quantity", choices=QUANTITIES)
    c.add_argument("--k", type=int, default=1, help="codimension")
    c.add_argument("--r", type=int, default=1, help="codimension for as_r")
    c.add_argument("--j", type=int, default=1, help="index of the dual mixed volume")
    c.add_argument("--partner", help="second body for dmv (default: unit ball)")
    _add_common(c)

    i = sub.add_parser("isotropic", help="isotropic position and constant")
    _add_common(i)

    ch = sub.add_parser("check", help="run one registered check (or all applicable)",
                        description="CSV columns: " + ",".join(CSV_COLUMNS))
    ch.add_argument("check_id", help="check id or 'all'")
    ch.add_argument("--k", type=int)
    ch.add_argument("--r", type=int)
    ch.add_argument("--density", help="one | gaussian:<s> | norm_power:<e>")
    ch.add_argument("--T", dest="T", help="JSON matrix for invariance checks")
    _add_common(ch)

    s = sub.add_parser("suite", help="run the registry over a body family",
                       description="Reports are JSON lines; --csv columns: "
                       + ",".join(CSV_COLUMNS))
    s.add_argument("--config", help="JSON suite config (default: built-in suite)")
    s.add_argument("--checks", help="all | exact | invariance | empirical | comma list")
    s.add_argument("--jobs", type=int, default=None, help="worker threads")
    _add_common(s, body=False)
    s.set_defaults(seed=None)

    t = sub.add_parser("table", help="tables for external plotting",
                       description="gamma table CSV columns: " + ",".join(GAMMA_COLUMNS))
    t.add_argument("table", choices=["gamma"])
    t.add_argument("--bodies", default=",".join(TEMPLATES))
    t.add_argument("--dims", default="3,4,5,6")
    t.add_argument("--ks", default="1,2")
    t.add_argument("--jobs", type=int, default=None)
    _add_common(t, body=False)

    lb = sub.add_parser("list-bodies", help="body templates and descriptor types")
    lb.add_argument("--out", help="write to this file instead of stdout")

    k = sub.add_parser("constants", help="evaluate a named constant")
    k.add_argument("--name", required=True, choices=NAMES)
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--k", type=int, default=1)
    k.add_argument("--r", type=int)
    k.add_argument("--out", help="write to this file instead of stdout")
    return p


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _emit_estimate(a, name, est, extra=None):
    if a.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value", "stderr", "n", "exact"])
        w.writerow([name, format(est.value, ".17g"), format(est.stderr, ".17g"), est.samples,
                    est.exact])
        return buf.getvalue()
    d = {"quantity": name, **est.to_dict()}
    if extra:
        d.update(extra)
    return _json(d) + "\n"


def cmd_compute(a):
    body = parse_body(a.body, a.n, a.seed)
    b = _budgets(a)
    rng = _rng(a)
    q = a.quantity
    N = b.samples
    extra = None
    if q == "volume":
        est = volume(body, N, rng)
    elif q == "as":
        est = avg_section(body, N, rng)
    elif q == "as_r":
        est = avg_section_r(body, a.r, N, rng)
    elif q == "mean_as":
        est = mean_avg_section(body, a.k, b.subspaces, b.ndir, rng)
    elif q == "dmv":
        D = parse_body(a.partner, body.dim, a.seed) if a.partner else template_body(
            "ball", body.dim)
        est = dual_mixed_volume_j(body, D, a.j, N, rng)
    elif q == "rk":
        est = dual_quermass_R(body, a.k, b.subspaces, b.ndir, rng)
    elif q == "phik":
        est = dual_affine_quermass_Phi(body, a.k, b.subspaces, b.ndir, rng)
    elif q == "gamma":
        est = gamma_witness(body, a.k, b.subspaces, b.ndir, rng, refine=b.refine, N=N)
    elif q == "scan":
        scan = grassmann_max_avg_section(body, a.k, b.subspaces, b.ndir, b.refine, rng)
        est = scan.max
        extra = {"scan": scan.to_dict()}
    elif q == "m":
        est = m_value(body, N, rng)
    else:
        est = mean_width(body, N, rng)
    return _emit_estimate(a, q, est, extra), EXIT_OK


def cmd_isotropic(a):
    body = parse_body(a.body, a.n, a.seed)
    b = _budgets(a)
    iso = isotropic_position(body, b.moments, _rng(a))
    if a.fmt == "csv":
        return _emit_estimate(a, "L", iso.L), EXIT_OK
    return _json(iso.to_dict()) + "\n", EXIT_OK


def _reports_out(a, reports):
    if a.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in reports:
            w.writerow(csv_row(r))
        return buf.getvalue()
    return "".join(r.to_json() + "\n" for r in reports)


def _status(reports):
    return EXIT_FAIL if any(r.kind == "exact" and r.verdict == FAIL for r in reports) else EXIT_OK


def cmd_check(a):
    body = parse_body(a.body, a.n, a.seed)
    b = _budgets(a)
    T = None
    if a.T:
        T = np.asarray(json.loads(a.T), dtype=float)
    if a.check_id == "all":
        ids = []
        for cid, spec in REGISTRY.items():
            try:
                check_class(spec, body)
            except ClassViolation:
                continue
            if spec.k_range is not None:
                lo, hi = spec.k_range(body.dim)
                if lo > hi or (a.k is not None and not lo <= a.k <= hi):
                    continue
            ids.append(cid)
    elif a.check_id in REGISTRY:
        ids = [a.check_id]
    else:
        raise UsageError(f"unknown check {a.check_id!r}")
    reports = []
    for i, cid in enumerate(ids):
        rng = _rng(a) if len(ids) == 1 else _rng(a).child(i)
        Tc = T if REGISTRY[cid].kind == "invariance" else None
        reports.append(run_check(cid, body, b, rng, k=a.k, r=a.r, density=a.density, T=Tc))
    return _reports_out(a, reports), _status(reports)


def cmd_suite(a):
    checks = None
    if a.checks:
        checks = a.checks if a.checks in ("all", "exact", "invariance", "empirical") \
            else a.checks.split(",")
    cfg = load_config(a.config, seed=a.seed, checks=checks)
    budgets = {**(cfg.get("budgets") or {}),
               **{k: getattr(a, k) for k in ("samples", "subspaces", "ndir", "refine", "moments")
                  if getattr(a, k) is not None}}
    cfg["budgets"] = budgets
    reports = run_suite(cfg, jobs=a.jobs)
    counts = summarize(reports)
    line = " ".join(f"{k}:{v}={c}" for (k, v), c in sorted(counts.items()))
    print(f"summary {len(reports)} reports {line}".rstrip(), file=sys.stderr)
    return _reports_out(a, reports), _status(reports)


def cmd_table(a):
    bodies = [s for s in a.bodies.split(",") if s]
    try:
        dims = [int(x) for x in a.dims.split(",") if x]
        ks = [int(x) for x in a.ks.split(",") if x]
    except ValueError:
        raise UsageError("--dims and --ks take comma-separated integers") from None
    cfg = load_config(None, seed=a.seed, checks=["gamma-witness"], bodies=bodies, dims=dims,
                      ks=ks)
    cfg["budgets"] = {k: getattr(a, k) for k in ("samples", "subspaces", "ndir", "refine",
                                                 "moments") if getattr(a, k) is not None}
    reports = run_suite(cfg, jobs=a.jobs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(GAMMA_COLUMNS)
    for r in reports:
        w.writerow([r.body.get("label", r.body["type"]), r.params["n"], r.params["k"],
                    format(r.lhs.value, ".17g"), format(r.lhs.stderr, ".17g"), a.seed])
    return buf.getvalue(), EXIT_OK


def cmd_list_bodies(a):
    lines = ["templates: " + ",".join(TEMPLATES),
             "descriptor types: ball,ellipsoid,cube,cross_polytope,lp_ball,simplex,hpolytope,"
             "linear_image,section,radial_sum,translate"]
    return "\n".join(lines) + "\n", EXIT_OK


def cmd_constants(a):
    v = paper_constant(a.name, a.n, a.k, a.r)
    return format(v, ".17g") + "\n", EXIT_OK


COMMANDS = {"compute": cmd_compute, "isotropic": cmd_isotropic, "check": cmd_check,
            "suite": cmd_suite, "table": cmd_table, "list-bodies": cmd_list_bodies,
            "constants": cmd_constants}


def main(argv=None):
    try:
        a = build_parser().parse_args(argv)
        if a.cmd is None:
            raise UsageError("missing command; choose from " + ", ".join(COMMANDS))
        seed = getattr(a, "seed", None)
        if seed is not None and not 0 <= seed < 2**64:
            raise UsageError("--seed must be an unsigned 64-bit integer")
        text, code = COMMANDS[a.cmd](a)
    except BudgetError as e:
        print(f"error: budget: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (UsageError, BodyError, UnsupportedOracle, ClassViolation, ValueError, KeyError,
            OSError) as e:
        msg = str(e).replace("\n", " ")
        print(f"error: usage: {msg}", file=sys.stderr)
        return EXIT_USAGE
    out = getattr(a, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
