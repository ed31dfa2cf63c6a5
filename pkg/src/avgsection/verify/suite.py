"""Batch runs of the registry over a family of bodies.

A config is a JSON object; every key is optional:

    {"seed": 0, "dims": [3, 4, 5, 6], "ks": [1, 2], "rs": [1, 2],
     "densities": ["one", "gaussian:1", "norm_power:1"],
     "bodies": ["ball", "cube", ...] or [{"label": ..., "body": {...}}, ...],
     "checks": "all" | "exact" | "invariance" | "empirical" | [ids],
     "budgets": {"samples": ..., "subspaces": ..., ...}}

Named bodies are templates instantiated in every dimension of ``dims``.
Jobs are enumerated in a fixed order (check, body, n, k, r, density) and
job i draws from stream ``child(i)`` of the run seed, so the output does
not depend on the worker count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..bodies import (Ball, CrossPolytope, Cube, Ellipsoid, LinearImage, LpBall, RegularSimplex,
                      body_from_dict)
from ..sampling import RngStream
from .registry import REGISTRY, Budgets, ClassViolation, check_class, random_rotation, run_check

BASE_TEMPLATES = ("ball", "ellipsoid", "cube", "cross", "lp1.5", "lp3", "simplex")
TEMPLATES = BASE_TEMPLATES + tuple("rot-" + t for t in BASE_TEMPLATES)
ROTATION_STREAM = 2**32

DEFAULT_CONFIG = {
    "seed": 0,
    "dims": [3, 4, 5, 6],
    "ks": [1, 2],
    "rs": [1, 2],
    "densities": ["one", "gaussian:1", "norm_power:1"],
    "bodies": list(TEMPLATES),
    "checks": "all",
    "budgets": {},
}


def template_body(name, n, seed=0):
    """Instantiate a named template in dimension n.  ``rot-*`` bodies are
    images under a rotation fixed by (seed, n)."""
    if name.startswith("rot-"):
        g = RngStream(seed, ROTATION_STREAM).child(n).generator()
        return LinearImage(random_rotation(n, g), template_body(name[4:], n, seed))
    if name == "ball":
        return Ball(n)
    if name == "ellipsoid":
        return Ellipsoid(np.diag(np.arange(1.0, n + 1)) / math.factorial(n) ** (1.0 / n))
    if name == "cube":
        return Cube(n)
    if name == "cross":
        return CrossPolytope(n)
    if name.startswith("lp"):
        return LpBall(n, float(name[2:]))
    if name == "simplex":
        return RegularSimplex(n)
    raise ValueError(f"unknown body template {name!r}; choose from {', '.join(TEMPLATES)}")


def load_config(path=None, **overrides):
    cfg = dict(DEFAULT_CONFIG)
    if path:
        with open(path) as fh:
            user = json.load(fh)
        unknown = set(user) - set(DEFAULT_CONFIG)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(user)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if not isinstance(cfg["seed"], int) or not 0 <= cfg["seed"] < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    for key, lo in (("dims", 3), ("ks", 0), ("rs", 1)):
        vals = cfg[key]
        if not isinstance(vals, list) or not all(isinstance(v, int) and v >= lo for v in vals):
            raise ValueError(f"{key} must be a list of integers >= {lo}")
    if not isinstance(cfg["bodies"], list):
        raise ValueError("bodies must be a list")
    Budgets.from_dict(cfg.get("budgets") or {})
    _check_ids(cfg["checks"])


def _check_ids(sel):
    if sel == "all":
        return list(REGISTRY)
    if sel in ("exact", "invariance", "empirical"):
        return [c for c, s in REGISTRY.items() if s.kind == sel]
    ids = list(sel)
    bad = [c for c in ids if c not in REGISTRY]
    if bad:
        raise ValueError(f"unknown checks: {bad}")
    return ids


@dataclass
class Job:
    index: int
    check_id: str
    label: str
    body: object
    k: int | None
    r: int | None
    density: str | None


def _bodies(cfg):
    """(label, body) pairs in config order."""
    out = []
    for entry in cfg["bodies"]:
        if isinstance(entry, str):
            for n in cfg["dims"]:
                out.append((f"{entry}-{n}", template_body(entry, n, cfg["seed"])))
        else:
            body = body_from_dict(entry["body"])
            out.append((entry.get("label", body.to_dict()["type"]), body))
    return out


def enumerate_jobs(cfg):
    bodies = _bodies(cfg)
    jobs = []
    for cid in _check_ids(cfg["checks"]):
        spec = REGISTRY[cid]
        for label, body in bodies:
            try:
                check_class(spec, body)
            except ClassViolation:
                continue
            n = body.dim
            wanted = list(cfg["ks"])
            if spec.k_range is not None and spec.k_range(n)[0] == 0:
                wanted = [0] + [k for k in wanted if k != 0]
            for k in spec.ks(n, wanted):
                rs = [r for r in cfg["rs"] if 1 <= r < n - k] if spec.uses_r else [None]
                dens = list(cfg["densities"]) if spec.uses_density else [None]
                for r in rs:
                    for d in dens:
                        jobs.append(Job(len(jobs), cid, label, body, k, r, d))
    return jobs


def run_job(job, budgets, seed):
    rng = RngStream(seed).child(job.index)
    return run_check(job.check_id, job.body, budgets, rng, k=job.k, r=job.r,
                     density=job.density, label=job.label)


def run_suite(cfg, jobs=None, out=None):
    """Run every job; returns reports in job order.  ``out`` (a text stream)
    receives one JSON line per report, in order, as results complete."""
    budgets = Budgets.from_dict(cfg.get("budgets") or {})
    todo = enumerate_jobs(cfg)
    workers = jobs or os.cpu_count() or 1
    reports = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for rep in pool.map(lambda j: run_job(j, budgets, cfg["seed"]), todo):
            reports.append(rep)
            if out is not None:
                out.write(rep.to_json() + "\n")
                out.flush()
    return reports
