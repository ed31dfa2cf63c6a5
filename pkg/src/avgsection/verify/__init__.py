"""Verification registry: exact-constant checks, invariance checks and
empirical estimates of unnamed constants."""

from .constants import NAMES, h, paper_constant
from .registry import (
    EMPIRICAL_IDS, EXACT_IDS, INVARIANCE_IDS, REGISTRY, Budgets, ClassViolation,
    check_exact, check_invariance, estimate_constant, radon_transform, run_check,
)
from .report import FAIL, INDETERMINATE, PASS, CheckReport
