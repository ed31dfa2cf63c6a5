"""Numerical average-section functionals of convex and star bodies."""

from .bodies import (
    Ball, Body, BodyError, CrossPolytope, Cube, Ellipsoid, HPolytope, LinearImage,
    LpBall, RadialSum, RegularSimplex, SectionBody, Subspace, Translate,
    body_from_dict, body_to_dict, circumradius, contains, dilate, inradius,
    linear_image, radial, radial_distance, radial_sum, section_body, support,
    unit_ball_volume,
)
from .estimate import Estimate
from .sampling import BudgetError, RngStream

__version__ = "0.1.0"
