"""Relaxed proximal point iterations with constant, dynamic, and silver
stepsize schedules, plus the machinery to certify their worst-case bounds."""

from rppa_lab.bounds import Measure
from rppa_lab.prox_library import (
    BoxIndicator,
    Huber,
    L1Norm,
    Quadratic,
    ScaledNorm,
    catalog,
)
from rppa_lab.schedules import (
    RHO,
    Schedule,
    constant,
    explicit,
    left_silver,
    right_silver,
    silver,
    silver_constants,
    tv_schedule,
)
from rppa_lab.solvers import (
    MeasureReport,
    Trace,
    gd_measures,
    measures,
    run_gd,
    run_rppa,
)

__version__ = "0.1.0"

__all__ = [
    "Measure",
    "BoxIndicator",
    "Huber",
    "L1Norm",
    "Quadratic",
    "ScaledNorm",
    "catalog",
    "RHO",
    "Schedule",
    "constant",
    "explicit",
    "left_silver",
    "right_silver",
    "silver",
    "silver_constants",
    "tv_schedule",
    "MeasureReport",
    "Trace",
    "gd_measures",
    "measures",
    "run_gd",
    "run_rppa",
    "__version__",
]
