"""Hyperbolic growth fitting, takeoff/divergence diagnostics and
sample-and-join distortion analysis for historical economic series."""

from hypergrowth.models import (
    HyperbolicModel,
    ModulatedHyperbolicModel,
    eval_hyperbolic,
    eval_modulated,
    gradient,
    growth_rate,
    singularity_time,
)
from hypergrowth.series import Quantity, RegionalDataset, TimeSeries

__version__ = "0.1.0"

__all__ = [
    "HyperbolicModel",
    "ModulatedHyperbolicModel",
    "Quantity",
    "RegionalDataset",
    "TimeSeries",
    "eval_hyperbolic",
    "eval_modulated",
    "gradient",
    "growth_rate",
    "singularity_time",
]
