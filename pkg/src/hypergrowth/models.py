"""Hyperbolic and linearly-modulated hyperbolic growth laws.

A hyperbolic trajectory is ``S(t) = 1 / (a - k*t)``: its reciprocal is an
affine function of calendar time and it blows up at ``t = a/k``. The ratio
of two such trajectories (GDP over population) gives the per-capita law

    value(t) = (aP - kP*t) / (aG - kG*t)

All functions accept scalars or numpy arrays for ``t`` and return the same
shape. Calendar years are used directly (BC negative), with no epoch shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hypergrowth.errors import DomainError

# Relative width of the forbidden band just below a singularity.
GUARD_BAND = 1e-9


def _as_output(x, scalar):
    return float(x) if scalar else x


@dataclass(frozen=True)
class HyperbolicModel:
    """Two-parameter hyperbola ``1 / (a - k*t)``.

    Attributes:
        a: Reciprocal-value intercept at t = 0 (must be > 0).
        k: Decline rate of the reciprocal per year (>= 0; 0 means constant).
    """

    a: float
    k: float

    def __post_init__(self):
        a, k = float(self.a), float(self.k)
        if not (math.isfinite(a) and math.isfinite(k)):
            raise ValueError(f"non-finite hyperbola parameters a={a}, k={k}")
        if a <= 0:
            raise ValueError(f"hyperbola intercept must be positive, got a={a}")
        if k < 0:
            raise ValueError(f"hyperbola rate must be non-negative, got k={k}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "k", k)

    @property
    def singularity(self) -> float | None:
        return self.a / self.k if self.k > 0 else None

    @property
    def domain_end(self) -> float:
        """Largest admissible t (exclusive); ``inf`` for a constant."""
        ts = self.singularity
        if ts is None:
            return math.inf
        return ts - GUARD_BAND * abs(ts)

    def reciprocal(self, t):
        """The affine line ``a - k*t`` (defined everywhere)."""
        return self.a - self.k * np.asarray(t, dtype=float)

    def check_domain(self, t):
        tt = np.asarray(t, dtype=float)
        recip = self.a - self.k * tt
        bad = (tt >= self.domain_end) | (recip <= 0) | ~np.isfinite(tt)
        if np.any(bad):
            first = float(np.atleast_1d(tt)[np.atleast_1d(bad)][0])
            raise DomainError(
                f"t={first:g} outside hyperbola domain "
                f"(a={self.a:.17g}, k={self.k:.17g}, singularity={self.singularity})"
            )
        return recip

    def __call__(self, t):
        return eval_hyperbolic(self, t)


@dataclass(frozen=True)
class ModulatedHyperbolicModel:
    """Ratio of a GDP hyperbola to a population hyperbola.

    ``numerator`` is the population's reciprocal line (aP, kP) and
    ``denominator`` the GDP's reciprocal line (aG, kG), so that the value is
    ``(aP - kP*t) / (aG - kG*t)`` = GDP(t) / population(t).
    """

    population: HyperbolicModel
    gdp: HyperbolicModel

    @classmethod
    def from_lines(cls, aP, kP, aG, kG) -> "ModulatedHyperbolicModel":
        return cls(population=HyperbolicModel(aP, kP), gdp=HyperbolicModel(aG, kG))

    @classmethod
    def from_hyperbola(cls, model: HyperbolicModel) -> "ModulatedHyperbolicModel":
        """Wrap a plain hyperbola as a ratio with unit population."""
        return cls(population=HyperbolicModel(1.0, 0.0), gdp=model)

    @property
    def numerator(self) -> tuple[float, float]:
        return (self.population.a, self.population.k)

    @property
    def denominator(self) -> tuple[float, float]:
        return (self.gdp.a, self.gdp.k)

    @property
    def singularity(self) -> float | None:
        return self.gdp.singularity

    @property
    def domain_end(self) -> float:
        return min(self.gdp.domain_end, self.population.domain_end)

    def check_domain(self, t):
        return self.population.check_domain(t), self.gdp.check_domain(t)

    def __call__(self, t):
        return eval_modulated(self, t)


def eval_hyperbolic(model: HyperbolicModel, t):
    """Evaluate ``1 / (a - k*t)``; raises DomainError at or past the singularity."""
    scalar = np.ndim(t) == 0
    recip = model.check_domain(t)
    return _as_output(1.0 / recip, scalar)


def singularity_time(model) -> float | None:
    """Year at which the trajectory diverges, or None when it never does."""
    return model.singularity


def gradient(model: HyperbolicModel, t):
    """dS/dt = k * S(t)**2."""
    scalar = np.ndim(t) == 0
    s = 1.0 / model.check_domain(t)
    return _as_output(model.k * s * s, scalar)


def growth_rate(model: HyperbolicModel, t):
    """Relative growth rate (1/S) dS/dt = k / (a - k*t).

    Continuous and strictly increasing on the whole domain when k > 0, so it
    has no interior point where a takeoff could be located.
    """
    scalar = np.ndim(t) == 0
    recip = model.check_domain(t)
    return _as_output(model.k / recip, scalar)


def eval_modulated(model: ModulatedHyperbolicModel, t):
    """Evaluate ``(aP - kP*t) / (aG - kG*t)`` on the joint domain."""
    scalar = np.ndim(t) == 0
    num, den = model.check_domain(t)
    return _as_output(num / den, scalar)


def modulated_growth_rate(model: ModulatedHyperbolicModel, t):
    """Relative growth rate of the ratio: kG/(aG - kG t) - kP/(aP - kP t)."""
    scalar = np.ndim(t) == 0
    num, den = model.check_domain(t)
    return _as_output(model.gdp.k / den - model.population.k / num, scalar)


def evaluate(model, t):
    """Evaluate either model family."""
    if isinstance(model, ModulatedHyperbolicModel):
        return eval_modulated(model, t)
    return eval_hyperbolic(model, t)
