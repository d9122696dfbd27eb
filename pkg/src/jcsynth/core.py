"""Shared domain types: physical parameters, time grids, photon statistics.

Everything here is immutable after construction and safe to share across
threads; the operations are pure functions.
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .validation import (
    require_index,
    require_nonnegative,
    require_positive,
    require_probability,
    require_real,
)

#: Default truncated tail mass for the infinite photon-number sums.
DEFAULT_TAIL_TOL = 1e-12

#: Hard rejection bound for the dimensionless deformation parameter.
EPSILON_MAX = 1e-2

#: Physical upper bound used in the literature; larger values draw a warning.
EPSILON_PHYSICAL_BOUND = 5e-4


def rabi_frequency(lambda0: float, n: int) -> float:
    """n-photon-sector Rabi frequency Omega_n = 2 * lambda0 * sqrt(n + 1)."""
    lambda0 = require_positive("lambda0", lambda0)
    n = require_index("n", n)
    return 2.0 * lambda0 * math.sqrt(n + 1.0)


@dataclass(frozen=True)
class PhysicalParams:
    """Physical parameter set shared by waveforms, synthesis and propagation.

    Attributes
    ----------
    lambda0 : coupling amplitude (inverse time), > 0
    zeta : time-scale rate of the sqrt-time coupling (inverse time), > 0
    epsilon : dimensionless deformation parameter, 0 <= epsilon <= 1e-2
    mean_n : mean photon number of the field distribution, >= 0
    detuning : atom-cavity frequency difference (inverse time); only the
        closed-form detuned observables accept a nonzero value
    """

    lambda0: float = 1.0
    zeta: float = 1.0
    epsilon: float = 0.0
    mean_n: float = 5.0
    detuning: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lambda0", require_positive("lambda0", self.lambda0))
        object.__setattr__(self, "zeta", require_positive("zeta", self.zeta))
        object.__setattr__(self, "epsilon", require_nonnegative("epsilon", self.epsilon))
        object.__setattr__(self, "mean_n", require_nonnegative("mean_n", self.mean_n))
        object.__setattr__(self, "detuning", require_real("detuning", self.detuning))
        if self.epsilon > EPSILON_MAX:
            raise ValueError(
                f"epsilon = {self.epsilon!r} exceeds the supported bound {EPSILON_MAX}"
            )
        if self.epsilon > EPSILON_PHYSICAL_BOUND:
            warnings.warn(
                f"epsilon = {self.epsilon!r} exceeds the physical upper bound "
                f"{EPSILON_PHYSICAL_BOUND}",
                stacklevel=2,
            )

    def rabi(self, n: int) -> float:
        """Rabi frequency of the n-photon sector for this coupling amplitude."""
        return rabi_frequency(self.lambda0, n)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform, strictly increasing time grid with n_samples >= 2 points."""

    t_start: float
    t_end: float
    n_samples: int

    def __post_init__(self):
        object.__setattr__(self, "t_start", require_real("t_start", self.t_start))
        object.__setattr__(self, "t_end", require_real("t_end", self.t_end))
        n = require_index("n_samples", self.n_samples)
        if n < 2:
            raise ValueError(f"n_samples must be >= 2, got {n}")
        object.__setattr__(self, "n_samples", n)
        if not self.t_end > self.t_start:
            raise ValueError(
                f"t_end ({self.t_end!r}) must be greater than t_start ({self.t_start!r})"
            )

    @property
    def step(self) -> float:
        return (self.t_end - self.t_start) / (self.n_samples - 1)

    @cached_property
    def times(self) -> np.ndarray:
        t = np.linspace(self.t_start, self.t_end, self.n_samples)
        t.setflags(write=False)
        return t

    @property
    def span(self) -> float:
        return self.t_end - self.t_start


class PhotonStatistics(ABC):
    """Initial photon-number distribution P_n of the cavity field."""

    @abstractmethod
    def weight(self, n) -> np.ndarray | float:
        """Probability of exactly n photons (vectorized over n)."""

    @abstractmethod
    def truncation_index(self, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
        """Smallest N whose cumulative mass reaches 1 - tail_tol."""

    def weights(self, upto: int) -> np.ndarray:
        """Weights for n = 0 .. upto inclusive."""
        return np.asarray(self.weight(np.arange(require_index("upto", upto) + 1)))


class FockStatistics(PhotonStatistics):
    """Delta distribution: exactly `n` photons."""

    def __init__(self, n: int):
        self.n = require_index("n", n)

    def weight(self, n):
        n = np.asarray(n)
        out = np.where(n == self.n, 1.0, 0.0)
        return float(out) if out.ndim == 0 else out

    def truncation_index(self, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
        return self.n

    def __repr__(self):
        return f"FockStatistics(n={self.n})"


def _cumulative_truncation(stats: PhotonStatistics, tail_tol: float) -> int:
    """Smallest N with fsum(weights[0..N]) >= 1 - tail_tol."""
    tail_tol = require_probability("tail_tol", tail_tol)
    total = 0.0
    comp = 0.0  # Kahan compensation
    n = 0
    goal = 1.0 - tail_tol
    while True:
        y = float(stats.weight(n)) - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if total >= goal:
            return n
        n += 1
        if n > 10_000_000:  # unreachable for the supported parameter ranges
            raise RuntimeError("photon-number truncation did not converge")


class PoissonStatistics(PhotonStatistics):
    """Coherent-state photon statistics with mean photon number `mean`."""

    def __init__(self, mean: float):
        self.mean = require_nonnegative("mean", mean)

    def weight(self, n):
        n = np.asarray(n)
        # log space: avoids overflow of mean**n and n! for large means
        logw = xlogy(n, self.mean) - self.mean - gammaln(n + 1.0)
        out = np.exp(logw)
        return float(out) if out.ndim == 0 else out

    def truncation_index(self, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
        if self.mean == 0.0:
            require_probability("tail_tol", tail_tol)
            return 0
        return _cumulative_truncation(self, tail_tol)

    def __repr__(self):
        return f"PoissonStatistics(mean={self.mean})"


class BoseEinsteinStatistics(PhotonStatistics):
    """Thermal photon statistics with mean photon number `mean`."""

    def __init__(self, mean: float):
        self.mean = require_nonnegative("mean", mean)

    def weight(self, n):
        n = np.asarray(n)
        # <n>^n / (<n>+1)^(n+1) in log space
        logw = xlogy(n, self.mean) - xlog1py(n + 1.0, self.mean)
        out = np.exp(logw)
        return float(out) if out.ndim == 0 else out

    def truncation_index(self, tail_tol: float = DEFAULT_TAIL_TOL) -> int:
        if self.mean == 0.0:
            require_probability("tail_tol", tail_tol)
            return 0
        return _cumulative_truncation(self, tail_tol)

    def __repr__(self):
        return f"BoseEinsteinStatistics(mean={self.mean})"
