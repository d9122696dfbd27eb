"""Target population-inversion waveforms W(t) with analytic derivatives.

Each target is a pure, reentrant callable: ``target(t)`` evaluates W(t) on
scalars or arrays, ``derivative``/``second_derivative`` give exact time
derivatives, and ``radicand`` evaluates 1 - W(t)^2 in a cancellation-safe
form (the quantity under the square root of the coupling-synthesis formula).

Scalar ``*_at`` variants are fast paths for the adaptive integrator.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from .core import DEFAULT_TAIL_TOL, BoseEinsteinStatistics, PhysicalParams, PoissonStatistics
from .exceptions import TargetRangeError
from .validation import require_index


class InversionTarget(ABC):
    """A prescribed inversion waveform with exact time derivatives."""

    params: PhysicalParams | None = None

    @abstractmethod
    def value(self, t):
        """W(t); |W| <= 1 on t >= 0."""

    @abstractmethod
    def derivative(self, t):
        """dW/dt."""

    @abstractmethod
    def second_derivative(self, t):
        """d^2W/dt^2 (used by the removable-singularity limit rule)."""

    def radicand(self, t):
        """1 - W(t)^2, clipped at zero."""
        w = np.asarray(self.value(t))
        return np.clip(1.0 - w * w, 0.0, None)

    def __call__(self, t):
        return self.value(t)

    # scalar fast paths; subclasses override the hot ones
    def value_at(self, t: float) -> float:
        return float(self.value(t))

    def derivative_at(self, t: float) -> float:
        return float(self.derivative(t))

    def second_derivative_at(self, t: float) -> float:
        return float(self.second_derivative(t))

    def synthesis_terms_at(self, t: float) -> tuple[float, float, float]:
        """(W, dW/dt, 1 - W^2) in one pass, for pointwise coupling synthesis."""
        w = self.value_at(t)
        return w, self.derivative_at(t), max(1.0 - w * w, 0.0)


class CosineSeriesTarget(InversionTarget):
    """W(t) = offset + sum_k a_k cos(w_k t).

    Every closed-form inversion in scope is of this form; subclasses only
    choose the coefficients.  The radicand is evaluated through half-angle
    sines so it stays accurate where W grazes +/-1.
    """

    def __init__(self, offset: float, amps, freqs, params: PhysicalParams | None = None):
        self.offset = float(offset)
        self.amps = np.asarray(amps, dtype=float)
        self.freqs = np.asarray(freqs, dtype=float)
        if self.amps.shape != self.freqs.shape or self.amps.ndim != 1:
            raise ValueError("amps and freqs must be 1-d arrays of equal length")
        self.params = params
        # constant part of 1 - W; zero when offset + sum(amps) == 1
        self._one_minus_const = 1.0 - self.offset - math.fsum(self.amps.tolist())
        self._terms = tuple(zip(self.amps.tolist(), self.freqs.tolist()))

    def value(self, t):
        t = np.asarray(t, dtype=float)
        phases = np.multiply.outer(t, self.freqs)
        out = self.offset + np.sum(self.amps * np.cos(phases), axis=-1)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        phases = np.multiply.outer(t, self.freqs)
        out = -np.sum(self.amps * self.freqs * np.sin(phases), axis=-1)
        return float(out) if out.ndim == 0 else out

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        phases = np.multiply.outer(t, self.freqs)
        out = -np.sum(self.amps * self.freqs**2 * np.cos(phases), axis=-1)
        return float(out) if out.ndim == 0 else out

    def radicand(self, t):
        t = np.asarray(t, dtype=float)
        half = np.multiply.outer(t, self.freqs / 2.0)
        sh2 = np.sin(half) ** 2
        one_minus = self._one_minus_const + np.sum(2.0 * self.amps * sh2, axis=-1)
        w = self.offset + np.sum(self.amps * (1.0 - 2.0 * sh2), axis=-1)
        out = np.clip(one_minus * (1.0 + w), 0.0, None)
        return float(out) if out.ndim == 0 else out

    def value_at(self, t: float) -> float:
        acc = self.offset
        for a, w in self._terms:
            acc += a * math.cos(w * t)
        return acc

    def derivative_at(self, t: float) -> float:
        acc = 0.0
        for a, w in self._terms:
            acc -= a * w * math.sin(w * t)
        return acc

    def second_derivative_at(self, t: float) -> float:
        acc = 0.0
        for a, w in self._terms:
            acc -= a * w * w * math.cos(w * t)
        return acc

    def synthesis_terms_at(self, t: float) -> tuple[float, float, float]:
        val = self.offset
        dval = 0.0
        one_minus = self._one_minus_const
        for a, w in self._terms:
            sh = math.sin(0.5 * w * t)
            ch = math.cos(0.5 * w * t)
            sh2 = sh * sh
            val += a * (1.0 - 2.0 * sh2)
            dval -= 2.0 * a * w * sh * ch
            one_minus += 2.0 * a * sh2
        return val, dval, max(one_minus * (1.0 + val), 0.0)


class ConstantCouplingTarget(CosineSeriesTarget):
    """W_n(t) = cos(Omega_n t), the n-photon-sector Rabi oscillation."""

    def __init__(self, n: int, params: PhysicalParams):
        self.n = require_index("n", n)
        super().__init__(0.0, [1.0], [params.rabi(n)], params)


class CosSquaredTarget(CosineSeriesTarget):
    """W_n(t) = cos^2(Omega_n t / 2); the atom never favors the ground state."""

    def __init__(self, n: int, params: PhysicalParams):
        self.n = require_index("n", n)
        super().__init__(0.5, [0.5], [params.rabi(n)], params)


def _renormalized_weights(stats, tail_tol: float) -> np.ndarray:
    """Truncated weights rescaled to sum to one.

    The raw tail deficit delta would shift W(0) to 1 - delta, which the
    inverse-problem formula amplifies into a sqrt(2*delta) phase offset.
    """
    n_max = stats.truncation_index(tail_tol)
    w = stats.weights(n_max)
    return w / math.fsum(w.tolist())


class CoherentSeriesTarget(CosineSeriesTarget):
    """Collapse-and-revival inversion of an initially coherent field."""

    def __init__(self, params: PhysicalParams, tail_tol: float = DEFAULT_TAIL_TOL):
        w = _renormalized_weights(PoissonStatistics(params.mean_n), tail_tol)
        n = np.arange(w.size)
        super().__init__(0.0, w, 2.0 * params.lambda0 * np.sqrt(n + 1.0), params)
        self.tail_tol = tail_tol


class ThermalCosSquaredTarget(CosineSeriesTarget):
    """Bose-Einstein-weighted cos^2 series; nonnegative for all t."""

    def __init__(self, params: PhysicalParams, tail_tol: float = DEFAULT_TAIL_TOL):
        w = _renormalized_weights(BoseEinsteinStatistics(params.mean_n), tail_tol)
        n = np.arange(w.size)
        super().__init__(0.5, w / 2.0, 2.0 * params.lambda0 * np.sqrt(n + 1.0), params)
        self.tail_tol = tail_tol


class DeformedCoherentSeriesTarget(CosineSeriesTarget):
    """Coherent-field inversion carrying the first-order deformation term.

    Each sector contributes cos(Omega_n t) plus epsilon*<n> times the
    difference cos(Omega_{n+2} t) - cos(Omega_n t); epsilon = 0 recovers the
    undeformed series exactly.
    """

    def __init__(self, params: PhysicalParams, tail_tol: float = DEFAULT_TAIL_TOL):
        w = _renormalized_weights(PoissonStatistics(params.mean_n), tail_tol)
        n = np.arange(w.size)
        em = params.epsilon * params.mean_n
        omega_n = 2.0 * params.lambda0 * np.sqrt(n + 1.0)
        omega_n2 = 2.0 * params.lambda0 * np.sqrt(n + 3.0)
        amps = np.concatenate([(1.0 - em) * w, em * w])
        freqs = np.concatenate([omega_n, omega_n2])
        super().__init__(0.0, amps, freqs, params)
        self.tail_tol = tail_tol


class DeformedSectorSummandTarget(CosineSeriesTarget):
    """Single-sector summand of the deformed coherent series."""

    def __init__(self, n: int, params: PhysicalParams):
        self.n = require_index("n", n)
        em = params.epsilon * params.mean_n
        super().__init__(
            0.0,
            [1.0 - em, em],
            [params.rabi(n), 2.0 * params.lambda0 * math.sqrt(n + 3.0)],
            params,
        )


class SqrtTimeTarget(InversionTarget):
    """W(t) = cos((4/3) * lambda0 * sqrt(zeta t^3)), driven by a sqrt-time coupling."""

    def __init__(self, params: PhysicalParams):
        self.params = params
        self._c = 4.0 / 3.0 * params.lambda0 * math.sqrt(params.zeta)

    def _phase(self, t):
        return self._c * t ** 1.5

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = np.cos(self._phase(t))
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        phidot = 1.5 * self._c * np.sqrt(t)
        out = -phidot * np.sin(self._phase(t))
        return float(out) if out.ndim == 0 else out

    def second_derivative(self, t):
        t = np.asarray(t, dtype=float)
        phi = self._phase(t)
        phidot = 1.5 * self._c * np.sqrt(t)
        with np.errstate(divide="ignore"):
            phiddot = np.where(t > 0.0, 0.75 * self._c / np.where(t > 0, np.sqrt(t), 1.0), 0.0)
        out = -phiddot * np.sin(phi) - phidot**2 * np.cos(phi)
        return float(out) if out.ndim == 0 else out

    def radicand(self, t):
        t = np.asarray(t, dtype=float)
        out = np.sin(self._phase(t)) ** 2
        return float(out) if out.ndim == 0 else out

    def value_at(self, t: float) -> float:
        return math.cos(self._c * t**1.5)

    def derivative_at(self, t: float) -> float:
        return -1.5 * self._c * math.sqrt(t) * math.sin(self._c * t**1.5)

    def second_derivative_at(self, t: float) -> float:
        phi = self._c * t**1.5
        phidot = 1.5 * self._c * math.sqrt(t)
        phiddot = 0.75 * self._c / math.sqrt(t) if t > 0.0 else 0.0
        return -phiddot * math.sin(phi) - phidot * phidot * math.cos(phi)

    def synthesis_terms_at(self, t: float) -> tuple[float, float, float]:
        phi = self._c * t**1.5
        s, c = math.sin(phi), math.cos(phi)
        return c, -1.5 * self._c * math.sqrt(t) * s, s * s


class SampledTarget(InversionTarget):
    """Inversion given as samples; linear interpolation, finite-difference derivatives."""

    def __init__(self, times, values):
        times = np.asarray(getattr(times, "times", times), dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("times and values must be equal-length 1-d arrays (>= 2 points)")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        self.times = times
        self.values = values
        self._dvals = np.gradient(values, times)
        self._d2vals = np.gradient(self._dvals, times)
        self._tol = 1e-9 * (times[-1] - times[0])

    def _check_range(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0] - self._tol) or np.any(t > self.times[-1] + self._tol):
            raise TargetRangeError(
                f"sampled target evaluated outside [{self.times[0]}, {self.times[-1]}]"
            )
        return t

    def value(self, t):
        t = self._check_range(t)
        out = np.interp(t, self.times, self.values)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t):
        t = self._check_range(t)
        out = np.interp(t, self.times, self._dvals)
        return float(out) if out.ndim == 0 else out

    def second_derivative(self, t):
        t = self._check_range(t)
        out = np.interp(t, self.times, self._d2vals)
        return float(out) if out.ndim == 0 else out


# -- per-sector target families for the distribution-weighted pipeline --------

def constant_coupling_family(params: PhysicalParams):
    """n -> cos(Omega_n t); the family whose weighted sum is the coherent series."""
    return lambda n: ConstantCouplingTarget(n, params)


def cos_squared_family(params: PhysicalParams):
    """n -> cos^2(Omega_n t / 2); weighted by thermal statistics gives the thermal series."""
    return lambda n: CosSquaredTarget(n, params)


def deformed_summand_family(params: PhysicalParams):
    """n -> deformed sector summand; weighted by Poisson statistics gives the deformed series."""
    return lambda n: DeformedSectorSummandTarget(n, params)
