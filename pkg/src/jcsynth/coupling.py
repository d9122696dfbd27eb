"""Coupling profiles and the inverse-problem synthesis of the coupling.

The synthesis formula recovers the real coupling that drives a prescribed
sector inversion W_n(t) from an initial n-photon state:

    Lambda_n(t) = (1 / (2 sqrt(n+1))) * (-dW/dt) / sqrt(1 - W^2)

Wherever 1 - W^2 vanishes the numerator vanishes with it; the removable
singularity is filled with its finite limit (see ``CouplingSynthesizer``).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .core import PhysicalParams, TimeGrid
from .exceptions import DomainError
from .targets import InversionTarget, SampledTarget
from .validation import require_index, require_positive

#: radicand threshold below which the limit rule replaces the ratio (eta^2)
DEFAULT_ETA = 1e-6

#: grid steps around a regularized point excluded from tight comparisons
EXCLUSION_STEPS = 3

#: radicand dips below this are recorded as integrator breakpoints
BREAKPOINT_RADICAND = 1e-3

#: tolerance on W(t_start) = 1 (the initial state must be fully excited)
INITIAL_INVERSION_TOL = 1e-9


def regularized_window_mask(n_samples: int, indices, steps: int = EXCLUSION_STEPS) -> np.ndarray:
    """Boolean mask, True within `steps` grid points of any regularized index."""
    mask = np.zeros(n_samples, dtype=bool)
    for i in np.asarray(indices, dtype=int):
        mask[max(0, i - steps):min(n_samples, i + steps + 1)] = True
    return mask


class CouplingProfile(ABC):
    """A real time-dependent coupling, callable on scalars and arrays."""

    @abstractmethod
    def __call__(self, t):
        """Coupling value(s) at time(s) t."""

    def at(self, t: float) -> float:
        """Scalar fast path used by the integrator."""
        return float(self(t))

    def breakpoints(self, t_start: float, t_end: float) -> np.ndarray:
        """Interior times in (t_start, t_end) where the profile may jump."""
        return np.empty(0)


class ConstantCoupling(CouplingProfile):
    """lambda(t) = lambda0."""

    def __init__(self, lambda0: float):
        self.lambda0 = require_positive("lambda0", lambda0)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full_like(t, self.lambda0)
        return float(out) if out.ndim == 0 else out

    def at(self, t: float) -> float:
        return self.lambda0


class SqrtTimeCoupling(CouplingProfile):
    """lambda(t) = lambda0 * sqrt(zeta * t)."""

    def __init__(self, lambda0: float, zeta: float):
        self.lambda0 = require_positive("lambda0", lambda0)
        self.zeta = require_positive("zeta", zeta)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.lambda0 * np.sqrt(self.zeta * t)
        return float(out) if out.ndim == 0 else out

    def at(self, t: float) -> float:
        return self.lambda0 * math.sqrt(self.zeta * t)


class CosSquaredCoupling(CouplingProfile):
    """Closed-form coupling that drives W_n = cos^2(Omega_n t / 2).

    lambda0 * sin(Omega_n t) / (2 sqrt(1 - cos^4(Omega_n t / 2))), with the
    denominator evaluated as sin^2(x) (1 + cos^2(x)) for accuracy near the
    removable singularities at Omega_n t = 2 k pi.
    """

    def __init__(self, n: int, params: PhysicalParams, eta: float = DEFAULT_ETA):
        self.n = require_index("n", n)
        self.params = params
        self.eta = eta
        self._omega = params.rabi(n)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        x = self._omega * t / 2.0
        sx, cx = np.sin(x), np.cos(x)
        rad = sx * sx * (1.0 + cx * cx)
        num = self.params.lambda0 * np.sin(self._omega * t)
        sing = rad <= self.eta**2
        safe = np.where(sing, 1.0, rad)
        out = np.where(sing,
                       np.where(num != 0.0, np.sign(num), 1.0) *
                       self.params.lambda0 / math.sqrt(2.0),
                       num / (2.0 * np.sqrt(safe)))
        return float(out) if out.ndim == 0 else out

    def at(self, t: float) -> float:
        x = self._omega * t / 2.0
        sx, cx = math.sin(x), math.cos(x)
        rad = sx * sx * (1.0 + cx * cx)
        num = self.params.lambda0 * math.sin(self._omega * t)
        if rad <= self.eta**2:
            sgn = math.copysign(1.0, num) if num != 0.0 else 1.0
            return sgn * self.params.lambda0 / math.sqrt(2.0)
        return num / (2.0 * math.sqrt(rad))

    def breakpoints(self, t_start: float, t_end: float) -> np.ndarray:
        period = 2.0 * math.pi / self._omega
        k = np.arange(math.floor(t_start / period) + 1, math.ceil(t_end / period) + 1)
        pts = k * period
        return pts[(pts > t_start) & (pts < t_end)]


def deformed_gipa_closed_form(n: int, params: PhysicalParams, t, eta: float = DEFAULT_ETA):
    """Closed-form coupling driving the deformed sector summand.

    Numerator lambda0 {sin(O_n t) - eps<n> [sin(O_n t) - sqrt((n+3)/(n+1)) sin(O_{n+2} t)]}
    over the square root of 1 - w_n(t)^2, where w_n is the deformed summand.
    A radicand below -1e-12 (possible only for eps<n> > 1) is a domain error.
    """
    n = require_index("n", n)
    em = params.epsilon * params.mean_n
    lam0 = params.lambda0
    o1 = params.rabi(n)
    o2 = 2.0 * lam0 * math.sqrt(n + 3.0)
    ratio = math.sqrt((n + 3.0) / (n + 1.0))
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))

    sh1 = np.sin(o1 * t / 2.0)
    sh2 = np.sin(o2 * t / 2.0)
    s1, s2 = np.sin(o1 * t), np.sin(o2 * t)
    w = (1.0 - em) * (1.0 - 2.0 * sh1**2) + em * (1.0 - 2.0 * sh2**2)
    one_minus = 2.0 * (1.0 - em) * sh1**2 + 2.0 * em * sh2**2
    rad = one_minus * (1.0 + w)
    if np.any(rad < -1e-12):
        bad = t[rad < -1e-12][0]
        raise DomainError(
            f"negative radicand in the deformed coupling at t={bad!r} "
            f"(n={n}, eps*<n>={em!r})"
        )
    rad = np.clip(rad, 0.0, None)

    # the lambda0 prefactor already carries the GIPA's 1/(2 sqrt(n+1))
    num = lam0 * (s1 - em * (s1 - ratio * s2))
    sing = rad <= eta**2
    safe = np.where(sing, 1.0, rad)
    out = num / np.sqrt(safe)
    if np.any(sing):
        d2w = -(1.0 - em) * o1**2 * (1.0 - 2.0 * sh1**2) - em * o2**2 * (1.0 - 2.0 * sh2**2)
        dw = -(1.0 - em) * o1 * s1 - em * o2 * s2
        sgn = np.where(dw != 0.0, -np.sign(dw), np.sign(w))
        limit = sgn * np.sqrt(np.abs(d2w)) / (2.0 * math.sqrt(n + 1.0))
        out = np.where(sing, limit, out)
    return float(out[0]) if scalar else out


class DeformedClosedFormCoupling(CouplingProfile):
    """Closed-form deformed sector coupling as a profile object."""

    def __init__(self, n: int, params: PhysicalParams, eta: float = DEFAULT_ETA):
        self.n = require_index("n", n)
        self.params = params
        self.eta = eta

    def __call__(self, t):
        return deformed_gipa_closed_form(self.n, self.params, t, self.eta)

    def at(self, t: float) -> float:
        return float(deformed_gipa_closed_form(self.n, self.params, t, self.eta))

    def breakpoints(self, t_start: float, t_end: float) -> np.ndarray:
        # steep near-singular dips sit near the undeformed flip times k pi / Omega_n
        half = math.pi / self.params.rabi(self.n)
        k = np.arange(math.floor(t_start / half) + 1, math.ceil(t_end / half) + 1)
        pts = k * half
        return pts[(pts > t_start) & (pts < t_end)]


class _ExactSynthesis:
    """Pointwise synthesis formula bound to a target; continuous-time evaluator."""

    def __init__(self, target: InversionTarget, scale: float, eta: float):
        self._target = target
        self._scale = scale
        self._eta2 = eta * eta

    def __call__(self, t):
        target = self._target
        w = np.asarray(target.value(t), dtype=float)
        dw = np.asarray(target.derivative(t))
        rad = np.clip(np.asarray(target.radicand(t)), 0.0, None)
        sing = rad <= self._eta2
        safe = np.where(sing, 1.0, rad)
        out = -dw * self._scale / np.sqrt(safe)
        if np.any(sing):
            d2w = np.asarray(target.second_derivative(t))
            sgn = np.where(dw != 0.0, -np.sign(dw), np.sign(w))
            out = np.where(sing, sgn * np.sqrt(np.abs(d2w)) * self._scale, out)
        return float(out) if out.ndim == 0 else out

    def at(self, t: float) -> float:
        w, dw, rad = self._target.synthesis_terms_at(t)
        if rad <= self._eta2:
            d2w = self._target.second_derivative_at(t)
            if dw != 0.0:
                sgn = -math.copysign(1.0, dw)
            else:
                sgn = math.copysign(1.0, w) if w != 0.0 else 1.0
            return sgn * math.sqrt(abs(d2w)) * self._scale
        return -dw * self._scale / math.sqrt(rad)


@dataclass(frozen=True)
class SynthesizedCoupling(CouplingProfile):
    """Coupling synthesized on a grid.

    `values` are the recorded per-node couplings; `regularized_indices` are
    exactly the nodes where the limit rule replaced the singular ratio.  When
    the source target is analytic, `exact` evaluates the same formula at
    arbitrary times and is preferred by the propagator; sampled-data sources
    leave it None and are evaluated by linear interpolation.
    """

    grid: TimeGrid
    values: np.ndarray
    regularized_indices: np.ndarray
    jump_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    exact: Callable | None = None

    def __call__(self, t):
        if self.exact is not None:
            return self.exact(t)
        return self.interpolate(t)

    def at(self, t: float) -> float:
        if self.exact is not None:
            return self.exact.at(t) if isinstance(self.exact, _ExactSynthesis) else float(self.exact(t))
        return float(np.interp(t, self.grid.times, self.values))

    def interpolate(self, t):
        """Linear interpolation of the recorded grid values."""
        out = np.interp(t, self.grid.times, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def breakpoints(self, t_start: float, t_end: float) -> np.ndarray:
        j = self.jump_times
        return j[(j > t_start) & (j < t_end)]


class CouplingSynthesizer(BaseEstimator):
    """Recovers the coupling that drives a prescribed inversion (fit/predict).

    Parameters
    ----------
    n : photon number of the initial Fock state; the synthesized coupling is
        scaled by (n + 1)^(-1/2) relative to the vacuum formula
    eta : singularity threshold; nodes with 1 - W^2 <= eta^2 take the
        removable-singularity limit sqrt(|d2W/dt2|) / (2 sqrt(n+1)), signed by
        the side of the extremum (-sign(dW), falling back to sign(W))
    detect_jumps : locate radicand zeros between nodes and record them as
        integrator breakpoints
    refine : oversampling factor of the jump search

    Attributes (after fit)
    ----------------------
    coupling_ : SynthesizedCoupling
    regularized_indices_ : ndarray of grid indices where the limit rule fired
    jump_times_ : ndarray of located interior singular times
    """

    def __init__(self, n: int = 0, eta: float = DEFAULT_ETA,
                 detect_jumps: bool = True, refine: int = 8):
        self.n = n
        self.eta = eta
        self.detect_jumps = detect_jumps
        self.refine = refine

    def fit(self, target: InversionTarget, grid: TimeGrid):
        n = require_index("n", self.n)
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")
        if target.params is not None and target.params.detuning != 0.0:
            raise DomainError("coupling synthesis is defined at resonance only (detuning = 0)")

        times = grid.times
        w = np.asarray(target.value(times), dtype=float)
        if abs(w[0] - 1.0) > INITIAL_INVERSION_TOL:
            raise DomainError(
                f"target inversion at t_start must be 1 (atom excited), got {w[0]!r}"
            )
        overshoot = np.max(np.abs(w)) - 1.0
        if overshoot > INITIAL_INVERSION_TOL:
            raise DomainError(
                f"|W| exceeds 1 by {overshoot:.3e} on the grid; no real coupling exists"
            )

        scale = 1.0 / (2.0 * math.sqrt(n + 1.0))
        dw = np.asarray(target.derivative(times))
        rad = np.clip(np.asarray(target.radicand(times)), 0.0, None)
        sing = rad <= self.eta**2
        safe = np.where(sing, 1.0, rad)
        values = -dw * scale / np.sqrt(safe)
        if np.any(sing):
            d2w = np.asarray(target.second_derivative(times[sing]))
            sgn = np.where(dw[sing] != 0.0, -np.sign(dw[sing]), np.sign(w[sing]))
            sgn = np.where(sgn != 0.0, sgn, 1.0)
            values[sing] = sgn * np.sqrt(np.abs(d2w)) * scale

        jumps = (self._locate_jumps(target, grid)
                 if self.detect_jumps else np.empty(0))

        exact = None if isinstance(target, SampledTarget) else _ExactSynthesis(target, scale, self.eta)
        self.coupling_ = SynthesizedCoupling(
            grid=grid,
            values=values,
            regularized_indices=np.flatnonzero(sing),
            jump_times=jumps,
            exact=exact,
        )
        self.regularized_indices_ = self.coupling_.regularized_indices
        self.jump_times_ = jumps
        return self

    def predict(self, t):
        """Synthesized coupling evaluated at arbitrary times."""
        check_is_fitted(self, "coupling_")
        return self.coupling_(t)

    def _locate_jumps(self, target: InversionTarget, grid: TimeGrid) -> np.ndarray:
        """Find interior radicand minima that reach (near) zero.

        The coupling flips sign wherever |W| touches 1 between nodes; the
        integrator needs those times to restart cleanly.  Shallow dips are
        recorded too (cheap, and they mark steep coupling swings).
        """
        refine = max(int(self.refine), 2)
        dense_n = (grid.n_samples - 1) * refine + 1
        tt = np.linspace(grid.t_start, grid.t_end, dense_n)
        rr = np.asarray(target.radicand(tt))
        interior = np.flatnonzero(
            (rr[1:-1] <= rr[:-2]) & (rr[1:-1] <= rr[2:]) & (rr[1:-1] < BREAKPOINT_RADICAND)
        ) + 1
        xatol = 1e-13 * max(1.0, grid.span)
        jumps = []
        for i in interior:
            a, b = tt[i - 1], tt[i + 1]
            da, db = target.derivative_at(a), target.derivative_at(b)
            if da * db < 0.0:
                # |W| touches an extremum inside: dW crosses zero linearly,
                # which localizes the flip far below the radicand noise floor
                x = brentq(target.derivative_at, a, b, xtol=1e-15, rtol=8.9e-16)
            else:
                res = minimize_scalar(
                    lambda x: float(target.radicand(x)),
                    bounds=(a, b),
                    method="bounded",
                    options={"xatol": xatol},
                )
                x = float(res.x)
            x = float(x)
            if grid.t_start < x < grid.t_end:
                jumps.append(x)
        if not jumps:
            return np.empty(0)
        jumps = np.sort(np.asarray(jumps))
        keep = np.concatenate([[True], np.diff(jumps) > 1e-9 * max(1.0, grid.span)])
        return jumps[keep]


def gipa(target: InversionTarget, n: int, grid: TimeGrid, *,
         eta: float = DEFAULT_ETA, detect_jumps: bool = True) -> SynthesizedCoupling:
    """Coupling that reproduces `target` from the initial state |e, n>."""
    return CouplingSynthesizer(n=n, eta=eta, detect_jumps=detect_jumps).fit(target, grid).coupling_


def ipa(target: InversionTarget, grid: TimeGrid, *,
        eta: float = DEFAULT_ETA, detect_jumps: bool = True) -> SynthesizedCoupling:
    """Vacuum inverse problem: coupling reproducing `target` from |e, 0>."""
    return gipa(target, 0, grid, eta=eta, detect_jumps=detect_jumps)


def delta_lambda(profile_a: CouplingProfile, profile_b: CouplingProfile,
                 grid: TimeGrid) -> np.ndarray:
    """Pointwise difference a - b of two couplings on a grid."""
    def values(p):
        if isinstance(p, SynthesizedCoupling) and p.grid == grid:
            return p.values
        return np.asarray(p(grid.times), dtype=float)

    return values(profile_a) - values(profile_b)
