"""Deformed observables and the deformed-vs-undeformed comparison scenario.

The deformation enters only through the dimensionless parameter epsilon; at
epsilon = 0 every quantity here collapses to its undeformed counterpart.
The detuned closed form S_n(t) is the one place a nonzero detuning is
accepted; synthesis and propagation require resonance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TAIL_TOL, PhysicalParams, PoissonStatistics, TimeGrid
from .coupling import delta_lambda, ipa
from .exceptions import DomainError
from .integrate import DEFAULT_ATOL, DEFAULT_RTOL
from .propagation import (
    ScenarioResult,
    run_gipa_pipeline,
    single_sector_scenario,
)
from .targets import (
    CoherentSeriesTarget,
    DeformedCoherentSeriesTarget,
    deformed_summand_family,
)
from .validation import require_index


def s_n(n: int, t, params: PhysicalParams):
    """Detuned sector transition probability.

    S_n(t) = Omega_n^2 / (Delta^2 + Omega_n^2) * sin^2(sqrt(Delta^2 + Omega_n^2) t / 2),
    bounded by the Lorentzian prefactor; reduces to sin^2(Omega_n t / 2) on
    resonance.
    """
    require_index("n", n)
    omega = params.rabi(n)
    delta = params.detuning
    rabi_sq = omega * omega
    general_sq = delta * delta + rabi_sq
    t = np.asarray(t, dtype=float)
    out = (rabi_sq / general_sq) * np.sin(0.5 * math.sqrt(general_sq) * t) ** 2
    return float(out) if out.ndim == 0 else out


def expected_sz(t, params: PhysicalParams, tail_tol: float = DEFAULT_TAIL_TOL):
    """Average spin z-projection for an initially coherent field.

    1/2 - sum_n P_n S_n + epsilon <n> sum_n P_n [S_n - S_{n+2}], with Poisson
    weights P_n; twice this value is the population inversion at resonance.
    """
    stats = PoissonStatistics(params.mean_n)
    n_max = stats.truncation_index(tail_tol)
    weights = stats.weights(n_max)
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)

    s = np.empty((t.size, n_max + 3))
    for n in range(n_max + 3):
        s[:, n] = s_n(n, t, params)
    main = np.sum(weights * s[:, : n_max + 1], axis=1)
    correction = np.sum(weights * (s[:, : n_max + 1] - s[:, 2 : n_max + 3]), axis=1)
    out = 0.5 - main + params.epsilon * params.mean_n * correction
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class DeformedScenario:
    """Vacuum-reproduction pair plus difference diagnostics.

    `deformed`/`undeformed` are the vacuum inverse-problem round trips of the
    deformed and undeformed coherent series; `delta_w`/`delta_lambda` are
    their pointwise inversion and coupling differences; `gipa_deformed` is
    the per-sector closed-form reproduction of the deformed series from an
    initially coherent field.
    """

    deformed: ScenarioResult
    undeformed: ScenarioResult
    delta_w: np.ndarray
    delta_lambda: np.ndarray
    gipa_deformed: ScenarioResult


def deformed_scenario(
    params: PhysicalParams,
    grid: TimeGrid,
    *,
    tail_tol: float = DEFAULT_TAIL_TOL,
    eta: float = 1e-6,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    include_gipa: bool = True,
) -> DeformedScenario:
    """Run the deformed and undeformed reproductions and their diagnostics."""
    if params.detuning != 0.0:
        raise DomainError("deformed_scenario requires resonance (detuning = 0)")

    deformed_target = DeformedCoherentSeriesTarget(params, tail_tol)
    undeformed_target = CoherentSeriesTarget(params, tail_tol)

    lam_deformed = ipa(deformed_target, grid, eta=eta)
    lam_undeformed = ipa(undeformed_target, grid, eta=eta)

    deformed = single_sector_scenario(deformed_target, lam_deformed, 0, grid,
                                      rtol=rtol, atol=atol)
    undeformed = single_sector_scenario(undeformed_target, lam_undeformed, 0, grid,
                                        rtol=rtol, atol=atol)

    dw = deformed.target_w - undeformed.target_w
    dlam = delta_lambda(lam_deformed, lam_undeformed, grid)

    gipa_result = None
    if include_gipa:
        gipa_result = run_gipa_pipeline(
            deformed_summand_family(params),
            PoissonStatistics(params.mean_n),
            params,
            grid,
            tail_tol=tail_tol,
            eta=eta,
            rtol=rtol,
            atol=atol,
        )
    return DeformedScenario(
        deformed=deformed,
        undeformed=undeformed,
        delta_w=dw,
        delta_lambda=dlam,
        gipa_deformed=gipa_result,
    )
