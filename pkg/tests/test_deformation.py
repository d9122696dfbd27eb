"""Deformed observables: detuned closed form, spin expectation, comparison runs."""

import math

import numpy as np
import pytest

from jcsynth import (
    CoherentSeriesTarget,
    DeformedCoherentSeriesTarget,
    DomainError,
    PhysicalParams,
    TimeGrid,
    deformed_scenario,
    expected_sz,
    s_n,
)

P = PhysicalParams(lambda0=1.0, epsilon=5e-4, mean_n=5.0)
P0 = PhysicalParams(lambda0=1.0, epsilon=0.0, mean_n=5.0)


class TestSn:
    def test_zero_at_origin(self):
        assert s_n(0, 0.0, P) == 0.0
        assert s_n(7, 0.0, PhysicalParams(detuning=3.0)) == 0.0

    def test_resonance_reduction(self):
        t = np.linspace(0.0, 10.0, 200)
        for n in (0, 4):
            om = P.rabi(n)
            expected = np.sin(om * t / 2.0) ** 2
            assert np.allclose(s_n(n, t, P), expected, atol=1e-14)
            assert np.allclose(s_n(n, t, P), (1.0 - np.cos(om * t)) / 2.0, atol=1e-14)

    def test_detuned_golden_value(self):
        # Delta = 10 Omega_0 = 20: direct evaluation, recorded before the build
        params = PhysicalParams(lambda0=1.0, detuning=20.0)
        assert s_n(0, 1.0, params) == pytest.approx(0.0033904108908978364, rel=1e-13)

    def test_lorentzian_bound(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(0, 12))
            delta = float(rng.uniform(-8.0, 8.0))
            params = PhysicalParams(lambda0=1.0, detuning=delta)
            om = params.rabi(n)
            bound = om**2 / (delta**2 + om**2)
            t = rng.uniform(0.0, 30.0, size=64)
            values = s_n(n, t, params)
            assert np.all(values >= 0.0) and np.all(values <= bound + 1e-15)


class TestExpectedSz:
    def test_half_at_origin(self):
        assert expected_sz(0.0, P) == pytest.approx(0.5, abs=1e-14)

    def test_undeformed_resonant_reduction(self):
        # twice the spin average is the coherent-series inversion
        t = np.linspace(0.0, 25.0, 500)
        assert np.max(np.abs(2.0 * expected_sz(t, P0) - CoherentSeriesTarget(P0)(t))) <= 1e-10

    def test_deformed_resonant_identity(self):
        t = np.linspace(0.0, 25.0, 500)
        series = DeformedCoherentSeriesTarget(P)(t)
        assert np.max(np.abs(2.0 * expected_sz(t, P) - series)) <= 1e-10

    def test_single_point_identity(self):
        series = float(DeformedCoherentSeriesTarget(P)(2.0))
        assert 2.0 * expected_sz(2.0, P) == pytest.approx(series, abs=1e-10)

    def test_range_bound(self):
        t = np.linspace(0.0, 40.0, 2000)
        values = expected_sz(t, P)
        eps = P.epsilon
        assert np.all(values >= -0.5 - 10.0 * eps)
        assert np.all(values <= 0.5 + 10.0 * eps)

    def test_eps0_collapse_is_exact(self):
        t = np.linspace(0.0, 25.0, 300)
        undeformed = 0.5 - np.sum(  # direct Eq-9-style sum without the eps term
            np.stack([float(w) * np.asarray(s_n(n, t, P0))
                      for n, w in enumerate(_poisson_weights(28))]), axis=0)
        assert np.max(np.abs(expected_sz(t, P0) - undeformed)) <= 1e-13


def _poisson_weights(count):
    return [5.0**n * math.exp(-5.0) / math.factorial(n) for n in range(count)]


@pytest.fixture(scope="module")
def scenario():
    grid = TimeGrid(0.0, 25.0, 1001)
    return deformed_scenario(P, grid), grid


class TestDeformedScenario:

    def test_deltas_zero_at_origin(self, scenario):
        comparison, _ = scenario
        assert comparison.delta_w[0] == pytest.approx(0.0, abs=1e-12)

    def test_round_trips_tight(self, scenario):
        comparison, _ = scenario
        assert np.max(np.abs(comparison.deformed.residuals)) <= 1e-6
        assert np.max(np.abs(comparison.undeformed.residuals)) <= 1e-6
        assert comparison.gipa_deformed is not None
        assert np.max(np.abs(comparison.gipa_deformed.residuals)) <= 1e-6

    def test_delta_w_equals_series_difference(self, scenario):
        comparison, grid = scenario
        series = (DeformedCoherentSeriesTarget(P)(grid.times)
                  - CoherentSeriesTarget(P)(grid.times))
        assert np.max(np.abs(comparison.delta_w - series)) <= 1e-14

    def test_nonzero_coupling_difference_implies_inversion_difference(self, scenario):
        # windows where the couplings differ appreciably also show a
        # population-inversion difference (the Fig.-3-style coincidence)
        comparison, grid = scenario
        t = grid.times
        dl, dw = np.abs(comparison.delta_lambda), np.abs(comparison.delta_w)
        # revival window around 2 pi sqrt(5)
        window = (t >= 10.0) & (t <= 18.0)
        assert np.max(dl[window]) > 0.1 * np.max(dl)
        assert np.max(dw[window]) > 0.1 * np.max(dw)

    def test_eps0_everything_collapses(self):
        grid = TimeGrid(0.0, 12.0, 401)
        comparison = deformed_scenario(P0, grid, include_gipa=False)
        assert np.max(np.abs(comparison.delta_w)) <= 1e-13
        assert np.max(np.abs(comparison.delta_lambda)) <= 1e-13

    def test_rejects_detuning(self):
        grid = TimeGrid(0.0, 5.0, 101)
        with pytest.raises(DomainError, match="resonance"):
            deformed_scenario(PhysicalParams(detuning=0.3), grid)

    def test_delta_scaling_linear_in_eps(self):
        grid = TimeGrid(0.0, 25.0, 1001)
        half = PhysicalParams(lambda0=1.0, epsilon=2.5e-4, mean_n=5.0)
        full = deformed_scenario(P, grid, include_gipa=False)
        halved = deformed_scenario(half, grid, include_gipa=False)
        ratio_w = np.max(np.abs(full.delta_w)) / np.max(np.abs(halved.delta_w))
        ratio_l = np.max(np.abs(full.delta_lambda)) / np.max(np.abs(halved.delta_lambda))
        assert ratio_w == pytest.approx(2.0, rel=0.02)
        assert ratio_l == pytest.approx(2.0, rel=0.02)
