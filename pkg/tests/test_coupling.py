"""Coupling synthesis: the inverse-problem formulas and their closed forms."""

import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from jcsynth import (
    CoherentSeriesTarget,
    ConstantCoupling,
    ConstantCouplingTarget,
    CosSquaredCoupling,
    CosSquaredTarget,
    CouplingSynthesizer,
    DeformedClosedFormCoupling,
    DeformedSectorSummandTarget,
    DomainError,
    PhysicalParams,
    SampledTarget,
    SqrtTimeCoupling,
    SqrtTimeTarget,
    SynthesizedCoupling,
    TimeGrid,
    deformed_gipa_closed_form,
    delta_lambda,
    gipa,
    ipa,
    regularized_window_mask,
)

P = PhysicalParams(lambda0=1.0, zeta=1.0, epsilon=5e-4, mean_n=5.0)
P0 = PhysicalParams(lambda0=1.0, zeta=1.0, epsilon=0.0, mean_n=5.0)


def outside_windows(grid, coupling):
    return ~regularized_window_mask(grid.n_samples, coupling.regularized_indices)


class TestIpa:
    def test_recovers_sqrt_time_magnitude(self):
        # the formula rectifies the sign by sign(sin(phase)); the magnitude is
        # exactly lambda0 sqrt(zeta t)
        grid = TimeGrid(0.0, 6.0, 1201)
        lam = ipa(SqrtTimeTarget(P0), grid)
        keep = outside_windows(grid, lam)
        err = np.abs(np.abs(lam.values) - np.sqrt(grid.times))[keep]
        assert np.max(err) <= 1e-8

    def test_sqrt_time_sign_is_sign_of_sin_phase(self):
        grid = TimeGrid(0.0, 6.0, 1201)
        lam = ipa(SqrtTimeTarget(P0), grid)
        keep = outside_windows(grid, lam)
        phase = 4.0 / 3.0 * np.sqrt(grid.times**3)
        s = np.sign(np.sin(phase))[keep]
        nonzero = s != 0
        assert np.all(np.sign(lam.values[keep])[nonzero] == s[nonzero])

    def test_constant_target_gives_rectified_constant(self):
        grid = TimeGrid(0.0, 10.0, 2001)
        lam = ipa(ConstantCouplingTarget(0, P0), grid)
        t = grid.times
        on = np.sin(2.0 * t) > 1e-3
        assert np.allclose(lam.values[on], 1.0, atol=1e-10)
        off = np.sin(2.0 * t) < -1e-3
        assert np.allclose(lam.values[off], -1.0, atol=1e-10)
        # magnitude lambda0 wherever |sin| is appreciable
        appreciable = np.abs(np.sin(2.0 * t)) > 1e-3
        assert np.allclose(np.abs(lam.values[appreciable]), 1.0, atol=1e-10)

    def test_equals_gipa_n0_bitwise(self):
        grid = TimeGrid(0.0, 12.0, 601)
        target = CoherentSeriesTarget(P0)
        a = ipa(target, grid)
        b = gipa(target, 0, grid)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.regularized_indices, b.regularized_indices)

    def test_vacuum_value_at_origin(self):
        # limit rule at the t = 0 touch point: lambda0 sqrt(<n> + 1)
        grid = TimeGrid(0.0, 25.0, 2001)
        lam = ipa(CoherentSeriesTarget(P0), grid)
        assert 0 in lam.regularized_indices
        assert lam.values[0] == pytest.approx(math.sqrt(6.0), rel=1e-9)

    def test_rejects_not_initially_excited(self):
        grid = TimeGrid(0.5, 6.0, 101)  # W(0.5) != 1
        with pytest.raises(DomainError, match="t_start"):
            ipa(SqrtTimeTarget(P0), grid)

    def test_rejects_overshooting_target(self):
        # starts exactly excited but dips below -1 later
        grid = TimeGrid(0.0, 2.0, 101)
        bad = SampledTarget(grid, 1.002 * np.cos(2.0 * grid.times) - 0.002)
        with pytest.raises(DomainError, match="exceeds 1"):
            ipa(bad, grid)

    def test_rejects_detuned_params(self):
        detuned = PhysicalParams(lambda0=1.0, detuning=0.5)
        grid = TimeGrid(0.0, 6.0, 301)
        with pytest.raises(DomainError, match="resonance"):
            ipa(ConstantCouplingTarget(0, detuned), grid)


class TestGipa:
    def test_cos_squared_matches_closed_form(self):
        # Eq.-16-style closed form, signed, away from regularized windows
        n = 5
        grid = TimeGrid(0.0, 6.0, 1201)
        lam = gipa(CosSquaredTarget(n, P0), n, grid)
        om = P0.rabi(n)
        x = om * grid.times / 2.0
        with np.errstate(invalid="ignore"):
            closed = om / (2.0 * math.sqrt(n + 1.0)) * np.sin(om * grid.times) / (
                2.0 * np.sqrt(np.sin(x) ** 2 * (1.0 + np.cos(x) ** 2))
            )
        # avoid the exact touch points where the closed form divides 0/0
        keep = outside_windows(grid, lam) & (np.abs(np.sin(x)) > 1e-4)
        assert np.max(np.abs(lam.values - closed)[keep]) <= 1e-8

    def test_cos_squared_profile_object_agrees(self):
        n = 5
        grid = TimeGrid(0.0, 6.0, 1201)
        lam = gipa(CosSquaredTarget(n, P0), n, grid)
        profile = CosSquaredCoupling(n, P0)
        keep = outside_windows(grid, lam)
        assert np.max(np.abs(lam.values - profile(grid.times))[keep]) <= 1e-10

    def test_scaling_in_n(self):
        # gipa scales the vacuum formula by (n+1)^(-1/2) for the same waveform
        grid = TimeGrid(0.0, 6.0, 601)
        target = SqrtTimeTarget(P0)
        lam0 = gipa(target, 0, grid).values
        lam3 = gipa(target, 3, grid).values
        assert np.allclose(lam3, lam0 / 2.0, atol=1e-14)

    def test_constant_target_rectified_lambda0(self):
        n = 4
        grid = TimeGrid(0.0, 10.0, 2001)
        lam = gipa(ConstantCouplingTarget(n, P0), n, grid)
        om = P0.rabi(n)
        appreciable = np.abs(np.sin(om * grid.times)) > 1e-3
        assert np.allclose(np.abs(lam.values[appreciable]), 1.0, atol=1e-10)

    def test_jump_times_located(self):
        n = 2
        grid = TimeGrid(0.0, 10.0, 801)
        lam = gipa(ConstantCouplingTarget(n, P0), n, grid)
        om = P0.rabi(n)
        expected = np.arange(1, int(10.0 * om / math.pi) + 1) * math.pi / om
        expected = expected[expected < 10.0]
        assert len(lam.jump_times) == len(expected)
        assert np.max(np.abs(lam.jump_times - expected)) < 1e-12


class TestSynthesizerEstimator:
    def test_get_params_roundtrip(self):
        synth = CouplingSynthesizer(n=3, eta=1e-7)
        params = synth.get_params()
        assert params["n"] == 3 and params["eta"] == 1e-7
        cloned = clone(synth)
        assert cloned.get_params() == params

    def test_unfitted_predict_raises(self):
        with pytest.raises(NotFittedError):
            CouplingSynthesizer().predict(0.1)

    def test_fit_predict(self):
        grid = TimeGrid(0.0, 6.0, 601)
        synth = CouplingSynthesizer().fit(SqrtTimeTarget(P0), grid)
        t = np.array([0.9, 1.1])
        assert np.allclose(np.abs(synth.predict(t)), np.sqrt(t), atol=1e-12)
        assert isinstance(synth.coupling_, SynthesizedCoupling)

    def test_invalid_eta(self):
        grid = TimeGrid(0.0, 6.0, 101)
        with pytest.raises(ValueError, match="eta"):
            CouplingSynthesizer(eta=0.0).fit(SqrtTimeTarget(P0), grid)


class TestExactEvaluator:
    def test_exact_matches_grid_values(self):
        grid = TimeGrid(0.0, 25.0, 801)
        target = CoherentSeriesTarget(P0)
        lam = ipa(target, grid)
        keep = outside_windows(grid, lam)
        assert np.max(np.abs(lam(grid.times) - lam.values)[keep]) <= 1e-13

    def test_scalar_path_matches_vector_path(self):
        grid = TimeGrid(0.0, 25.0, 401)
        lam = ipa(CoherentSeriesTarget(P0), grid)
        for t in (0.0, 0.3, 7.77, 14.05):
            assert lam.at(t) == pytest.approx(float(lam(t)), abs=1e-13)

    def test_sampled_target_has_no_exact_path(self):
        grid = TimeGrid(0.0, 6.0, 1201)
        data = SampledTarget(grid, np.cos(2.0 * grid.times))
        lam = ipa(data, grid)
        assert lam.exact is None
        mid = 0.5 * (grid.times[100] + grid.times[101])
        expected = 0.5 * (lam.values[100] + lam.values[101])
        assert lam.at(mid) == pytest.approx(expected, abs=1e-14)

    def test_synthesized_values_finite(self):
        grid = TimeGrid(0.0, 25.0, 2001)
        for target in (CoherentSeriesTarget(P0), CosSquaredTarget(5, P0)):
            lam = gipa(target, getattr(target, "n", 0), grid)
            assert np.all(np.isfinite(lam.values))


class TestDeformedClosedForm:
    @pytest.mark.parametrize("n", [0, 1, 2, 5, 10])
    def test_matches_numeric_gipa(self, n):
        grid = TimeGrid(0.0, 25.0, 2001)
        lam = gipa(DeformedSectorSummandTarget(n, P), n, grid)
        closed = deformed_gipa_closed_form(n, P, grid.times)
        keep = outside_windows(grid, lam)
        assert np.max(np.abs(lam.values - closed)[keep]) <= 1e-8

    def test_eps0_collapses_to_sign(self):
        t = np.linspace(0.01, 10.0, 500)
        n = 3
        om = P0.rabi(n)
        vals = deformed_gipa_closed_form(n, P0, t)
        s = np.sign(np.sin(om * t))
        keep = np.abs(np.sin(om * t)) > 1e-6
        assert np.max(np.abs(vals - s)[keep]) <= 1e-9

    def test_origin_limit(self):
        # 0/0 point: sqrt of |second derivative| scaled into the sector
        expected = math.sqrt(1.0 + 2.0 * P.epsilon * P.mean_n)
        assert deformed_gipa_closed_form(0, P, 0.0) == pytest.approx(expected, rel=1e-12)

    def test_negative_radicand_reported(self):
        # eps <n> > 1 makes the summand overshoot |W| = 1: domain error
        with pytest.warns(UserWarning, match="epsilon"):
            strong = PhysicalParams(lambda0=1.0, epsilon=9e-3, mean_n=200.0)
        with pytest.raises(DomainError, match="radicand"):
            deformed_gipa_closed_form(0, strong, np.linspace(0.0, 10.0, 2001))

    def test_profile_object(self):
        profile = DeformedClosedFormCoupling(2, P)
        t = np.array([0.4, 1.7])
        assert np.allclose(profile(t), deformed_gipa_closed_form(2, P, t), atol=1e-15)
        assert profile.at(0.4) == pytest.approx(float(profile(0.4)), abs=1e-15)


class TestDeltaLambda:
    def test_identical_profiles_zero(self):
        grid = TimeGrid(0.0, 10.0, 301)
        a = ConstantCoupling(1.0)
        assert np.all(delta_lambda(a, a, grid) == 0.0)

    def test_eps0_deltas_vanish(self):
        grid = TimeGrid(0.0, 25.0, 801)
        from jcsynth import DeformedCoherentSeriesTarget

        lam_eps0 = ipa(DeformedCoherentSeriesTarget(P0), grid)
        lam_plain = ipa(CoherentSeriesTarget(P0), grid)
        assert np.max(np.abs(delta_lambda(lam_eps0, lam_plain, grid))) <= 1e-13

    def test_linear_scaling_in_eps(self):
        grid = TimeGrid(0.0, 25.0, 2001)
        from jcsynth import DeformedCoherentSeriesTarget

        half = PhysicalParams(lambda0=1.0, epsilon=2.5e-4, mean_n=5.0)
        base = ipa(CoherentSeriesTarget(P0), grid)
        d_full = delta_lambda(ipa(DeformedCoherentSeriesTarget(P), grid), base, grid)
        d_half = delta_lambda(ipa(DeformedCoherentSeriesTarget(half), grid), base, grid)
        assert np.max(np.abs(d_full)) / np.max(np.abs(d_half)) == pytest.approx(2.0, rel=0.02)

    def test_closed_form_profiles(self):
        grid = TimeGrid(0.0, 5.0, 201)
        d = delta_lambda(SqrtTimeCoupling(1.0, 1.0), ConstantCoupling(1.0), grid)
        assert np.allclose(d, np.sqrt(grid.times) - 1.0, atol=1e-14)


class TestWindows:
    def test_mask_shape_and_width(self):
        mask = regularized_window_mask(10, [4], steps=2)
        assert mask.tolist() == [False, False, True, True, True, True, True, False, False, False]

    def test_empty_indices(self):
        assert not regularized_window_mask(5, []).any()
