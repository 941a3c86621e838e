"""Double-average statistics, the Bayes chain for P(tau|E_b), and tau_T."""

import numpy as np
import pytest

from tunneltime import (
    ClickSample,
    GaussianPrep,
    PotentialSpec,
    PropagatorConfig,
    dq_momentum_stats,
    flux_cutoff_time,
    make_grid,
    p_b_given_a,
    prepare_gaussian,
    run,
    sample_click_quantiles,
    tau_T,
    traversal_distribution,
)
from tunneltime.detect import ClickDensity
from tunneltime.propagate import DetectionSeries
from tunneltime.errors import (
    AllReflectedError,
    EmptyEnsembleError,
    NonpositiveDenominatorError,
    TauGridCoverageError,
)


def _gaussian_arrival(t_center, width=0.5, t0=0.0, t1=30.0, n=1501):
    """Synthetic normalized arrival density."""
    times = np.linspace(t0, t1, n)
    dens = np.exp(-((times - t_center) ** 2) / (2 * width**2))
    dens /= np.trapezoid(dens, times)
    return ClickDensity(times=times, density=dens, efficiency=1.0)


def _sample(t_a, weight, trans, arrival_center, state=None):
    return ClickSample(
        t_a=t_a,
        weight=weight,
        collapsed_state=state,
        transmittance=trans,
        arrival=_gaussian_arrival(arrival_center),
    )


class TestDQMomentumStats:
    def test_single_sample_collapses_to_quantum_moments(self):
        g = make_grid(0.0, 100.0, 2001)
        wf = prepare_gaussian(g, GaussianPrep(50.0, 8.0, 2.25))
        mean, delta = dq_momentum_stats([ClickSample(0.0, 1.0, wf)])
        assert mean == pytest.approx(8.0, rel=1e-8)
        assert delta == pytest.approx(1.0 / 3.0, rel=1e-6)

    def test_two_packet_mixture(self):
        g = make_grid(0.0, 100.0, 2001)
        wf1 = prepare_gaussian(g, GaussianPrep(50.0, 2.0, 2.25))
        wf2 = prepare_gaussian(g, GaussianPrep(50.0, 4.0, 2.25))
        samples = [ClickSample(0.0, 0.5, wf1), ClickSample(1.0, 0.5, wf2)]
        mean, delta = dq_momentum_stats(samples)
        assert mean == pytest.approx(3.0, rel=1e-8)
        # variance = quantum variance + spread of the means
        expected_var = 1.0 / 9.0 + 1.0
        assert delta**2 == pytest.approx(expected_var, rel=1e-6)

    def test_weight_scaling_invariance(self):
        g = make_grid(0.0, 100.0, 2001)
        wf1 = prepare_gaussian(g, GaussianPrep(50.0, 2.0, 2.25))
        wf2 = prepare_gaussian(g, GaussianPrep(50.0, 4.0, 2.25))
        a = dq_momentum_stats([ClickSample(0.0, 0.5, wf1), ClickSample(1.0, 0.5, wf2)])
        b = dq_momentum_stats([ClickSample(0.0, 7.0, wf1), ClickSample(1.0, 7.0, wf2)])
        assert a == pytest.approx(b, rel=1e-12)

    def test_empty_ensemble(self):
        with pytest.raises(EmptyEnsembleError):
            dq_momentum_stats([])


class TestPBGivenA:
    def test_all_transmitted(self):
        samples = [_sample(1.0, 0.5, 1.0, 5.0), _sample(2.0, 0.5, 1.0, 6.0)]
        assert p_b_given_a(samples) == pytest.approx(1.0)

    def test_all_reflected(self):
        samples = [_sample(1.0, 0.5, 0.0, 5.0), _sample(2.0, 0.5, 0.0, 6.0)]
        assert p_b_given_a(samples) == pytest.approx(0.0)

    def test_arithmetic_mean(self):
        samples = [_sample(1.0, 0.5, 0.2, 5.0), _sample(2.0, 0.5, 0.4, 6.0)]
        assert p_b_given_a(samples) == pytest.approx(0.3)

    def test_empty(self):
        with pytest.raises(EmptyEnsembleError):
            p_b_given_a([])


class TestTraversalDistribution:
    def test_single_sample_is_shifted_arrival(self):
        t_a, t_arr = 2.0, 8.0
        s = _sample(t_a, 1.0, 0.5, t_arr)
        tau_grid = np.linspace(0.0, 20.0, 2001)
        res = traversal_distribution([s], tau_grid)
        expect = np.interp(t_a + tau_grid, s.arrival.times, s.arrival.density)
        expect /= np.trapezoid(expect, tau_grid)
        assert np.allclose(res.density, expect, atol=1e-9)
        assert res.mean_tau == pytest.approx(t_arr - t_a, rel=1e-6)
        assert res.p_b_given_a == pytest.approx(0.5)

    def test_consistent_shifts_collapse_to_one_curve(self):
        # two branches whose arrivals differ exactly by their t_a offset
        # give the same tau distribution as either alone
        s1 = _sample(2.0, 0.5, 0.3, 8.0)
        s2 = _sample(4.0, 0.5, 0.3, 10.0)
        tau_grid = np.linspace(0.0, 20.0, 2001)
        res_pair = traversal_distribution([s1, s2], tau_grid)
        res_one = traversal_distribution([s1], tau_grid)
        assert np.allclose(res_pair.density, res_one.density, atol=1e-9)
        assert res_pair.mean_tau == pytest.approx(6.0, rel=1e-6)

    def test_weight_scaling_invariance(self):
        s1 = _sample(2.0, 1.0, 0.3, 8.0)
        s2 = _sample(4.0, 2.0, 0.6, 11.0)
        scaled = [
            ClickSample(s.t_a, 5.5 * s.weight, None, s.transmittance, s.arrival)
            for s in (s1, s2)
        ]
        tau_grid = np.linspace(0.0, 25.0, 2501)
        a = traversal_distribution([s1, s2], tau_grid)
        b = traversal_distribution(scaled, tau_grid)
        assert np.allclose(a.density, b.density, atol=1e-12)
        assert a.mean_tau == pytest.approx(b.mean_tau, rel=1e-12)
        assert a.p_b_given_a == pytest.approx(b.p_b_given_a, rel=1e-12)

    def test_mean_tau_positive_and_normalized(self):
        s1 = _sample(2.0, 0.7, 0.2, 6.0)
        s2 = _sample(3.0, 0.3, 0.5, 12.0)
        tau_grid = np.linspace(0.0, 25.0, 2501)
        res = traversal_distribution([s1, s2], tau_grid)
        assert np.all(res.density >= 0.0)
        assert np.trapezoid(res.density, tau_grid) == pytest.approx(1.0, abs=1e-4)
        assert res.mean_tau > 0

    def test_p_b_matches_standalone_exactly(self):
        samples = [
            _sample(2.0, 0.25, 0.3, 8.0),
            _sample(3.0, 0.5, 1e-13, 9.0),  # below the noise floor: excluded
            _sample(4.0, 0.25, 0.6, 10.0),
        ]
        tau_grid = np.linspace(0.0, 25.0, 2501)
        res = traversal_distribution(samples, tau_grid)
        assert res.p_b_given_a == p_b_given_a(samples)

    def test_all_reflected_error(self):
        samples = [_sample(2.0, 1.0, 1e-13, 8.0)]
        with pytest.raises(AllReflectedError):
            traversal_distribution(samples, np.linspace(0.0, 20.0, 201))

    def test_tau_grid_coverage_error(self):
        s = _sample(2.0, 1.0, 0.5, 25.0)  # arrival mass near t=25
        with pytest.raises(TauGridCoverageError):
            traversal_distribution([s], np.linspace(0.0, 10.0, 101))


class TestSampleClickQuantiles:
    def test_exponential_quantiles(self):
        rate = 4.0
        times = np.linspace(0.0, 5.0, 20001)
        dens = rate * np.exp(-rate * times) / (1 - np.exp(-rate * 5.0))
        click = ClickDensity(times=times, density=dens, efficiency=1.0)
        t_a, w = sample_click_quantiles(click, 16)
        q = (np.arange(16) + 0.5) / 16
        expected = -np.log(1 - q * (1 - np.exp(-rate * 5.0))) / rate
        assert np.allclose(t_a, expected, atol=1e-3)
        assert w.sum() == pytest.approx(1.0)
        assert np.all(np.diff(t_a) > 0)

    def test_single_sample_is_median(self):
        times = np.linspace(0.0, 1.0, 1001)
        dens = np.full_like(times, 1.0)
        click = ClickDensity(times=times, density=dens, efficiency=1.0)
        t_a, _ = sample_click_quantiles(click, 1)
        assert t_a[0] == pytest.approx(0.5, abs=1e-3)


class TestTauT:
    def test_free_transit(self):
        g = make_grid(0.0, 150.0, 6001)  # dx=0.025
        wf = prepare_gaussian(g, GaussianPrep(20.0, 8.0, 2.25))
        _, series = run(
            wf, PotentialSpec(), PropagatorConfig(), 13.0,
            probes=(50.0, 80.0), record_norm=False,
        )
        t_c = flux_cutoff_time(series, 50.0)
        value = tau_T(series, 50.0, series, 80.0, t_c)
        assert value == pytest.approx(30.0 / 8.0, rel=0.03)

    def test_same_point_is_zero(self):
        g = make_grid(0.0, 150.0, 6001)
        wf = prepare_gaussian(g, GaussianPrep(20.0, 8.0, 2.25))
        _, series = run(
            wf, PotentialSpec(), PropagatorConfig(), 13.0,
            probes=(60.0,), record_norm=False,
        )
        t_c = flux_cutoff_time(series, 60.0)
        value = tau_T(series, 60.0, series, 60.0, t_c)
        # <t>_out integrates the full record, <t>_in stops at t_c; for a
        # packet that fully clears the probe before t_c both agree
        assert value == pytest.approx(0.0, abs=0.02)

    def test_nonpositive_denominator(self):
        times = np.linspace(0.0, 10.0, 101)
        j = np.zeros_like(times)
        series = DetectionSeries(times=times, flux_probes={50.0: j})
        with pytest.raises(NonpositiveDenominatorError):
            tau_T(series, 50.0, series, 50.0, 5.0)


class TestFluxCutoff:
    def test_finds_post_peak_quiet_time(self):
        times = np.linspace(0.0, 10.0, 1001)
        j = np.exp(-((times - 3.0) ** 2) / 0.5)
        series = DetectionSeries(times=times, flux_probes={50.0: j})
        t_c = flux_cutoff_time(series, 50.0, rel=1e-4)
        assert 3.0 < t_c < 6.0
        assert abs(np.interp(t_c, times, j)) <= 1e-4 * j.max() * 1.5
