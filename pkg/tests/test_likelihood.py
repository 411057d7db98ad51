import warnings

import numpy as np
import pytest

from cdcimaging.coherence import circular_distance
from cdcimaging.errors import DegeneratePhaseWarning
from cdcimaging.estimation import (EstimateResult, MLEOptions, log_likelihood, mle_estimate)
from cdcimaging.estimation.likelihood import click_nbar_guess, moment_nbar
from cdcimaging.photon_stats import ThermalModeParams, click_prob, coincidence_prob
from cdcimaging.simulator import (Dataset, PhaseSchedule, Scheme, degrade_to_click,
                                  restrict_to_phase, sample_events)

TRUTH = ThermalModeParams.from_values(1.0, 0.096, 4.11)
SCHEDULE = PhaseSchedule.uniform(35)


@pytest.fixture(scope="module")
def big():
    return sample_events(TRUTH, SCHEDULE, 10000, seed=3)


def test_single_vacuum_event():
    d = Dataset([0], [0], [0], SCHEDULE)
    assert log_likelihood(d, ThermalModeParams.from_values(1.0, 0.0)) == pytest.approx(np.log(0.25))


def test_matches_direct_event_sum(big):
    small = big.subset(slice(0, 300))
    cand = ThermalModeParams.from_values(0.9, 0.3, 1.0)
    direct = sum(np.log(coincidence_prob((x, y), cand, SCHEDULE.applied_phases[k] - 1.0))
                 for k, x, y in zip(small.phase_index, small.x, small.y))
    assert log_likelihood(small, cand) == pytest.approx(direct, abs=1e-9)
    clicks = degrade_to_click(small)
    direct = sum(np.log(click_prob((x, y), cand, SCHEDULE.applied_phases[k] - 1.0))
                 for k, x, y in zip(clicks.phase_index, clicks.x, clicks.y))
    assert log_likelihood(clicks, cand) == pytest.approx(direct, abs=1e-9)


def test_permutation_invariance(big):
    perm = np.random.default_rng(0).permutation(len(big))
    shuffled = big.subset(perm)
    assert log_likelihood(shuffled, TRUTH) == pytest.approx(log_likelihood(big, TRUTH), rel=1e-12)


def test_truth_beats_offsets():
    offsets = [ThermalModeParams.from_values(1.0, 0.096 + 0.05, 4.11),
               ThermalModeParams.from_values(1.0, 0.096, 4.11 + 1.0)]
    wins = 0
    for seed in range(100):
        d = sample_events(TRUTH, SCHEDULE, 10000, seed=1000 + seed)
        base = log_likelihood(d, TRUTH)
        wins += all(base > log_likelihood(d, o) for o in offsets)
    assert wins >= 95


def test_count_estimate_near_truth(big):
    est = mle_estimate(big)
    assert isinstance(est, EstimateResult)
    assert est.converged and est.phase_identified
    assert est.scheme == "count" and est.n_events == 10000
    assert est.nbar_estimate == pytest.approx(moment_nbar(big))
    # about 3 sigma of the 10k-event Count spread
    assert abs(est.cdc_estimate.magnitude - 0.096) < 0.03
    assert circular_distance(est.cdc_estimate.phase, 4.11) < 0.3
    assert est.log_likelihood >= log_likelihood(big, ThermalModeParams(est.nbar_estimate, TRUTH.cdc))


def test_estimate_is_deterministic(big):
    a, b = mle_estimate(big), mle_estimate(big)
    assert a.to_dict() == b.to_dict()


def test_click_estimate(big):
    est = mle_estimate(big, "click")
    assert "degraded-to-click" in est.flags
    assert est.scheme == "click"
    assert est.nbar_estimate == pytest.approx(1.0, abs=0.15)
    assert abs(est.cdc_estimate.magnitude - 0.096) < 0.05
    assert click_nbar_guess(degrade_to_click(big)) > 0
    with pytest.raises(ValueError):
        mle_estimate(degrade_to_click(big), "count")


def test_fit_nbar_option(big):
    est = mle_estimate(big, options=MLEOptions(fit_nbar=True))
    assert est.nbar_estimate == pytest.approx(1.0, abs=0.05)
    fixed = mle_estimate(big, options=MLEOptions(nbar=1.0))
    assert fixed.nbar_estimate == 1.0


def test_zero_magnitude_warns():
    d = sample_events(ThermalModeParams.from_values(1.0, 0.0), SCHEDULE, 2000, 9)
    with pytest.warns(DegeneratePhaseWarning):
        est = mle_estimate(d)
    assert not est.phase_identified and "phase-unconstrained" in est.flags


def test_traditional_rules(big):
    with pytest.raises(ValueError):
        mle_estimate(big, "traditional")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneratePhaseWarning)
        est = mle_estimate(restrict_to_phase(big, 0))
    assert est.scheme == "traditional" and "weak-identifiability" in est.flags


def test_traditional_bias_is_positive():
    # a single applied phase constrains only |gamma| cos(theta); the fit drifts upward
    single = PhaseSchedule.fixed(0.0)
    g = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegeneratePhaseWarning)
        for seed in range(20):
            d = restrict_to_phase(sample_events(TRUTH, single, 2000, 500 + seed), 0)
            g.append(mle_estimate(d, Scheme.TRADITIONAL).cdc_estimate.magnitude)
    assert np.mean(g) > 0.096


def test_empty_dataset_rejected():
    empty = Dataset([], [], [], SCHEDULE)
    with pytest.raises(ValueError):
        mle_estimate(empty)
    with pytest.raises(ValueError):
        log_likelihood(empty, TRUTH)
