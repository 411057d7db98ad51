"""Estimator precision versus dataset size for the three measurement schemes."""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..coherence import wrap_phase
from ..errors import DegeneratePhaseWarning
from ..photon_stats import ThermalModeParams
from ..simulator import (PhaseSchedule, Scheme, degrade_to_click, derive_seeds,
                         disjoint_samples, restrict_to_phase, sample_events)
from .likelihood import MLEOptions, mle_estimate

SWEEP_COLUMNS = ("scheme", "size", "n_trials", "gamma_mean", "gamma_std", "phi_mean", "phi_std")


def circular_mean(phases) -> float:
    return wrap_phase(np.angle(np.mean(np.exp(1j * np.asarray(phases)))))


def circular_std(phases) -> float:
    """``sqrt(-2 ln R)`` with ``R`` the mean resultant length."""
    R = np.abs(np.mean(np.exp(1j * np.asarray(phases))))
    return float(np.sqrt(-2.0 * np.log(min(max(R, 1e-300), 1.0))))


@dataclass(frozen=True)
class TrialStatistics:
    """Spread of the estimates over repeated disjoint datasets of one size."""

    scheme: str
    dataset_size: int
    n_trials: int
    gamma_mean: float
    gamma_std: float
    phi_mean: float
    phi_std: float
    gamma_values: tuple = ()
    phi_values: tuple = ()

    @classmethod
    def from_estimates(cls, scheme, size, gammas, phis) -> "TrialStatistics":
        gammas, phis = np.asarray(gammas, float), np.asarray(phis, float)
        if gammas.size < 2:
            raise ValueError("trial statistics need at least 2 trials")
        return cls(str(scheme), int(size), int(gammas.size), float(gammas.mean()),
                   float(gammas.std(ddof=1)), circular_mean(phis), circular_std(phis),
                   tuple(gammas.tolist()), tuple(phis.tolist()))

    def row(self) -> tuple:
        return (self.scheme, self.dataset_size, self.n_trials, self.gamma_mean,
                self.gamma_std, self.phi_mean, self.phi_std)


def _estimate_all(samples, scheme, options, threads):
    run = lambda d: mle_estimate(d, scheme, options)
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, samples))
    else:
        results = [run(d) for d in samples]
    return ([r.cdc_estimate.magnitude for r in results],
            [r.cdc_estimate.phase for r in results])


def precision_sweep(truth: ThermalModeParams, schedule: PhaseSchedule, sizes, n_trials: int,
                    schemes=("count", "click", "traditional"), seed: int = 0,
                    traditional_phase_index: int = 0, threads: int | None = None,
                    options: MLEOptions | None = None) -> list:
    """Mean and spread of the MLE over ``n_trials`` disjoint datasets per size.

    Count and Click trials are cut from one shared pool of Count events; the
    Click samples are the same events reduced to clicks, so the two schemes
    see identical photons.  Traditional trials are drawn at the single applied
    phase ``schedule.applied_phases[traditional_phase_index]``.

    Results are ordered by scheme then size and do not depend on ``threads``.
    """
    sizes = [int(s) for s in sizes]
    schemes = [Scheme(s) for s in schemes]
    if n_trials < 2:
        raise ValueError("n_trials must be at least 2")
    if not sizes or min(sizes) < 1:
        raise ValueError("sizes must be positive")
    if threads is None:
        threads = os.cpu_count() or 1
    pool_seed, split_seed, trad_seed = derive_seeds(seed, 3)
    split_seeds = derive_seeds(split_seed, len(sizes))
    trad_seeds = derive_seeds(trad_seed, len(sizes))
    pool = None
    if Scheme.COUNT in schemes or Scheme.CLICK in schemes:
        pool = sample_events(truth, schedule, n_trials * max(sizes), pool_seed)

    out = []
    with warnings.catch_warnings():
        # a zero-magnitude or single-phase trial is expected to leave the phase loose
        warnings.simplefilter("ignore", DegeneratePhaseWarning)
        for scheme in schemes:
            for i, size in enumerate(sizes):
                if scheme is Scheme.TRADITIONAL:
                    data = _fixed_phase_events(truth, schedule, traditional_phase_index,
                                               n_trials * size, trad_seeds[i])
                    samples = disjoint_samples(data, size, n_trials, split_seeds[i])
                else:
                    samples = disjoint_samples(pool, size, n_trials, split_seeds[i])
                    if scheme is Scheme.CLICK:
                        samples = [degrade_to_click(d) for d in samples]
                gammas, phis = _estimate_all(samples, scheme, options, threads)
                out.append(TrialStatistics.from_estimates(scheme.value, size, gammas, phis))
    return out


def _fixed_phase_events(truth, schedule, phase_index, n_events, seed):
    """Events all recorded at one applied phase of ``schedule``."""
    if not 0 <= phase_index < len(schedule):
        raise IndexError(f"phase index {phase_index} outside schedule of {len(schedule)}")
    single = PhaseSchedule.fixed(schedule.applied_phases[phase_index])
    data = sample_events(truth, single, n_events, seed)
    return restrict_to_phase(data, 0)


def std_advantage(stats, better: str, worse: str, parameter: str = "gamma") -> dict:
    """Per size, ``std(worse) - std(better)`` for ``parameter`` in {"gamma", "phi"}."""
    attr = f"{parameter}_std"
    table = {(s.scheme, s.dataset_size): getattr(s, attr) for s in stats}
    sizes = sorted({s.dataset_size for s in stats})
    return {n: table[(worse, n)] - table[(better, n)] for n in sizes
            if (worse, n) in table and (better, n) in table}
