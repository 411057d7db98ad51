"""Likelihood and fringe estimators, phase calibration and precision sweeps."""

from .calibration import CalibrationCurve, find_extrema, fit_phase_calibration
from .fringes import (binned_fringes, expected_fringe_counts, fit_periodic, fringe_phase_estimate,
                      observed_fringe_counts, reduced_chi_squared, visibility_estimate)
from .likelihood import (EstimateResult, MLEOptions, click_nbar_guess, log_likelihood,
                         mle_estimate, moment_nbar)
from .sweep import (SWEEP_COLUMNS, TrialStatistics, circular_mean, circular_std,
                    precision_sweep, std_advantage)
