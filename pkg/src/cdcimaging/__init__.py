"""Simulation, estimation and imaging with the complex degree of coherence."""

from .coherence import (DIAMETER_PER_SIGMA, BaselineGeometry, ComplexCoherence, SourceScene,
                        angle_to_phase, cdc_from_scene, circular_distance,
                        gaussian_source_visibility, invert_visibility_to_size, phase_to_angle,
                        sigma_to_diameter, uniform_source_cdc, wrap_phase)
from .errors import *  # noqa: F401,F403
from .estimation import (CalibrationCurve, EstimateResult, MLEOptions, TrialStatistics,
                         fit_phase_calibration, fringe_phase_estimate, log_likelihood,
                         mle_estimate, precision_sweep, reduced_chi_squared,
                         visibility_estimate)
from .imaging import (CoherenceMap, DetectorArray, NoiseModel, Reconstruction, add_cdc_noise,
                      forward_coherence_map, image_metrics, reconstruct_image)
from .photon_stats import (CoincidenceOutcome, OutcomeTable, ThermalModeParams, click_prob,
                           coincidence_prob, fringe_curve, outcome_table)
from .simulator import (Dataset, PhaseSchedule, Scheme, SchemeConfig, degrade_to_click,
                        disjoint_samples, restrict_to_phase, sample_events)

__version__ = "0.1.0"
