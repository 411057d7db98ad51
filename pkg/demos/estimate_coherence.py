"""
Estimating the coherence from simulated events
==============================================

Simulate one dataset with photon-number-resolving detectors and a swept
applied phase, then estimate the CDC three ways: from the full counts, from
the same events reduced to clicks, and from the events recorded at a single
applied phase.
"""

import warnings

import numpy as np

from cdcimaging.errors import DegeneratePhaseWarning
from cdcimaging.estimation import fringe_phase_estimate, mle_estimate, visibility_estimate
from cdcimaging.estimation.fringes import binned_fringes
from cdcimaging.photon_stats import ThermalModeParams, magnitude_from_fringe_visibility
from cdcimaging.simulator import PhaseSchedule, degrade_to_click, restrict_to_phase, sample_events

truth = ThermalModeParams.from_values(nbar=1.0, magnitude=0.096, phase=4.11)
data = sample_events(truth, PhaseSchedule.uniform(35), n_events=20000, seed=1)
print(f"{len(data)} events, mean photons per mode {np.mean(data.x + data.y) / 2:.3f}")

count = mle_estimate(data)
click = mle_estimate(degrade_to_click(data))
with warnings.catch_warnings():
    # one applied phase barely constrains the CDC phase
    warnings.simplefilter("ignore", DegeneratePhaseWarning)
    single = mle_estimate(restrict_to_phase(data, 0))

for result in (count, click, single):
    c = result.cdc_estimate
    print(f"{result.scheme:12s} |gamma| {c.magnitude:.4f}  phi {c.phase:.3f}  "
          f"nbar {result.nbar_estimate:.3f}  flags {list(result.flags)}")

# the fringe route: contrast of the single-photon fringes, corrected for nbar.
# At this |gamma| it needs roughly ten times more events than the likelihood.
phases, fringes, _ = binned_fringes(data)
v = visibility_estimate(phases, fringes)
print(f"fringe visibility {v:.4f} -> |gamma| {magnitude_from_fringe_visibility(v, 1.0):.4f}")
print(f"fringe phase {fringe_phase_estimate(phases, fringes):.3f}")
