"""
Coincidence statistics of two-point thermal light
=================================================

Two detectors behind a beam splitter see light from two collection points
whose fields share a complex degree of coherence.  This script tabulates the
joint photon-number distribution, follows the single-photon fringes as the
applied phase is swept, and shows how their contrast relates to |gamma|.
"""

import numpy as np

from cdcimaging.photon_stats import (ThermalModeParams, fringe_curve, outcome_table,
                                     single_photon_fringe_visibility)

# a weakly coherent source: one photon per mode on average
source = ThermalModeParams.from_values(nbar=1.0, magnitude=0.3, phase=1.2)

# joint distribution at zero net phase, truncated where the tail drops below 1e-10
table = outcome_table(source, net_phase=0.0, tail_tolerance=1e-10)
print(f"cutoff {table.cutoff}, tail mass {table.tail_mass:.1e}, "
      f"mean photons {table.mean_total():.6f}")
print("P(x, y) for x, y < 4:")
print(np.array2string(table.probabilities[:4, :4], precision=4, suppress_small=True))

# sweep the applied phase; [0,1] and [1,0] fringes move in antiphase
phases = np.linspace(0, 2 * np.pi, 9)
for outcome in ((0, 1), (1, 0), (1, 1)):
    curve = fringe_curve(outcome, source, phases - source.cdc.phase)
    print(outcome, np.round(curve, 4))

# the single-photon fringe contrast equals |gamma| only in weak light
for nbar in (1e-3, 0.1, 1.0, 3.0):
    v = single_photon_fringe_visibility(0.3, nbar)
    print(f"nbar {nbar:6.3f}: visibility {v:.4f}")
