"""
Source size and position from one baseline
==========================================

For an incoherent source in the far field, the CDC magnitude on a baseline
fixes the source width once a profile is assumed, and the CDC phase fixes the
angular offset.
"""

from cdcimaging.coherence import (BaselineGeometry, gaussian_source_visibility,
                                  invert_visibility_to_size, phase_to_angle, sigma_to_diameter,
                                  uniform_source_cdc)

# 48 mm baseline, source 595 mm away, 820 nm light
geometry = BaselineGeometry(separation=48e-3, distance=595e-3, wavelength=820e-9)

magnitude, phase = 0.096, 4.11
sigma = invert_visibility_to_size(magnitude, geometry)
print(f"Gaussian width {sigma * 1e6:.2f} um, diameter {sigma_to_diameter(sigma) * 1e6:.1f} um")
print(f"check: forward visibility {gaussian_source_visibility(sigma, geometry):.4f}")

width = invert_visibility_to_size(magnitude, geometry, "uniform")
print(f"uniform strip width {width * 1e6:.2f} um, "
      f"forward {uniform_source_cdc(width, 0.0, geometry).magnitude:.4f}")

print(f"angular offset {phase_to_angle(phase, geometry) * 1e6:.2f} urad")
