"""
Detector-array coherence maps and image reconstruction.

An N x N square array of detectors with pitch ``p`` samples the CDC on a
(2N-1) x (2N-1) lattice of baseline vectors ``(i p, j p)``, ``|i|, |j| < N``.
Pairs sharing a separation vector share a CDC, so the lattice holds every
measurable value.  Reconstruction inverts the van Cittert-Zernike relation by
a direct (separable) discrete Fourier sum onto a source-plane grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .coherence import TWO_PI, SourceScene, vcz_sum
from .errors import AliasingWarning
from .simulator import make_rng

HERMITIAN_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DetectorArray:
    """Square ``size`` x ``size`` detector grid, all lengths in metres."""

    size: int
    pitch: float
    distance: float
    wavelength: float

    def __post_init__(self):
        if int(self.size) < 2:
            raise ValueError("array needs at least 2 x 2 detectors")
        object.__setattr__(self, "size", int(self.size))
        for name in ("pitch", "distance", "wavelength"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v}")

    @classmethod
    def for_field(cls, size: int, field_width: float, distance: float, wavelength: float):
        """Array whose baseline lattice Nyquist-samples a source field of ``field_width``."""
        return cls(size, wavelength * distance / field_width, distance, wavelength)

    @property
    def wavenumber(self) -> float:
        return TWO_PI / self.wavelength

    @property
    def lattice_size(self) -> int:
        return 2 * self.size - 1

    @property
    def baseline_indices(self) -> np.ndarray:
        return np.arange(-(self.size - 1), self.size)

    @property
    def baselines(self) -> np.ndarray:
        """Baseline coordinates along one axis, metres."""
        return self.baseline_indices * self.pitch

    @property
    def field_of_view(self) -> float:
        """Widest source extent the lattice samples without aliasing, metres."""
        return self.wavelength * self.distance / self.pitch

    def matched_pitch(self, n_pixels: int | None = None) -> float:
        """Source-plane pixel pitch making ``n_pixels`` samples span the field of view."""
        return self.field_of_view / (n_pixels or self.lattice_size)


@dataclass(frozen=True, eq=False)
class CoherenceMap:
    """CDC on the baseline lattice, ``values[j, i]`` for baseline ``(i, j)`` indices.

    The centre element is the zero baseline.  Construction checks Hermitian
    symmetry ``values(-b) = conj(values(b))`` and a unit zero-baseline value.
    """

    values: np.ndarray
    array: DetectorArray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        M = self.array.lattice_size
        if v.shape != (M, M):
            raise ValueError(f"coherence map must be {M} x {M}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("coherence map is incomplete (non-finite entries)")
        if np.max(np.abs(v - np.conj(v[::-1, ::-1]))) > HERMITIAN_TOLERANCE:
            raise ValueError("coherence map is not Hermitian under baseline negation")
        c = self.array.size - 1
        if abs(v[c, c] - 1.0) > HERMITIAN_TOLERANCE:
            raise ValueError("zero-baseline coherence must equal 1")
        v[c, c] = 1.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def phase(self) -> np.ndarray:
        return np.mod(np.angle(self.values), TWO_PI)

    def at(self, i: int, j: int) -> complex:
        """CDC at baseline indices ``(i, j)``, each in ``(-N, N)``."""
        c = self.array.size - 1
        return complex(self.values[j + c, i + c])


def _hermitize(values):
    return 0.5 * (values + np.conj(values[::-1, ::-1]))


def forward_coherence_map(scene: SourceScene, array: DetectorArray) -> CoherenceMap:
    """CDC for every baseline of ``array`` viewing ``scene``."""
    ny, nx = scene.shape
    extent = max(nx, ny) * scene.pixel_pitch
    if extent > array.field_of_view * (1 + 1e-9):
        warnings.warn(f"source extent {extent:.3g} m exceeds the unaliased field of view "
                      f"{array.field_of_view:.3g} m", AliasingWarning, stacklevel=2)
    x, y = scene.coordinates()
    b = array.baselines
    G = vcz_sum(scene.intensity, x, y, b, b, array.wavenumber, array.distance)
    return CoherenceMap(_hermitize(G), array)


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian CDC perturbations.

    In ``"polar"`` mode the stds apply to magnitude and phase (radians); in
    ``"cartesian"`` mode ``magnitude_std`` applies to both real and imaginary
    parts and ``phase_std`` is ignored.
    """

    magnitude_std: float
    phase_std: float
    seed: int = 0
    mode: str = "polar"

    def __post_init__(self):
        if self.magnitude_std < 0 or self.phase_std < 0:
            raise ValueError("noise stds must be non-negative")
        if self.mode not in ("polar", "cartesian"):
            raise ValueError(f"unknown noise mode {self.mode!r}")

    @classmethod
    def for_scheme(cls, scheme: str, seed: int = 0) -> "NoiseModel":
        mag, ph = SCHEME_NOISE[str(scheme).lower()]
        return cls(mag, ph, seed)


# per-scheme single-baseline uncertainties (|gamma|, phase)
SCHEME_NOISE = {"count": (0.022, 0.25), "click": (0.025, 0.35), "traditional": (0.16, 1.0)}


def add_cdc_noise(cmap: CoherenceMap, model: NoiseModel) -> CoherenceMap:
    """Perturb every unique baseline independently, keeping Hermitian symmetry.

    The half-lattice after the zero baseline (row-major order) is perturbed
    and mirrored onto the other half; magnitudes are clamped to [0, 1].
    """
    M = cmap.array.lattice_size
    flat = cmap.values.reshape(-1).copy()
    centre = (M * M) // 2
    half = np.arange(centre + 1, M * M)
    rng = make_rng(model.seed)
    e1 = rng.standard_normal(half.size)
    e2 = rng.standard_normal(half.size)
    v = flat[half]
    if model.mode == "polar":
        mag = np.clip(np.abs(v) + model.magnitude_std * e1, 0.0, 1.0)
        new = mag * np.exp(1j * (np.angle(v) + model.phase_std * e2))
    else:
        new = v + model.magnitude_std * (e1 + 1j * e2)
        mod = np.abs(new)
        new = np.where(mod > 1.0, new / np.maximum(mod, 1e-300), new)
    flat[half] = new
    flat[M * M - 1 - half] = np.conj(new)
    return CoherenceMap(flat.reshape(M, M), cmap.array)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """Inverse-transform output.

    ``raw`` keeps negative values; ``image`` is the clamped, displayable scene.
    ``negative_mass`` is the summed magnitude of the clamped negative pixels
    relative to the raw total.
    """

    raw: np.ndarray
    image: SourceScene
    negative_mass: float


def inverse_transform(values, array: DetectorArray, x, y) -> np.ndarray:
    """Real part of ``sum_b G(b) exp(-i k r.b / D) / (len(x) len(y))`` on the grid ``x``, ``y``.

    Linear in ``values``.  On a grid matched to the lattice (pitch
    ``field_of_view / n``) the output sums to the zero-baseline value.
    """
    k, D, b = array.wavenumber, array.distance, array.baselines
    ey = np.exp(-1j * k * np.outer(y, b) / D)
    ex = np.exp(-1j * k * np.outer(b, x) / D)
    return (ey @ np.asarray(values) @ ex).real / (len(x) * len(y))


def reconstruct_image(cmap: CoherenceMap, shape=None, pixel_pitch: float | None = None,
                      center_offset=(0.0, 0.0)) -> Reconstruction:
    """Source intensity from a coherence map.

    Parameters
    ----------
    cmap : CoherenceMap
    shape : (ny, nx), optional
        Output grid.  Defaults to the lattice size in both axes.
    pixel_pitch : float, optional
        Source-plane pitch, metres.  Defaults to the pitch that makes the grid
        span the array's field of view.
    center_offset : tuple
        Grid centre in the source plane, metres.
    """
    array = cmap.array
    ny, nx = shape if shape is not None else (array.lattice_size, array.lattice_size)
    if pixel_pitch is None:
        pixel_pitch = array.matched_pitch(nx)
    x = center_offset[0] + (np.arange(nx) - (nx - 1) / 2) * pixel_pitch
    y = center_offset[1] + (np.arange(ny) - (ny - 1) / 2) * pixel_pitch
    raw = inverse_transform(cmap.values, array, x, y)
    raw.setflags(write=False)
    clamped = np.maximum(raw, 0.0)
    negative = float(-raw[raw < 0].sum() / max(abs(raw.sum()), 1e-300))
    if not clamped.sum() > 0:
        clamped = np.full_like(raw, 1.0)   # nothing positive survived; keep a valid scene
    return Reconstruction(raw, SourceScene(clamped, pixel_pitch, center_offset), negative)


def bandlimited_reference(scene: SourceScene, array: DetectorArray) -> SourceScene:
    """``scene`` with its spectrum cut to the baselines the array samples.

    Assumes the scene grid is matched to the array (``array.pitch ==
    wavelength * distance / (n * pixel_pitch)`` along each axis), so DFT bin
    ``m`` is the baseline ``m * pitch``.
    """
    I = scene.intensity
    spectrum = np.fft.fft2(I)
    keep_y = np.abs(np.fft.fftfreq(I.shape[0]) * I.shape[0]) <= array.size - 1
    keep_x = np.abs(np.fft.fftfreq(I.shape[1]) * I.shape[1]) <= array.size - 1
    ref = np.fft.ifft2(spectrum * np.outer(keep_y, keep_x)).real
    ref = np.maximum(ref, 0.0)
    return SourceScene(ref, scene.pixel_pitch, scene.center_offset)


@dataclass(frozen=True)
class ImageMetrics:
    nrmse: float
    contrast: float
    correlation: float

    def to_dict(self) -> dict:
        return {"nrmse": self.nrmse, "contrast": self.contrast, "correlation": self.correlation}


def _grid(img):
    return np.asarray(img.intensity if isinstance(img, SourceScene) else img, dtype=float)


def image_metrics(reconstruction, reference) -> ImageMetrics:
    """Compare two images on the same grid after scaling each to unit sum.

    ``nrmse`` is the RMS difference over the reference's value range,
    ``contrast`` the Michelson contrast of the reconstruction and
    ``correlation`` the Pearson coefficient (0 when either image is constant).
    """
    a, b = _grid(reconstruction), _grid(reference)
    if a.shape != b.shape:
        raise ValueError(f"image grids differ: {a.shape} vs {b.shape}")
    a = a / a.sum() if a.sum() != 0 else a
    b = b / b.sum() if b.sum() != 0 else b
    span = b.max() - b.min()
    nrmse = float(np.sqrt(np.mean((a - b) ** 2)) / span) if span > 0 else float(
        np.sqrt(np.mean((a - b) ** 2)))
    hi, lo = a.max(), a.min()
    contrast = float((hi - lo) / (hi + lo)) if hi + lo > 0 else 0.0
    da, db = a - a.mean(), b - b.mean()
    denom = np.sqrt(np.sum(da**2) * np.sum(db**2))
    corr = float(np.sum(da * db) / denom) if denom > 0 else 0.0
    return ImageMetrics(nrmse, contrast, corr)


def test_pattern(size: int = 128) -> np.ndarray:
    """Geometric grayscale pattern in [0, 1]: a ring, two bars, a square and a soft spot."""
    t = (np.arange(size) - (size - 1) / 2) / (size / 2)
    X, Y = np.meshgrid(t, t)
    r = np.hypot(X + 0.25, Y + 0.2)
    img = 0.8 * np.exp(-((r - 0.35) / 0.06) ** 2)
    img += 0.6 * ((np.abs(X - 0.45) < 0.06) & (np.abs(Y + 0.25) < 0.4))
    img += 0.5 * ((np.abs(X - 0.25) < 0.04) & (np.abs(Y + 0.25) < 0.4))
    img += 0.7 * ((np.abs(X + 0.3) < 0.12) & (np.abs(Y - 0.5) < 0.12))
    img += np.exp(-((X - 0.4) ** 2 + (Y - 0.45) ** 2) / (2 * 0.08**2))
    img = np.clip(img, 0.0, None)
    return img / img.max()
