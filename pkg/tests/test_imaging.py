import numpy as np
import pytest

from cdcimaging.coherence import SourceScene
from cdcimaging.errors import AliasingWarning
from cdcimaging import imaging
from cdcimaging.imaging import (CoherenceMap, DetectorArray, NoiseModel, add_cdc_noise,
                                bandlimited_reference, forward_coherence_map, image_metrics,
                                inverse_transform, reconstruct_image)
from cdcimaging.io import load_test_pattern
from oracles import explicit_dft_reconstruction

WAVELENGTH, DISTANCE = 700e-9, 8.67


def array_for(scene, size):
    return DetectorArray.for_field(size, scene.shape[1] * scene.pixel_pitch, DISTANCE, WAVELENGTH)


def test_array_geometry():
    a = DetectorArray(4, 1e-3, 2.0, 500e-9)
    assert a.lattice_size == 7
    assert np.array_equal(a.baseline_indices, np.arange(-3, 4))
    assert a.field_of_view == pytest.approx(1e-3)
    assert a.matched_pitch() == pytest.approx(1e-3 / 7)
    with pytest.raises(ValueError):
        DetectorArray(1, 1e-3, 2.0, 500e-9)
    with pytest.raises(ValueError):
        DetectorArray(3, -1e-3, 2.0, 500e-9)


def test_point_source_map():
    img = np.zeros((9, 9))
    img[2, 6] = 1.0
    scene = SourceScene(img, 1e-6)
    array = array_for(scene, 5)
    cmap = forward_coherence_map(scene, array)
    assert np.allclose(cmap.magnitude, 1.0)
    x, y = scene.coordinates()
    i, j = 3, -2
    expected = np.exp(1j * array.wavenumber * (x[6] * i * array.pitch + y[2] * j * array.pitch)
                      / DISTANCE)
    assert abs(cmap.at(i, j) - expected) < 1e-12


def test_linear_phase_shift():
    scene = load_test_pattern()
    array = array_for(scene, 6)
    base = forward_coherence_map(scene, array)
    shift = (3 * scene.pixel_pitch, -2 * scene.pixel_pitch)
    moved = forward_coherence_map(SourceScene(scene.intensity, scene.pixel_pitch, shift), array)
    b = array.baselines
    ramp = np.exp(1j * array.wavenumber * (shift[0] * b[None, :] + shift[1] * b[:, None]) / DISTANCE)
    assert np.max(np.abs(moved.values - base.values * ramp)) < 1e-10


def test_map_validation():
    array = DetectorArray(3, 1e-3, 1.0, 1e-6)
    good = np.ones((5, 5), dtype=complex)
    CoherenceMap(good, array)
    with pytest.raises(ValueError):
        CoherenceMap(np.ones((4, 4)), array)
    bad = good.copy()
    bad[0, 1] = 0.5j
    with pytest.raises(ValueError):
        CoherenceMap(bad, array)
    bad = good.copy()
    bad[2, 2] = 0.9
    with pytest.raises(ValueError):
        CoherenceMap(bad, array)
    bad = good.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        CoherenceMap(bad, array)


def test_aliasing_warning():
    scene = SourceScene(np.ones((10, 10)), 1e-6)
    with pytest.warns(AliasingWarning):
        forward_coherence_map(scene, DetectorArray.for_field(3, 5e-6, DISTANCE, WAVELENGTH))


def test_inverse_matches_explicit_sum():
    rng = np.random.default_rng(1)
    array = DetectorArray(4, 2e-3, DISTANCE, WAVELENGTH)
    scene = SourceScene(rng.random((7, 7)), array.matched_pitch(7))
    cmap = forward_coherence_map(scene, array)
    x = (np.arange(7) - 3) * scene.pixel_pitch
    fast = inverse_transform(cmap.values, array, x, x)
    slow = explicit_dft_reconstruction(cmap.values, array.baselines, array.wavenumber, DISTANCE, x, x)
    assert np.max(np.abs(fast - slow)) < 1e-12


def test_inverse_is_linear_and_dc_consistent():
    rng = np.random.default_rng(2)
    array = DetectorArray(5, 1e-3, DISTANCE, WAVELENGTH)
    x = (np.arange(9) - 4) * array.matched_pitch()
    A, B = rng.standard_normal((2, 9, 9)) + 1j * rng.standard_normal((2, 9, 9))
    combo = inverse_transform(2 * A - 3 * B, array, x, x)
    assert np.allclose(combo, 2 * inverse_transform(A, array, x, x) - 3 * inverse_transform(B, array, x, x))
    scene = SourceScene(rng.random((9, 9)), array.matched_pitch(9))
    rec = reconstruct_image(forward_coherence_map(scene, array))
    assert rec.raw.sum() == pytest.approx(1.0, abs=1e-12)


def test_reconstruction_translates_with_source():
    scene = load_test_pattern()
    array = array_for(scene, 10)
    pitch = scene.pixel_pitch
    base = reconstruct_image(forward_coherence_map(scene, array), (128, 128), pitch)
    offset = (4 * pitch, 0.0)
    moved_scene = SourceScene(scene.intensity, pitch, offset)
    moved = reconstruct_image(forward_coherence_map(moved_scene, array), (128, 128), pitch, offset)
    assert np.max(np.abs(moved.raw - base.raw)) < 1e-12


def test_noiseless_reconstruction_matches_bandlimited_reference():
    scene = load_test_pattern()
    array = array_for(scene, 26)
    rec = reconstruct_image(forward_coherence_map(scene, array), scene.shape, scene.pixel_pitch)
    ref = bandlimited_reference(scene, array)
    assert image_metrics(rec.image, ref).nrmse <= 0.05
    assert rec.negative_mass >= 0


def test_rmse_falls_with_array_size():
    scene = load_test_pattern()
    errs = []
    for n in (5, 10, 15, 26):
        array = array_for(scene, n)
        rec = reconstruct_image(forward_coherence_map(scene, array), scene.shape, scene.pixel_pitch)
        errs.append(image_metrics(rec.image, scene).nrmse)
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_noise_statistics():
    array = DetectorArray(72, 1e-3, DISTANCE, WAVELENGTH)   # just over 1e4 unique baselines
    M = array.lattice_size
    c = M // 2
    values = np.full((M, M), 0.5 + 0j)
    values[c, c] = 1.0
    clean = CoherenceMap(values, array)
    noisy = add_cdc_noise(clean, NoiseModel(0.022, 0.25, seed=4))
    half = noisy.values.reshape(-1)[c * M + c + 1:]
    assert half.size >= 1e4
    assert np.std(np.abs(half) - 0.5) == pytest.approx(0.022, rel=0.05)
    assert np.std(np.angle(half)) == pytest.approx(0.25, rel=0.05)
    assert np.max(np.abs(noisy.values - np.conj(noisy.values[::-1, ::-1]))) == 0
    assert noisy.at(0, 0) == 1.0
    again = add_cdc_noise(clean, NoiseModel(0.022, 0.25, seed=4))
    assert np.array_equal(again.values, noisy.values)
    cart = add_cdc_noise(clean, NoiseModel(0.05, 0.0, seed=4, mode="cartesian"))
    assert np.std(cart.values.real.reshape(-1)[c * M + c + 1:] - 0.5) == pytest.approx(0.05, rel=0.05)
    with pytest.raises(ValueError):
        NoiseModel(0.1, 0.1, mode="sideways")
    assert NoiseModel.for_scheme("Traditional").magnitude_std == 0.16


def test_count_noise_beats_traditional_noise():
    scene = load_test_pattern()
    array = array_for(scene, 26)
    cmap = forward_coherence_map(scene, array)
    ref = bandlimited_reference(scene, array)
    wins = 0
    for seed in range(10):
        err = {}
        for scheme in ("count", "traditional"):
            noisy = add_cdc_noise(cmap, NoiseModel.for_scheme(scheme, seed))
            rec = reconstruct_image(noisy, scene.shape, scene.pixel_pitch)
            err[scheme] = image_metrics(rec.image, ref).nrmse
        wins += err["count"] < err["traditional"]
    assert wins >= 9


def test_metrics():
    a = np.arange(16.0).reshape(4, 4)
    m = image_metrics(a, a)
    assert m.nrmse == 0 and m.correlation == pytest.approx(1.0)
    assert image_metrics(np.ones((4, 4)), a).correlation == 0.0
    with pytest.raises(ValueError):
        image_metrics(np.ones((3, 3)), a)


def test_shipped_pattern():
    scene = load_test_pattern()
    assert scene.shape == (128, 128)
    assert np.allclose(scene.intensity, imaging.test_pattern(128), atol=1e-15)
