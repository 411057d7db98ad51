"""Fringe-based visibility and phase estimates, and reduced chi-squared."""

from __future__ import annotations

import warnings

import numpy as np

from ..coherence import TWO_PI, circular_distance, wrap_phase
from ..errors import InsufficientDataError, PhaseAmbiguityWarning, UnidentifiablePhaseError
from ..photon_stats import ThermalModeParams, fringe_curve, probability_table
from ..simulator import Dataset

MIN_BINS = 5
FLAT_TOLERANCE = 1e-9


def _as_outcome(o):
    x, y = (int(v) for v in o)
    return x, y


def binned_fringes(dataset: Dataset, outcomes=((0, 1), (1, 0))):
    """Per-phase relative frequency of each outcome.

    Returns
    -------
    phases : ndarray, shape (K,)
        Applied phases that received at least one event.
    fringes : dict
        ``(x, y) -> ndarray (K,)`` of ``count(x, y) / count(all)`` per phase.
    totals : ndarray, shape (K,)
        Number of events per phase.
    """
    K = len(dataset.schedule)
    totals = np.bincount(dataset.phase_index, minlength=K)
    keep = totals > 0
    fringes = {}
    for o in outcomes:
        x, y = _as_outcome(o)
        hit = (dataset.x == x) & (dataset.y == y)
        counts = np.bincount(dataset.phase_index[hit], minlength=K)
        fringes[(x, y)] = counts[keep] / totals[keep]
    return dataset.schedule.applied_phases[keep], fringes, totals[keep]


def _check_coverage(phases):
    phases = np.sort(wrap_phase(np.asarray(phases, dtype=float)))
    if phases.size < MIN_BINS:
        raise InsufficientDataError(f"need at least {MIN_BINS} phase bins, got {phases.size}")
    gaps = np.diff(np.concatenate([phases, phases[:1] + TWO_PI]))
    if gaps.max() >= np.pi / 2:
        raise InsufficientDataError(
            f"phase bins leave a gap of {gaps.max():.3g} rad; the fringe period is not covered")


def fit_periodic(phases, values, harmonics: int = 1, period: float = TWO_PI):
    """Least-squares truncated Fourier series.

    Returns ``(offset, cos_coeffs, sin_coeffs)`` for
    ``offset + sum_h a_h cos(h w t) + b_h sin(h w t)`` with ``w = 2 pi / period``.
    """
    t = np.asarray(phases, dtype=float) * TWO_PI / period
    h = np.arange(1, harmonics + 1)
    design = np.column_stack([np.ones_like(t), np.cos(np.outer(t, h)), np.sin(np.outer(t, h))])
    if design.shape[0] < design.shape[1]:
        raise InsufficientDataError("more harmonics than phase bins")
    coef, *_ = np.linalg.lstsq(design, np.asarray(values, dtype=float), rcond=None)
    return coef[0], coef[1:harmonics + 1], coef[harmonics + 1:]


def evaluate_periodic(fit, phases, period: float = TWO_PI):
    offset, a, b = fit
    t = np.asarray(phases, dtype=float) * TWO_PI / period
    h = np.arange(1, len(a) + 1)
    return offset + np.cos(np.outer(t, h)) @ a + np.sin(np.outer(t, h)) @ b


def _fringe_list(fringes):
    if isinstance(fringes, dict):
        return list(fringes.items())
    arr = np.asarray(fringes, dtype=float)
    if arr.ndim == 1:
        return [(None, arr)]
    return [(None, row) for row in arr]


def _fringe_extremes(phases, values, harmonics, grid_size=4096):
    fit = fit_periodic(phases, values, harmonics)
    curve = evaluate_periodic(fit, np.linspace(0, TWO_PI, grid_size, endpoint=False))
    return curve.max(), curve.min()


def visibility_estimate(phases, fringes, harmonics: int = 1) -> float:
    """Fringe visibility ``(I_max - I_min) / (I_max + I_min)``.

    Each fringe is smoothed by a periodic least-squares fit before its extrema
    are read off; the visibilities of the supplied fringes are then averaged.
    (The [0,1] and [1,0] fringes are in antiphase, so averaging the curves
    themselves would cancel the modulation.)

    Parameters
    ----------
    phases : array_like, shape (K,)
        Applied phase of each bin.  At least 5 bins with no gap of pi/2 or more.
    fringes : array_like or dict
        One curve ``(K,)``, a stack ``(F, K)``, or a mapping outcome -> curve.
    harmonics : int
        Number of Fourier harmonics in the smoothing fit.
    """
    _check_coverage(phases)
    vis = []
    for _, values in _fringe_list(fringes):
        hi, lo = _fringe_extremes(phases, values, harmonics)
        lo = max(lo, 0.0)
        vis.append(0.0 if hi + lo <= 0 else (hi - lo) / (hi + lo))
    return float(np.clip(np.mean(vis), 0.0, 1.0))


def _reference_sign(outcome, order):
    """Sign of the lowest harmonic at zero net phase for a representative source."""
    ref = ThermalModeParams.from_values(1.0, 0.5, 0.0)
    grid = TWO_PI * np.arange(64) / 64
    fit = fit_periodic(grid, fringe_curve(outcome, ref, grid), order)
    return np.sign(fit[1][order - 1])


def fringe_phase_estimate(phases, fringes, harmonics: int = 2) -> float:
    """CDC phase from the positions of the fringe extrema.

    Every fringe reaches an extremum where the applied phase equals the CDC
    phase.  Each fringe is fitted with a periodic model; the location of its
    lowest non-vanishing harmonic's extremum of the appropriate type (known
    from the outcome's fringe shape) gives one phase candidate.  Fringes of
    period pi ([1,1]) yield two candidates a half-turn apart; the one closest
    to the full-period candidates is kept.  Candidates are combined by a
    circular mean.

    Parameters
    ----------
    phases : array_like, shape (K,)
    fringes : dict
        Outcome ``(x, y)`` -> curve ``(K,)``.  Unlabelled curves are treated as
        [0,1]-type (maximum at the CDC phase).
    harmonics : int
        Number of Fourier harmonics in the fit.

    Raises
    ------
    UnidentifiablePhaseError
        All supplied fringes are flat.
    """
    _check_coverage(phases)
    full, half = [], []
    for outcome, values in _fringe_list(fringes):
        values = np.asarray(values, dtype=float)
        outcome = (0, 1) if outcome is None else _as_outcome(outcome)
        offset, a, b = fit_periodic(phases, values, max(harmonics, 2))
        amp1, amp2 = np.hypot(a[0], b[0]), np.hypot(a[1], b[1])
        scale = max(abs(offset), np.abs(values).max(), 1e-300)
        if max(amp1, amp2) <= FLAT_TOLERANCE * scale:
            continue
        x, y = outcome
        order = 2 if (x == y or amp1 < 1e-6 * amp2) else 1
        sign = _reference_sign(outcome, order)
        # maximum of a_h cos(h t) + b_h sin(h t) sits at h t = atan2(b_h, a_h)
        peak = np.arctan2(b[order - 1], a[order - 1]) / order
        if sign < 0:
            peak += np.pi / order
        (half if order == 2 else full).append(wrap_phase(peak))
    if not full and not half:
        raise UnidentifiablePhaseError("all fringes are flat; the CDC phase cannot be located")
    if not full:
        warnings.warn("only period-pi fringes given; phase is determined modulo pi",
                      PhaseAmbiguityWarning, stacklevel=2)
        anchor = half[0]
    else:
        anchor = np.angle(np.mean(np.exp(1j * np.array(full))))
    candidates = list(full)
    for p in half:
        alt = wrap_phase(p + np.pi)
        candidates.append(p if circular_distance(p, anchor) <= circular_distance(alt, anchor) else alt)
    return wrap_phase(np.angle(np.mean(np.exp(1j * np.array(candidates)))))


def expected_fringe_counts(dataset: Dataset, params: ThermalModeParams,
                           outcomes=((0, 1), (1, 0))):
    """Model counts per applied phase: events at that phase times ``P(x, y)``."""
    phases, _, totals = binned_fringes(dataset, ())
    need = max(x + y for x, y in (_as_outcome(o) for o in outcomes))
    table = probability_table(params, phases - params.cdc.phase, need)
    return {_as_outcome(o): totals * table[:, o[0], o[1]] for o in outcomes}


def observed_fringe_counts(dataset: Dataset, outcomes=((0, 1), (1, 0))):
    phases, freqs, totals = binned_fringes(dataset, outcomes)
    return {o: np.rint(f * totals) for o, f in freqs.items()}


def reduced_chi_squared(observed, expected, dof: int) -> float:
    """Pearson ``sum (obs - exp)^2 / exp`` divided by ``dof``."""
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    if obs.shape != exp.shape:
        raise ValueError(f"bin grids differ: {obs.shape} vs {exp.shape}")
    if int(dof) < 1:
        raise ValueError("dof must be at least 1")
    if np.any(exp <= 0):
        raise ValueError("expected counts must be positive in every bin")
    return float(np.sum((obs - exp) ** 2 / exp) / int(dof))
