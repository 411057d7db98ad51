"""Calibrating the phase shifter from a two-photon ([1,1]) fringe."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from ..errors import CalibrationError

MIN_EXTREMA = 4


@dataclass(frozen=True)
class CalibrationCurve:
    """Applied phase as ``offset + scale * sqrt(1 + position)``.

    ``extrema`` holds the ``(position, assigned phase)`` pairs the curve was
    fitted through; ``domain`` is the span of sampled positions.
    """

    offset: float
    scale: float
    extrema: tuple
    domain: tuple

    def __call__(self, position):
        return self.offset + self.scale * np.sqrt(1.0 + np.asarray(position, dtype=float))

    def inverse(self, phase):
        root = (np.asarray(phase, dtype=float) - self.offset) / self.scale
        return root**2 - 1.0

    def to_dict(self) -> dict:
        return {"offset": self.offset, "scale": self.scale,
                "extrema": [list(e) for e in self.extrema], "domain": list(self.domain)}


def _refine(positions, counts, guess, half_width, degree=4):
    """Stationary point of a low-order local fit around ``guess``."""
    near = np.abs(positions - guess) <= half_width
    if near.sum() <= degree + 2:
        return guess
    poly = Polynomial.fit(positions[near], counts[near], degree)
    roots = poly.deriv().roots()
    roots = roots[np.abs(roots.imag) < 1e-9].real
    roots = roots[np.abs(roots - guess) < half_width]
    return guess if roots.size == 0 else float(roots[np.argmin(np.abs(roots - guess))])


def find_extrema(positions, counts, degree: int = 8, refine: bool = True):
    """Positions of the extrema of a polynomial fitted to the fringe.

    With ``refine``, each extremum of the global fit is polished by a quartic
    fit over the samples within 30% of the distance to its nearest neighbour;
    a single global polynomial cannot follow several fringe periods closely.

    Returns the sorted extremum positions and, for each, +1 for a maximum and
    -1 for a minimum.
    """
    positions = np.asarray(positions, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if positions.size <= degree:
        raise CalibrationError(f"need more than {degree} samples for a degree-{degree} fit")
    poly = Polynomial.fit(positions, counts, degree)
    lo, hi = positions.min(), positions.max()
    roots = poly.deriv().roots()
    real = np.sort(roots[np.abs(roots.imag) < 1e-9 * max(1.0, np.abs(roots).max())].real)
    inside = real[(real > lo) & (real < hi)]
    curvature = poly.deriv(2)(inside)
    keep = curvature != 0
    where, kind = inside[keep], -np.sign(curvature[keep]).astype(int)
    if refine and where.size > 1:
        spacing = np.diff(where)
        nearest = np.minimum(np.r_[spacing[0], spacing], np.r_[spacing, spacing[-1]])
        where = np.array([_refine(positions, counts, w, 0.3 * h) for w, h in zip(where, nearest)])
    return where, kind


def fit_phase_calibration(samples, degree: int = 8, phase_step: float = np.pi / 2,
                          refine: bool = True) -> CalibrationCurve:
    """Fit the position-to-phase relation from a [1,1] fringe.

    Successive extrema of the fitted polynomial are assigned phases
    ``0, phase_step, 2 phase_step, ...``; the default step of pi/2 reflects the
    [1,1] fringe's period of pi.  A least-squares fit of
    ``offset + scale * sqrt(1 + position)`` through those points gives the curve.

    Parameters
    ----------
    samples : array_like, shape (M, 2)
        ``(position, count)`` pairs.  Positions must exceed -1.
    degree : int
        Degree of the smoothing polynomial.
    refine : bool
        Polish each extremum with a local fit (see :func:`find_extrema`).

    Raises
    ------
    CalibrationError
        Fewer than 4 extrema, or extrema that do not alternate between maxima
        and minima.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("samples must be (position, count) pairs")
    data = data[np.argsort(data[:, 0])]
    if data[0, 0] <= -1.0:
        raise CalibrationError("positions must exceed -1 for the square-root model")
    where, kind = find_extrema(data[:, 0], data[:, 1], degree, refine)
    if where.size < MIN_EXTREMA:
        raise CalibrationError(f"found {where.size} extrema, need at least {MIN_EXTREMA}")
    if np.any(kind[1:] == kind[:-1]):
        raise CalibrationError("extrema do not alternate between maxima and minima")
    phases = phase_step * np.arange(where.size)
    design = np.column_stack([np.ones_like(where), np.sqrt(1.0 + where)])
    (offset, scale), *_ = np.linalg.lstsq(design, phases, rcond=None)
    return CalibrationCurve(float(offset), float(scale),
                            tuple((float(a), float(p)) for a, p in zip(where, phases)),
                            (float(data[0, 0]), float(data[-1, 0])))
