"""
Seeded synthetic coincidence data for the Count, Click and Traditional schemes.

Events carry the index of their applied phase in a :class:`PhaseSchedule` and the
detected photon numbers ``[x, y]``.  All randomness comes from numpy's
counter-based Philox generator, so a given seed reproduces a dataset bit for
bit on any machine.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .coherence import TWO_PI
from .errors import InsufficientDataError
from .photon_stats import ThermalModeParams, choose_cutoff, probability_table

RNG_ALGORITHM = "numpy.random.Philox"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


def derive_seeds(seed: int, n: int) -> list:
    """``n`` independent 64-bit child seeds of ``seed``."""
    ss = np.random.SeedSequence(int(seed))
    return [int(child.generate_state(1, np.uint64)[0]) for child in ss.spawn(n)]


class Scheme(str, Enum):
    COUNT = "count"
    CLICK = "click"
    TRADITIONAL = "traditional"


@dataclass(frozen=True, eq=False)
class PhaseSchedule:
    """Applied phases (radians, in [0, 2pi)) available to the phase shifter."""

    applied_phases: np.ndarray
    mode: str = "uniform-grid"

    def __post_init__(self):
        phases = np.atleast_1d(np.asarray(self.applied_phases, dtype=float))
        if phases.size == 0:
            raise ValueError("phase schedule must be non-empty")
        if np.any(phases < 0) or np.any(phases >= TWO_PI):
            raise ValueError("applied phases must lie in [0, 2pi)")
        phases.setflags(write=False)
        object.__setattr__(self, "applied_phases", phases)

    @classmethod
    def uniform(cls, n: int = 35) -> "PhaseSchedule":
        return cls(TWO_PI * np.arange(n) / n, "uniform-grid")

    @classmethod
    def random(cls, n: int, seed: int) -> "PhaseSchedule":
        return cls(np.sort(make_rng(seed).uniform(0, TWO_PI, n)), "random")

    @classmethod
    def fixed(cls, phase: float) -> "PhaseSchedule":
        return cls([float(np.mod(phase, TWO_PI))], "fixed")

    def __len__(self):
        return self.applied_phases.size

    def __eq__(self, other):
        if not isinstance(other, PhaseSchedule):
            return NotImplemented
        return self.mode == other.mode and np.array_equal(self.applied_phases, other.applied_phases)


@dataclass(frozen=True)
class SchemeConfig:
    scheme: Scheme
    fixed_phase: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if (self.scheme is Scheme.TRADITIONAL) != (self.fixed_phase is not None):
            raise ValueError("fixed_phase is required for, and only for, the Traditional scheme")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Coincidence events: per-event phase index and photon numbers.

    ``number_resolving`` is False once counts have been reduced to clicks.
    """

    phase_index: np.ndarray
    x: np.ndarray
    y: np.ndarray
    schedule: PhaseSchedule
    scheme: Scheme = Scheme.COUNT
    number_resolving: bool = True
    seed: int | None = None
    truth: ThermalModeParams | None = None
    rng: str = RNG_ALGORITHM
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arrays = []
        for name in ("phase_index", "x", "y"):
            a = np.array(getattr(self, name), dtype=np.int64).reshape(-1)
            a.setflags(write=False)
            arrays.append(a)
            object.__setattr__(self, name, a)
        if not arrays[0].size == arrays[1].size == arrays[2].size:
            raise ValueError("event arrays must have equal length")
        if arrays[0].size and (arrays[0].min() < 0 or arrays[0].max() >= len(self.schedule)):
            raise ValueError("phase index outside the schedule")
        if arrays[1].size and (arrays[1].min() < 0 or arrays[2].min() < 0):
            raise ValueError("photon numbers must be non-negative")
        if not self.number_resolving and arrays[1].size and max(arrays[1].max(), arrays[2].max()) > 1:
            raise ValueError("click datasets may only contain 0/1 patterns")
        object.__setattr__(self, "scheme", Scheme(self.scheme))

    def __len__(self):
        return self.x.size

    @property
    def applied_phases(self) -> np.ndarray:
        return self.schedule.applied_phases[self.phase_index]

    def outcome_counts(self):
        """Histogram ``counts[k, x, y]`` over phase index and outcome."""
        nmax = int(max(self.x.max(initial=0), self.y.max(initial=0)))
        counts = np.zeros((len(self.schedule), nmax + 1, nmax + 1), dtype=np.int64)
        np.add.at(counts, (self.phase_index, self.x, self.y), 1)
        return counts

    def same_events(self, other: "Dataset") -> bool:
        return (np.array_equal(self.phase_index, other.phase_index)
                and np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y))

    def subset(self, idx, **changes) -> "Dataset":
        return replace(self, phase_index=self.phase_index[idx], x=self.x[idx],
                       y=self.y[idx], **changes)


def _draw_outcomes(truth, net_phases, uniforms, tail_tolerance):
    """Inverse-CDF draw of ``[x, y]`` for each event given its net phase."""
    cutoff = choose_cutoff(truth, tail_tolerance)
    unique, inverse = np.unique(net_phases, return_inverse=True)
    order = np.argsort(inverse, kind="stable")
    bounds = np.searchsorted(inverse[order], np.arange(unique.size + 1))
    x = np.empty(uniforms.size, dtype=np.int64)
    y = np.empty(uniforms.size, dtype=np.int64)
    chunk = 4096
    for lo in range(0, unique.size, chunk):
        tables = probability_table(truth, unique[lo:lo + chunk], cutoff)
        flat = tables.reshape(tables.shape[0], -1)
        cdf = np.cumsum(flat, axis=1)
        cdf /= cdf[:, -1:]
        for j in range(flat.shape[0]):
            sel = order[bounds[lo + j]:bounds[lo + j + 1]]
            cell = np.searchsorted(cdf[j], uniforms[sel], side="right")
            cell = np.minimum(cell, flat.shape[1] - 1)
            x[sel], y[sel] = np.divmod(cell, cutoff + 1)
    return x, y


def sample_events(truth: ThermalModeParams, schedule: PhaseSchedule, n_events: int,
                  seed: int, assignment: str = "random", drift: float = 0.0,
                  tail_tolerance: float = 1e-12) -> Dataset:
    """Draw ``n_events`` i.i.d. Count-scheme events.

    Parameters
    ----------
    assignment : {"random", "round-robin"}
        Phase per event drawn uniformly from the schedule, or cycled in order
        so every phase receives an equal share.
    drift : float
        Linear phase drift in radians per event added to the true applied
        phase; the recorded phase index is unaffected.
    """
    if int(n_events) < 1:
        raise ValueError("n_events must be at least 1")
    n_events = int(n_events)
    rng = make_rng(seed)
    K = len(schedule)
    if assignment == "random":
        k = rng.integers(0, K, n_events)
    elif assignment in ("round-robin", "round_robin"):
        k = np.arange(n_events) % K
    else:
        raise ValueError(f"unknown phase assignment {assignment!r}")
    u = rng.random(n_events)
    net = schedule.applied_phases[k] - truth.cdc.phase
    if drift:
        net = net + drift * np.arange(n_events)
    x, y = _draw_outcomes(truth, net, u, tail_tolerance)
    meta = {"assignment": assignment, "drift": float(drift)}
    return Dataset(k, x, y, schedule, Scheme.COUNT, True, int(seed), truth, RNG_ALGORITHM, meta)


def degrade_to_click(dataset: Dataset) -> Dataset:
    """Replace photon numbers by click indicators ``min(n, 1)``."""
    scheme = dataset.scheme if dataset.scheme is Scheme.TRADITIONAL else Scheme.CLICK
    return replace(dataset, x=np.minimum(dataset.x, 1), y=np.minimum(dataset.y, 1),
                   scheme=scheme, number_resolving=False)


def restrict_to_phase(dataset: Dataset, phase_index: int) -> Dataset:
    """Events recorded at one applied phase, tagged as the Traditional scheme.

    The result may be empty; estimators reject empty datasets.
    """
    if not 0 <= phase_index < len(dataset.schedule):
        raise IndexError(f"phase index {phase_index} outside schedule of {len(dataset.schedule)}")
    idx = np.nonzero(dataset.phase_index == phase_index)[0]
    return dataset.subset(idx, scheme=Scheme.TRADITIONAL)


def disjoint_samples(dataset: Dataset, sample_size: int, n_trials: int, seed: int) -> list:
    """Shuffle once, then cut ``n_trials`` non-overlapping samples of ``sample_size``."""
    need = int(sample_size) * int(n_trials)
    if need > len(dataset):
        raise InsufficientDataError(
            f"{n_trials} samples of {sample_size} need {need} events, dataset has {len(dataset)}")
    order = make_rng(seed).permutation(len(dataset))
    return [dataset.subset(order[i * sample_size:(i + 1) * sample_size])
            for i in range(n_trials)]
