"""
Photon-number statistics of two-mode pseudo-thermal light at a 50:50 splitter.

The two collected modes are decomposed into uncorrelated thermal eigenmodes
with occupations ``z1 = nbar (1 - |gamma|)`` and ``z2 = nbar (1 + |gamma|)``.
After the applied phase and the beam splitter, a Fock state ``|n1, n2>`` of the
eigenmodes lands on ``[x, y]`` with probability

    T = x! y! / (n1! n2!) * (sum_j (-1)^j C(n1, j) C(n2, x - j) s^(x+n1-2j) c^(y-n1+2j))^2

where ``s = sin(theta/2)``, ``c = cos(theta/2)`` and ``theta = phi_a - phi`` is the
net interferometer phase.  The coincidence probability is the thermal average

    P(x, y) = sum_{n1} p_in(n1, x + y - n1) T(x, y | n1).

At ``theta = 0`` detector D1 sees only the ``z1`` eigenmode, so the [1, 0] and
[2, 0] fringes are at their minimum when the applied phase equals the CDC phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial

import numpy as np
from scipy import sparse

from .coherence import ComplexCoherence
from .errors import ConsistencyError, TruncationError

DIRECT_LIMIT = 20       # photon number up to which the binomial sum is evaluated directly
HARD_CUTOFF = 200


@dataclass(frozen=True)
class ThermalModeParams:
    """Mean photon number per input mode and the CDC between the two modes."""

    mean_photon_number: float
    cdc: ComplexCoherence

    def __post_init__(self):
        nbar = float(self.mean_photon_number)
        if not (np.isfinite(nbar) and nbar >= 0):
            raise ValueError(f"mean photon number must be >= 0, got {nbar}")
        object.__setattr__(self, "mean_photon_number", nbar)
        if not isinstance(self.cdc, ComplexCoherence):
            object.__setattr__(self, "cdc", ComplexCoherence(*self.cdc))

    @classmethod
    def from_values(cls, nbar: float, magnitude: float, phase: float = 0.0):
        return cls(nbar, ComplexCoherence(magnitude, phase))

    @property
    def z1(self) -> float:
        return self.mean_photon_number * (1.0 - self.cdc.magnitude)

    @property
    def z2(self) -> float:
        return self.mean_photon_number * (1.0 + self.cdc.magnitude)


@dataclass(frozen=True)
class CoincidenceOutcome:
    x: int
    y: int

    def __post_init__(self):
        if int(self.x) != self.x or int(self.y) != self.y or self.x < 0 or self.y < 0:
            raise ValueError(f"photon numbers must be non-negative integers, got {self.x, self.y}")

    @property
    def total(self) -> int:
        return self.x + self.y


def _thermal(z: float, n):
    """Geometric photon-number distribution with mean ``z`` (0**0 = 1)."""
    n = np.asarray(n)
    if z == 0:
        return (n == 0).astype(float)
    q = z / (1.0 + z)
    return np.exp(n * np.log(q)) / (1.0 + z)


def eigenmode_occupation_prob(n1, n2, params: ThermalModeParams):
    """Joint probability of ``n1`` photons in the z1 eigenmode and ``n2`` in z2."""
    p = _thermal(params.z1, n1) * _thermal(params.z2, n2)
    return float(p) if np.ndim(p) == 0 else p


@lru_cache(maxsize=None)
def _sum_terms(total: int):
    """Index arrays and weights for every non-vanishing (x, n1, j) term at fixed x + y."""
    xs, n1s, a_exp, b_exp, weights = [], [], [], [], []
    for x in range(total + 1):
        y = total - x
        for n1 in range(total + 1):
            n2 = total - n1
            for j in range(max(0, x - n2), min(n1, x) + 1):
                xs.append(x)
                n1s.append(n1)
                a_exp.append(x + n1 - 2 * j)
                b_exp.append(y - n1 + 2 * j)
                w = comb(n1, j) * comb(n2, x - j) * np.sqrt(
                    factorial(x) * factorial(y) / (factorial(n1) * factorial(n2)))
                weights.append(-w if j % 2 else w)
    arrs = [np.array(v) for v in (xs, n1s, a_exp, b_exp, weights)]
    cell = arrs[0] * (total + 1) + arrs[1]
    indicator = sparse.csr_matrix((np.ones(cell.size), (np.arange(cell.size), cell)),
                                  shape=(cell.size, (total + 1) ** 2))
    return tuple(arrs[2:]) + (indicator,)


@lru_cache(maxsize=None)
def _rotation_eigensystem(total: int):
    """Eigen-decomposition of ``i K`` where ``K`` generates a real mode rotation.

    ``K`` acts on the ``total``-photon sector in the basis ``|x, total - x>``.
    """
    n1 = np.arange(total)
    K = np.zeros((total + 1, total + 1))
    off = np.sqrt((n1 + 1) * (total - n1))
    K[n1 + 1, n1] = off
    K[n1, n1 + 1] = -off
    lam, V = np.linalg.eigh(1j * K)
    return lam, V


def _amplitudes(total: int, theta: np.ndarray) -> np.ndarray:
    """Signed transition amplitudes ``U[k, x, n1]`` for a flat array of phases.

    Up to :data:`DIRECT_LIMIT` photons the binomial sum is evaluated directly.
    Beyond that the alternating sum cancels catastrophically, so the same
    amplitudes are obtained from the mode map ``b1+ -> -(c d1+ - s d2+)``,
    ``b2+ -> s d1+ + c d2+``: a rotation by ``theta / 2`` exponentiated in the
    photon-number sector, followed by a sign ``(-1)^n1``.
    """
    if total <= DIRECT_LIMIT:
        s = np.sin(theta / 2)[:, None]
        c = np.cos(theta / 2)[:, None]
        a_exp, b_exp, w, indicator = _sum_terms(total)
        terms = w * s**a_exp * c**b_exp
        return (terms @ indicator).reshape(theta.size, total + 1, total + 1)
    lam, V = _rotation_eigensystem(total)
    phases = np.exp(-0.5j * np.outer(theta, lam))
    rot = ((V[None, :, :] * phases[:, None, :]) @ V.conj().T).real
    rot[:, :, 1::2] *= -1
    return rot


def transition_matrix(total: int, theta):
    """Fock transition probabilities ``T[..., x, n1]`` for ``x + y = n1 + n2 = total``.

    ``theta`` may be a scalar or an array; its shape is prepended.
    """
    theta = np.asarray(theta, dtype=float)
    T = _amplitudes(total, theta.reshape(-1)) ** 2
    return T.reshape(theta.shape + (total + 1, total + 1))


def coincidence_prob(outcome, params: ThermalModeParams, net_phase: float) -> float:
    """Probability of ``x`` photons in D1 and ``y`` in D2 at net phase ``phi_a - phi``."""
    if not isinstance(outcome, CoincidenceOutcome):
        outcome = CoincidenceOutcome(*outcome)
    total = outcome.total
    n1 = np.arange(total + 1)
    p_in = eigenmode_occupation_prob(n1, total - n1, params)
    T = transition_matrix(total, net_phase)[outcome.x]
    p = float(np.dot(p_in, T))
    if p < -1e-12:
        raise ConsistencyError(f"negative probability {p} for {outcome}")
    return max(p, 0.0)


@lru_cache(maxsize=None)
def fourier_coefficients(total: int) -> np.ndarray:
    """Cosine-series coefficients ``A[x, n1, m]`` with ``T(theta) = sum_m A cos(m theta)``.

    ``T`` is an even trigonometric polynomial of degree ``total`` in theta, so
    ``2 total + 2`` samples determine it exactly.
    """
    L = 2 * total + 2
    theta = 2 * np.pi * np.arange(L) / L
    T = transition_matrix(total, theta)                 # (L, x, n1)
    F = np.fft.rfft(T, axis=0)[: total + 1].real / L    # (m, x, n1)
    F[1:] *= 2
    A = np.moveaxis(F, 0, -1).copy()
    A.setflags(write=False)
    return A


def probability_table(params: ThermalModeParams, net_phases, max_total: int) -> np.ndarray:
    """``P[k, x, y]`` for every ``x + y <= max_total`` at each net phase.

    Cells with ``x + y > max_total`` are zero.  No renormalisation is applied.
    """
    phases = np.atleast_1d(np.asarray(net_phases, dtype=float))
    P = np.zeros((phases.size, max_total + 1, max_total + 1))
    xs = np.arange(max_total + 1)
    for total in range(max_total + 1):
        n1 = np.arange(total + 1)
        p_in = eigenmode_occupation_prob(n1, total - n1, params)
        coef = np.tensordot(fourier_coefficients(total), p_in, axes=([1], [0]))  # (x, m)
        cosm = np.cos(np.outer(phases, np.arange(total + 1)))                    # (k, m)
        vals = cosm @ coef.T                                                     # (k, x)
        x = xs[: total + 1]
        P[:, x, total - x] = vals
    if P.min() < -1e-12:
        raise ConsistencyError(f"negative probability {P.min()} in outcome table")
    return np.clip(P, 0.0, None)


def total_number_tail(params: ThermalModeParams, max_total: int) -> float:
    """Exact probability that ``x + y > max_total`` (phase independent)."""
    mass = sum(eigenmode_occupation_prob(np.arange(n + 1), n - np.arange(n + 1), params).sum()
               for n in range(max_total + 1))
    return max(1.0 - mass, 0.0)


def choose_cutoff(params: ThermalModeParams, tail_tolerance: float = 1e-12,
                  hard_cap: int = HARD_CUTOFF) -> int:
    """Smallest total photon number whose excluded tail mass is below tolerance."""
    pn = np.array([eigenmode_occupation_prob(np.arange(n + 1), n - np.arange(n + 1), params).sum()
                   for n in range(hard_cap + 1)])
    tail = 1.0 - np.cumsum(pn)
    ok = np.nonzero(tail < tail_tolerance)[0]
    if ok.size == 0:
        raise TruncationError(
            f"tail mass above {tail_tolerance} even at cutoff {hard_cap} (nbar={params.mean_photon_number})")
    return int(ok[0])


@dataclass(frozen=True, eq=False)
class OutcomeTable:
    """Truncated joint distribution of ``[x, y]`` at one net phase.

    ``probabilities[x, y]`` is exact for ``x + y <= cutoff`` and zero beyond;
    everything excluded is accounted for in ``tail_mass``.
    """

    cutoff: int
    probabilities: np.ndarray
    tail_mass: float
    net_phase: float

    def sampling_distribution(self) -> np.ndarray:
        """Flattened, renormalised probabilities for inverse-CDF sampling."""
        p = self.probabilities.ravel()
        return p / p.sum()

    def mean_total(self) -> float:
        x, y = np.indices(self.probabilities.shape)
        return float(((x + y) * self.probabilities).sum())


def outcome_table(params: ThermalModeParams, net_phase: float,
                  tail_tolerance: float = 1e-12, hard_cap: int = HARD_CUTOFF) -> OutcomeTable:
    if not 0 < tail_tolerance <= 1e-3:
        raise ValueError("tail_tolerance must lie in (0, 1e-3]")
    cutoff = choose_cutoff(params, tail_tolerance, hard_cap)
    P = probability_table(params, [net_phase], cutoff)[0]
    P.setflags(write=False)
    return OutcomeTable(cutoff, P, float(1.0 - P.sum()), float(net_phase))


CLICK_PATTERNS = ((0, 0), (0, 1), (1, 0), (1, 1))


def click_probabilities(params: ThermalModeParams, net_phase):
    """Probabilities of the four click patterns, shape ``(..., 4)`` in :data:`CLICK_PATTERNS` order.

    Each output port carries a single thermal mode whose mean is the
    phase-weighted mix of ``z1`` and ``z2``, so no-click probabilities have
    closed forms.
    """
    theta = np.asarray(net_phase, dtype=float)
    return _click_probs(params.z1, params.z2, theta)


def _click_probs(z1, z2, theta):
    c2 = np.cos(theta / 2) ** 2
    s2 = 1.0 - c2
    p_x0 = 1.0 / (1.0 + c2 * z1 + s2 * z2)
    p_y0 = 1.0 / (1.0 + s2 * z1 + c2 * z2)
    p00 = np.broadcast_to(1.0 / ((1.0 + z1) * (1.0 + z2)), np.shape(p_x0))
    return np.stack([p00, p_x0 - p00, p_y0 - p00, 1.0 - p_x0 - p_y0 + p00], axis=-1)


def click_prob(pattern, params: ThermalModeParams, net_phase: float) -> float:
    """Probability of a click pattern; counts above one are treated as a click."""
    key = (min(int(pattern[0]), 1), min(int(pattern[1]), 1))
    return float(click_probabilities(params, net_phase)[CLICK_PATTERNS.index(key)])


def fringe_curve(outcome, params: ThermalModeParams, phase_grid) -> np.ndarray:
    """``P(x, y)`` as a function of net phase over ``phase_grid``."""
    if not isinstance(outcome, CoincidenceOutcome):
        outcome = CoincidenceOutcome(*outcome)
    grid = np.atleast_1d(np.asarray(phase_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("phase grid must be non-empty")
    total = outcome.total
    n1 = np.arange(total + 1)
    p_in = eigenmode_occupation_prob(n1, total - n1, params)
    return transition_matrix(total, grid)[:, outcome.x, :] @ p_in


def single_photon_fringe_visibility(magnitude: float, nbar: float) -> float:
    """Exact visibility of the [1, 0] (or [0, 1]) fringe.

    Equals ``|gamma| / (1 + nbar (1 - |gamma|^2))``, which tends to |gamma|
    only in the weak-light limit.
    """
    return magnitude / (1.0 + nbar * (1.0 - magnitude**2))


def magnitude_from_fringe_visibility(visibility: float, nbar: float) -> float:
    """Invert :func:`single_photon_fringe_visibility` for |gamma|."""
    v = float(visibility)
    if nbar == 0 or v == 0:
        return v
    return (-1.0 + np.sqrt(1.0 + 4.0 * nbar * v**2 * (1.0 + nbar))) / (2.0 * nbar * v)
