"""Maximum-likelihood estimation of the CDC from coincidence or click data."""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..coherence import TWO_PI, ComplexCoherence, wrap_phase
from ..errors import DegeneratePhaseWarning
from ..photon_stats import ThermalModeParams, _click_probs, _thermal, fourier_coefficients
from ..simulator import Dataset, Scheme, degrade_to_click

PROB_FLOOR = 1e-300
# log-likelihood spread over phase below which the phase counts as unconstrained
PHASE_PROFILE_THRESHOLD = 2.0


@dataclass(frozen=True)
class MLEOptions:
    grid_magnitude: int = 21
    grid_phase: int = 36
    xatol: float = 1e-5
    fatol: float = 1e-9
    maxiter: int = 4000
    fit_nbar: bool | None = None    # None: joint fit for clicks only
    nbar: float | None = None       # fixed mean photon number overriding the moment estimate


@dataclass(frozen=True)
class EstimateResult:
    cdc_estimate: ComplexCoherence
    nbar_estimate: float
    log_likelihood: float
    converged: bool
    iterations: int
    scheme: str = "count"
    n_events: int = 0
    phase_identified: bool = True
    flags: tuple = field(default=())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cdc_estimate"] = {"magnitude": self.cdc_estimate.magnitude,
                             "phase": self.cdc_estimate.phase}
        d["flags"] = list(self.flags)
        return d


class _CountModel:
    """Aggregated photon-number data with a fast likelihood in (|gamma|, phi, nbar)."""

    def __init__(self, dataset: Dataset):
        counts = dataset.outcome_counts()
        k, x, y = np.nonzero(counts)
        self.weights = counts[k, x, y].astype(float)
        self.x = x
        self.total = x + y
        self.max_total = int(self.total.max())
        phi_a = dataset.schedule.applied_phases[k]
        m = np.arange(self.max_total + 1)
        self.cos_a = np.cos(np.outer(phi_a, m))
        self.sin_a = np.sin(np.outer(phi_a, m))
        self.groups = [(n, np.nonzero(self.total == n)[0]) for n in np.unique(self.total)]

    def _coefficients(self, z1, z2):
        coef = np.zeros((self.x.size, self.max_total + 1))
        for n, idx in self.groups:
            n1 = np.arange(n + 1)
            p_in = _thermal(z1, n1) * _thermal(z2, n - n1)
            c = np.tensordot(fourier_coefficients(n), p_in, axes=([1], [0]))   # (x, m)
            coef[idx, : n + 1] = c[self.x[idx]]
        return coef

    def loglik(self, magnitude, nbar, phases):
        """Log-likelihood at one magnitude for every phase in ``phases``."""
        phases = np.atleast_1d(phases)
        coef = self._coefficients(nbar * (1 - magnitude), nbar * (1 + magnitude))
        m = np.arange(self.max_total + 1)
        P = ((coef * self.cos_a) @ np.cos(np.outer(m, phases))
             + (coef * self.sin_a) @ np.sin(np.outer(m, phases)))
        return self.weights @ np.log(np.maximum(P, PROB_FLOOR))


class _ClickModel:
    def __init__(self, dataset: Dataset):
        counts = np.zeros((len(dataset.schedule), 4))
        pattern = 2 * np.minimum(dataset.x, 1) + np.minimum(dataset.y, 1)
        np.add.at(counts, (dataset.phase_index, pattern), 1)
        keep = counts.sum(axis=1) > 0
        self.counts = counts[keep]
        self.phi_a = dataset.schedule.applied_phases[keep]

    def loglik(self, magnitude, nbar, phases):
        phases = np.atleast_1d(phases)
        theta = self.phi_a[None, :] - phases[:, None]
        P = _click_probs(nbar * (1 - magnitude), nbar * (1 + magnitude), theta)
        return np.einsum("jkp,kp->j", np.log(np.maximum(P, PROB_FLOOR)), self.counts)


def _model(dataset: Dataset):
    return _CountModel(dataset) if dataset.number_resolving else _ClickModel(dataset)


def moment_nbar(dataset: Dataset) -> float:
    """Method-of-moments mean photon number per mode, ``mean(x + y) / 2``."""
    return float(np.mean(dataset.x + dataset.y)) / 2.0


def click_nbar_guess(dataset: Dataset) -> float:
    """Mean photon number from the no-click fraction, assuming |gamma| ~ 0."""
    f00 = np.mean((dataset.x == 0) & (dataset.y == 0))
    return float(1.0 / np.sqrt(max(f00, 1e-12)) - 1.0)


def log_likelihood(dataset: Dataset, candidate: ThermalModeParams) -> float:
    """Sum over events of ``ln P(outcome | candidate, applied phase)``.

    Click-degraded datasets use the four-pattern click model.  Probabilities
    are floored at 1e-300 before the logarithm.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    model = _model(dataset)
    return float(model.loglik(candidate.cdc.magnitude, candidate.mean_photon_number,
                              candidate.cdc.phase)[0])


def _resolve_scheme(dataset: Dataset, scheme):
    scheme = Scheme(scheme) if scheme is not None else dataset.scheme
    flags = []
    if scheme is Scheme.CLICK and dataset.number_resolving:
        dataset = degrade_to_click(dataset)
        flags.append("degraded-to-click")
    if scheme is Scheme.COUNT and not dataset.number_resolving:
        raise ValueError("Count scheme needs photon-number-resolved data")
    if scheme is Scheme.TRADITIONAL:
        if np.unique(dataset.phase_index).size > 1:
            raise ValueError("Traditional scheme needs events from a single applied phase")
        flags.append("weak-identifiability")
    return dataset, scheme, flags


def mle_estimate(dataset: Dataset, scheme=None, options: MLEOptions | None = None) -> EstimateResult:
    """Maximise the likelihood over |gamma| in [0, 1] and phi on the circle.

    A coarse grid seeds a bounded Nelder-Mead refinement.  For Count and
    Traditional data the mean photon number is fixed at its moment estimate
    unless ``options.fit_nbar`` is set; for click data it is fitted jointly.
    """
    options = options or MLEOptions()
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    dataset, scheme, flags = _resolve_scheme(dataset, scheme)
    model = _model(dataset)
    clicks = not dataset.number_resolving
    fit_nbar = clicks if options.fit_nbar is None else options.fit_nbar
    if options.nbar is not None:
        nbar0 = float(options.nbar)
    else:
        nbar0 = click_nbar_guess(dataset) if clicks else moment_nbar(dataset)

    g_grid = np.linspace(0.0, 1.0, options.grid_magnitude)
    p_grid = TWO_PI * np.arange(options.grid_phase) / options.grid_phase
    surface = np.array([model.loglik(g, nbar0, p_grid) for g in g_grid])
    ig, ip = np.unravel_index(np.argmax(surface), surface.shape)

    def objective(v):
        g = min(max(v[0], 0.0), 1.0)
        nb = max(v[2], 1e-12) if fit_nbar else nbar0
        return -model.loglik(g, nb, v[1])[0]

    start = [g_grid[ig], p_grid[ip]]
    steps = [0.5 / (options.grid_magnitude - 1), np.pi / options.grid_phase]
    bounds = [(0.0, 1.0), (None, None)]
    if fit_nbar:
        start.append(nbar0)
        steps.append(0.1 * max(nbar0, 0.1))
        bounds.append((1e-12, None))
    start = np.array(start)
    simplex = np.vstack([start] + [start + np.eye(len(start))[i] * steps[i]
                                   for i in range(len(start))])
    simplex[:, 0] = np.clip(simplex[:, 0], 0.0, 1.0)
    if simplex[1, 0] == simplex[0, 0]:
        simplex[1, 0] = start[0] - steps[0]
    res = minimize(objective, start, method="Nelder-Mead", bounds=bounds,
                   options={"initial_simplex": simplex, "xatol": options.xatol,
                            "fatol": options.fatol, "maxiter": options.maxiter})
    g_hat = float(np.clip(res.x[0], 0.0, 1.0))
    phi_hat = wrap_phase(res.x[1])
    nbar_hat = float(res.x[2]) if fit_nbar else nbar0

    profile = model.loglik(g_hat, nbar_hat, p_grid)
    identified = bool(profile.max() - profile.min() >= PHASE_PROFILE_THRESHOLD)
    if not identified:
        flags.append("phase-unconstrained")
        warnings.warn(f"log-likelihood varies by {profile.max() - profile.min():.3g} over phase "
                      f"at |gamma| = {g_hat:.3g}; phase estimate is unconstrained",
                      DegeneratePhaseWarning, stacklevel=2)
    if not res.success:
        flags.append("not-converged")
        warnings.warn(f"Nelder-Mead did not converge: {res.message}", RuntimeWarning, stacklevel=2)
    return EstimateResult(ComplexCoherence(g_hat, phi_hat), nbar_hat, float(-res.fun),
                          bool(res.success), int(res.nit), scheme.value, len(dataset),
                          identified, tuple(flags))
