"""Independent reference computations used by the tests.

Nothing here imports the package's probability or transform code.
"""

import numpy as np
from scipy.linalg import expm, logm


def _ladder_ops(dim):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)
    return [np.kron(a, eye), np.kron(eye, a)]


def _passive_unitary(mode_matrix, ops):
    """Fock-space unitary of a 2x2 mode transformation ``b_j = sum_k M_jk a_k``."""
    gen = logm(mode_matrix)
    X = sum(gen[j, k] * ops[j].conj().T @ ops[k] for j in range(2) for k in range(2))
    return expm(X)


def fock_coincidence_table(magnitude, phase, applied_phase, nbar, cutoff=7):
    """Joint photon-number distribution at the two detectors, by brute force.

    Two independent thermal eigenmodes with means ``nbar (1 -/+ |gamma|)`` are
    rotated into the field modes at the two collection points (which then have
    cross-correlation ``nbar gamma``), the applied phase is imposed on the first
    mode and a 50:50 beam splitter mixes them.  The state is evolved as a
    density matrix in a truncated Fock space; photon-number-conserving
    evolution keeps every sector with ``x + y <= cutoff`` exact.

    Returns
    -------
    table : ndarray (cutoff + 1, cutoff + 1)
        ``P(x, y)``; only ``x + y <= cutoff`` entries are exact.
    cross : complex
        ``<a1^dag a2>`` before the phase shifter, restricted to the exact
        sectors (checks the state preparation).
    """
    dim = cutoff + 1
    ops = _ladder_ops(dim)
    z1, z2 = nbar * (1 - magnitude), nbar * (1 + magnitude)

    def thermal(z):
        n = np.arange(dim)
        return np.diag(z**n / (1 + z) ** (n + 1))

    rho = np.kron(thermal(z1), thermal(z2))
    rotate = np.array([[1, 1], [-np.exp(1j * phase), np.exp(1j * phase)]]) / np.sqrt(2)
    shifter = np.diag([np.exp(1j * applied_phase), 1])
    splitter = np.array([[1, -1], [1, 1]]) / np.sqrt(2)
    U_prep = _passive_unitary(rotate, ops)
    U_all = _passive_unitary(splitter @ shifter @ rotate, ops)
    prepared = U_prep @ rho @ U_prep.conj().T
    n1, n2 = np.divmod(np.arange(dim * dim), dim)
    exact = np.diag((n1 + n2 <= cutoff).astype(float))
    cross = np.trace(exact @ prepared @ exact @ ops[0].conj().T @ ops[1])
    out = U_all @ rho @ U_all.conj().T
    return np.real(np.diag(out)).reshape(dim, dim), cross


def dense_argmax(func, lo=0.0, hi=2 * np.pi, n=200001):
    grid = np.linspace(lo, hi, n)
    return grid[np.argmax(func(grid))]


def sinc_magnitude(a, wavelength, separation, distance):
    u = 2 * np.pi / wavelength * separation * a / (2 * distance)
    return 1.0 if u == 0 else abs(np.sin(u) / u)


def explicit_dft_reconstruction(values, baselines, k, distance, x, y):
    """Triple loop-free but unfactored inverse sum over every baseline pair."""
    BX, BY = np.meshgrid(baselines, baselines)
    out = np.empty((len(y), len(x)))
    for r, yy in enumerate(y):
        for c, xx in enumerate(x):
            out[r, c] = np.sum(values * np.exp(-1j * k * (xx * BX + yy * BY) / distance)).real
    return out / (len(x) * len(y))
