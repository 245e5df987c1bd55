"""Time propagation and frame-consistent fidelity bookkeeping.

Pure states evolve through one eigendecomposition of the (time-independent)
Hamiltonian, so there is no step-size error anywhere in the unitary path.

Density matrices evolve under

    drho/dt = -i[H, rho] + (gamma/2) (L rho L - rho),

with L a Hermitian involution (sigma_z in the Lab frame, sigma_x in the JCM
frame).  Two backends are provided:

* ``superop``: exact exponentiation of the vectorized Liouvillian; used for
  small dimensions where the d^2 x d^2 matrix is cheap.
* ``strang``: symmetric splitting between the exact unitary step (diagonal in
  the Hamiltonian eigenbasis) and the exact dephasing channel
  exp(D tau) rho = c rho + s L rho L.  Both half-maps are CPTP, so trace,
  Hermiticity and positivity are preserved by construction at any step size;
  the only approximation is the usual O(dt^2) splitting commutator.

For the jump operators used here the similarity-transformed L in the
Hamiltonian eigenbasis is extremely sparse (a few entries per row), which
makes the splitting step O(d^2) instead of O(d^3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.linalg

try:
    import numba
except ImportError:          # pragma: no cover - numba is a declared dependency
    numba = None

from . import hilbert as hb
from .errors import NonHermitianInput, WindowTooLarge
from .hilbert import DensityMatrix, Operator, ProductSpace, QubitSpace, StateVector
from .models import (Frame, HamiltonianKind, ModelParams, build_full,
                     build_hamiltonian, frame_chain)

__all__ = [
    "TimeGrid",
    "DephasingModel",
    "StateTrajectory",
    "DensityTrajectory",
    "FidelitySeries",
    "evolve_unitary",
    "evolve_lindblad",
    "fidelity_vs_full",
    "coarse_grain",
    "dephasing_jump",
]

HERMITICITY_TOL = 1e-10

# Strang substep length (units of 1/nu) giving splitting errors well below the
# tolerances used in the benchmarks; see tests/test_evolution.py convergence check.
DEFAULT_SUBSTEP_DT = 0.1

# Dimension threshold below which the exact superoperator exponential is used.
SUPEROP_MAX_DIM = 36


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid 0 .. t_max (units of 1/nu) with `samples` points."""
    t_max: float
    samples: int

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("need at least 2 samples")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")

    @property
    def dt(self) -> float:
        return self.t_max / (self.samples - 1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.samples)


@dataclass(frozen=True)
class DephasingModel:
    """Dephasing rate (units of nu) plus the frame fixing the jump operator."""
    rate: float
    frame: Frame = Frame.LAB

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("dephasing rate must be nonnegative")
        if self.frame not in (Frame.LAB, Frame.JCM):
            raise ValueError("dephasing is defined in the Lab (sigma_z) or JCM (sigma_x) frame")


def dephasing_jump(frame: Frame, space) -> Operator:
    """Jump operator for the dephasing channel: sigma_z (Lab) or sigma_x (JCM)."""
    q = hb.qubit_ops()
    sigma = q.sz if frame is Frame.LAB else q.sx
    if isinstance(space, QubitSpace):
        return sigma
    if isinstance(space, ProductSpace) and isinstance(space.left, QubitSpace):
        return hb.tensor(sigma, hb.identity(space.right))
    raise ValueError(f"no dephasing jump operator defined on {space}")


@dataclass(frozen=True)
class StateTrajectory:
    space: object
    times: np.ndarray
    states: np.ndarray  # (M, dim)

    def state(self, k: int) -> StateVector:
        return StateVector(self.space, self.states[k])


@dataclass(frozen=True)
class DensityTrajectory:
    space: object
    times: np.ndarray
    states: np.ndarray  # (M, dim, dim)

    def density(self, k: int) -> DensityMatrix:
        return DensityMatrix(self.space, self.states[k])

    def expectation(self, op: Operator) -> np.ndarray:
        return np.einsum("ij,mji->m", op.matrix, self.states).real


@dataclass(frozen=True)
class FidelitySeries:
    """Raw overlap series F(t), optionally with its coarse-grained view."""
    times: np.ndarray
    values: np.ndarray
    kind: Optional[HamiltonianKind] = None
    window: Optional[float] = None
    coarse_times: Optional[np.ndarray] = None
    coarse_values: Optional[np.ndarray] = None


def _require_hermitian(h: Operator):
    if not h.is_hermitian(HERMITICITY_TOL):
        raise NonHermitianInput("Hamiltonian is not Hermitian within tolerance")


# ---------------------------------------------------------------------------
# Unitary propagation
# ---------------------------------------------------------------------------

def evolve_unitary(h: Operator, psi0: StateVector, grid: TimeGrid) -> StateTrajectory:
    """psi(t_k) = exp(-i H t_k) psi0 through one eigendecomposition of H."""
    _require_hermitian(h)
    if h.space != psi0.space:
        raise hb.SpaceMismatch("Hamiltonian and state live on different spaces")
    evals, v = np.linalg.eigh(h.matrix)
    w = v.conj().T @ psi0.vector
    times = grid.times
    phases = np.exp(-1j * np.outer(times, evals))          # (M, dim)
    states = (phases * w[None, :]) @ v.T                   # rows: psi(t) = V (phases * w)
    return StateTrajectory(h.space, times, states)


# ---------------------------------------------------------------------------
# Lindblad propagation
# ---------------------------------------------------------------------------

if numba is not None:
    @numba.njit(cache=True)
    def _conj_kernel(rho, row_idx, row_w, col_idx, col_w, left, out):
        nb, d, _ = rho.shape
        k = row_idx.shape[1]
        for b in range(nb):
            for i in range(d):
                for j in range(d):
                    left[b, i, j] = row_w[i, 0] * rho[b, row_idx[i, 0], j]
                for p in range(1, k):
                    w = row_w[i, p]
                    if w != 0:
                        r = row_idx[i, p]
                        for j in range(d):
                            left[b, i, j] += w * rho[b, r, j]
            for i in range(d):
                for j in range(d):
                    acc = col_w[j, 0] * left[b, i, col_idx[j, 0]]
                    for q in range(1, k):
                        acc += col_w[j, q] * left[b, i, col_idx[j, q]]
                    out[b, i, j] = acc
        return out


class _SparseConjugation:
    """Fast rho -> A rho A for a matrix with few nonzeros per row and column."""

    MAX_PER_ROW = 8

    def __init__(self, a: np.ndarray, tol: float = 1e-13):
        self.dense = a
        d = a.shape[0]
        mask = np.abs(a) > tol
        per_row = mask.sum(axis=1).max()
        per_col = mask.sum(axis=0).max()
        self.sparse_ok = max(per_row, per_col) <= self.MAX_PER_ROW
        self._buffers = None
        if not self.sparse_ok:
            return
        k = int(max(per_row, per_col, 1))
        self.row_idx = np.zeros((d, k), dtype=np.int64)
        self.row_w = np.zeros((d, k), dtype=complex)
        self.col_idx = np.zeros((d, k), dtype=np.int64)
        self.col_w = np.zeros((d, k), dtype=complex)
        for i in range(d):
            js = np.nonzero(mask[i])[0]
            self.row_idx[i, :len(js)] = js
            self.row_w[i, :len(js)] = a[i, js]
            is_ = np.nonzero(mask[:, i])[0]
            self.col_idx[i, :len(is_)] = is_
            self.col_w[i, :len(is_)] = a[is_, i]
        self.k = k

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """rho has shape (B, d, d); returns A rho A."""
        if not self.sparse_ok:
            return self.dense @ rho @ self.dense
        if numba is not None:
            if self._buffers is None or self._buffers[0].shape != rho.shape:
                self._buffers = (np.empty_like(rho), np.empty_like(rho))
            left, out = self._buffers
            return _conj_kernel(rho, self.row_idx, self.row_w,
                                self.col_idx, self.col_w, left, out)
        # numpy fallback: gather rows, then columns
        left = self.row_w[None, :, 0, None] * rho[:, self.row_idx[:, 0], :]
        for k in range(1, self.k):
            left += self.row_w[None, :, k, None] * rho[:, self.row_idx[:, k], :]
        out = self.col_w[None, None, :, 0] * left[:, :, self.col_idx[:, 0]]
        for k in range(1, self.k):
            out += self.col_w[None, None, :, k] * left[:, :, self.col_idx[:, k]]
        return out


class LindbladPropagator:
    """Strang-split propagator for a batch of density matrices.

    Works in the Hamiltonian eigenbasis where the unitary half-step is a
    Hadamard product with a phase matrix and the dephasing channel is a
    two-Kraus mixture c*rho + s*L rho L.
    """

    def __init__(self, h: Operator, jump: Operator, gamma: float, substep_dt: float):
        _require_hermitian(h)
        if h.space != jump.space:
            raise hb.SpaceMismatch("Hamiltonian and jump operator on different spaces")
        self.space = h.space
        self.gamma = float(gamma)
        self.evals, self.v = np.linalg.eigh(h.matrix)
        self.vh = self.v.conj().T
        self.jump_tilde = _SparseConjugation(self.vh @ jump.matrix @ self.v)
        self.substep_dt = float(substep_dt)
        self._obs_cache = {}

    def to_eigenbasis(self, rho_batch: np.ndarray) -> np.ndarray:
        return self.vh @ rho_batch @ self.v

    def from_eigenbasis(self, rho_batch: np.ndarray) -> np.ndarray:
        return self.v @ rho_batch @ self.vh

    def observable_tilde(self, op: Operator) -> np.ndarray:
        key = id(op)
        if key not in self._obs_cache:
            self._obs_cache[key] = self.vh @ op.matrix @ self.v
        return self._obs_cache[key]

    def expectations(self, rho_batch: np.ndarray, obs_tilde: np.ndarray) -> np.ndarray:
        return np.einsum("ij,bji->b", obs_tilde, rho_batch).real

    def _dephase(self, rho: np.ndarray, tau: float) -> np.ndarray:
        """Exact dephasing channel exp(D tau): c rho + s L rho L."""
        decay = math.exp(-self.gamma * tau)
        c, s = (1.0 + decay) / 2.0, (1.0 - decay) / 2.0
        return c * rho + s * self.jump_tilde.apply(rho)

    def expectation_series(self, rho_batch: np.ndarray, times: np.ndarray,
                           obs_tilde: np.ndarray) -> np.ndarray:
        """Observable series over a uniform grid, shape (len(times), B).

        Equivalent to advancing interval by interval, but the trailing and
        leading dephasing half-channels of adjacent intervals are merged and
        the pending half-channel is absorbed into the observable (the channel
        has Hermitian Kraus operators, so it is self-adjoint).
        """
        out = np.empty((len(times), rho_batch.shape[0]))
        out[0] = self.expectations(rho_batch, obs_tilde)
        if len(times) == 1:
            return out
        delta_t = times[1] - times[0]
        if not np.allclose(np.diff(times), delta_t):
            raise ValueError("expectation_series needs a uniform grid")
        diff = self.evals[:, None] - self.evals[None, :]
        if self.gamma == 0.0:
            phase = np.exp(-1j * diff * delta_t)
            rho = rho_batch.copy()
            for k in range(1, len(times)):
                rho *= phase
                out[k] = self.expectations(rho, obs_tilde)
            return out
        n = max(1, int(math.ceil(delta_t / self.substep_dt - 1e-12)))
        dt = delta_t / n
        phase = np.exp(-1j * diff * dt)
        # channel adjoint equals the channel itself (Hermitian Kraus operators)
        obs_half = self._dephase(obs_tilde[None], dt / 2.0)[0]
        rho = self._dephase(rho_batch, dt / 2.0)
        for k in range(1, len(times)):
            rho *= phase
            for _ in range(n - 1):
                rho = self._dephase(rho, dt)
                rho *= phase
            out[k] = self.expectations(rho, obs_half)
            if k + 1 < len(times):
                rho = self._dephase(rho, dt)
        return out

    def advance(self, rho_batch: np.ndarray, delta_t: float) -> np.ndarray:
        """Advance the (eigenbasis) batch by delta_t using n Strang substeps.

        Interior half-channels are merged pairwise (the dephasing channel is a
        semigroup), so the composition D(h/2) [P D(h)]^{n-1} P D(h/2) equals
        the plain n-fold Strang product exactly.
        """
        if delta_t == 0.0:
            return rho_batch
        diff = self.evals[:, None] - self.evals[None, :]
        if self.gamma == 0.0:
            return np.exp(-1j * diff * delta_t) * rho_batch
        n = max(1, int(math.ceil(delta_t / self.substep_dt - 1e-12)))
        dt = delta_t / n
        phase = np.exp(-1j * diff * dt)
        rho = self._dephase(rho_batch, dt / 2.0)
        for _ in range(n - 1):
            rho = self._dephase(phase * rho, dt)
        return self._dephase(phase * rho, dt / 2.0)


def _superop_propagate(h, jump, gamma, rho0, times):
    """Exact vectorized-Liouvillian propagation (row-major vec convention)."""
    d = h.shape[0]
    eye = np.eye(d)
    liou = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    if gamma > 0:
        liou = liou + (gamma / 2.0) * (np.kron(jump, jump.T) - np.eye(d * d))
    step = scipy.linalg.expm(liou * (times[1] - times[0]))
    out = np.empty((len(times), d, d), dtype=complex)
    vec = rho0.reshape(-1)
    out[0] = rho0
    for k in range(1, len(times)):
        vec = step @ vec
        out[k] = vec.reshape(d, d)
    return out


def evolve_lindblad(h: Operator, deph: DephasingModel, rho0: DensityMatrix,
                    grid: TimeGrid, method: str = "auto",
                    substep_dt: Optional[float] = None) -> DensityTrajectory:
    """Solve the dephasing master equation on the grid.

    method: "superop" (exact exponential of the vectorized generator),
    "strang" (CPTP splitting), or "auto" to pick by dimension.
    """
    _require_hermitian(h)
    if h.space != rho0.space:
        raise hb.SpaceMismatch("Hamiltonian and state live on different spaces")
    rho0.validate(herm_tol=1e-9, trace_tol=1e-7, eig_tol=-1e-7)
    jump = dephasing_jump(deph.frame, h.space)
    if method == "auto":
        method = "superop" if h.dim <= SUPEROP_MAX_DIM else "strang"
    times = grid.times
    if method == "superop":
        states = _superop_propagate(h.matrix, jump.matrix, deph.rate, rho0.matrix, times)
    elif method == "strang":
        prop = LindbladPropagator(h, jump, deph.rate,
                                  substep_dt if substep_dt is not None else DEFAULT_SUBSTEP_DT)
        rho = prop.to_eigenbasis(rho0.matrix[None, :, :])
        states = np.empty((len(times), h.dim, h.dim), dtype=complex)
        states[0] = rho0.matrix
        for k in range(1, len(times)):
            rho = prop.advance(rho, times[k] - times[k - 1])
            states[k] = prop.from_eigenbasis(rho)[0]
    else:
        raise ValueError(f"unknown method {method!r}")
    return DensityTrajectory(h.space, times, states)


# ---------------------------------------------------------------------------
# Fidelity series
# ---------------------------------------------------------------------------

def fidelity_vs_full(kind: HamiltonianKind, p: ModelParams, psi0_lab: StateVector,
                     grid: TimeGrid) -> FidelitySeries:
    """F(t) = |<psi_eff(t)|psi(t)>|^2 evaluated in the Lab frame.

    psi evolves under the full Hamiltonian; psi_eff follows the effective
    model in its own frame and is rotated back through the kind's frame chain.
    """
    h_full = build_full(p)
    traj_full = evolve_unitary(h_full, psi0_lab, grid)
    g = frame_chain(kind, p)
    h_eff = build_hamiltonian(kind, p)
    psi0_frame = g @ psi0_lab
    traj_eff = evolve_unitary(h_eff, psi0_frame, grid)
    # rows are states; back-transform by G^dag:  row -> row @ conj(G)
    eff_lab = traj_eff.states @ g.matrix.conj()
    overlaps = np.einsum("md,md->m", eff_lab.conj(), traj_full.states)
    return FidelitySeries(grid.times, np.abs(overlaps) ** 2, kind=kind)


def coarse_grain(series: FidelitySeries, p: ModelParams) -> FidelitySeries:
    """Average over non-overlapping windows of length Omega T = 2 pi.

    Window timestamps are the window midpoints; a trailing partial window is
    dropped.
    """
    if p.omega <= 0:
        raise WindowTooLarge("no finite averaging window without a drive (omega = 0)")
    window = 2.0 * math.pi / p.omega
    t_max = float(series.times[-1])
    n_win = int(math.floor(t_max / window + 1e-9))
    if n_win < 1:
        raise WindowTooLarge(
            f"grid spans {t_max:.4g} but one averaging window is {window:.4g}")
    idx = np.floor(series.times / window + 1e-12).astype(int)
    keep = idx < n_win
    sums = np.bincount(idx[keep], weights=series.values[keep], minlength=n_win)
    counts = np.bincount(idx[keep], minlength=n_win)
    if np.any(counts == 0):
        raise WindowTooLarge("a coarse-graining window contains no samples")
    coarse_values = sums / counts
    coarse_times = (np.arange(n_win) + 0.5) * window
    return replace(series, window=window,
                   coarse_times=coarse_times, coarse_values=coarse_values)
