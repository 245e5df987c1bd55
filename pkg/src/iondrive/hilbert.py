"""Truncated Fock-space and qubit primitives.

Dense-matrix building blocks for a single two-level ion coupled to one
motional mode: spaces, operators, canonical states, tensor products and
numerically unitary displacement operators.  Everything is a plain complex
numpy array wrapped with a space tag so that dimension mismatches fail loudly
instead of broadcasting silently.

Conventions
-----------
* Qubit basis order: |e> = index 0, |g> = index 1, so sigma_z = diag(+1, -1).
* Composite ordering is qubit (x) Fock, qubit first.
* The displacement operator is the exact matrix exponential of the truncated
  generator alpha*a^dag - conj(alpha)*a, evaluated through an eigendecomposition
  of the Hermitian generator.  This keeps D(alpha) unitary to machine precision
  under truncation; unitarity errors would otherwise masquerade as decoherence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .errors import GuardBandViolation, IndexOutOfSpace, SpaceMismatch

__all__ = [
    "FockSpace",
    "QubitSpace",
    "ProductSpace",
    "Operator",
    "StateVector",
    "DensityMatrix",
    "QubitOperators",
    "annihilation",
    "creation",
    "number_operator",
    "displacement",
    "identity",
    "qubit_ops",
    "tensor",
    "tensor_state",
    "excited_state",
    "ground_state",
    "coherent_state",
    "cat_state",
    "number_state",
    "overlap_fidelity",
]


# ---------------------------------------------------------------------------
# Spaces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FockSpace:
    """Truncated harmonic-oscillator space with basis |0> ... |cutoff-1>."""
    cutoff: int

    def __post_init__(self):
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")

    @property
    def dim(self) -> int:
        return self.cutoff


@dataclass(frozen=True)
class QubitSpace:
    """Two-level electronic space, basis order (|e>, |g>)."""

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class ProductSpace:
    """Tensor product of two spaces, left factor first."""
    left: object
    right: object

    @property
    def dim(self) -> int:
        return self.left.dim * self.right.dim


def _require_same_space(a, b, what="operands"):
    if a != b:
        raise SpaceMismatch(f"{what} live on different spaces: {a} vs {b}")


# ---------------------------------------------------------------------------
# Operators and states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Operator:
    """Complex square matrix tagged with the space it acts on."""
    space: object
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, order="C")   # own the storage
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.space.dim:
            raise SpaceMismatch(
                f"matrix dimension {m.shape[0]} does not match space dim {self.space.dim}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.space.dim

    def dagger(self) -> "Operator":
        return Operator(self.space, self.matrix.conj().T)

    def is_hermitian(self, tol=1e-12) -> bool:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) < tol

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _require_same_space(self.space, other.space)
            return Operator(self.space, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            _require_same_space(self.space, other.space)
            return StateVector(self.space, self.matrix @ other.vector)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        _require_same_space(self.space, other.space)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        _require_same_space(self.space, other.space)
        return Operator(self.space, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(self.space, -self.matrix)

    def expectation(self, state: "StateVector") -> complex:
        _require_same_space(self.space, state.space)
        return complex(np.vdot(state.vector, self.matrix @ state.vector))


@dataclass(frozen=True)
class StateVector:
    """Pure state on a tagged space."""
    space: object
    vector: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.vector, dtype=complex).reshape(-1)
        if v.shape[0] != self.space.dim:
            raise SpaceMismatch(
                f"vector length {v.shape[0]} does not match space dim {self.space.dim}")
        v.flags.writeable = False
        object.__setattr__(self, "vector", v)

    @property
    def dim(self) -> int:
        return self.space.dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n < 1e-300:
            raise ValueError("cannot normalize a zero state")
        return StateVector(self.space, self.vector / n)

    def overlap(self, other: "StateVector") -> complex:
        _require_same_space(self.space, other.space, "states")
        return complex(np.vdot(self.vector, other.vector))

    def __add__(self, other):
        _require_same_space(self.space, other.space, "states")
        return StateVector(self.space, self.vector + other.vector)

    def __sub__(self, other):
        _require_same_space(self.space, other.space, "states")
        return StateVector(self.space, self.vector - other.vector)

    def __mul__(self, scalar):
        return StateVector(self.space, self.vector * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state on a tagged space."""
    space: object
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, order="C")
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != self.space.dim:
            raise SpaceMismatch(
                f"density matrix shape {m.shape} does not match space dim {self.space.dim}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pure(cls, psi: StateVector) -> "DensityMatrix":
        return cls(psi.space, np.outer(psi.vector, psi.vector.conj()))

    @property
    def dim(self) -> int:
        return self.space.dim

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))[0])

    def validate(self, herm_tol=1e-12, trace_tol=1e-9, eig_tol=-1e-9):
        """Raise ValueError unless Hermitian, unit trace and positive within tolerance."""
        if self.hermiticity_defect() > herm_tol:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {self.trace()} != 1")
        if self.min_eigenvalue() < eig_tol:
            raise ValueError("density matrix has a negative eigenvalue beyond tolerance")
        return self


# ---------------------------------------------------------------------------
# Fock-space builders
# ---------------------------------------------------------------------------

def check_guard_band(alpha: complex, space: FockSpace):
    """Reject displacements whose coherent tail would reach the cutoff.

    |alpha|^2 <= cutoff/4 keeps the population at the truncation edge below
    ~1e-10 for the cutoffs used here.
    """
    if abs(alpha) ** 2 > space.cutoff / 4.0:
        raise GuardBandViolation(
            f"|alpha|^2 = {abs(alpha)**2:.4g} exceeds cutoff/4 = {space.cutoff / 4.0:.4g}")


def annihilation(space: FockSpace) -> Operator:
    """Truncated annihilation operator: <m|a|n> = sqrt(n) delta_{m,n-1}."""
    n = np.arange(1, space.cutoff)
    m = np.zeros((space.cutoff, space.cutoff), dtype=complex)
    m[n - 1, n] = np.sqrt(n)
    return Operator(space, m)


def creation(space: FockSpace) -> Operator:
    return annihilation(space).dagger()


def number_operator(space: FockSpace) -> Operator:
    return Operator(space, np.diag(np.arange(space.cutoff, dtype=float)).astype(complex))


def identity(space) -> Operator:
    return Operator(space, np.eye(space.dim, dtype=complex))


def displacement(alpha: complex, space: FockSpace) -> Operator:
    """D(alpha) = exp(alpha a^dag - conj(alpha) a) on the truncated space.

    Built as exp(iK) with K Hermitian, through an eigendecomposition of K, so
    the result is unitary to machine precision regardless of the truncation.
    """
    check_guard_band(alpha, space)
    a = annihilation(space).matrix
    gen = alpha * a.conj().T - np.conj(alpha) * a          # anti-Hermitian
    k = -1j * gen                                          # Hermitian
    evals, evecs = np.linalg.eigh(k)
    return Operator(space, (evecs * np.exp(1j * evals)) @ evecs.conj().T)


# ---------------------------------------------------------------------------
# Qubit operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitOperators:
    sx: Operator
    sz: Operator
    sp: Operator
    sm: Operator
    proj_g: Operator
    proj_minus: Operator


def qubit_ops() -> QubitOperators:
    """Pauli and projection operators in the (|e>, |g>) basis.

    sigma_z|e> = +|e>, sigma_z|g> = -|g>; sigma_plus|g> = |e>;
    proj_minus projects on |-> = (|e> - |g>)/sqrt(2).
    """
    q = QubitSpace()
    sx = Operator(q, np.array([[0, 1], [1, 0]], dtype=complex))
    sz = Operator(q, np.array([[1, 0], [0, -1]], dtype=complex))
    sp = Operator(q, np.array([[0, 1], [0, 0]], dtype=complex))
    sm = Operator(q, np.array([[0, 0], [1, 0]], dtype=complex))
    proj_g = Operator(q, np.array([[0, 0], [0, 1]], dtype=complex))
    proj_minus = Operator(q, 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex))
    return QubitOperators(sx, sz, sp, sm, proj_g, proj_minus)


# ---------------------------------------------------------------------------
# Tensor products
# ---------------------------------------------------------------------------

def tensor(a: Operator, b: Operator) -> Operator:
    """Kronecker product, left factor first (qubit (x) Fock by convention)."""
    if isinstance(a.space, ProductSpace) or isinstance(b.space, ProductSpace):
        raise SpaceMismatch("tensor factors must be elementary spaces")
    return Operator(ProductSpace(a.space, b.space), np.kron(a.matrix, b.matrix))


def tensor_state(a: StateVector, b: StateVector) -> StateVector:
    if isinstance(a.space, ProductSpace) or isinstance(b.space, ProductSpace):
        raise SpaceMismatch("tensor factors must be elementary spaces")
    return StateVector(ProductSpace(a.space, b.space), np.kron(a.vector, b.vector))


# ---------------------------------------------------------------------------
# Canonical states
# ---------------------------------------------------------------------------

def excited_state() -> StateVector:
    return StateVector(QubitSpace(), np.array([1, 0], dtype=complex))


def ground_state() -> StateVector:
    return StateVector(QubitSpace(), np.array([0, 1], dtype=complex))


def number_state(n: int, space: FockSpace) -> StateVector:
    if not 0 <= n < space.cutoff:
        raise IndexOutOfSpace(f"number state n={n} outside cutoff {space.cutoff}")
    v = np.zeros(space.cutoff, dtype=complex)
    v[n] = 1.0
    return StateVector(space, v)


def coherent_state(alpha: complex, space: FockSpace) -> StateVector:
    """|alpha> = D(alpha)|0>, normalized by construction."""
    d = displacement(alpha, space)
    return StateVector(space, d.matrix[:, 0].copy())


def cat_state(alpha: complex, space: FockSpace) -> StateVector:
    """Even cat state N(|alpha> + |-alpha>), N = 1/sqrt(2 + 2 exp(-2|alpha|^2))."""
    plus = coherent_state(alpha, space)
    minus = coherent_state(-alpha, space)
    norm = 1.0 / sqrt(2.0 + 2.0 * np.exp(-2.0 * abs(alpha) ** 2))
    return StateVector(space, norm * (plus.vector + minus.vector))


def overlap_fidelity(psi: StateVector, phi: StateVector) -> float:
    """|<psi|phi>|^2."""
    _require_same_space(psi.space, phi.space, "states")
    return float(abs(np.vdot(psi.vector, phi.vector)) ** 2)
