"""Hamiltonians and frame transforms for a laser-driven trapped ion.

Five models of the ion-laser interaction at increasing levels of
approximation, plus the unitary frame transforms connecting them:

* ``build_full``       -- exact coupling through the displacement operator
* ``build_lamb_dicke`` -- first order in the Lamb-Dicke parameter eta
* ``build_rsb``        -- first red sideband (weak drive, delta ~ nu)
* ``build_jcm_r``      -- JCM-type model in the R-rotated frame (resonant strong drive)
* ``build_mc``         -- JCM-type model in the displaced T-frame
* ``build_tsrwa``      -- diagonalized JCM-type model in the UT-frame, valid off resonance

All frequencies are in units of the trap frequency nu (nu = 1 by default).
Each Hamiltonian kind carries the frame its matrix is expressed in, so that
downstream fidelity code cannot silently compare states across frames.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import sqrt

import numpy as np

from . import hilbert as hb
from .errors import DegenerateParams, OutOfRange
from .hilbert import FockSpace, Operator, ProductSpace, QubitSpace

__all__ = [
    "ModelParams",
    "Frame",
    "HamiltonianKind",
    "omega_tilde",
    "resonant_omega",
    "build_full",
    "build_lamb_dicke",
    "build_rsb",
    "build_jcm_r",
    "build_mc",
    "build_tsrwa",
    "build_r_transform",
    "build_t_transform",
    "build_u_transform",
    "t_frame_hamiltonian",
    "ut_frame_hamiltonian",
    "tsrwa_dropped_terms",
    "frame_chain",
    "build_hamiltonian",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical parameter set.

    delta and omega are the laser detuning and Rabi frequency in units of nu;
    eta is the Lamb-Dicke parameter; cutoff is the Fock truncation.
    """
    delta: float
    omega: float
    eta: float = 0.05
    cutoff: int = 50
    nu: float = 1.0

    def __post_init__(self):
        if self.nu <= 0:
            raise ValueError("nu must be positive")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if self.omega < 0:
            raise ValueError("omega must be nonnegative")
        if self.cutoff < 2:
            raise ValueError("cutoff must be >= 2")

    @property
    def fock(self) -> FockSpace:
        return FockSpace(self.cutoff)

    @property
    def space(self) -> ProductSpace:
        return ProductSpace(QubitSpace(), self.fock)


class Frame(enum.Enum):
    """Frame an operator or state is expressed in."""
    LAB = "lab"
    JCM = "jcm"    # rotated by R
    T = "t"        # displaced by T(beta)
    UT = "ut"      # displaced by T(beta), then diagonalized by U


class HamiltonianKind(enum.Enum):
    FULL = "full"
    LAMB_DICKE = "lamb_dicke"
    RSB = "rsb"
    JCM_R = "jcm_r"
    MC = "mc"
    TSRWA = "tsrwa"

    @property
    def frame(self) -> Frame:
        return _KIND_FRAMES[self]


_KIND_FRAMES = {
    HamiltonianKind.FULL: Frame.LAB,
    HamiltonianKind.LAMB_DICKE: Frame.LAB,
    HamiltonianKind.RSB: Frame.LAB,
    HamiltonianKind.JCM_R: Frame.JCM,
    HamiltonianKind.MC: Frame.T,
    HamiltonianKind.TSRWA: Frame.UT,
}


def omega_tilde(omega: float, delta: float) -> float:
    """Dressed qubit splitting sqrt(omega^2 + delta^2)."""
    return sqrt(omega * omega + delta * delta)


def resonant_omega(delta: float, nu: float = 1.0) -> float:
    """Rabi frequency satisfying the dressed resonance condition, sqrt(nu^2 - delta^2)."""
    if abs(delta) >= nu:
        raise OutOfRange(f"|delta| = {abs(delta)} must be < nu = {nu}")
    return sqrt(nu * nu - delta * delta)


# ---------------------------------------------------------------------------
# Shared building blocks
# ---------------------------------------------------------------------------

def _parts(p: ModelParams):
    """Common lifted operators on the composite space."""
    q = hb.qubit_ops()
    fock = p.fock
    a = hb.annihilation(fock)
    iq = hb.identity(QubitSpace())
    ifk = hb.identity(fock)
    free = p.nu * hb.tensor(iq, hb.number_operator(fock))
    return q, fock, a, iq, ifk, free


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def build_full(p: ModelParams) -> Operator:
    """Lab frame: nu a^dag a + (delta/2) sigma_z + (omega/2)(sigma_+ D(i eta) + h.c.)."""
    q, fock, a, iq, ifk, free = _parts(p)
    d = hb.displacement(1j * p.eta, fock)
    h = (free
         + (p.delta / 2.0) * hb.tensor(q.sz, ifk)
         + (p.omega / 2.0) * (hb.tensor(q.sp, d) + hb.tensor(q.sm, d.dagger())))
    return h


def build_lamb_dicke(p: ModelParams) -> Operator:
    """Lab frame, coupling expanded to first order in eta."""
    q, fock, a, iq, ifk, free = _parts(p)
    x = a + a.dagger()
    h = (free
         + (p.delta / 2.0) * hb.tensor(q.sz, ifk)
         + (p.omega / 2.0) * hb.tensor(q.sx, ifk)
         + (1j * p.eta * p.omega / 2.0) * hb.tensor(q.sp - q.sm, x))
    return h


def build_rsb(p: ModelParams) -> Operator:
    """First red sideband: nu a^dag a + (delta/2) sigma_z + (i eta omega/2)(s+ a - s- a^dag)."""
    q, fock, a, iq, ifk, free = _parts(p)
    h = (free
         + (p.delta / 2.0) * hb.tensor(q.sz, ifk)
         + (1j * p.eta * p.omega / 2.0)
         * (hb.tensor(q.sp, a) - hb.tensor(q.sm, a.dagger())))
    return h


def build_jcm_r(p: ModelParams) -> Operator:
    """JCM-type model in the R-frame; intended validity omega = nu, delta = 0.

    Same matrix as the red sideband with omega in place of delta in the
    sigma_z coefficient.
    """
    q, fock, a, iq, ifk, free = _parts(p)
    h = (free
         + (p.omega / 2.0) * hb.tensor(q.sz, ifk)
         + (1j * p.eta * p.omega / 2.0)
         * (hb.tensor(q.sp, a) - hb.tensor(q.sm, a.dagger())))
    return h


def build_mc(p: ModelParams) -> Operator:
    """T-frame RWA model; coupling constant eta*nu (not eta*omega)."""
    q, fock, a, iq, ifk, free = _parts(p)
    h = (free
         + (p.omega / 2.0) * hb.tensor(q.sz, ifk)
         + (1j * p.eta * p.nu / 2.0)
         * (hb.tensor(q.sp, a) - hb.tensor(q.sm, a.dagger())))
    return h


def build_tsrwa(p: ModelParams) -> Operator:
    """UT-frame RWA model with dressed splitting and coupling omega*eta*nu/(2 omega_tilde)."""
    wt = omega_tilde(p.omega, p.delta)
    if wt == 0.0:
        raise DegenerateParams("omega = delta = 0 leaves the dressed splitting undefined")
    q, fock, a, iq, ifk, free = _parts(p)
    h = (free
         + (wt / 2.0) * hb.tensor(q.sz, ifk)
         + (1j * p.omega * p.eta * p.nu / (2.0 * wt))
         * (hb.tensor(q.sp, a) - hb.tensor(q.sm, a.dagger())))
    return h


# ---------------------------------------------------------------------------
# Frame transforms
# ---------------------------------------------------------------------------

def build_r_transform(p: ModelParams) -> Operator:
    """Qubit rotation (1/sqrt2)[[1,1],[-1,1]], lifted by the Fock identity."""
    r = Operator(QubitSpace(),
                 np.array([[1, 1], [-1, 1]], dtype=complex) / sqrt(2.0))
    return hb.tensor(r, hb.identity(p.fock))


def build_t_transform(p: ModelParams) -> Operator:
    """Entangling transform with qubit-conditioned displacements D(+-beta), beta = i eta/2."""
    beta = 0.5j * p.eta
    d = hb.displacement(beta, p.fock)
    dd = d.dagger()
    n = p.cutoff
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[:n, :n] = dd.matrix
    m[:n, n:] = d.matrix
    m[n:, :n] = -dd.matrix
    m[n:, n:] = d.matrix
    return Operator(p.space, m / sqrt(2.0))


def build_u_transform(p: ModelParams) -> Operator:
    """Qubit rotation diagonalizing (omega/2) sigma_z - (delta/2) sigma_x to (wt/2) sigma_z.

    Entries sqrt(wt +- omega)/sqrt(2 wt); the off-diagonal carries sign(delta)
    so the diagonalization holds for either sign of the detuning.
    """
    wt = omega_tilde(p.omega, p.delta)
    if wt == 0.0:
        raise DegenerateParams("omega = delta = 0 leaves U undefined")
    u = sqrt((wt + p.omega) / (2.0 * wt))
    v = sqrt((wt - p.omega) / (2.0 * wt))
    if p.delta < 0:
        v = -v
    uq = Operator(QubitSpace(), np.array([[u, -v], [v, u]], dtype=complex))
    return hb.tensor(uq, hb.identity(p.fock))


# ---------------------------------------------------------------------------
# Exact transformed Hamiltonians and the RWA remainder
# ---------------------------------------------------------------------------

def t_frame_hamiltonian(p: ModelParams) -> Operator:
    """Closed form of T H_full T^dag.

    nu a^dag a + nu eta^2/4 + (omega/2) sigma_z - (delta/2) sigma_x
    + (i eta nu / 2) sigma_x (a - a^dag).

    The c-number nu eta^2/4 is generated by the displaced-frame transformation;
    it only contributes a global phase to the dynamics but is kept so the
    matrix identity with the conjugated full Hamiltonian is exact.
    """
    q, fock, a, iq, ifk, free = _parts(p)
    shift = p.nu * p.eta ** 2 / 4.0
    h = (free
         + shift * hb.tensor(iq, ifk)
         + (p.omega / 2.0) * hb.tensor(q.sz, ifk)
         - (p.delta / 2.0) * hb.tensor(q.sx, ifk)
         + (1j * p.eta * p.nu / 2.0) * hb.tensor(q.sx, a - a.dagger()))
    return h


def ut_frame_hamiltonian(p: ModelParams) -> Operator:
    """Closed form of U T H_full T^dag U^dag (same c-number kept as above)."""
    wt = omega_tilde(p.omega, p.delta)
    if wt == 0.0:
        raise DegenerateParams("omega = delta = 0 leaves the UT frame undefined")
    q, fock, a, iq, ifk, free = _parts(p)
    shift = p.nu * p.eta ** 2 / 4.0
    xdiff = a - a.dagger()
    h = (free
         + shift * hb.tensor(iq, ifk)
         + (wt / 2.0) * hb.tensor(q.sz, ifk)
         - (1j * p.delta * p.eta * p.nu / (2.0 * wt)) * hb.tensor(q.sz, xdiff)
         + (1j * p.omega * p.eta * p.nu / (2.0 * wt)) * hb.tensor(q.sx, xdiff))
    return h


def tsrwa_dropped_terms(p: ModelParams) -> Operator:
    """Terms discarded by the RWA taking the UT-frame Hamiltonian to the TSRWA model.

    Sum of the sigma_z (a - a^dag) term (with the sign it carries in the
    UT-frame Hamiltonian) and the counter-rotating sigma_- a - sigma_+ a^dag term.
    """
    wt = omega_tilde(p.omega, p.delta)
    if wt == 0.0:
        raise DegenerateParams("omega = delta = 0 leaves the UT frame undefined")
    q, fock, a, iq, ifk, _ = _parts(p)
    xdiff = a - a.dagger()
    term_z = -(1j * p.delta * p.eta * p.nu / (2.0 * wt)) * hb.tensor(q.sz, xdiff)
    term_cr = (1j * p.omega * p.eta * p.nu / (2.0 * wt)) * (
        hb.tensor(q.sm, a) - hb.tensor(q.sp, a.dagger()))
    return term_z + term_cr


# ---------------------------------------------------------------------------
# Dispatch helpers
# ---------------------------------------------------------------------------

_BUILDERS = {
    HamiltonianKind.FULL: build_full,
    HamiltonianKind.LAMB_DICKE: build_lamb_dicke,
    HamiltonianKind.RSB: build_rsb,
    HamiltonianKind.JCM_R: build_jcm_r,
    HamiltonianKind.MC: build_mc,
    HamiltonianKind.TSRWA: build_tsrwa,
}


def build_hamiltonian(kind: HamiltonianKind, p: ModelParams) -> Operator:
    return _BUILDERS[kind](p)


def frame_chain(kind: HamiltonianKind, p: ModelParams) -> Operator:
    """Unitary G mapping Lab-frame states into the frame the kind lives in."""
    frame = kind.frame
    if frame is Frame.LAB:
        return hb.identity(p.space)
    if frame is Frame.JCM:
        return build_r_transform(p)
    if frame is Frame.T:
        return build_t_transform(p)
    if frame is Frame.UT:
        return build_u_transform(p) @ build_t_transform(p)
    raise ValueError(f"unknown frame {frame}")
