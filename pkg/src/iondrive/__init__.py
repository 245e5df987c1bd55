"""Trapped-ion laser-drive simulator.

Dense truncated-Fock-space models of a single laser-driven trapped ion beyond
the weak-coupling sideband regime, the frame transforms connecting them,
Lindblad dephasing evolution, Wigner-function reconstruction in both driving
regimes, and scripted benchmarks with CSV output.
"""

from . import bench, cli, errors, evolution, hilbert, models, tomography
from .errors import (DegenerateParams, GuardBandViolation, IllConditionedFit,
                     IndexOutOfSpace, IonDriveError, MalformedCriteria,
                     NonHermitianInput, OutOfRange, SpaceMismatch,
                     UnsupportedState)
from .evolution import (DephasingModel, FidelitySeries, TimeGrid, coarse_grain,
                        evolve_lindblad, evolve_unitary, fidelity_vs_full)
from .hilbert import (DensityMatrix, FockSpace, Operator, ProductSpace,
                      QubitSpace, StateVector, annihilation, cat_state,
                      coherent_state, creation, displacement, identity,
                      number_state, overlap_fidelity, qubit_ops, tensor,
                      tensor_state)
from .models import (Frame, HamiltonianKind, ModelParams, build_full,
                     build_jcm_r, build_lamb_dicke, build_mc, build_r_transform,
                     build_rsb, build_t_transform, build_tsrwa,
                     build_u_transform, frame_chain, omega_tilde,
                     resonant_omega)
from .tomography import (ProbabilitySeries, QCoefficients, Regime, ScanConfig,
                         WignerSample, analytic_wigner, fit_q, prepare_initial,
                         q_exact, scan, simulate_probability, wigner_point)

__version__ = "0.1.0"
