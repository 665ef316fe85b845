"""Wavelet Galerkin tools for Wigner-function dynamics in phase space."""

__version__ = "0.1.0"

from .diagnostics import (ClassifyConfig, PatternReport, WignerHierarchy, classify, fock_norm,
                          scale_approximation)
from .galerkin import (AxisSpec, TensorBasis, build_tensor_basis, cutoff_error, gdr_assemble, gdr_evolve,
                       gdr_reconstruct, gdr_solve, multiscale_decompose)
from .moyal import DynamicsConfig, Potential, evolve, moyal_operator, moyal_rhs
from .operators import (CompressedOperator, ConnectionTable, apply_compressed, assemble_derivative_matrix,
                        compress, connection_coefficients)
from .wavelets import (CoefficientTree, DyadicGrid, FilterPair, best_basis, cascade_eval, daubechies_filter,
                       fwt, haar, ifwt, packet_decompose, packet_reconstruct, shannon_entropy)
from .wigner import PhaseSpaceField, PureState, wigner_negativity, wigner_of_packets, wigner_of_state
