"""Dynamic Jordan-Wigner encodings on qubit lattices.

Synthesis and verification of encoding-switch Clifford circuits, fermion
routing, Fermi-Hubbard Trotter steps and the fermionic fast Fourier
transform, with exact F2 and dense-unitary oracles.
"""

from .lattice import (BoustrophedonSpec, CanonicalOrdering, DimHierarchy,
                      LatticeShape, boustrophedon_ordering, d_dim_s_pattern,
                      inversion_pairs, s_pattern, subgrid_partitions,
                      transposed_s_pattern, z_pattern)
from .circuit import (Circuit, DepthModel, Gate, ResourceReport, cnot_count,
                      decompose_to_cnot_basis, depth, resource_report,
                      two_qubit_depth, validate_connectivity)
from .pauli import (MajoranaPair, ParityFlowState, PauliString,
                    PhasePolynomial, conjugate, conjugated_cz_expansion,
                    hopping_string, majorana_pair, phase_polynomial,
                    track_cnots)

__all__ = [
    "BoustrophedonSpec", "CanonicalOrdering", "DimHierarchy", "LatticeShape",
    "boustrophedon_ordering", "d_dim_s_pattern", "inversion_pairs",
    "s_pattern", "subgrid_partitions", "transposed_s_pattern", "z_pattern",
    "Circuit", "DepthModel", "Gate", "ResourceReport", "cnot_count",
    "decompose_to_cnot_basis", "depth", "resource_report", "two_qubit_depth",
    "validate_connectivity",
    "MajoranaPair", "ParityFlowState", "PauliString", "PhasePolynomial",
    "conjugate", "conjugated_cz_expansion", "hopping_string", "majorana_pair",
    "phase_polynomial", "track_cnots",
]

__version__ = "0.1.0"
