"""QFI entanglement witnesses for the squeezed Dicke model.

Exact diagonalization of finite molecular ensembles, thermodynamic-limit
polariton formulas, and absorption-spectrum synthesis and inversion.
"""
from .hilbert import ModelParams, build_hamiltonian, embedded_spins
from .qfi import WitnessSpec, entanglement_depth_bound, qfi, qfi_max, witness_threshold
from .spectral import MixedState, eigendecompose, thermal_state

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "MixedState",
    "WitnessSpec",
    "build_hamiltonian",
    "eigendecompose",
    "embedded_spins",
    "entanglement_depth_bound",
    "qfi",
    "qfi_max",
    "thermal_state",
    "witness_threshold",
]
