"""Stern-Gerlach measurement devices as shallow quantum circuits.

Dense statevector simulation, variational cat-state calibration, and the
sequential / interferometer / delayed-choice experiments on a cross-shaped
register.
"""

__version__ = "0.1.0"

from .ansatz import (ParamSet, attach_readout_rotations, build_reference_cat,
                     build_sg_x, build_sg_z)
from .calibration import CalibrationReport, cat_fidelity, cost, ground_energy, minimize
from .circuit import Circuit, Gate, GateOp
from .experiments import (ExperimentConfig, ExperimentReport,
                          branch_equivalence_summary, decode_collective,
                          parity_of, run_delayed_choice, run_sequential,
                          run_wigner, total_variation_distance)
from .layout import CrossLayout, make_cross_layout, validate_nearest_neighbor
from .state import (BIT_ORDER, ShotHistogram, StateVector, apply_circuit,
                    apply_gate, basis_state, born_probabilities,
                    dense_unitary_oracle, expectation_pauli_chain, fidelity,
                    measure_and_collapse, project_qubit, qubit_state,
                    sample_shots)

__all__ = [
    "__version__",
    "BIT_ORDER",
    "CalibrationReport",
    "Circuit",
    "CrossLayout",
    "ExperimentConfig",
    "ExperimentReport",
    "Gate",
    "GateOp",
    "ParamSet",
    "ShotHistogram",
    "StateVector",
    "apply_circuit",
    "apply_gate",
    "attach_readout_rotations",
    "basis_state",
    "born_probabilities",
    "branch_equivalence_summary",
    "build_reference_cat",
    "build_sg_x",
    "build_sg_z",
    "cat_fidelity",
    "cost",
    "decode_collective",
    "dense_unitary_oracle",
    "expectation_pauli_chain",
    "fidelity",
    "ground_energy",
    "make_cross_layout",
    "measure_and_collapse",
    "minimize",
    "parity_of",
    "project_qubit",
    "qubit_state",
    "run_delayed_choice",
    "run_sequential",
    "run_wigner",
    "sample_shots",
    "total_variation_distance",
    "validate_nearest_neighbor",
]
