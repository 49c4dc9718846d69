from .backend import BACKEND
from .engine import (
    StateVector,
    analogue_evolve,
    apply_gate,
    bit_counts,
    circuit_unitary,
    exhaustive_distribution,
    measure_samples,
    run_circuit,
    trotter_circuit,
)
from .gates import CLIFFORD_1Q, Circuit, Gate
from .noise import (
    AnalogueFold,
    DensityRunner,
    FullRepetition,
    NoiseModel,
    SubsetTriple,
    amplify_noise,
    apply_depolarizing,
    run_noisy_trajectory,
)

__all__ = [
    "BACKEND",
    "StateVector",
    "analogue_evolve",
    "apply_gate",
    "bit_counts",
    "circuit_unitary",
    "exhaustive_distribution",
    "measure_samples",
    "run_circuit",
    "trotter_circuit",
    "CLIFFORD_1Q",
    "Circuit",
    "Gate",
    "AnalogueFold",
    "DensityRunner",
    "FullRepetition",
    "NoiseModel",
    "SubsetTriple",
    "amplify_noise",
    "apply_depolarizing",
    "run_noisy_trajectory",
]
