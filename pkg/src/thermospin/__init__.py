"""Classical laboratory for damped-cosine-series spin thermodynamics.

Builds spin Hamiltonians (transverse-field Ising, XY), reconstructs free
energy / entropy / heat capacity from time-evolution trace moments, estimates
those moments with two hardware-style protocols under synthetic depolarizing
noise, mitigates the noise, and cross-checks everything against exact
diagonalization.
"""

from .errors import ThermospinError
from .model import (HamiltonianSpec, LatticeSpec, PauliTerm, RescaleWindow,
                    SymmetryReport, anticommuting_witness, build_hamiltonian,
                    rescale_window, symmetry_check)
from .exact import (ExactMoments, Spectrum, ThermoCurve, diagonalize,
                    exact_moments, exact_observable_moments,
                    exact_observable_thermal, exact_thermo)
from .expansion import (KernelCoefficients, MomentSet, bootstrap_error_bands,
                        dos_reconstruct, entropy_and_heat_capacity,
                        free_energy, jackson_coefficients,
                        observable_from_composite, observable_thermal, phi,
                        propagate_error_bands)
from .protocol import (EstimatorConfig, RunningStats, SampleRecord,
                       rs_moment_estimate, rs_prepare_circuits,
                       vc_moment_estimate, vc_observable_moment,
                       write_sample_log)
from .mitigate import (MitigatedValue, MitigationPlan,
                       build_error_estimation_circuit, gem, lzne, mad_filter,
                       run_mitigated_estimate, subset_r_eff)
from .config import ExperimentConfig, parse_config

__version__ = "0.1.0"

__all__ = [
    "ThermospinError", "HamiltonianSpec", "LatticeSpec", "PauliTerm",
    "RescaleWindow", "SymmetryReport", "anticommuting_witness",
    "build_hamiltonian", "rescale_window", "symmetry_check", "ExactMoments",
    "Spectrum", "ThermoCurve", "diagonalize", "exact_moments",
    "exact_observable_moments", "exact_observable_thermal", "exact_thermo",
    "KernelCoefficients", "MomentSet", "bootstrap_error_bands",
    "dos_reconstruct", "entropy_and_heat_capacity", "free_energy",
    "jackson_coefficients", "observable_from_composite", "observable_thermal",
    "phi", "propagate_error_bands", "EstimatorConfig", "RunningStats",
    "SampleRecord", "rs_moment_estimate", "rs_prepare_circuits",
    "vc_moment_estimate", "vc_observable_moment", "write_sample_log",
    "MitigatedValue", "MitigationPlan", "build_error_estimation_circuit",
    "gem", "lzne", "mad_filter", "run_mitigated_estimate", "subset_r_eff",
    "ExperimentConfig", "parse_config", "__version__",
]
