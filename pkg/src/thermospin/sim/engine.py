"""Statevector engine: gate application, Trotter compilation, analogue
propagation, and computational-basis sampling.

The Trotter compiler emits the second-order splitting of exp(-i n pi H~) for
the Ising model into the native set {Rz(theta), Ry(+-pi/2), CZ}: half X-layer,
alternating full ZZ / X layers, closing ZZ layer and half X-layer.  ZZ
rotations compile as CNOT Rz CNOT with CNOT = Ry(pi/2) CZ Ry(-pi/2) on the
target.  The global phase exp(i n pi E_min / W) is dropped; the reference-state
path reinstates it as an explicit pivot-qubit Z rotation (see protocol).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..errors import TooLarge, UnsupportedModel
from ..model import DENSE_LIMIT, HamiltonianSpec, RescaleWindow
from . import backend
from .gates import CLIFF, CZ, EVOLVE, PAULI, RX, RY, RZ, Circuit, Gate

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class StateVector:
    """2^L complex amplitudes; qubit 0 is the most significant index bit."""

    def __init__(self, num_qubits: int, amplitudes: np.ndarray | None = None):
        self.num_qubits = num_qubits
        if amplitudes is None:
            self.amplitudes = np.zeros(2**num_qubits, dtype=complex)
            self.amplitudes[0] = 1.0
        else:
            self.amplitudes = np.asarray(amplitudes, dtype=complex).reshape(-1)
            if len(self.amplitudes) != 2**num_qubits:
                raise ValueError("amplitude length mismatch")

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def apply_gate(state: StateVector, gate: Gate,
               hamiltonian: HamiltonianSpec | None = None) -> StateVector:
    """In-place unitary action; returns the same state for chaining."""
    L = state.num_qubits
    a = state.amplitudes
    if gate.kind == RZ:
        backend.apply_rz(a, L, gate.qubits[0], gate.angle)
    elif gate.kind in (RX, RY, CLIFF):
        backend.apply_1q(a, L, gate.qubits[0], gate.matrix())
    elif gate.kind == CZ:
        backend.apply_cz(a, L, gate.qubits[0], gate.qubits[1])
    elif gate.kind == PAULI:
        for q, p in zip(gate.qubits, gate.paulis):
            if p != "I":
                backend.apply_1q(a, L, q, _PAULI_1Q[p])
    elif gate.kind == EVOLVE:
        if hamiltonian is None:
            raise ValueError("EVOLVE gate requires the Hamiltonian")
        analogue_evolve(state, hamiltonian, gate.angle)
    else:
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    return state


def run_circuit(state: StateVector, circuit: Circuit,
                hamiltonian: HamiltonianSpec | None = None) -> StateVector:
    for g in circuit.gates:
        apply_gate(state, g, hamiltonian)
    return state


def circuit_unitary(circuit: Circuit,
                    hamiltonian: HamiltonianSpec | None = None) -> np.ndarray:
    """Dense matrix of the circuit (columns = action on basis states)."""
    L = circuit.num_qubits
    if L > 10:
        raise TooLarge("dense circuit unitary limited to L <= 10")
    dim = 2**L
    u = np.empty((dim, dim), dtype=complex)
    for col in range(dim):
        amps = np.zeros(dim, dtype=complex)
        amps[col] = 1.0
        sv = StateVector(L, amps)
        run_circuit(sv, circuit, hamiltonian)
        u[:, col] = sv.amplitudes
    return u


def trotter_circuit(h: HamiltonianSpec, window: RescaleWindow, n: int,
                    M: int = 1) -> Circuit:
    """Second-order Trotter circuit for exp(-i n pi H~) of the Ising model.

    Layers are tagged through Gate.layer: 0..2M for the alternating
    X-half / ZZ / X / ... / ZZ / X-half structure.  n = 0 gives the empty
    circuit.
    """
    if h.model != "tfim":
        raise UnsupportedModel("the digital Trotter path supports tfim only")
    if M < 1 or n < 0:
        raise ValueError("require n >= 0 and M >= 1")
    circ = Circuit(h.num_qubits, metadata={"trotter_M": M, "trotter_n": n,
                                           "num_layers": 2 * M + 1})
    if n == 0:
        return circ
    tau = n * np.pi / (M * window.width)
    theta_x = -h.g * tau
    theta_z = -h.J * tau
    bonds = h.lattice.bonds()
    layer = 0

    def x_layer(scale):
        nonlocal layer
        for q in range(h.num_qubits):
            # Rx(theta) = Ry(pi/2) Rz(theta) Ry(-pi/2)
            circ.ry(q, -np.pi / 2, layer=layer)
            circ.rz(q, scale * theta_x, layer=layer)
            circ.ry(q, np.pi / 2, layer=layer)
        layer += 1

    def zz_layer():
        nonlocal layer
        for j, k in bonds:
            # Rzz(2 theta_z) = CNOT(j;k) Rz_k(2 theta_z) CNOT(j;k)
            circ.ry(k, -np.pi / 2, layer=layer)
            circ.cz(j, k, layer=layer)
            circ.ry(k, np.pi / 2, layer=layer)
            circ.rz(k, 2 * theta_z, layer=layer)
            circ.ry(k, -np.pi / 2, layer=layer)
            circ.cz(j, k, layer=layer)
            circ.ry(k, np.pi / 2, layer=layer)
        layer += 1

    x_layer(1.0)
    for _ in range(M - 1):
        zz_layer()
        x_layer(2.0)
    zz_layer()
    x_layer(1.0)
    return circ


@lru_cache(maxsize=16)
def _eigensystem(h: HamiltonianSpec):
    ev, evec = np.linalg.eigh(h.dense())
    return ev, evec


def analogue_evolve(state: StateVector, h: HamiltonianSpec,
                    t: float) -> StateVector:
    """Exact exp(-i H t) via a cached eigendecomposition."""
    if h.num_qubits > DENSE_LIMIT:
        raise TooLarge(f"L={h.num_qubits} exceeds dense limit {DENSE_LIMIT}")
    ev, evec = _eigensystem(h)
    coeff = evec.conj().T @ state.amplitudes
    coeff *= np.exp(-1j * ev * t)
    state.amplitudes[:] = evec @ coeff
    return state


def exhaustive_distribution(state: StateVector) -> np.ndarray:
    """Full 2^L probability table (index bit order matches bitstrings)."""
    return state.probabilities()


def measure_samples(state: StateVector, shots: int, rng) -> np.ndarray:
    """Computational-basis samples as an array of integers in [0, 2^L)."""
    if shots < 1:
        raise ValueError("shots >= 1 required")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    p = state.probabilities()
    p = p / p.sum()
    return rng.choice(len(p), size=shots, p=p)


def bit_counts(indices: np.ndarray, num_qubits: int) -> np.ndarray:
    """Number of set bits per sampled basis index."""
    out = np.zeros(len(indices), dtype=np.int64)
    v = np.asarray(indices).copy()
    for _ in range(num_qubits):
        out += v & 1
        v >>= 1
    return out
