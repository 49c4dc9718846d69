"""Synthetic depolarizing noise and amplification schedules.

Two evaluation routes share one channel definition
E(rho) = (1 - p) rho + p Tr_S[rho] (x) I/2^|S|:

* trajectory unfolding on statevectors (memory 2^L): with probability p a
  Pauli drawn uniformly from the full 4^|S| set is inserted; the trajectory
  average equals the channel;
* an exact density-matrix runner for small L, used where tests need
  expectation values free of Monte Carlo error.

Analogue segments pick up a time-proportional channel on all qubits with
p(t) = 1 - exp(-p_t * t).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import BadSchedule, TooLarge
from ..model import HamiltonianSpec
from .engine import StateVector, _eigensystem, apply_gate
from .gates import CZ, EVOLVE, PAULI, Circuit, Gate

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PAULI_LETTERS = "IXYZ"


@dataclass(frozen=True)
class NoiseModel:
    """Isotropic depolarizing probabilities per gate class."""

    p1: float = 0.0   # per single-qubit gate (Rz excluded: treated as free)
    p2: float = 0.0   # per CZ
    p_t: float = 0.0  # per unit analogue time

    def __post_init__(self):
        for p in (self.p1, self.p2, self.p_t):
            if not (0 <= p <= 1):
                raise ValueError("probabilities must lie in [0, 1]")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0 and self.p2 == 0 and self.p_t == 0


def apply_depolarizing(state: StateVector, p: float, qubits: tuple[int, ...],
                       rng: np.random.Generator) -> StateVector:
    """One trajectory draw of the partial-trace depolarizing channel."""
    if p <= 0:
        return state
    if rng.random() < p:
        for q in qubits:
            letter = _PAULI_LETTERS[rng.integers(4)]
            if letter != "I":
                apply_gate(state, Gate(PAULI, (q,), paulis=letter))
    return state


def run_noisy_trajectory(state: StateVector, circuit: Circuit,
                         noise: NoiseModel, rng: np.random.Generator,
                         hamiltonian: HamiltonianSpec | None = None) -> StateVector:
    """Single stochastic unfolding of circuit + noise on a statevector."""
    for g in circuit.gates:
        apply_gate(state, g, hamiltonian)
        if g.kind == CZ and noise.p2 > 0:
            apply_depolarizing(state, noise.p2, g.qubits, rng)
        elif g.kind in ("RX", "RY", "CLIFF") and noise.p1 > 0:
            apply_depolarizing(state, noise.p1, g.qubits, rng)
        elif g.kind == EVOLVE and noise.p_t > 0:
            p = 1.0 - np.exp(-noise.p_t * abs(g.angle))
            apply_depolarizing(state, p, tuple(range(state.num_qubits)), rng)
    return state


class DensityRunner:
    """Exact channel evaluation on a dense density matrix (L <= 6)."""

    def __init__(self, num_qubits: int):
        if num_qubits > 6:
            raise TooLarge("density-matrix route limited to L <= 6")
        self.num_qubits = num_qubits
        dim = 2**num_qubits
        self.rho = np.zeros((dim, dim), dtype=complex)
        self.rho[0, 0] = 1.0
        self._op_cache: dict = {}

    def _expand(self, m: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
        key = (m.tobytes(), qubits)
        if key not in self._op_cache:
            ops = [np.eye(2, dtype=complex)] * self.num_qubits
            ops[qubits[0]] = m
            full = np.array([[1.0]], dtype=complex)
            for o in ops:
                full = np.kron(full, o)
            self._op_cache[key] = full
        return self._op_cache[key]

    def apply_unitary_gate(self, gate: Gate,
                           hamiltonian: HamiltonianSpec | None = None) -> None:
        u = self._gate_unitary(gate, hamiltonian)
        self.rho = u @ self.rho @ u.conj().T

    def _gate_unitary(self, gate: Gate,
                      hamiltonian: HamiltonianSpec | None) -> np.ndarray:
        if gate.kind == CZ:
            dim = 2**self.num_qubits
            diag = np.ones(dim)
            q0, q1 = gate.qubits
            b0 = 1 << (self.num_qubits - 1 - q0)
            b1 = 1 << (self.num_qubits - 1 - q1)
            idx = np.arange(dim)
            diag[(idx & b0 > 0) & (idx & b1 > 0)] = -1.0
            return np.diag(diag).astype(complex)
        if gate.kind == PAULI:
            full = np.eye(2**self.num_qubits, dtype=complex)
            for q, p in zip(gate.qubits, gate.paulis):
                if p != "I":
                    full = full @ self._expand(_PAULI_1Q[p], (q,))
            return full
        if gate.kind == EVOLVE:
            ev, evec = _eigensystem(hamiltonian)
            return (evec * np.exp(-1j * ev * gate.angle)) @ evec.conj().T
        return self._expand(gate.matrix(), gate.qubits)

    def depolarize(self, p: float, qubits: tuple[int, ...]) -> None:
        """rho -> (1-p) rho + p * (uniform Pauli average on the given qubits)."""
        if p <= 0:
            return
        mixed = np.zeros_like(self.rho)
        for combo in itertools.product(_PAULI_LETTERS, repeat=len(qubits)):
            u = np.eye(2**self.num_qubits, dtype=complex)
            for q, letter in zip(qubits, combo):
                if letter != "I":
                    u = u @ self._expand(_PAULI_1Q[letter], (q,))
            mixed += u @ self.rho @ u.conj().T
        mixed /= 4 ** len(qubits)
        self.rho = (1 - p) * self.rho + p * mixed

    def run(self, circuit: Circuit, noise: NoiseModel,
            hamiltonian: HamiltonianSpec | None = None) -> None:
        for g in circuit.gates:
            self.apply_unitary_gate(g, hamiltonian)
            if g.kind == CZ and noise.p2 > 0:
                self.depolarize(noise.p2, g.qubits)
            elif g.kind in ("RX", "RY", "CLIFF") and noise.p1 > 0:
                self.depolarize(noise.p1, g.qubits)
            elif g.kind == EVOLVE and noise.p_t > 0:
                p = 1.0 - np.exp(-noise.p_t * abs(g.angle))
                self.depolarize(p, tuple(range(self.num_qubits)))

    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.rho))


@dataclass(frozen=True)
class FullRepetition:
    """Replace every CZ by an odd number r of CZs."""

    r: int

    def __post_init__(self):
        if self.r < 1 or self.r % 2 == 0:
            raise BadSchedule("repetition factor must be a positive odd integer")


@dataclass(frozen=True)
class SubsetTriple:
    """Triple the CZs at the given positions (indices among CZ occurrences)."""

    positions: tuple[int, ...]


@dataclass(frozen=True)
class AnalogueFold:
    """Split an analogue segment as t -> (t1, P, t2, P) with net t1 - t2
    when the Pauli layer anticommutes with the Hamiltonian (t1 + t2 when it
    commutes)."""

    t1: float
    t2: float
    paulis: str


def amplify_noise(circuit: Circuit, schedule,
                  hamiltonian: HamiltonianSpec | None = None) -> Circuit:
    """Noise amplification; the noiseless compiled unitary is unchanged.

    The effective factor r_eff is recorded in the result metadata.
    """
    out = Circuit(circuit.num_qubits, metadata=dict(circuit.metadata))
    if isinstance(schedule, FullRepetition):
        for g in circuit.gates:
            reps = schedule.r if g.kind == CZ else 1
            for _ in range(reps):
                out.add(g)
        out.metadata["r_eff"] = float(schedule.r)
        return out
    if isinstance(schedule, SubsetTriple):
        n_cz = circuit.cz_count()
        if n_cz == 0:
            raise BadSchedule("no CZ gates to amplify")
        bad = [p for p in schedule.positions if p < 0 or p >= n_cz]
        if bad or len(set(schedule.positions)) != len(schedule.positions):
            raise BadSchedule(f"invalid CZ positions {schedule.positions}")
        cz_seen = 0
        for g in circuit.gates:
            if g.kind == CZ:
                reps = 3 if cz_seen in schedule.positions else 1
                cz_seen += 1
            else:
                reps = 1
            for _ in range(reps):
                out.add(g)
        k = len(schedule.positions)
        out.metadata["r_eff"] = (n_cz + 2 * k) / n_cz
        return out
    if isinstance(schedule, AnalogueFold):
        if hamiltonian is None:
            raise BadSchedule("analogue folding requires the Hamiltonian")
        sign = _pauli_layer_commutation(hamiltonian, schedule.paulis)
        if sign is None:
            raise BadSchedule("Pauli layer neither commutes nor anticommutes")
        evolve_gates = [g for g in circuit.gates if g.kind == EVOLVE]
        if len(evolve_gates) != 1:
            raise BadSchedule("analogue folding expects exactly one segment")
        t = evolve_gates[0].angle
        net = schedule.t1 - schedule.t2 if sign < 0 else schedule.t1 + schedule.t2
        if abs(net - t) > 1e-12:
            raise BadSchedule(
                f"fold ({schedule.t1}, {schedule.t2}) nets {net}, segment is {t}")
        qubits = tuple(range(circuit.num_qubits))
        for g in circuit.gates:
            if g.kind == EVOLVE:
                out.add(Gate(EVOLVE, g.qubits, angle=schedule.t1))
                out.add(Gate(PAULI, qubits, paulis=schedule.paulis))
                out.add(Gate(EVOLVE, g.qubits, angle=schedule.t2))
                out.add(Gate(PAULI, qubits, paulis=schedule.paulis))
            else:
                out.add(g)
        out.metadata["r_eff"] = (schedule.t1 + schedule.t2) / t if t else 1.0
        return out
    raise BadSchedule(f"unknown schedule {schedule!r}")


def _pauli_layer_commutation(h: HamiltonianSpec, paulis: str) -> int | None:
    """+1 / -1 when the Pauli layer (anti)commutes with H, else None."""
    full = np.array([[1.0]], dtype=complex)
    for p in paulis:
        full = np.kron(full, _PAULI_1Q[p])
    hm = h.dense()
    if np.max(np.abs(full @ hm - hm @ full)) <= 1e-10:
        return 1
    if np.max(np.abs(full @ hm + hm @ full)) <= 1e-10:
        return -1
    return None
