"""Gate and circuit value types, the 24-element single-qubit Clifford table,
and the line-oriented circuit serialization used by golden tests.

Rotation convention: R_a(theta) = exp(-i * theta * a / 2) for a in {X, Y, Z}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BadTarget

RX, RY, RZ, CZ = "RX", "RY", "RZ", "CZ"
CLIFF, PAULI, EVOLVE = "CLIFF", "PAULI", "EVOLVE"


def rx_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]],
                    dtype=complex)


_P = np.pi


def _build_clifford_table() -> list[np.ndarray]:
    """The 24 single-qubit Clifford elements, row-major as tabulated."""
    rows = [
        [np.eye(2, dtype=complex), rx_matrix(_P / 2), rx_matrix(-_P / 2), rx_matrix(_P)],
        [ry_matrix(_P), rx_matrix(_P) @ ry_matrix(_P),
         rx_matrix(_P / 2) @ ry_matrix(_P), rx_matrix(-_P / 2) @ ry_matrix(_P)],
        [ry_matrix(_P) @ rz_matrix(-_P / 2), rz_matrix(-_P / 2),
         ry_matrix(_P / 2) @ rz_matrix(-_P / 2), ry_matrix(-_P / 2) @ rz_matrix(-_P / 2)],
        [rz_matrix(_P / 2), ry_matrix(_P) @ rz_matrix(_P / 2),
         ry_matrix(-_P / 2) @ rz_matrix(_P / 2), ry_matrix(_P / 2) @ rz_matrix(_P / 2)],
        [rz_matrix(_P / 2) @ ry_matrix(-_P / 2), rz_matrix(-_P / 2) @ ry_matrix(-_P / 2),
         ry_matrix(-_P / 2), rz_matrix(_P) @ ry_matrix(-_P / 2)],
        [rz_matrix(_P / 2) @ ry_matrix(_P / 2), rz_matrix(-_P / 2) @ ry_matrix(_P / 2),
         ry_matrix(_P / 2), rz_matrix(_P) @ ry_matrix(_P / 2)],
    ]
    return [m for row in rows for m in row]


CLIFFORD_1Q = _build_clifford_table()


def _build_inverse_table() -> list[int]:
    inv = []
    for i, m in enumerate(CLIFFORD_1Q):
        for j, c in enumerate(CLIFFORD_1Q):
            prod = c @ m
            # identity up to global phase: equal unimodular diagonal,
            # vanishing off-diagonal
            if (abs(abs(prod[0, 0]) - 1.0) < 1e-9
                    and abs(prod[0, 1]) < 1e-9 and abs(prod[1, 0]) < 1e-9
                    and abs(prod[0, 0] - prod[1, 1]) < 1e-9):
                inv.append(j)
                break
        else:
            raise RuntimeError(f"no inverse found for Clifford {i}")
    return inv


CLIFFORD_INV = _build_inverse_table()


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None      # RX / RY / RZ / EVOLVE (time)
    index: int | None = None        # CLIFF: 0..23
    paulis: str | None = None       # PAULI: one letter in "IXYZ" per qubit
    layer: int = -1                 # Trotter layer tag, -1 when untagged

    def matrix(self) -> np.ndarray:
        if self.kind == RX:
            return rx_matrix(self.angle)
        if self.kind == RY:
            return ry_matrix(self.angle)
        if self.kind == RZ:
            return rz_matrix(self.angle)
        if self.kind == CLIFF:
            return CLIFFORD_1Q[self.index]
        raise ValueError(f"no single-qubit matrix for kind {self.kind}")


@dataclass
class Circuit:
    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, gate: Gate) -> None:
        for q in gate.qubits:
            if q < 0 or q >= self.num_qubits:
                raise BadTarget(f"qubit {q} out of range for L={self.num_qubits}")
        if gate.kind == CZ and gate.qubits[0] == gate.qubits[1]:
            raise BadTarget("CZ targets must be distinct")
        self.gates.append(gate)

    def rx(self, q, theta, layer=-1):
        self.add(Gate(RX, (q,), angle=theta, layer=layer))

    def ry(self, q, theta, layer=-1):
        self.add(Gate(RY, (q,), angle=theta, layer=layer))

    def rz(self, q, theta, layer=-1):
        self.add(Gate(RZ, (q,), angle=theta, layer=layer))

    def cz(self, q0, q1, layer=-1):
        self.add(Gate(CZ, (q0, q1), layer=layer))

    def cliff(self, q, index):
        self.add(Gate(CLIFF, (q,), index=index))

    def cz_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == CZ)

    def gate_census(self) -> dict:
        """Counts per (kind, qubits); continuous angles excluded on purpose."""
        census: dict = {}
        for g in self.gates:
            key = (g.kind, g.qubits)
            census[key] = census.get(key, 0) + 1
        return census

    def serialize(self) -> str:
        lines = []
        for g in self.gates:
            targets = ",".join(str(q) for q in g.qubits)
            if g.kind in (RX, RY, RZ, EVOLVE):
                lines.append(f"GATE {g.kind} {targets} {g.angle:.17g}")
            elif g.kind == CLIFF:
                lines.append(f"GATE {g.kind} {targets} {g.index}")
            elif g.kind == PAULI:
                lines.append(f"GATE {g.kind} {targets} {g.paulis}")
            else:
                lines.append(f"GATE {g.kind} {targets}")
        return "\n".join(lines) + ("\n" if lines else "")

    def inverse(self) -> "Circuit":
        """Gate-by-gate inverse: reversed order, negated angles, inverse
        Clifford indices.  EVOLVE inverts by time reversal."""
        inv = Circuit(self.num_qubits, metadata=dict(self.metadata))
        for g in reversed(self.gates):
            if g.kind in (RX, RY, RZ, EVOLVE):
                inv.add(Gate(g.kind, g.qubits, angle=-g.angle, layer=g.layer))
            elif g.kind == CLIFF:
                inv.add(Gate(CLIFF, g.qubits, index=CLIFFORD_INV[g.index]))
            elif g.kind in (CZ, PAULI):
                inv.add(g)
            else:
                raise ValueError(f"cannot invert gate kind {g.kind!r}")
        return inv

    @staticmethod
    def deserialize(text: str, num_qubits: int) -> "Circuit":
        circ = Circuit(num_qubits)
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] != "GATE":
                raise ValueError(f"bad line: {line!r}")
            kind = parts[1]
            qubits = tuple(int(x) for x in parts[2].split(","))
            if kind in (RX, RY, RZ, EVOLVE):
                circ.add(Gate(kind, qubits, angle=float(parts[3])))
            elif kind == CLIFF:
                circ.add(Gate(kind, qubits, index=int(parts[3])))
            elif kind == PAULI:
                circ.add(Gate(kind, qubits, paulis=parts[3]))
            elif kind == CZ:
                circ.add(Gate(kind, qubits))
            else:
                raise ValueError(f"unknown gate kind {kind!r}")
        return circ
