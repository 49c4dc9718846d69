"""Spin Hamiltonians on 1D rings and 2D open grids.

Two model families are supported: the transverse-field Ising model
H = -g * sum_j X_j - J * sum_<jk> Z_j Z_k, and the XY model
H = J * sum_<jk> (X_j X_k + Y_j Y_k).  Hamiltonians are kept as weighted
Pauli-term lists; dense matrices are built on demand for desk-scale checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidLattice, MissingField, NonBipartite, TooLarge

DENSE_LIMIT = 14  # largest qubit count for dense 2^L x 2^L work

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class LatticeSpec:
    """Ring with periodic boundary or open rectangular grid."""

    kind: str  # "ring1d" | "grid2d"
    length: int = 0
    rows: int = 0
    cols: int = 0

    def __post_init__(self):
        if self.kind == "ring1d":
            if self.length < 2:
                raise InvalidLattice("ring1d requires length >= 2")
        elif self.kind == "grid2d":
            if self.rows < 1 or self.cols < 1 or self.rows * self.cols < 2:
                raise InvalidLattice("grid2d requires rows, cols >= 1 and rows*cols >= 2")
        else:
            raise InvalidLattice(f"unknown lattice kind {self.kind!r}")

    @property
    def num_sites(self) -> int:
        return self.length if self.kind == "ring1d" else self.rows * self.cols

    def bonds(self) -> list[tuple[int, int]]:
        """Nearest-neighbor pairs, each exactly once, sorted by (min, max)."""
        pairs = set()
        if self.kind == "ring1d":
            for j in range(self.length):
                k = (j + 1) % self.length
                if j != k:
                    pairs.add((min(j, k), max(j, k)))
        else:
            for r in range(self.rows):
                for c in range(self.cols):
                    j = r * self.cols + c
                    if c + 1 < self.cols:
                        pairs.add((j, j + 1))
                    if r + 1 < self.rows:
                        pairs.add((j, j + self.cols))
        return sorted(pairs)

    def two_coloring(self) -> tuple[list[int], list[int]]:
        """Proper two-coloring (A, B); raises NonBipartite on odd rings."""
        if self.kind == "ring1d":
            if self.length % 2:
                raise NonBipartite(f"odd ring of length {self.length} has no two-coloring")
            color = [j % 2 for j in range(self.length)]
        else:
            color = [
                (r + c) % 2 for r in range(self.rows) for c in range(self.cols)
            ]
        a = [j for j, c in enumerate(color) if c == 0]
        b = [j for j, c in enumerate(color) if c == 1]
        return a, b


@dataclass(frozen=True)
class PauliTerm:
    """coefficient * product of single-site Paulis."""

    coefficient: float
    sites: tuple[tuple[int, str], ...]  # ((qubit, axis), ...)

    def __post_init__(self):
        if not np.isfinite(self.coefficient) or self.coefficient == 0:
            raise ValueError("coefficient must be finite and nonzero")
        idx = [q for q, _ in self.sites]
        if len(idx) != len(set(idx)):
            raise ValueError("site indices must be distinct within a term")
        for q, ax in self.sites:
            if q < 0 or ax not in ("X", "Y", "Z"):
                raise ValueError(f"bad site ({q}, {ax})")

    def matrix(self, num_qubits: int) -> np.ndarray:
        ops = ["I"] * num_qubits
        for q, ax in self.sites:
            if q >= num_qubits:
                raise ValueError("site index out of range")
            ops[q] = ax
        m = np.array([[1.0]], dtype=complex)
        for o in ops:
            m = np.kron(m, _PAULI[o])
        return self.coefficient * m

    def label(self) -> str:
        return " ".join(f"{ax}{q}" for q, ax in self.sites) or "I"


@dataclass(frozen=True)
class HamiltonianSpec:
    lattice: LatticeSpec
    model: str  # "tfim" | "xy"
    J: float
    g: float | None = None
    terms: tuple[PauliTerm, ...] = field(default=(), compare=False)

    @property
    def num_qubits(self) -> int:
        return self.lattice.num_sites

    def dense(self) -> np.ndarray:
        if self.num_qubits > DENSE_LIMIT:
            raise TooLarge(f"L={self.num_qubits} exceeds dense limit {DENSE_LIMIT}")
        dim = 2 ** self.num_qubits
        h = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            h += t.matrix(self.num_qubits)
        return h

    def to_json(self) -> str:
        """Canonical JSON with fixed key order; byte-identical for equal specs."""
        lat = {"kind": self.lattice.kind}
        if self.lattice.kind == "ring1d":
            lat["length"] = self.lattice.length
        else:
            lat["rows"] = self.lattice.rows
            lat["cols"] = self.lattice.cols
        doc = {
            "lattice": lat,
            "model": self.model,
            "g": self.g,
            "J": self.J,
            "terms": [
                {"coefficient": t.coefficient, "sites": [[q, ax] for q, ax in t.sites]}
                for t in self.terms
            ],
        }
        return json.dumps(doc, sort_keys=False, separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> "HamiltonianSpec":
        doc = json.loads(text)
        lat = doc["lattice"]
        lattice = LatticeSpec(
            kind=lat["kind"],
            length=lat.get("length", 0),
            rows=lat.get("rows", 0),
            cols=lat.get("cols", 0),
        )
        return build_hamiltonian(lattice, doc["model"], g=doc["g"], J=doc["J"])


@dataclass(frozen=True)
class RescaleWindow:
    """Affine map E -> (E - e_min) / width taking the spectrum into [0, 1]."""

    e_min: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")

    def rescale(self, energies):
        return (np.asarray(energies) - self.e_min) / self.width


@dataclass(frozen=True)
class SymmetryReport:
    has_u1: bool
    has_spinflip: bool
    has_anticommuting: bool


def build_hamiltonian(lattice: LatticeSpec, model: str, g: float | None = None,
                      J: float = 1.0) -> HamiltonianSpec:
    """Expand (lattice, model, g, J) into a deterministic Pauli-term list."""
    if model == "tfim":
        if g is None:
            raise MissingField("tfim requires the transverse field g")
        terms = [PauliTerm(-g, ((j, "X"),)) for j in range(lattice.num_sites)]
        terms += [PauliTerm(-J, ((j, "Z"), (k, "Z"))) for j, k in lattice.bonds()]
    elif model == "xy":
        terms = []
        for j, k in lattice.bonds():
            terms.append(PauliTerm(J, ((j, "X"), (k, "X"))))
            terms.append(PauliTerm(J, ((j, "Y"), (k, "Y"))))
        g = None
    else:
        raise InvalidLattice(f"unknown model {model!r}")
    return HamiltonianSpec(lattice=lattice, model=model, J=J, g=g, terms=tuple(terms))


def anticommuting_witness(h: HamiltonianSpec) -> PauliTerm:
    """Pauli unitary tau with {tau, H} = 0: Z on sublattice A, Y on B."""
    if h.model != "tfim":
        raise NonBipartite("witness construction applies to the tfim model")
    a, b = h.lattice.two_coloring()
    sites = tuple(sorted([(j, "Z") for j in a] + [(k, "Y") for k in b]))
    return PauliTerm(1.0, sites)


def _commutes(m: np.ndarray, h: np.ndarray, tol: float = 1e-12) -> bool:
    return np.max(np.abs(m @ h - h @ m)) <= tol


def symmetry_check(h: HamiltonianSpec) -> SymmetryReport:
    """Dense-matrix detection of the symmetries the protocols rely on."""
    L = h.num_qubits
    if L > DENSE_LIMIT:
        raise TooLarge(f"L={L} exceeds dense limit {DENSE_LIMIT}")
    hm = h.dense()
    sz = sum(PauliTerm(1.0, ((j, "Z"),)).matrix(L) for j in range(L))
    flip = PauliTerm(1.0, tuple((j, "X") for j in range(L))).matrix(L)
    has_u1 = _commutes(sz, hm)
    has_spinflip = _commutes(flip, hm)
    has_anti = False
    if h.model == "tfim":
        try:
            tau = anticommuting_witness(h).matrix(L)
            has_anti = np.max(np.abs(tau @ hm + hm @ tau)) <= 1e-12
        except NonBipartite:
            has_anti = False
    return SymmetryReport(has_u1=has_u1, has_spinflip=has_spinflip,
                          has_anticommuting=has_anti)


@lru_cache(maxsize=64)
def _oracle_window(h: HamiltonianSpec) -> tuple[float, float]:
    ev = np.linalg.eigvalsh(h.dense())
    return float(ev[0]), float(ev[-1] - ev[0])


def rescale_window(h: HamiltonianSpec, method: str = "oracle") -> RescaleWindow:
    """Spectral window: exact endpoints (oracle) or a Pauli-coefficient bound."""
    if method == "oracle":
        e_min, width = _oracle_window(h)
        return RescaleWindow(e_min=e_min, width=width)
    if method == "norm_bound":
        s = sum(abs(t.coefficient) for t in h.terms)
        return RescaleWindow(e_min=-s, width=2 * s)
    raise ValueError(f"unknown window method {method!r}")
