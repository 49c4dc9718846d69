"""Hardware-style moment estimators.

Two routes to the expansion moments:

* virtual-copy randomized measurement: conjugate the evolution by a layer of
  random single-qubit Cliffords, measure in the computational basis, and
  average (-2)^(-sum of outcome bits); the ensemble average equals
  Tr[T] Tr[T^dag] / D^2, the spectral form factor of the evolution T.
* reference-state echo: prepare (|0...0> +- |1, psi>)/sqrt(2) with a pivot
  qubit and a random product state on the rest, evolve, and undo the "+"
  preparation; the difference of the two all-zero return probabilities
  averages to Re Tr[e^{-i n pi H~}]/D when the model conserves total S_z,
  carries a global spin-flip symmetry, and annihilates |0...0>.

Estimation is embarrassingly parallel over unitaries; per-task generators are
spawned from one seed so any execution schedule reproduces the serial result.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import ProtocolInvalid, ReferenceNotEigenstate, BadProductState, TooLarge
from .model import HamiltonianSpec, PauliTerm, RescaleWindow, symmetry_check
from .sim.engine import (StateVector, measure_samples, run_circuit,
                         trotter_circuit, bit_counts)
from .sim.gates import CLIFFORD_INV, EVOLVE, PAULI, Circuit, Gate
from .sim.noise import DensityRunner, NoiseModel, run_noisy_trajectory

STABILIZER_LABELS = ("0", "1", "+", "-", "+i", "-i")


@dataclass(frozen=True)
class EstimatorConfig:
    num_random_unitaries: int
    shots_per_unitary: int
    seed: int = 0
    mode: str = "sampled"        # "sampled" | "exhaustive"
    sampling_layers: int = 0     # extra Clifford+CZ layers in the VC unitary

    def __post_init__(self):
        if self.num_random_unitaries < 1 or self.shots_per_unitary < 1:
            raise ValueError("unitary and shot counts must be positive")
        if self.mode not in ("sampled", "exhaustive"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.sampling_layers < 0:
            raise ValueError("sampling_layers must be non-negative")


@dataclass
class RunningStats:
    """Merge-only (count, mean, M2) accumulator."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def push(self, x: float) -> None:
        self.count += 1
        d = x - self.mean
        self.mean += d / self.count
        self.m2 += d * (x - self.mean)

    def merge(self, other: "RunningStats") -> "RunningStats":
        if other.count == 0:
            return self
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return self
        n = self.count + other.count
        d = other.mean - self.mean
        self.m2 += other.m2 + d * d * self.count * other.count / n
        self.mean += d * other.count / n
        self.count = n
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0


@dataclass
class SampleRecord:
    descriptor: str
    stats: RunningStats = field(default_factory=RunningStats)

    def to_json(self) -> str:
        return json.dumps({"descriptor": self.descriptor,
                           "count": self.stats.count,
                           "mean": self.stats.mean,
                           "variance": self.stats.variance})


def write_sample_log(records, path) -> None:
    """JSON-lines export: one record per sampled unitary."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def _rng_for(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed,
                                                        spawn_key=(index,)))


def evolution_circuit(h: HamiltonianSpec, window: RescaleWindow, n: int,
                      M: int = 1, evolution: str = "auto") -> Circuit:
    """e^{-i n pi H~} up to global phase: Trotter for the Ising model,
    a single analogue segment at t = n pi / W otherwise.

    evolution = "analogue" forces the exact propagator even for the Ising
    model, isolating estimator statistics from Trotter error.
    """
    if h.model == "tfim" and evolution != "analogue":
        return trotter_circuit(h, window, n, M)
    circ = Circuit(h.num_qubits)
    if n > 0:
        circ.add(Gate(EVOLVE, tuple(range(h.num_qubits)),
                      angle=n * np.pi / window.width))
    return circ


def vc_sampling_circuit(h: HamiltonianSpec, indices) -> Circuit:
    """The random unitary U_s: one Clifford per qubit, optionally followed by
    further (CZ-on-bonds + Clifford) layers for deeper scrambling."""
    L = h.num_qubits
    circ = Circuit(L)
    layers = np.atleast_2d(np.asarray(indices, dtype=int))
    for depth, row in enumerate(layers):
        if depth > 0:
            for j, k in h.lattice.bonds():
                circ.cz(j, k)
        for q in range(L):
            circ.cliff(q, int(row[q]))
    return circ


def vc_circuit(h: HamiltonianSpec, window: RescaleWindow, n: int, M: int,
               indices, obs: PauliTerm | None = None,
               evolution: str = "auto") -> Circuit:
    """U_s^dag [O] e^{-i n pi H~} U_s acting on |0...0>."""
    u = vc_sampling_circuit(h, indices)
    circ = Circuit(h.num_qubits)
    circ.gates.extend(u.gates)
    circ.gates.extend(evolution_circuit(h, window, n, M, evolution).gates)
    if obs is not None and obs.sites:
        qubits = tuple(j for j, _ in obs.sites)
        letters = "".join(p for _, p in obs.sites)
        circ.add(Gate(PAULI, qubits, paulis=letters))
    circ.gates.extend(u.inverse().gates)
    return circ


def _dual_weights(L: int) -> np.ndarray:
    """(-2)^(-popcount) over all 2^L outcomes; equals (-1/2)^popcount."""
    return (-0.5) ** bit_counts(np.arange(2**L), L)


def vc_expectation(circ: Circuit, h: HamiltonianSpec,
                   noise: NoiseModel | None = None) -> float:
    """Exact per-unitary expectation of the dual weight (no shot noise)."""
    L = circ.num_qubits
    if noise is None or noise.is_noiseless:
        sv = StateVector(L)
        run_circuit(sv, circ, h)
        p = sv.probabilities()
    else:
        dm = DensityRunner(L)
        dm.run(circ, noise, h)
        p = dm.probabilities()
    return float(p @ _dual_weights(L))


def vc_shot_values(circ: Circuit, h: HamiltonianSpec, noise: NoiseModel | None,
                   shots: int, rng: np.random.Generator) -> np.ndarray:
    """Per-shot dual-weight values; noisy shots re-run the trajectory."""
    L = circ.num_qubits
    if noise is None or noise.is_noiseless:
        sv = StateVector(L)
        run_circuit(sv, circ, h)
        outcomes = measure_samples(sv, shots, rng)
    else:
        outcomes = np.empty(shots, dtype=np.int64)
        for s in range(shots):
            sv = StateVector(L)
            run_noisy_trajectory(sv, circ, noise, rng, h)
            outcomes[s] = measure_samples(sv, 1, rng)[0]
    return (-0.5) ** bit_counts(outcomes, L)


def _vc_guard(h: HamiltonianSpec) -> None:
    if h.model == "tfim" and not symmetry_check(h).has_anticommuting:
        raise ProtocolInvalid(
            "no anticommuting Pauli symmetry: the composite reconstruction "
            "of Tr e^{-i n pi H~} from the form factor does not apply")


def _estimate(values_by_unitary, descriptors) -> tuple[float, float, list[SampleRecord]]:
    records = []
    means = []
    for desc, stats in zip(descriptors, values_by_unitary):
        records.append(SampleRecord(descriptor=desc, stats=stats))
        means.append(stats.mean)
    means = np.array(means)
    est = float(means.mean())
    if len(means) > 1:
        err = float(means.std(ddof=1) / np.sqrt(len(means)))
    else:
        err = 0.0
    return est, err, records


def _vc_run(h, window, n, M, cfg, noise, executor, obs, evolution="auto"):
    _vc_guard(h)
    L = h.num_qubits
    scale = 1.0 if obs is None else obs.coefficient**2

    def exact_task(indices):
        circ = vc_circuit(h, window, n, M, indices, obs, evolution)
        st = RunningStats()
        st.push(scale * vc_expectation(circ, h, noise))
        return st

    def sampled_task(i):
        rng = _rng_for(cfg.seed, i)
        if cfg.sampling_layers > 0:
            indices = rng.integers(24, size=(cfg.sampling_layers + 1, L))
        else:
            indices = rng.integers(24, size=L)
        circ = vc_circuit(h, window, n, M, indices, obs, evolution)
        vals = vc_shot_values(circ, h, noise, cfg.shots_per_unitary, rng)
        st = RunningStats()
        for v in vals:
            st.push(scale * float(v))
        return indices, st

    mapper = map if executor is None else executor.map
    if cfg.mode == "exhaustive":
        if L > 4:
            raise TooLarge("exhaustive Clifford enumeration limited to L <= 4")
        combos = list(product(range(24), repeat=L))
        stats = list(mapper(exact_task, combos))
        descriptors = [",".join(map(str, c)) for c in combos]
        est, _, records = _estimate(stats, descriptors)
        return est, 0.0, records
    results = list(mapper(sampled_task, range(cfg.num_random_unitaries)))
    stats = [st for _, st in results]
    descriptors = [",".join(map(str, np.ravel(ind))) for ind, _ in results]
    return _estimate(stats, descriptors)


def vc_moment_estimate(h: HamiltonianSpec, window: RescaleWindow, n: int,
                       M: int = 1, cfg: EstimatorConfig = None,
                       noise: NoiseModel | None = None, executor=None,
                       records_out: list | None = None,
                       evolution: str = "auto") -> tuple[float, float]:
    """Form-factor moment f_nc = |Tr e^{-i n pi H~}|^2 / D^2 with its
    standard error over the unitary ensemble."""
    est, err, records = _vc_run(h, window, n, M, cfg, noise, executor, None,
                                evolution)
    if records_out is not None:
        records_out.extend(records)
    return est, err


def vc_observable_moment(h: HamiltonianSpec, window: RescaleWindow, n: int,
                         M: int, obs: PauliTerm,
                         cfg: EstimatorConfig = None,
                         noise: NoiseModel | None = None, executor=None,
                         records_out: list | None = None,
                         evolution: str = "auto") -> tuple[float, float]:
    """Composite observable moment d_nc = |Tr[O e^{-i n pi H~}]|^2 / D^2,
    realized by one extra Pauli layer adjacent to the evolution."""
    est, err, records = _vc_run(h, window, n, M, cfg, noise, executor, obs,
                                evolution)
    if records_out is not None:
        records_out.extend(records)
    return est, err


# --- reference-state echo ---------------------------------------------------

# target states psi = V|0> compiled as controlled Ry (plus Rz frames for the
# circular pair), with the pivot as control
_RY_ANGLE = {"1": np.pi, "+": np.pi / 2, "-": -np.pi / 2,
             "+i": -np.pi / 2, "-i": np.pi / 2}
_RZ_FRAME = {"+i": np.pi / 2, "-i": np.pi / 2}  # Rx(b) = Rz(-pi/2) Ry(b) Rz(pi/2)


def _controlled_prep(circ: Circuit, control: int, target: int,
                     label: str) -> None:
    """Controlled V with V|0> the requested stabilizer state (phase exact)."""
    if label == "0":
        return
    frame = _RZ_FRAME.get(label)
    beta = _RY_ANGLE[label]
    if frame is not None:
        circ.rz(target, frame)
    # C-Ry(beta) = Ry(beta/2) CNOT Ry(-beta/2) CNOT, CNOT via CZ
    for half in (-beta / 2, beta / 2):
        circ.ry(target, -np.pi / 2)
        circ.cz(control, target)
        circ.ry(target, np.pi / 2)
        circ.ry(target, half)
    if frame is not None:
        circ.rz(target, -frame)


def rs_prepare_circuits(psi, sign: str, n: int,
                        window: RescaleWindow) -> Circuit:
    """U_pm preparing (|0...0> pm |1, psi_2 ... psi_L>)/sqrt(2).

    psi is a tuple of stabilizer labels with psi[0] == "1" (the pivot).  The
    pivot also carries the Z rotation by n pi E_min / W that undoes the phase
    difference between the analogue e^{-i H t} and the rescaled e^{-i n pi H~}
    (-n pi / 2 per order when E_min = -W/2).
    """
    if sign not in ("+", "-"):
        raise BadProductState(f"sign must be '+' or '-', got {sign!r}")
    if len(psi) < 2 or psi[0] != "1":
        raise BadProductState("pivot qubit (index 0) must be the '1' state")
    bad = [s for s in psi[1:] if s not in STABILIZER_LABELS]
    if bad:
        raise BadProductState(f"unknown stabilizer labels {bad}")
    L = len(psi)
    circ = Circuit(L, metadata={"psi": "|".join(psi), "sign": sign, "n": n})
    circ.ry(0, np.pi / 2 if sign == "+" else -np.pi / 2)
    for q in range(1, L):
        _controlled_prep(circ, 0, q, psi[q])
    if n:
        circ.rz(0, n * np.pi * window.e_min / window.width)
    return circ


def _rs_echo_circuit(h, window, psi, sign, n) -> Circuit:
    """U_+(no phase)^dag e^{-iHt} U_pm acting on |0...0>; the all-zero return
    probability is P_pm."""
    ket = rs_prepare_circuits(psi, sign, n, window)
    bra = rs_prepare_circuits(psi, "+", 0, window).inverse()
    circ = Circuit(h.num_qubits)
    circ.gates.extend(ket.gates)
    if n:
        circ.add(Gate(EVOLVE, tuple(range(h.num_qubits)),
                      angle=n * np.pi / window.width))
    circ.gates.extend(bra.gates)
    return circ


def rs_return_probability(h: HamiltonianSpec, circ: Circuit,
                          noise: NoiseModel | None = None) -> float:
    if noise is None or noise.is_noiseless:
        sv = StateVector(circ.num_qubits)
        run_circuit(sv, circ, h)
        return float(sv.probabilities()[0])
    dm = DensityRunner(circ.num_qubits)
    dm.run(circ, noise, h)
    return float(dm.probabilities()[0])


def _rs_guard(h: HamiltonianSpec) -> None:
    rep = symmetry_check(h)
    if not rep.has_u1:
        raise ProtocolInvalid("reference-state estimator needs total-S_z "
                              "conservation (U(1) symmetry)")
    if not rep.has_spinflip:
        raise ProtocolInvalid("reference-state estimator needs global "
                              "spin-flip symmetry for the pivot-block trace "
                              "identity")
    col = h.dense()[:, 0]
    if np.max(np.abs(col)) > 1e-9:
        raise ReferenceNotEigenstate(
            "|0...0> is not a zero-energy eigenstate of the model")


def rs_moment_estimate(h: HamiltonianSpec, window: RescaleWindow, n: int,
                       cfg: EstimatorConfig = None,
                       noise: NoiseModel | None = None, executor=None,
                       records_out: list | None = None) -> tuple[float, float]:
    """DOS moment f_n = Re Tr[e^{-i n pi H~}] / D from echo probabilities.

    For each random product state, f-hat = P_+ - P_-; the product-state
    average reduces the pivot block to Tr/2 and the stabilizer 1-design
    supplies the maximally mixed rest.
    """
    _rs_guard(h)
    L = h.num_qubits

    def probabilities(psi, shots_rng=None):
        ps = []
        for sign in ("+", "-"):
            circ = _rs_echo_circuit(h, window, psi, sign, n)
            if shots_rng is None:
                ps.append(rs_return_probability(h, circ, noise))
            elif noise is None or noise.is_noiseless:
                sv = StateVector(L)
                run_circuit(sv, circ, h)
                hits = shots_rng.binomial(cfg.shots_per_unitary,
                                          sv.probabilities()[0])
                ps.append(hits / cfg.shots_per_unitary)
            else:
                hits = 0
                for _ in range(cfg.shots_per_unitary):
                    sv = StateVector(L)
                    run_noisy_trajectory(sv, circ, noise, shots_rng, h)
                    hits += int(measure_samples(sv, 1, shots_rng)[0] == 0)
                ps.append(hits / cfg.shots_per_unitary)
        return ps

    def exact_task(psi):
        p_plus, p_minus = probabilities(psi)
        st = RunningStats()
        st.push(p_plus - p_minus)
        return st

    def sampled_task(i):
        rng = _rng_for(cfg.seed, i)
        psi = ("1",) + tuple(STABILIZER_LABELS[j]
                             for j in rng.integers(6, size=L - 1))
        p_plus, p_minus = probabilities(psi, shots_rng=rng)
        st = RunningStats()
        st.push(p_plus - p_minus)
        return psi, st

    mapper = map if executor is None else executor.map
    if cfg.mode == "exhaustive":
        if L > 4:
            raise TooLarge("exhaustive product-state enumeration limited "
                           "to L <= 4")
        combos = [("1",) + rest
                  for rest in product(STABILIZER_LABELS, repeat=L - 1)]
        stats = list(mapper(exact_task, combos))
        est, _, records = _estimate(stats, ["|".join(c) for c in combos])
        if records_out is not None:
            records_out.extend(records)
        return est, 0.0
    results = list(mapper(sampled_task, range(cfg.num_random_unitaries)))
    stats = [st for _, st in results]
    est, err, records = _estimate(stats, ["|".join(p) for p, _ in results])
    if records_out is not None:
        records_out.extend(records)
    return est, err
