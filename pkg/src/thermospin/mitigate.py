"""Synthetic-noise error mitigation.

Three tools, combinable:

* an error-estimation circuit: same gate skeleton as a Trotter target but with
  Rz angles flipped in the mirrored half and zeroed in the middle layer, so it
  compiles to the identity — its ideal expectation is known exactly;
* Global Error Mitigation (GEM): model all noise as one effective depolarizing
  channel of strength p_avg inferred from the estimation circuit, then invert
  the channel on the target expectation;
* Linear Zero-Noise Extrapolation (LZNE): measure target/estimation ratios at
  two amplification factors r and extrapolate linearly to r = 0, leaving a
  residual of order p^2.

Outliers produced by near-total depolarization (mitigated magnitudes blowing
past 1) are removed by a median-absolute-deviation filter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (BadSchedule, DegenerateEstimator, DegeneratePair,
                     DivByZeroEstimation, NotInvertibleByRzFlip,
                     TooFewValues, TotalDepolarization)
from .model import HamiltonianSpec, PauliTerm, RescaleWindow
from .protocol import (EstimatorConfig, _rng_for, evolution_circuit,
                       vc_expectation, vc_sampling_circuit)
from .sim.gates import CLIFF, CZ, EVOLVE, PAULI, RX, RY, RZ, Circuit, Gate
from .sim.noise import (AnalogueFold, FullRepetition, NoiseModel, SubsetTriple,
                        amplify_noise)

MAD_SCALE = 1.4826  # MAD -> sigma under a normal distribution


@dataclass(frozen=True)
class MitigationPlan:
    method: str = "none"                      # none | gem | lzne
    r_pair: tuple[float, float] = (1.0, 3.0)  # LZNE amplification factors
    subset_k: int | None = None               # triple k CZs instead of all
    subset_selections: int = 8                # random subsets averaged
    mad_enabled: bool = False
    mad_sigmas: float = 2.0

    def __post_init__(self):
        if self.method not in ("none", "gem", "lzne"):
            raise ValueError(f"unknown mitigation method {self.method!r}")
        r1, r2 = self.r_pair
        if not (r2 > r1 >= 1):
            raise ValueError("require r2 > r1 >= 1")


@dataclass(frozen=True)
class MitigatedValue:
    raw: float
    mitigated: float
    p_avg: float | None = None
    zeta: tuple[float, ...] | None = None
    outliers_removed: int = 0


def build_error_estimation_circuit(target: Circuit) -> Circuit:
    """Identity-compiling twin of a layer-tagged Trotter circuit.

    Keeps every Ry frame and CZ in place; Rz angles in the mirrored second
    half are negated and the middle layer's are zeroed, which undoes the
    palindromic layer sequence exactly.
    """
    if not target.gates:
        return Circuit(target.num_qubits, metadata=dict(target.metadata))
    layers = sorted({g.layer for g in target.gates})
    if layers[0] < 0:
        raise NotInvertibleByRzFlip("untagged gates in the target")
    num_layers = layers[-1] + 1
    if num_layers % 2 == 0 or layers != list(range(num_layers)):
        raise NotInvertibleByRzFlip("layer sequence is not an odd palindrome")
    mid = num_layers // 2
    by_layer: dict[int, list] = {k: [] for k in layers}
    out = Circuit(target.num_qubits, metadata=dict(target.metadata))
    for g in target.gates:
        if g.kind not in (RY, RZ, CZ):
            raise NotInvertibleByRzFlip(f"unsupported gate kind {g.kind}")
        by_layer[g.layer].append(g)
        if g.kind != RZ:
            out.add(g)
            continue
        if g.layer == mid:
            angle = 0.0
        elif g.layer > mid:
            angle = -g.angle
        else:
            angle = g.angle
        out.add(Gate(RZ, g.qubits, angle=angle, layer=g.layer))
    for k in range(mid):
        a = [(g.kind, g.qubits) for g in by_layer[k]]
        b = [(g.kind, g.qubits) for g in by_layer[num_layers - 1 - k]]
        if a != b:
            raise NotInvertibleByRzFlip(f"layers {k} and {num_layers - 1 - k} "
                                        "are not mirror images")
    return out


def gem(target_measured: float, est_measured: float, est_exact: float,
        trace_term: float) -> MitigatedValue:
    """Invert the effective global depolarizing channel.

    p_avg solves est_measured = (1 - p) est_exact + p trace_term; the same p
    is then removed from the target expectation.
    """
    if est_exact == trace_term:
        raise DegenerateEstimator("estimation circuit cannot resolve p_avg")
    p_avg = (est_exact - est_measured) / (est_exact - trace_term)
    if p_avg >= 1:
        raise TotalDepolarization(f"p_avg = {p_avg} >= 1")
    mitigated = (target_measured - p_avg * trace_term) / (1 - p_avg)
    return MitigatedValue(raw=target_measured, mitigated=mitigated,
                          p_avg=p_avg)


def zeta_ratio(target_measured: float, est_measured: float,
               est_exact: float) -> float:
    if est_measured == 0:
        raise DivByZeroEstimation("estimation-circuit expectation vanished")
    return target_measured / est_measured * est_exact


def lzne(zeta: dict, est_exact: float = 1.0) -> MitigatedValue:
    """Linear extrapolation of zeta(r) to r = 0 from exactly two points."""
    if len(zeta) != 2:
        raise DegeneratePair("exactly two amplification factors required")
    (r1, z1), (r2, z2) = sorted(zeta.items())
    if r1 == r2:
        raise DegeneratePair("amplification factors must differ")
    mitigated = (r2 * z1 - r1 * z2) / (r2 - r1)
    return MitigatedValue(raw=z1, mitigated=mitigated, zeta=(z1, z2))


def subset_r_eff(n_cz: int, k: int) -> float:
    """Effective amplification when k of n CZs are tripled."""
    if n_cz < 1 or k < 1 or k > n_cz:
        raise BadSchedule(f"cannot triple {k} of {n_cz} CZ gates")
    return (n_cz + 2 * k) / n_cz


def mad_filter(values, threshold_sigmas: float = 2.0):
    """Median-absolute-deviation outlier removal.

    Returns (kept values, removed indices); a value goes when its deviation
    from the median exceeds threshold_sigmas * 1.4826 * MAD.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        raise TooFewValues("need at least 3 values for a MAD filter")
    med = np.median(v)
    mad = np.median(np.abs(v - med))
    bad = np.abs(v - med) > threshold_sigmas * MAD_SCALE * mad
    kept = [float(x) for x, b in zip(v, bad) if not b]
    removed = [i for i, b in enumerate(bad) if b]
    return kept, removed


def _compose(parts, L, metadata=None) -> Circuit:
    circ = Circuit(L, metadata=dict(metadata or {}))
    for part in parts:
        circ.gates.extend(part.gates)
    return circ


def _fold_circuit(L: int, t1: float, t2: float, paulis: str) -> Circuit:
    """EVOLVE(t1) P EVOLVE(t2) P with an anticommuting layer: net t1 - t2,
    noise exposure t1 + t2."""
    circ = Circuit(L)
    qubits = tuple(range(L))
    circ.add(Gate(EVOLVE, qubits, angle=t1))
    circ.add(Gate(PAULI, qubits, paulis=paulis))
    circ.add(Gate(EVOLVE, qubits, angle=t2))
    circ.add(Gate(PAULI, qubits, paulis=paulis))
    return circ


def _anticommuting_layer(h: HamiltonianSpec) -> str:
    """Per-qubit Pauli letters whose product anticommutes with the XY model:
    Z on one sublattice, identity elsewhere flips the sign of every bond."""
    a, _ = h.lattice.two_coloring()
    letters = ["I"] * h.num_qubits
    for j in a:
        letters[j] = "Z"
    return "".join(letters)


def _amplified_pair(h, window, n, M, plan, r, rng):
    """(target circuits, estimation circuits) at amplification r.

    Digital path: Rz-flip estimation twin, CZ repetition or random-subset
    tripling.  Analogue path: time folds with an anticommuting Z layer; the
    estimation fold nets zero evolution at matched noise exposure.
    """
    if h.model == "tfim":
        target = evolution_circuit(h, window, n, M)
        est = build_error_estimation_circuit(target)
        if r == 1:
            return [target], [est]
        n_cz = target.cz_count()
        if plan.subset_k is not None:
            if abs(r - subset_r_eff(n_cz, plan.subset_k)) > 1e-12:
                raise BadSchedule(
                    f"r = {r} unreachable by tripling {plan.subset_k} "
                    f"of {n_cz} CZs")
            targets, ests = [], []
            for _ in range(plan.subset_selections):
                pos = tuple(rng.choice(n_cz, size=plan.subset_k,
                                       replace=False))
                targets.append(amplify_noise(target, SubsetTriple(pos)))
                ests.append(amplify_noise(est, SubsetTriple(pos)))
            return targets, ests
        if abs(r - round(r)) > 1e-12 or int(round(r)) % 2 == 0:
            raise BadSchedule(f"full repetition needs an odd integer r, "
                              f"got {r}")
        sched = FullRepetition(int(round(r)))
        return [amplify_noise(target, sched)], [amplify_noise(est, sched)]
    # analogue path
    t = n * np.pi / window.width
    paulis = _anticommuting_layer(h)
    L = h.num_qubits
    t1 = t * (r + 1) / 2
    t2 = t * (r - 1) / 2
    if r == 1:
        target = evolution_circuit(h, window, n, M)
    else:
        target = amplify_noise(evolution_circuit(h, window, n, M),
                               AnalogueFold(t1, t2, paulis), h)
    est = _fold_circuit(L, r * t / 2, r * t / 2, paulis)
    return [target], [est]


def run_mitigated_estimate(h: HamiltonianSpec, window: RescaleWindow, n: int,
                           obs: PauliTerm | None = None,
                           protocol: str = "virtual_copy",
                           plan: MitigationPlan = MitigationPlan(),
                           noise: NoiseModel = NoiseModel(),
                           cfg: EstimatorConfig = None,
                           M: int = 1, audit_path=None) -> MitigatedValue:
    """Per-unitary mitigation of virtual-copy moments, then ensemble average.

    Expectations are evaluated exactly (density-matrix route under noise), so
    the returned value carries no shot noise — mitigation quality reflects
    the method, not sampling.
    """
    if protocol != "virtual_copy":
        raise ValueError("mitigation orchestration covers the virtual-copy "
                         "protocol")
    L = h.num_qubits
    trace_term = 0.25**L  # dual-weight mean under the maximally mixed state
    audit = []
    raws, mits, extras = [], [], []
    for i in range(cfg.num_random_unitaries):
        rng = _rng_for(cfg.seed, i)
        indices = rng.integers(24, size=L)
        u = vc_sampling_circuit(h, indices)
        u_inv = u.inverse()

        def wrap(core):
            parts = [u, core]
            if obs is not None and obs.sites:
                qubits = tuple(j for j, _ in obs.sites)
                letters = "".join(p for _, p in obs.sites)
                pl = Circuit(L)
                pl.add(Gate(PAULI, qubits, paulis=letters))
                parts.append(pl)
            parts.append(u_inv)
            return _compose(parts, L)

        def wrap_est(core):
            return _compose([u, core, u_inv], L)

        def measure(r):
            targets, ests = _amplified_pair(h, window, n, M, plan, r, rng)
            tvals = [vc_expectation(wrap(c), h, noise) for c in targets]
            evals_ = [vc_expectation(wrap_est(c), h, noise) for c in ests]
            return float(np.mean(tvals)), float(np.mean(evals_))

        if plan.method == "none":
            t1, _ = measure(1.0)
            raws.append(t1)
            mits.append(t1)
            audit.append({"unitary": i, "raw": t1})
            continue
        if plan.method == "gem":
            t1, e1 = measure(1.0)
            mv = gem(t1, e1, 1.0, trace_term)
            raws.append(mv.raw)
            mits.append(mv.mitigated)
            extras.append(mv.p_avg)
            audit.append({"unitary": i, "raw": t1, "est": e1,
                          "est_exact": 1.0, "trace_term": trace_term,
                          "p_avg": mv.p_avg, "mitigated": mv.mitigated})
            continue
        r1, r2 = plan.r_pair
        ta, ea = measure(r1)
        tb, eb = measure(r2)
        z = {r1: zeta_ratio(ta, ea, 1.0), r2: zeta_ratio(tb, eb, 1.0)}
        mv = lzne(z)
        raws.append(ta)
        mits.append(mv.mitigated)
        extras.append(mv.zeta)
        audit.append({"unitary": i, "raw": {r1: ta, r2: tb},
                      "est": {r1: ea, r2: eb},
                      "zeta": {r1: z[r1], r2: z[r2]},
                      "mitigated": mv.mitigated})
    removed_count = 0
    if plan.mad_enabled and len(mits) >= 3:
        kept, removed = mad_filter(mits, plan.mad_sigmas)
        removed_count = len(removed)
        for idx in removed:
            audit[idx]["outlier"] = True
        mits = kept
    if audit_path is not None:
        with open(audit_path, "w") as fh:
            for rec in audit:
                fh.write(json.dumps(rec) + "\n")
    if plan.method == "gem":
        extra = {"p_avg": float(np.mean(extras))}
    elif plan.method == "lzne":
        extra = {"zeta": tuple(np.mean(np.array(extras), axis=0))}
    else:
        extra = {}
    return MitigatedValue(raw=float(np.mean(raws)),
                          mitigated=float(np.mean(mits)),
                          outliers_removed=removed_count, **extra)
