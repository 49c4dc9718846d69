"""Acceptance gate: end-to-end checks of the estimators, the series
thermodynamics, the mitigation stack, and the reproducibility guarantees,
each at its stated tolerance and runtime budget."""

import math
import time

import numpy as np
import pytest

from thermospin import (
    EstimatorConfig,
    LatticeSpec,
    build_hamiltonian,
    diagonalize,
    exact,
    expansion,
    protocol,
    rescale_window,
)
from thermospin.cli import main
from thermospin.mitigate import (
    MitigationPlan,
    gem,
    lzne,
    run_mitigated_estimate,
    subset_r_eff,
)
from thermospin.model import PauliTerm
from thermospin.sim import (
    AnalogueFold,
    FullRepetition,
    NoiseModel,
    SubsetTriple,
    amplify_noise,
    circuit_unitary,
    trotter_circuit,
)

EXHAUSTIVE = EstimatorConfig(num_random_unitaries=1, shots_per_unitary=1,
                             mode="exhaustive")


def _ring(length, J=1.0, g=1.0):
    return build_hamiltonian(LatticeSpec(kind="ring1d", length=length),
                             "tfim", g=g, J=J)


def _grid(rows, cols, J=1.0, g=2.0):
    return build_hamiltonian(LatticeSpec(kind="grid2d", rows=rows, cols=cols),
                             "tfim", g=g, J=J)


def _series_F(h, N, T, form="generic"):
    window = rescale_window(h, "oracle")
    mom = exact.exact_moments(diagonalize(h), window, N)
    values = mom.f_c if form == "virtual_copy" else mom.f
    ms = expansion.MomentSet(form, values)
    kernel = expansion.jackson_coefficients(N)
    return expansion.free_energy(ms, kernel, window, T, h.num_qubits,
                                 form=form, on_negative="mask")


class TestCriterion01VirtualCopyUnbiased:
    """Exhaustive Clifford average equals the exact form-factor moments."""

    def test_exhaustive_matches_oracle(self, open2, open2_window,
                                       open2_spectrum):
        t0 = time.monotonic()
        mom = exact.exact_moments(open2_spectrum, open2_window, 4)
        for n in range(5):
            est, err = protocol.vc_moment_estimate(
                open2, open2_window, n, M=1, cfg=EXHAUSTIVE,
                evolution="analogue")
            assert abs(est - mom.f_c[n]) <= 1e-12
        # closed form for the first moment on the {±1, ±√5} spectrum
        assert mom.f_c[1] == pytest.approx(
            math.cos(math.pi / (2 * math.sqrt(5))) ** 2 / 4, abs=1e-12)
        assert time.monotonic() - t0 < 10.0


class TestCriterion02ReferenceStateUnbiased:
    """Exhaustive stabilizer-product average equals the exact DOS moments."""

    def test_exhaustive_matches_oracle(self, xy22):
        t0 = time.monotonic()
        window = rescale_window(xy22, "oracle")
        mom = exact.exact_moments(diagonalize(xy22), window, 6)
        for n in range(7):
            est, err = protocol.rs_moment_estimate(xy22, window, n,
                                                   cfg=EXHAUSTIVE)
            assert abs(est - mom.f[n]) <= 1e-10
        assert time.monotonic() - t0 < 30.0

    def test_spin_flip_block_identity(self, xy22):
        # the global spin flip commutes with the model and mirrors the
        # magnetization sectors, so the block where the pivot qubit is
        # flipped relative to the reference carries exactly half the trace
        # of the evolution operator -- the property that makes the
        # pivot-qubit estimator unbiased
        window = rescale_window(xy22, "oracle")
        spec = diagonalize(xy22, vectors=True)
        z = np.diag([1.0, -1.0]).astype(complex)
        proj = (np.eye(16) - np.kron(z, np.eye(8))) / 2
        for n in range(1, 7):
            phases = np.exp(-1j * n * np.pi
                            * (spec.eigenvalues - window.e_min) / window.width)
            m = (spec.eigenvectors * phases) @ spec.eigenvectors.conj().T
            assert abs(np.trace(m @ proj) - np.trace(m) / 2) <= 1e-10


class TestCriterion03SeriesAccuracy:
    """Free-energy accuracy of the damped series against direct
    diagonalization on the eight-site ring."""

    T = np.linspace(0.2, 5.0, 97)

    def _max_error(self, N):
        h = _ring(8)
        spec = diagonalize(h)
        F_series = _series_F(h, N, self.T).F
        F_exact = exact.exact_thermo(spec, self.T).F
        return float(np.nanmax(np.abs(F_series - F_exact)))

    def test_low_order_bound(self):
        t0 = time.monotonic()
        h = _ring(8)
        width = rescale_window(h, "oracle").width
        assert self._max_error(4) <= 0.03 * width
        assert time.monotonic() - t0 < 10.0

    def test_error_strictly_decreases_with_order(self):
        assert self._max_error(8) < self._max_error(4)


class TestCriterion04SelfDuality:
    """Coupling-exchanged free energies on the ten-site ring stay within the
    frozen deviation profile, and dual observables approach each other."""

    T = np.geomspace(0.1, 10.0, 64)
    # |F(J=1, g=1.5) - F(J=1.5, g=1)| profile, frozen from the order-8
    # series with exact moments on this temperature grid.
    DELTA_DUAL = np.array([
        2.549133106e-03, 2.740379737e-03, 2.945625575e-03, 3.165810049e-03,
        3.401914477e-03, 3.654958316e-03, 3.925993536e-03, 4.216096652e-03,
        4.526357825e-03, 4.857866340e-03, 5.211691643e-03, 5.588858987e-03,
        5.990318561e-03, 6.416906885e-03, 6.869299071e-03, 7.347950492e-03,
        7.853026367e-03, 8.384317857e-03, 8.941143509e-03, 9.522235406e-03,
        1.012561020e-02, 1.074842650e-02, 1.138683196e-02, 1.203580586e-02,
        1.268900644e-02, 1.333863590e-02, 1.397534104e-02, 1.458817175e-02,
        1.516462429e-02, 1.569079866e-02, 1.615169937e-02, 1.653170378e-02,
        1.681521128e-02, 1.698746754e-02, 1.703553266e-02, 1.694932998e-02,
        1.672268053e-02, 1.635420118e-02, 1.584793264e-02, 1.521357275e-02,
        1.446622760e-02, 1.362565363e-02, 1.271504182e-02, 1.175947185e-02,
        1.078422263e-02, 9.813149664e-03, 8.867322170e-03, 7.964058633e-03,
        7.116423651e-03, 6.333170795e-03, 5.619054076e-03, 4.975394866e-03,
        4.400783306e-03, 3.891807721e-03, 3.443732817e-03, 3.051078248e-03,
        2.708076662e-03, 2.409010960e-03, 2.148443493e-03, 1.921356270e-03,
        1.723222752e-03, 1.550030313e-03, 1.398269431e-03, 1.264902256e-03,
    ])

    def test_dual_free_energies_within_frozen_profile(self):
        t0 = time.monotonic()
        F_a = _series_F(_ring(10, J=1.0, g=1.5), 8, self.T).F
        F_b = _series_F(_ring(10, J=1.5, g=1.0), 8, self.T).F
        delta = np.abs(F_a - F_b)
        assert np.all(delta <= self.DELTA_DUAL * (1 + 1e-6) + 1e-12)
        assert time.monotonic() - t0 < 60.0

    def test_dual_observables_converge_above_2j(self):
        h = _ring(10, J=1.0, g=1.0)
        spec = diagonalize(h, vectors=True)
        zz = exact.exact_observable_thermal(
            spec, PauliTerm(1.0, ((0, "Z"), (1, "Z"))), self.T, 10)
        x = exact.exact_observable_thermal(
            spec, PauliTerm(1.0, ((0, "X"),)), self.T, 10)
        gap = np.abs(zz - x)
        hot = gap[self.T > 2.0]
        assert np.all(np.diff(hot) < 0)
        assert hot[-1] < hot[0] / 2


class TestCriterion05HeatCapacityStructure:
    """Heat capacity of the 2D model: one finite-temperature peak whose
    height grows with system size, vanishing toward zero temperature."""

    T = np.geomspace(0.2, 10.0, 128)

    def _heat_capacity(self, rows, cols):
        h = _grid(rows, cols)
        window = rescale_window(h, "oracle")
        mom = exact.exact_moments(diagonalize(h), window, 8)
        curve = expansion.entropy_and_heat_capacity(
            expansion.MomentSet("exact", mom.f),
            expansion.jackson_coefficients(8), window, self.T,
            h.num_qubits, form="generic", on_negative="mask")
        return curve.C

    def test_single_peak_growing_with_size(self):
        t0 = time.monotonic()
        peaks = []
        for rows, cols in ((2, 2), (2, 3), (3, 3)):
            c = self._heat_capacity(rows, cols)
            finite = np.nan_to_num(c, nan=-np.inf)
            i = int(finite.argmax())
            assert 0 < i < len(self.T) - 1
            interior = np.isfinite(c[1:-1])
            maxima = ((c[1:-1] > c[:-2]) & (c[1:-1] > c[2:]) & interior)
            assert int(maxima.sum()) == 1
            peaks.append(finite[i])
        assert peaks[0] < peaks[1] < peaks[2]
        assert time.monotonic() - t0 < 120.0

    def test_vanishes_at_low_temperature(self):
        for rows, cols in ((2, 2), (2, 3), (3, 3)):
            spec = diagonalize(_grid(rows, cols))
            c = exact.exact_thermo(spec, np.array([0.05])).C[0]
            assert c <= 1e-3


class TestCriterion06DerivativeConsistency:
    """Analytic entropy and heat capacity match finite differences of the
    module's own free energy on every series form."""

    @pytest.mark.parametrize("form,model", [
        ("generic", "tfim"),
        ("virtual_copy", "tfim"),
        ("reference_state", "xy"),
    ])
    def test_matches_finite_differences(self, form, model):
        if model == "tfim":
            h = _ring(4)
        else:
            h = build_hamiltonian(LatticeSpec(kind="ring1d", length=4),
                                  "xy", J=1.0)
        window = rescale_window(h, "oracle")
        mom = exact.exact_moments(diagonalize(h), window, 8)
        values = mom.f_c if form == "virtual_copy" else mom.f
        ms = expansion.MomentSet(form, values)
        kernel = expansion.jackson_coefficients(8)
        T = np.linspace(0.5, 5.0, 19)
        step = 1e-4

        def F(grid):
            return expansion.free_energy(ms, kernel, window, grid, 4,
                                         form=form, on_negative="mask").F

        curve = expansion.entropy_and_heat_capacity(
            ms, kernel, window, T, 4, form=form, on_negative="mask")
        S_fd = -(F(T + step) - F(T - step)) / (2 * step)
        C_fd = -T * (F(T + step) - 2 * F(T) + F(T - step)) / step**2
        np.testing.assert_allclose(curve.S, S_fd, rtol=1e-5, atol=1e-8)
        np.testing.assert_allclose(curve.C, C_fd, rtol=1e-5, atol=1e-6)


class TestCriterion07GemExactness:
    """A known global depolarizing channel is inverted exactly when the
    error-estimation circuit sees the same channel."""

    @pytest.mark.parametrize("p", [0.05, 0.2, 0.5])
    def test_recovers_noiseless_expectation(self, p, open2, open2_window):
        L = open2.num_qubits
        trace_term = 0.25**L
        rng = np.random.default_rng(12)
        for _ in range(6):
            indices = rng.integers(24, size=L)
            u = protocol.vc_sampling_circuit(open2, indices)
            core = protocol.evolution_circuit(open2, open2_window, 2, 1,
                                              evolution="analogue")
            circ = protocol.Circuit(L)
            circ.gates.extend(u.gates)
            circ.gates.extend(core.gates)
            circ.gates.extend(u.inverse().gates)
            ideal = protocol.vc_expectation(circ, open2, None)
            measured = (1 - p) * ideal + p * trace_term
            est_measured = (1 - p) * 1.0 + p * trace_term
            mv = gem(measured, est_measured, 1.0, trace_term)
            assert abs(mv.mitigated - ideal) <= 1e-10
            assert mv.p_avg == pytest.approx(p, abs=1e-10)


class TestCriterion08LzneOrder:
    """Linear extrapolation removes the first order in the gate error rate."""

    def test_residual_slopes(self):
        h = _ring(2)
        window = rescale_window(h, "oracle")
        cfg = EstimatorConfig(8, 1, seed=4)
        n, M = 1, 3
        clean = run_mitigated_estimate(
            h, window, n, plan=MitigationPlan(method="none"),
            cfg=cfg, M=M).mitigated
        ps = np.array([1e-3, 3e-3, 1e-2])
        raw_err, mit_err = [], []
        for p in ps:
            mv = run_mitigated_estimate(
                h, window, n,
                plan=MitigationPlan(method="lzne", r_pair=(1.0, 3.0)),
                noise=NoiseModel(p2=p), cfg=cfg, M=M)
            raw_err.append(abs(mv.raw - clean))
            mit_err.append(abs(mv.mitigated - clean))
        raw_slope = np.polyfit(np.log(ps), np.log(raw_err), 1)[0]
        mit_slope = np.polyfit(np.log(ps), np.log(mit_err), 1)[0]
        assert 0.9 <= raw_slope <= 1.1
        assert mit_slope >= 1.8

    def test_two_point_extrapolation_identity(self):
        # for zeta(r) = a + b r, the r -> 0 intercept is (3 zeta(1) - zeta(3))/2
        a, b = 0.83, -0.061
        z = {1.0: a + b, 3.0: a + 3 * b}
        mv = lzne(z)
        assert mv.mitigated == (3 * z[1.0] - z[3.0]) / 2
        assert mv.mitigated == pytest.approx(a, abs=1e-15)


class TestCriterion09AmplificationNeutrality:
    """Every amplification schedule preserves the noiseless unitary."""

    def test_digital_schedules(self):
        h = _ring(4)
        window = rescale_window(h, "oracle")
        circ = trotter_circuit(h, window, n=2, M=3)
        base = circuit_unitary(circ)
        full = amplify_noise(circ, FullRepetition(3))
        assert np.linalg.norm(circuit_unitary(full) - base) <= 1e-10
        assert full.metadata["r_eff"] == 3.0
        subset = amplify_noise(circ, SubsetTriple((0, 2, 5)))
        assert np.linalg.norm(circuit_unitary(subset) - base) <= 1e-10
        n_cz = circ.cz_count()
        assert subset.metadata["r_eff"] == (n_cz + 6) / n_cz

    def test_analogue_fold(self, xy22):
        window = rescale_window(xy22, "oracle")
        circ = protocol.evolution_circuit(xy22, window, 1, 1,
                                          evolution="analogue")
        base = circuit_unitary(circ, xy22)
        t = circ.gates[-1].angle
        folded = amplify_noise(circ, AnalogueFold(1.5 * t, 0.5 * t, "ZIIZ"),
                               xy22)
        assert np.linalg.norm(circuit_unitary(folded, xy22) - base) <= 1e-10
        assert folded.metadata["r_eff"] == pytest.approx(2.0)

    def test_subset_effective_factors(self):
        assert subset_r_eff(24, 3) == 1.25
        assert subset_r_eff(17, 2) == 21 / 17


class TestCriterion10SampledAgreement:
    """Default sampling budget resolves the ten-site form-factor moments."""

    def test_within_three_standard_errors(self):
        h = _ring(10)
        window = rescale_window(h, "oracle")
        mom = exact.exact_moments(diagonalize(h), window, 4)
        cfg = EstimatorConfig(num_random_unitaries=100, shots_per_unitary=100,
                              seed=0)
        t0 = time.monotonic()
        results = {}
        for n in range(1, 5):
            results[n] = protocol.vc_moment_estimate(
                h, window, n, M=1, cfg=cfg, evolution="analogue")
        serial_elapsed = time.monotonic() - t0
        assert serial_elapsed < 300.0
        for n, (est, err) in results.items():
            assert err <= 2e-2
            assert abs(est - mom.f_c[n]) <= 3 * err

        from concurrent.futures import ThreadPoolExecutor
        t0 = time.monotonic()
        with ThreadPoolExecutor(8) as pool:
            for n in range(1, 5):
                est, err = protocol.vc_moment_estimate(
                    h, window, n, M=1, cfg=cfg, executor=pool,
                    evolution="analogue")
                assert est == results[n][0]
                assert err == results[n][1]
        assert time.monotonic() - t0 < 60.0


class TestCriterion11Determinism:
    """Identical seeds give byte-identical outputs; threading does not
    change the statistics."""

    CONFIG = """\
[model]
kind = "tfim"
lattice = "ring"
size = 4
g = 1.0
J = 1.0

[qkfe]
N = 3

[protocol]
kind = "virtual_copy"
num_random_unitaries = 8
shots_per_unitary = 32
seed = 21

[temperature]
count = 16
"""

    def test_byte_identical_and_thread_invariant(self, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text(self.CONFIG)
        blobs = {}
        for tag, threads in (("a", 1), ("b", 1), ("c", 4)):
            out = tmp_path / tag
            assert main(["estimate", "--config", str(cfg),
                         "--out", str(out), "--threads", str(threads)]) == 0
            blobs[tag] = {name: (out / name).read_bytes()
                          for name in ("moments.csv", "thermo.csv",
                                       "summary.json")}
        assert blobs["a"] == blobs["b"]
        assert blobs["a"]["moments.csv"] == blobs["c"]["moments.csv"]
        assert blobs["a"]["thermo.csv"] == blobs["c"]["thermo.csv"]
