"""Compare the compiled statevector kernels against the numpy fallback.

Run directly:

    python benchmarks/bench_kernels.py [--qubits 16] [--repeats 5]

Both backends implement the same in-place interface; this script times a
random single-qubit / Rz / CZ gate sequence on each and checks that the
final states agree to machine precision.
"""

import argparse
import time

import numpy as np

from thermospin.sim import kernels_py

try:
    from thermospin.sim import _kernels
except ImportError:
    _kernels = None


def random_sequence(num_qubits, depth, rng):
    seq = []
    for _ in range(depth):
        kind = rng.integers(3)
        if kind == 0:
            m, _ = np.linalg.qr(rng.normal(size=(2, 2))
                                + 1j * rng.normal(size=(2, 2)))
            seq.append(("1q", int(rng.integers(num_qubits)), m))
        elif kind == 1:
            seq.append(("rz", int(rng.integers(num_qubits)),
                        float(rng.uniform(0, 2 * np.pi))))
        else:
            q0, q1 = rng.choice(num_qubits, size=2, replace=False)
            seq.append(("cz", int(q0), int(q1)))
    return seq


def run(backend, state, num_qubits, seq):
    for op in seq:
        if op[0] == "1q":
            backend.apply_1q(state, num_qubits, op[1], op[2])
        elif op[0] == "rz":
            backend.apply_rz(state, num_qubits, op[1], op[2])
        else:
            backend.apply_cz(state, num_qubits, op[1], op[2])
    return state


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qubits", type=int, default=16)
    ap.add_argument("--depth", type=int, default=200)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    seq = random_sequence(args.qubits, args.depth, rng)
    init = np.zeros(2**args.qubits, dtype=complex)
    init[0] = 1.0

    results = {}
    backends = [("numpy", kernels_py)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    else:
        print("compiled extension not available; timing numpy only")

    for name, backend in backends:
        best = np.inf
        for _ in range(args.repeats):
            state = init.copy()
            t0 = time.perf_counter()
            run(backend, state, args.qubits, seq)
            best = min(best, time.perf_counter() - t0)
        results[name] = (best, state)
        rate = args.depth / best
        print(f"{name:>7}: {best * 1e3:8.2f} ms  ({rate:,.0f} gates/s)")

    if len(results) == 2:
        diff = np.max(np.abs(results["numpy"][1] - results["cython"][1]))
        speedup = results["numpy"][0] / results["cython"][0]
        print(f"speedup: {speedup:.2f}x   max |delta|: {diff:.2e}")
        assert diff < 1e-12


if __name__ == "__main__":
    main()
