"""Pure-numpy statevector kernels (fallback backend).

All functions mutate the amplitude buffer in place.  The buffer is a
2^L complex128 array; qubit 0 owns the most significant bit of the index.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def apply_1q(state: np.ndarray, num_qubits: int, qubit: int, m: np.ndarray) -> None:
    view = state.reshape((2,) * num_qubits)
    moved = np.moveaxis(view, qubit, 0)
    a = moved[0].copy()
    b = moved[1]
    moved[0] = m[0, 0] * a + m[0, 1] * b
    moved[1] = m[1, 0] * a + m[1, 1] * b


def apply_rz(state: np.ndarray, num_qubits: int, qubit: int, angle: float) -> None:
    view = state.reshape((2,) * num_qubits)
    moved = np.moveaxis(view, qubit, 0)
    moved[0] *= np.exp(-0.5j * angle)
    moved[1] *= np.exp(0.5j * angle)


def apply_cz(state: np.ndarray, num_qubits: int, q0: int, q1: int) -> None:
    view = state.reshape((2,) * num_qubits)
    idx = [slice(None)] * num_qubits
    idx[q0] = 1
    idx[q1] = 1
    view[tuple(idx)] *= -1.0
