# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled statevector kernels (bitmask routing, no temporary arrays).

Same in-place interface as kernels_py: the amplitude buffer is a 2^L
complex128 array and qubit 0 owns the most significant index bit.
"""

import numpy as np

cimport cython
from libc.math cimport cos, sin

BACKEND = "cython"


def apply_1q(complex[::1] state, int num_qubits, int qubit, m):
    cdef double complex m00 = m[0, 0], m01 = m[0, 1]
    cdef double complex m10 = m[1, 0], m11 = m[1, 1]
    cdef Py_ssize_t dim = 1 << num_qubits
    cdef Py_ssize_t bit = 1 << (num_qubits - 1 - qubit)
    cdef Py_ssize_t i0, i1, base, low, high
    cdef double complex a, b
    for base in range(dim >> 1):
        low = base & (bit - 1)
        high = (base ^ low) << 1
        i0 = high | low
        i1 = i0 | bit
        a = state[i0]
        b = state[i1]
        state[i0] = m00 * a + m01 * b
        state[i1] = m10 * a + m11 * b


def apply_rz(complex[::1] state, int num_qubits, int qubit, double angle):
    cdef double complex p0 = cos(0.5 * angle) - 1j * sin(0.5 * angle)
    cdef double complex p1 = cos(0.5 * angle) + 1j * sin(0.5 * angle)
    cdef Py_ssize_t dim = 1 << num_qubits
    cdef Py_ssize_t bit = 1 << (num_qubits - 1 - qubit)
    cdef Py_ssize_t i
    for i in range(dim):
        if i & bit:
            state[i] = state[i] * p1
        else:
            state[i] = state[i] * p0


def apply_cz(complex[::1] state, int num_qubits, int q0, int q1):
    cdef Py_ssize_t dim = 1 << num_qubits
    cdef Py_ssize_t b0 = 1 << (num_qubits - 1 - q0)
    cdef Py_ssize_t b1 = 1 << (num_qubits - 1 - q1)
    cdef Py_ssize_t mask = b0 | b1
    cdef Py_ssize_t i
    for i in range(dim):
        if (i & mask) == mask:
            state[i] = -state[i]
