"""Shared fixtures: small reference models used across the suite."""

import numpy as np
import pytest

from thermospin import LatticeSpec, build_hamiltonian, diagonalize, rescale_window


@pytest.fixture(scope="session")
def open2():
    """Open-chain Ising model on two sites, g = J = 1; spectrum {±1, ±√5}."""
    return build_hamiltonian(LatticeSpec(kind="grid2d", rows=1, cols=2),
                             "tfim", g=1.0, J=1.0)


@pytest.fixture(scope="session")
def open2_window(open2):
    return rescale_window(open2, "oracle")


@pytest.fixture(scope="session")
def open2_spectrum(open2):
    return diagonalize(open2)


@pytest.fixture(scope="session")
def ring4():
    """Four-site Ising ring at the critical coupling."""
    return build_hamiltonian(LatticeSpec(kind="ring1d", length=4),
                             "tfim", g=1.0, J=1.0)


@pytest.fixture(scope="session")
def xy22():
    """2x2 XY model (U(1) and spin-flip symmetric)."""
    return build_hamiltonian(LatticeSpec(kind="grid2d", rows=2, cols=2), "xy")


def assert_unitary_equal(u, v, tol=1e-10):
    """Equality up to a global phase."""
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    phase = u[k] / v[k]
    assert abs(abs(phase) - 1) < tol
    assert np.max(np.abs(u - phase * v)) < tol
