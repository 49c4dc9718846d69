"""Exact-diagonalization oracle: spectra, expansion moments, thermodynamics.

Everything here is ground truth for the rest of the package.  Thermodynamic
derivatives are evaluated from Gibbs energy moments (never finite
differences), with k_B = 1 and energies in units of the coupling J.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveTemperature, TooLarge, WindowViolation
from .model import DENSE_LIMIT, HamiltonianSpec, PauliTerm, RescaleWindow


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray | None = None  # columns, when requested

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


@dataclass(frozen=True)
class ExactMoments:
    """Expansion moments at orders 0..N.

    f: Re Tr[exp(-i n pi H~)] / D
    f_c: |Tr[exp(-i n pi H~)]|^2 / D^2
    d, d_c: observable analogues (present when an observable was supplied).
    """

    f: np.ndarray
    f_c: np.ndarray
    d: np.ndarray | None = None
    d_c: np.ndarray | None = None

    @property
    def order(self) -> int:
        return len(self.f) - 1


def diagonalize(h: HamiltonianSpec, vectors: bool = False) -> Spectrum:
    if h.num_qubits > DENSE_LIMIT:
        raise TooLarge(f"L={h.num_qubits} exceeds dense limit {DENSE_LIMIT}")
    hm = h.dense()
    if vectors:
        ev, evec = np.linalg.eigh(hm)
        return Spectrum(eigenvalues=ev, eigenvectors=evec)
    return Spectrum(eigenvalues=np.linalg.eigvalsh(hm))


def _phases(spec: Spectrum, window: RescaleWindow, N: int) -> np.ndarray:
    """Tr[exp(-i n pi H~)] for n = 0..N, with a window containment check."""
    eps = window.rescale(spec.eigenvalues)
    if eps.min() < -1e-9 or eps.max() > 1 + 1e-9:
        raise WindowViolation(
            f"rescaled eigenvalues in [{eps.min():.3g}, {eps.max():.3g}]"
        )
    n = np.arange(N + 1)[:, None]
    return np.exp(-1j * n * np.pi * eps[None, :]).sum(axis=1)


def exact_moments(spec: Spectrum, window: RescaleWindow, N: int) -> ExactMoments:
    tr = _phases(spec, window, N)
    D = spec.dim
    return ExactMoments(f=tr.real / D, f_c=np.abs(tr) ** 2 / D**2)


def exact_observable_moments(h: HamiltonianSpec, spec: Spectrum,
                             window: RescaleWindow, obs: PauliTerm,
                             N: int) -> ExactMoments:
    if spec.eigenvectors is None:
        spec = diagonalize(h, vectors=True)
    eps = window.rescale(spec.eigenvalues)
    if eps.min() < -1e-9 or eps.max() > 1 + 1e-9:
        raise WindowViolation("window does not enclose the spectrum")
    D = spec.dim
    om = spec.eigenvectors.conj().T @ obs.matrix(h.num_qubits) @ spec.eigenvectors
    diag = np.diag(om)
    n = np.arange(N + 1)[:, None]
    fwd = np.exp(1j * n * np.pi * eps[None, :])  # exp(+i n pi eps_k)
    tr_o_fwd = fwd @ diag            # Tr[O exp(+i n pi H~)]
    tr_o_bwd = fwd.conj() @ diag     # Tr[O exp(-i n pi H~)]
    tr = fwd.conj().sum(axis=1)
    d = tr_o_bwd.real / D
    d_c = (tr_o_fwd * tr_o_bwd).real / D**2  # O Hermitian: O^dag = O
    return ExactMoments(f=tr.real / D, f_c=np.abs(tr) ** 2 / D**2, d=d, d_c=d_c)


@dataclass(frozen=True)
class ThermoCurve:
    T: np.ndarray
    F: np.ndarray
    S: np.ndarray
    C: np.ndarray
    F_err: np.ndarray | None = None
    S_err: np.ndarray | None = None
    C_err: np.ndarray | None = None

    def to_csv(self) -> str:
        """17-significant-digit CSV; round-trips binary doubles."""
        buf = io.StringIO()
        buf.write("T,F,S,C,F_err,S_err,C_err\n")
        ferr = self.F_err if self.F_err is not None else np.zeros_like(self.T)
        serr = self.S_err if self.S_err is not None else np.zeros_like(self.T)
        cerr = self.C_err if self.C_err is not None else np.zeros_like(self.T)
        for row in zip(self.T, self.F, self.S, self.C, ferr, serr, cerr):
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()


def exact_thermo(spec: Spectrum, T_grid) -> ThermoCurve:
    """F, S, C from exact spectral sums (energy moments under Gibbs weights)."""
    T = np.asarray(T_grid, dtype=float)
    if np.any(T <= 0):
        raise NonPositiveTemperature("all temperatures must be positive")
    E = spec.eigenvalues
    # Shift by the ground state for overflow-free Boltzmann weights.
    E0 = E[0]
    beta = 1.0 / T
    expw = np.exp(-np.outer(beta, E - E0))  # (nT, dim)
    Z0 = expw.sum(axis=1)
    Emean = (expw * E).sum(axis=1) / Z0
    E2mean = (expw * E**2).sum(axis=1) / Z0
    F = E0 - T * np.log(Z0)
    S = (Emean - F) / T
    C = (E2mean - Emean**2) / T**2
    return ThermoCurve(T=T, F=F, S=S, C=C)


def exact_observable_thermal(spec: Spectrum, obs: PauliTerm, T_grid,
                             num_qubits: int | None = None) -> np.ndarray:
    """<O>_T = Tr[O exp(-H/T)] / Z from the eigenbasis."""
    T = np.asarray(T_grid, dtype=float)
    if np.any(T <= 0):
        raise NonPositiveTemperature("all temperatures must be positive")
    if spec.eigenvectors is None:
        raise ValueError("eigenvectors required")
    L = num_qubits if num_qubits is not None else int(np.log2(spec.dim))
    om = spec.eigenvectors.conj().T @ obs.matrix(L) @ spec.eigenvectors
    diag = np.real(np.diag(om))
    E = spec.eigenvalues
    E0 = E[0]
    expw = np.exp(-np.outer(1.0 / T, E - E0))
    return (expw * diag).sum(axis=1) / expw.sum(axis=1)
