"""Damped cosine-series reconstruction of spectral and thermal quantities.

The density of states over the rescaled interval [0, 1] is
rho(eps) = h_0 f_0 + 2 sum_n h_n f_n cos(n pi eps), with Jackson damping
factors h_n suppressing Gibbs oscillations.  Free energy comes in three
analytic forms (generic phi-series, the composite sinh form fed by form-factor
moments, and the echo-probability form); entropy and heat capacity are
closed-form derivatives of whichever form is chosen, never numerical
differences of F.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeArgument, NonPositiveTemperature, NonPositiveX
from .exact import ThermoCurve
from .model import RescaleWindow


@dataclass(frozen=True)
class KernelCoefficients:
    N: int
    h: np.ndarray  # damping factors for n = 0..N


@dataclass(frozen=True)
class MomentSet:
    """Moment values with per-order statistics.

    protocol is one of "exact", "virtual_copy", "reference_state".
    values[n] holds f_n (or f_{n,c} / d_n depending on provenance).
    """

    protocol: str
    values: np.ndarray
    stderr: np.ndarray | None = None
    counts: np.ndarray | None = None

    @property
    def order(self) -> int:
        return len(self.values) - 1

    def errors(self) -> np.ndarray:
        if self.stderr is None:
            return np.zeros_like(self.values)
        return self.stderr


def jackson_coefficients(N: int) -> KernelCoefficients:
    """Standard Jackson damping factors h_0..h_N (h_0 = 1, decreasing)."""
    if N < 1:
        raise ValueError("N >= 1 required")
    n = np.arange(N + 1)
    q = np.pi / (N + 1)
    h = ((N - n + 1) * np.cos(q * n) + np.sin(q * n) / np.tan(q)) / (N + 1)
    return KernelCoefficients(N=N, h=h)


def dos_reconstruct(moments: MomentSet, kernel: KernelCoefficients,
                    grid) -> np.ndarray:
    eps = np.asarray(grid, dtype=float)
    N = min(moments.order, kernel.N)
    n = np.arange(N + 1)
    hf = kernel.h[: N + 1] * moments.values[: N + 1]
    cos = np.cos(np.pi * np.outer(eps, n))
    weights = np.where(n == 0, 1.0, 2.0)
    return cos @ (weights * hf)


def phi(n: int, x: float) -> float:
    """Series weight phi_n(x) with x = W / (k_B T)."""
    if x <= 0:
        raise NonPositiveX("x must be positive")
    if n == 0:
        if x < 1e-6:
            return 1.0 - x / 2 + x * x / 6  # Taylor of (1 - exp(-x)) / x
        return (1.0 - np.exp(-x)) / x
    s = -1.0 if n % 2 else 1.0
    return 2.0 * (1.0 - s * np.exp(-x)) / (x + n * n * np.pi**2 / x)


def _series_terms(form: str, h: np.ndarray, f: np.ndarray, x: float):
    """(G, G', G'') of the chosen series at one x.

    Every term is a quotient u_n/v_n (times a sign); quotient-rule derivatives
    keep S and C analytic.  The composite ("virtual_copy") form factors out
    sinh(x) for overflow-free evaluation; see _vc_log_series.
    """
    N = len(h) - 1
    n = np.arange(N + 1, dtype=float)
    sgn = np.where(np.arange(N + 1) % 2 == 1, -1.0, 1.0)  # (-1)^n
    ex = np.exp(-x)
    a = (n * np.pi) ** 2
    if form == "generic":
        u = np.where(n == 0, 1.0 - ex, 2.0 * (1.0 - sgn * ex))
        du = np.where(n == 0, ex, 2.0 * sgn * ex)
        ddu = np.where(n == 0, -ex, -2.0 * sgn * ex)
        v = np.where(n == 0, x, x + a / x)
        dv = np.where(n == 0, 1.0, 1.0 - a / x**2)
        ddv = np.where(n == 0, 0.0, 2.0 * a / x**3)
        coeff = h * f
    elif form == "reference_state":
        u = np.where(n == 0, 1.0 - ex, 1.0 - sgn * ex)
        du = np.where(n == 0, ex, sgn * ex)
        ddu = np.where(n == 0, -ex, -sgn * ex)
        v = np.where(n == 0, x, a / x + x)
        dv = np.where(n == 0, 1.0, 1.0 - a / x**2)
        ddv = np.where(n == 0, 0.0, 2.0 * a / x**3)
        coeff = h * f
    else:
        raise ValueError(f"unknown series form {form!r}")
    g = u / v
    dg = (du * v - u * dv) / v**2
    ddg = (ddu * v - u * ddv) / v**2 - 2.0 * dv * (du * v - u * dv) / v**3
    return (coeff * g).sum(), (coeff * dg).sum(), (coeff * ddg).sum()


def _vc_log_series(h: np.ndarray, f_c: np.ndarray, x: float):
    """(ln A, G'/G, G''/G) for G = sinh(x) A(x) of the composite form,

    A(x) = h_0 f_0c / x + sum (-1)^n h_n f_nc 2x / (x^2 + n^2 pi^2).
    Returns ln A (A must be positive), plus the two ratios with the sinh
    factored analytically; ln G = ln sinh(x) + ln A.
    """
    N = len(h) - 1
    n = np.arange(N + 1, dtype=float)
    sgn = np.where(np.arange(N + 1) % 2 == 1, -1.0, 1.0)
    a = (n * np.pi) ** 2
    u = np.where(n == 0, 1.0, 2.0 * x)
    du = np.where(n == 0, 0.0, 2.0)
    ddu = np.zeros(N + 1)
    v = np.where(n == 0, x, x**2 + a)
    dv = np.where(n == 0, 1.0, 2.0 * x)
    ddv = np.where(n == 0, 0.0, 2.0)
    coeff = h * f_c * np.where(n == 0, 1.0, sgn)
    A = (coeff * u / v).sum()
    dA = (coeff * (du * v - u * dv) / v**2).sum()
    ddA = (coeff * ((ddu * v - u * ddv) / v**2
                    - 2.0 * dv * (du * v - u * dv) / v**3)).sum()
    if A <= 0:
        return None
    coth = 1.0 / np.tanh(x)
    ratio1 = coth + dA / A
    ratio2 = 1.0 + 2.0 * coth * dA / A + ddA / A
    return np.log(A), ratio1, ratio2


def _log_sinh(x: float) -> float:
    return x - np.log(2.0) + np.log1p(-np.exp(-2.0 * x))


def free_energy(moments: MomentSet, kernel: KernelCoefficients,
                window: RescaleWindow, T_grid, num_qubits: int,
                form: str = "generic", on_negative: str = "raise") -> ThermoCurve:
    """F only; see entropy_and_heat_capacity for the full curve."""
    curve = entropy_and_heat_capacity(moments, kernel, window, T_grid,
                                      num_qubits, form=form,
                                      on_negative=on_negative)
    return ThermoCurve(T=curve.T, F=curve.F, S=np.full_like(curve.F, np.nan),
                       C=np.full_like(curve.F, np.nan))


def entropy_and_heat_capacity(moments: MomentSet, kernel: KernelCoefficients,
                              window: RescaleWindow, T_grid, num_qubits: int,
                              form: str = "generic",
                              on_negative: str = "raise") -> ThermoCurve:
    """F, S = -dF/dT and C = T dS/dT from closed-form series derivatives.

    on_negative: "raise" aborts on a non-positive partition-function series,
    "mask" records NaN for the offending temperatures.
    """
    T = np.asarray(T_grid, dtype=float)
    if np.any(T <= 0):
        raise NonPositiveTemperature("all temperatures must be positive")
    N = min(moments.order, kernel.N)
    h = kernel.h[: N + 1]
    f = moments.values[: N + 1]
    D = 2.0**num_qubits
    lnD = num_qubits * np.log(2.0)
    F = np.empty_like(T)
    S = np.empty_like(T)
    C = np.empty_like(T)
    bad: list[float] = []
    for i, t in enumerate(T):
        x = window.width / t
        if form == "virtual_copy":
            res = _vc_log_series(h, f, x)
            if res is None:
                bad.append(t)
                F[i] = S[i] = C[i] = np.nan
                continue
            lnA, r1, r2 = res
            lnG = _log_sinh(x) + lnA
            F[i] = -(t / 2.0) * (2.0 * lnD + lnG)
            S[i] = 0.5 * (2.0 * lnD + lnG) - 0.5 * x * r1
            C[i] = 0.5 * x**2 * (r2 - r1**2)
        else:
            g, dg, ddg = _series_terms(form, h, f, x)
            if g <= 0:
                bad.append(t)
                F[i] = S[i] = C[i] = np.nan
                continue
            lnG = np.log(g)
            r1 = dg / g
            r2 = ddg / g
            F[i] = -t * (lnD + lnG)
            if form == "generic":
                F[i] += window.e_min
            S[i] = (lnD + lnG) - x * r1
            C[i] = x**2 * (r2 - r1**2)
    if bad and on_negative == "raise":
        raise NegativeArgument(bad[0],
                               f"non-positive series sum at T in {bad}")
    curve = ThermoCurve(T=T, F=F, S=S, C=C)
    if bad:
        object.__setattr__(curve, "_excluded_T", bad)  # noqa: SLF001
    return curve


def excluded_temperatures(curve: ThermoCurve) -> list[float]:
    return list(getattr(curve, "_excluded_T", []))


def observable_thermal(d_moments: MomentSet, f_moments: MomentSet,
                       kernel: KernelCoefficients, window: RescaleWindow,
                       T_grid) -> np.ndarray:
    """<O>(T) = [sum h_n d_n phi_n] / [sum h_n f_n phi_n].

    Both series share the kernel and window, so the Hilbert dimension and the
    exp(-beta E_min) prefactors cancel in the self-consistent normalization.
    """
    if d_moments.order != f_moments.order:
        raise ValueError("moment cutoffs must match")
    T = np.asarray(T_grid, dtype=float)
    if np.any(T <= 0):
        raise NonPositiveTemperature("all temperatures must be positive")
    N = min(d_moments.order, kernel.N)
    h = kernel.h[: N + 1]
    out = np.empty_like(T)
    for i, t in enumerate(T):
        x = window.width / t
        ph = np.array([phi(n, x) for n in range(N + 1)])
        denom = (h * f_moments.values[: N + 1] * ph).sum()
        if denom <= 0:
            raise NegativeArgument(t)
        out[i] = (h * d_moments.values[: N + 1] * ph).sum() / denom
    return out


def observable_from_composite(composite_value: float) -> tuple[float, bool]:
    """Single-copy magnitude sqrt(|<O (x) O^dag>|); the sign is undetermined."""
    return float(np.sqrt(abs(composite_value))), True


def propagate_error_bands(moments: MomentSet, kernel: KernelCoefficients,
                          window: RescaleWindow, T_grid, num_qubits: int,
                          form: str = "generic") -> ThermoCurve:
    """First-order sensitivity bands: perturb each moment by its standard
    error, difference the curve, combine in quadrature."""
    base = entropy_and_heat_capacity(moments, kernel, window, T_grid,
                                     num_qubits, form=form, on_negative="mask")
    err = moments.errors()
    varF = np.zeros_like(base.F)
    varS = np.zeros_like(base.F)
    varC = np.zeros_like(base.F)
    for n in range(moments.order + 1):
        if err[n] == 0:
            continue
        vals = moments.values.copy()
        vals[n] += err[n]
        pert = entropy_and_heat_capacity(
            MomentSet(moments.protocol, vals), kernel, window, T_grid,
            num_qubits, form=form, on_negative="mask")
        varF += (pert.F - base.F) ** 2
        varS += (pert.S - base.S) ** 2
        varC += (pert.C - base.C) ** 2
    return ThermoCurve(T=base.T, F=base.F, S=base.S, C=base.C,
                       F_err=np.sqrt(varF), S_err=np.sqrt(varS),
                       C_err=np.sqrt(varC))


def bootstrap_error_bands(per_unitary_values: np.ndarray,
                          kernel: KernelCoefficients, window: RescaleWindow,
                          T_grid, num_qubits: int, form: str,
                          protocol: str, n_boot: int = 200,
                          rng=None) -> ThermoCurve:
    """Bootstrap over the unitary ensemble.

    per_unitary_values has shape (num_unitaries, N + 1): one moment vector
    per sampled unitary.  Curves are rebuilt per resample; the band is the
    pointwise standard deviation.
    """
    rng = np.random.default_rng(rng)
    m = per_unitary_values.shape[0]
    mean = per_unitary_values.mean(axis=0)
    base = entropy_and_heat_capacity(MomentSet(protocol, mean), kernel, window,
                                     T_grid, num_qubits, form=form,
                                     on_negative="mask")
    fs, ss, cs = [], [], []
    for _ in range(n_boot):
        pick = rng.integers(m, size=m)
        vals = per_unitary_values[pick].mean(axis=0)
        c = entropy_and_heat_capacity(MomentSet(protocol, vals), kernel,
                                      window, T_grid, num_qubits, form=form,
                                      on_negative="mask")
        fs.append(c.F)
        ss.append(c.S)
        cs.append(c.C)
    return ThermoCurve(T=base.T, F=base.F, S=base.S, C=base.C,
                       F_err=np.nanstd(np.array(fs), axis=0),
                       S_err=np.nanstd(np.array(ss), axis=0),
                       C_err=np.nanstd(np.array(cs), axis=0))
