"""Experiment configuration: TOML parsing, validation, and defaults.

Every run is reproducible from a single config file; unknown sections or keys
are rejected so typos fail loudly instead of silently using a default.
"""

from __future__ import annotations

import json
try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ValidationError
from .mitigate import MitigationPlan
from .model import (HamiltonianSpec, LatticeSpec, PauliTerm, build_hamiltonian,
                    symmetry_check)
from .protocol import EstimatorConfig
from .sim.noise import NoiseModel

_KNOWN = {
    "model": {"kind", "lattice", "size", "rows", "cols", "g", "J"},
    "qkfe": {"N", "M_policy", "window"},
    "protocol": {"kind", "num_random_unitaries", "shots_per_unitary", "mode",
                 "seed", "sampling_layers"},
    "noise": {"p1", "p2", "p_t"},
    "mitigation": {"method", "r_pair", "subset_k", "subset_selections",
                   "mad_enabled", "mad_sigmas"},
    "output": {"directory", "formats"},
    "temperature": {"min", "max", "count", "spacing"},
    "observable": {"sites"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    hamiltonian: HamiltonianSpec
    N: int
    M_policy: str          # "dos" (M=1) | "match_order" (M=n)
    window_method: str
    protocol: str          # exact_only | virtual_copy | reference_state
    estimator: EstimatorConfig
    noise: NoiseModel
    plan: MitigationPlan
    out_dir: str
    formats: str
    T_min: float
    T_max: float
    T_count: int
    T_spacing: str
    observable: PauliTerm | None = None

    def temperature_grid(self) -> np.ndarray:
        if self.T_spacing == "log":
            return np.geomspace(self.T_min, self.T_max, self.T_count)
        return np.linspace(self.T_min, self.T_max, self.T_count)

    def trotter_steps(self, n: int) -> int:
        return max(1, n) if self.M_policy == "match_order" else 1

    def echo(self) -> dict:
        """Deterministic resolved-config dictionary for summary output."""
        lat = self.hamiltonian.lattice
        doc = {
            "model": {"kind": self.hamiltonian.model,
                      "lattice": lat.kind,
                      "size": (lat.length if lat.kind == "ring1d"
                               else [lat.rows, lat.cols]),
                      "g": self.hamiltonian.g, "J": self.hamiltonian.J},
            "qkfe": {"N": self.N, "M_policy": self.M_policy,
                     "window": self.window_method},
            "protocol": {"kind": self.protocol,
                         "num_random_unitaries": self.estimator.num_random_unitaries,
                         "shots_per_unitary": self.estimator.shots_per_unitary,
                         "mode": self.estimator.mode,
                         "seed": self.estimator.seed,
                         "sampling_layers": self.estimator.sampling_layers},
            "noise": {"p1": self.noise.p1, "p2": self.noise.p2,
                      "p_t": self.noise.p_t},
            "mitigation": {"method": self.plan.method,
                           "r_pair": list(self.plan.r_pair),
                           "subset_k": self.plan.subset_k,
                           "subset_selections": self.plan.subset_selections,
                           "mad_enabled": self.plan.mad_enabled,
                           "mad_sigmas": self.plan.mad_sigmas},
            "output": {"directory": self.out_dir, "formats": self.formats},
            "temperature": {"min": self.T_min, "max": self.T_max,
                            "count": self.T_count, "spacing": self.T_spacing},
        }
        if self.observable is not None:
            doc["observable"] = {"sites": [[q, ax] for q, ax
                                           in self.observable.sites]}
        return doc

    def echo_json(self) -> str:
        return json.dumps(self.echo(), indent=2, sort_keys=True)


def _get(section: dict, key: str, default, kind=None):
    v = section.get(key, default)
    if kind is not None and v is not None and not isinstance(v, kind):
        raise ValidationError(f"field {key!r} has wrong type")
    return v


def parse_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Load and fully validate a TOML experiment config.

    overrides maps "section.key" to replacement values (CLI flags).
    """
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    for section, keys in doc.items():
        if section not in _KNOWN:
            raise ValidationError(f"unknown section [{section}]")
        if not isinstance(keys, dict):
            raise ValidationError(f"[{section}] must be a table")
        unknown = set(keys) - _KNOWN[section]
        if unknown:
            raise ValidationError(
                f"unknown keys in [{section}]: {sorted(unknown)}")
    for dotted, value in (overrides or {}).items():
        section, key = dotted.split(".", 1)
        doc.setdefault(section, {})[key] = value

    model = doc.get("model", {})
    kind = _get(model, "kind", None, str)
    if kind not in ("tfim", "xy"):
        raise ValidationError("model.kind must be 'tfim' or 'xy'")
    lat_kind = _get(model, "lattice", "ring", str)
    if lat_kind == "ring":
        lattice = LatticeSpec("ring1d", length=_get(model, "size", 0, int))
    elif lat_kind == "grid":
        lattice = LatticeSpec("grid2d", rows=_get(model, "rows", 0, int),
                              cols=_get(model, "cols", 0, int))
    else:
        raise ValidationError("model.lattice must be 'ring' or 'grid'")
    g = model.get("g")
    J = float(_get(model, "J", 1.0, (int, float)))
    if kind == "tfim" and g is None:
        raise ValidationError("model.g is required for tfim")
    h = build_hamiltonian(lattice, kind,
                          g=None if g is None else float(g), J=J)

    qkfe = doc.get("qkfe", {})
    N = _get(qkfe, "N", 4, int)
    if N < 1:
        raise ValidationError("qkfe.N must be >= 1")
    M_policy = _get(qkfe, "M_policy", "dos", str)
    if M_policy not in ("dos", "match_order"):
        raise ValidationError("qkfe.M_policy must be 'dos' or 'match_order'")
    window_method = _get(qkfe, "window", "oracle", str)
    if window_method not in ("oracle", "norm_bound"):
        raise ValidationError("qkfe.window must be 'oracle' or 'norm_bound'")

    proto = doc.get("protocol", {})
    protocol = _get(proto, "kind", "exact_only", str)
    if protocol not in ("exact_only", "virtual_copy", "reference_state"):
        raise ValidationError("protocol.kind must be exact_only, "
                              "virtual_copy, or reference_state")
    try:
        estimator = EstimatorConfig(
            num_random_unitaries=_get(proto, "num_random_unitaries", 100, int),
            shots_per_unitary=_get(proto, "shots_per_unitary", 100, int),
            seed=_get(proto, "seed", 0, int),
            mode=_get(proto, "mode", "sampled", str),
            sampling_layers=_get(proto, "sampling_layers", 0, int))
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    noise_sec = doc.get("noise", {})
    try:
        noise = NoiseModel(p1=float(_get(noise_sec, "p1", 0.0, (int, float))),
                           p2=float(_get(noise_sec, "p2", 0.0, (int, float))),
                           p_t=float(_get(noise_sec, "p_t", 0.0, (int, float))))
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc

    mit = doc.get("mitigation", {})
    r_pair = _get(mit, "r_pair", [1.0, 3.0], list)
    try:
        plan = MitigationPlan(
            method=_get(mit, "method", "none", str),
            r_pair=(float(r_pair[0]), float(r_pair[1])),
            subset_k=_get(mit, "subset_k", None, int),
            subset_selections=_get(mit, "subset_selections", 8, int),
            mad_enabled=_get(mit, "mad_enabled", False, bool),
            mad_sigmas=float(_get(mit, "mad_sigmas", 2.0, (int, float))))
    except (ValueError, IndexError) as exc:
        raise ValidationError(str(exc)) from exc

    out = doc.get("output", {})
    out_dir = _get(out, "directory", "out", str)
    formats = _get(out, "formats", "csv", str)
    if formats not in ("csv", "json", "both"):
        raise ValidationError("output.formats must be csv, json, or both")

    temp = doc.get("temperature", {})
    T_min = float(_get(temp, "min", 0.1, (int, float)))
    T_max = float(_get(temp, "max", 10.0, (int, float)))
    T_count = _get(temp, "count", 64, int)
    T_spacing = _get(temp, "spacing", "log", str)
    if T_min <= 0 or T_max <= T_min:
        raise ValidationError("temperature grid must satisfy 0 < min < max")
    if T_count < 2:
        raise ValidationError("temperature.count must be >= 2")
    if T_spacing not in ("linear", "log"):
        raise ValidationError("temperature.spacing must be linear or log")

    observable = None
    if "observable" in doc:
        sites = doc["observable"].get("sites")
        try:
            observable = PauliTerm(1.0, tuple((int(q), str(ax))
                                              for q, ax in sites))
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad observable.sites: {exc}") from exc

    cfg = ExperimentConfig(hamiltonian=h, N=N, M_policy=M_policy,
                           window_method=window_method, protocol=protocol,
                           estimator=estimator, noise=noise, plan=plan,
                           out_dir=out_dir, formats=formats, T_min=T_min,
                           T_max=T_max, T_count=T_count, T_spacing=T_spacing,
                           observable=observable)
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: ExperimentConfig) -> None:
    h = cfg.hamiltonian
    if cfg.protocol in ("virtual_copy", "reference_state"):
        rep = symmetry_check(h)
        if cfg.protocol == "reference_state":
            if not rep.has_u1:
                raise ValidationError(
                    "reference_state requires total-S_z (U(1)) symmetry, "
                    f"absent for this {h.model} model")
            if not rep.has_spinflip:
                raise ValidationError(
                    "reference_state requires global spin-flip symmetry")
        if cfg.protocol == "virtual_copy" and h.model == "tfim" \
                and not rep.has_anticommuting:
            raise ValidationError(
                "virtual_copy on tfim requires the anticommuting sublattice "
                "symmetry (bipartite lattice)")
    if cfg.plan.method == "lzne" and h.model == "tfim" \
            and cfg.plan.subset_k is None:
        r2 = cfg.plan.r_pair[1]
        if abs(r2 - round(r2)) > 1e-12 or int(round(r2)) % 2 == 0:
            raise ValidationError(
                f"lzne r = {r2} unreachable on the digital path: use an odd "
                "repetition factor or a subset schedule")
    if cfg.estimator.mode == "exhaustive" and h.num_qubits > 4:
        raise ValidationError("exhaustive estimation is limited to L <= 4")
