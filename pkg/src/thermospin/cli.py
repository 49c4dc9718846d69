"""Config-driven batch runner.

Subcommands:

* oracle          — exact-diagonalization moments and thermodynamics
* estimate        — protocol estimators (+ optional mitigation) to curves
* mitigate-replay — recompute mitigated values from a prior audit log
* compare         — max |dF(T)| between two configs (e.g. dual couplings)
* sweep           — repeat a run while varying one config key over a list

All outputs are deterministic for a fixed config and seed: CSV numbers use 17
significant digits, JSON keys are sorted, and wall-clock timings are only
emitted when THERMOSPIN_TIMINGS=1.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import exact, expansion, protocol
from .config import ExperimentConfig, parse_config
from .errors import ThermospinError
from .mitigate import gem, lzne, run_mitigated_estimate
from .model import rescale_window


def _moments_csv(orders, estimate, stderr, exact_vals) -> str:
    lines = ["n,estimate,stderr,exact,abs_delta"]
    for n, e, s, x in zip(orders, estimate, stderr, exact_vals):
        lines.append(",".join(f"{v:.17g}" for v in (n, e, s, x, abs(e - x))))
    return "\n".join(lines) + "\n"


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _curve_json(curve) -> str:
    doc = {"T": list(curve.T), "F": list(curve.F), "S": list(curve.S),
           "C": list(curve.C)}
    if curve.F_err is not None:
        doc.update({"F_err": list(curve.F_err), "S_err": list(curve.S_err),
                    "C_err": list(curve.C_err)})
    return json.dumps(doc, sort_keys=True)


def _summary(cfg: ExperimentConfig, out_dir: str, artifacts: list[str],
             excluded_T, elapsed: float, extra: dict | None = None) -> str:
    doc = {"config": cfg.echo(),
           "seed": cfg.estimator.seed,
           "artifacts": sorted(os.path.basename(a) for a in artifacts),
           "excluded_temperatures": [float(t) for t in excluded_T]}
    if extra:
        doc.update(extra)
    if os.environ.get("THERMOSPIN_TIMINGS") == "1":
        doc["timings"] = {"seconds": elapsed}
    return _write(out_dir, "summary.json",
                  json.dumps(doc, indent=2, sort_keys=True) + "\n")


def run_oracle(cfg: ExperimentConfig, out_dir: str) -> dict:
    t0 = time.monotonic()
    h = cfg.hamiltonian
    window = rescale_window(h, cfg.window_method)
    spec = exact.diagonalize(h, vectors=cfg.observable is not None)
    mom = exact.exact_moments(spec, window, cfg.N)
    curve = exact.exact_thermo(spec, cfg.temperature_grid())
    artifacts = [
        _write(out_dir, "moments.csv",
               _moments_csv(range(cfg.N + 1), mom.f, np.zeros(cfg.N + 1),
                            mom.f)),
        _write(out_dir, "thermo.csv", curve.to_csv()),
    ]
    if cfg.formats in ("json", "both"):
        artifacts.append(_write(out_dir, "thermo.json", _curve_json(curve)))
    if cfg.observable is not None:
        vals = exact.exact_observable_thermal(spec, cfg.observable,
                                              cfg.temperature_grid(),
                                              h.num_qubits)
        obs_csv = "T,value\n" + "\n".join(
            f"{t:.17g},{v:.17g}"
            for t, v in zip(cfg.temperature_grid(), vals)) + "\n"
        artifacts.append(_write(out_dir, "observable.csv", obs_csv))
    artifacts.append(_summary(cfg, out_dir, artifacts, [],
                              time.monotonic() - t0))
    return {"out_dir": out_dir, "artifacts": artifacts}


def _estimate_moments(cfg: ExperimentConfig, window, executor, out_dir):
    """(values, stderr, audit file names) for n = 0..N under the chosen
    protocol and mitigation plan."""
    h = cfg.hamiltonian
    values = np.empty(cfg.N + 1)
    errors = np.zeros(cfg.N + 1)
    audits = []
    for n in range(cfg.N + 1):
        M = cfg.trotter_steps(n)
        if cfg.plan.method != "none" and cfg.protocol == "virtual_copy":
            audit = os.path.join(out_dir, f"audit_n{n}.jsonl")
            mv = run_mitigated_estimate(h, window, n, obs=cfg.observable,
                                        plan=cfg.plan, noise=cfg.noise,
                                        cfg=cfg.estimator, M=M,
                                        audit_path=audit)
            values[n] = mv.mitigated
            audits.append(audit)
            continue
        records = []
        if cfg.protocol == "virtual_copy":
            if cfg.observable is None:
                est, err = protocol.vc_moment_estimate(
                    h, window, n, M, cfg.estimator, cfg.noise, executor,
                    records_out=records)
            else:
                est, err = protocol.vc_observable_moment(
                    h, window, n, M, cfg.observable, cfg.estimator,
                    cfg.noise, executor, records_out=records)
        else:
            est, err = protocol.rs_moment_estimate(
                h, window, n, cfg.estimator, cfg.noise, executor,
                records_out=records)
        values[n] = est
        errors[n] = err
        protocol.write_sample_log(
            records, os.path.join(out_dir, f"samples_n{n}.jsonl"))
    return values, errors, audits


def run_estimate(cfg: ExperimentConfig, out_dir: str, threads: int = 1) -> dict:
    t0 = time.monotonic()
    h = cfg.hamiltonian
    window = rescale_window(h, cfg.window_method)
    spec = exact.diagonalize(h, vectors=cfg.observable is not None)
    T = cfg.temperature_grid()
    os.makedirs(out_dir, exist_ok=True)
    kernel = expansion.jackson_coefficients(cfg.N)

    if cfg.protocol == "exact_only":
        mom = exact.exact_moments(spec, window, cfg.N)
        ms = expansion.MomentSet("exact", mom.f)
        curve = expansion.entropy_and_heat_capacity(
            ms, kernel, window, T, h.num_qubits, form="generic",
            on_negative="mask")
        values, errors, exact_vals, audits = mom.f, np.zeros(cfg.N + 1), mom.f, []
    else:
        executor = ThreadPoolExecutor(threads) if threads > 1 else None
        try:
            values, errors, audits = _estimate_moments(cfg, window, executor,
                                                       out_dir)
        finally:
            if executor is not None:
                executor.shutdown()
        if cfg.protocol == "virtual_copy":
            mom = (exact.exact_moments(spec, window, cfg.N)
                   if cfg.observable is None else
                   exact.exact_observable_moments(h, spec, window,
                                                  cfg.observable, cfg.N))
            exact_vals = mom.f_c if cfg.observable is None else mom.d_c
            form = "virtual_copy"
        else:
            exact_vals = exact.exact_moments(spec, window, cfg.N).f
            form = "reference_state"
        ms = expansion.MomentSet(form, values, stderr=errors)
        if cfg.observable is None:
            curve = expansion.propagate_error_bands(
                ms, kernel, window, T, h.num_qubits, form=form)
        else:
            curve = None

    artifacts = [_write(out_dir, "moments.csv",
                        _moments_csv(range(cfg.N + 1), values, errors,
                                     exact_vals))]
    excluded = []
    if curve is not None:
        excluded = expansion.excluded_temperatures(curve)
        artifacts.append(_write(out_dir, "thermo.csv", curve.to_csv()))
        if cfg.formats in ("json", "both"):
            artifacts.append(_write(out_dir, "thermo.json",
                                    _curve_json(curve)))
    artifacts.append(_summary(cfg, out_dir, artifacts + audits, excluded,
                              time.monotonic() - t0,
                              {"audit_logs": sorted(os.path.basename(a)
                                                    for a in audits)}))
    return {"out_dir": out_dir, "artifacts": artifacts}


def replay_audit(path: str) -> dict:
    """Recompute mitigation from an audit log; pure arithmetic on the log."""
    mitigated = []
    with open(path) as fh:
        for line in fh:
            rec = json.loads(line)
            if rec.get("outlier"):
                continue
            if "p_avg" in rec:
                mv = gem(rec["raw"], rec["est"], rec.get("est_exact", 1.0),
                         rec.get("trace_term", 0.0))
                mitigated.append(mv.mitigated)
            elif "zeta" in rec:
                z = {float(r): v for r, v in rec["zeta"].items()}
                mitigated.append(lzne(z).mitigated)
            else:
                mitigated.append(rec["raw"])
    return {"audit": os.path.basename(path),
            "mitigated_values": mitigated,
            "mean": float(np.mean(mitigated)) if mitigated else None}


def run_compare(path_a: str, path_b: str, out_dir: str) -> dict:
    cfg_a, cfg_b = parse_config(path_a), parse_config(path_b)
    if cfg_a.T_count != cfg_b.T_count:
        raise ThermospinError("temperature grids must match for compare")
    curves = []
    for cfg in (cfg_a, cfg_b):
        spec = exact.diagonalize(cfg.hamiltonian)
        curves.append(exact.exact_thermo(spec, cfg.temperature_grid()))
    dF = np.abs(curves[0].F - curves[1].F)
    doc = {"max_abs_delta_F": float(dF.max()),
           "T_at_max": float(curves[0].T[int(dF.argmax())]),
           "configs": [os.path.basename(path_a), os.path.basename(path_b)]}
    _write(out_dir, "compare.json",
           json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def run_sweep(cfg_path: str, param: str, values: list[str], out_dir: str,
              threads: int) -> dict:
    results = []
    for raw in values:
        overrides = {}
        if param == "model.grid":
            rows, cols = (int(x) for x in raw.lower().split("x"))
            overrides["model.rows"] = rows
            overrides["model.cols"] = cols
            tag = f"{rows}x{cols}"
        else:
            try:
                val = json.loads(raw)
            except json.JSONDecodeError:
                val = raw
            overrides[param] = val
            tag = str(raw)
        cfg = parse_config(cfg_path, overrides)
        sub = os.path.join(out_dir, f"sweep_{tag}")
        if cfg.protocol == "exact_only":
            run_oracle(cfg, sub)
            spec = exact.diagonalize(cfg.hamiltonian)
            curve = exact.exact_thermo(spec, cfg.temperature_grid())
        else:
            run_estimate(cfg, sub, threads)
            window = rescale_window(cfg.hamiltonian, cfg.window_method)
            mom = exact.exact_moments(exact.diagonalize(cfg.hamiltonian),
                                      window, cfg.N)
            curve = expansion.entropy_and_heat_capacity(
                expansion.MomentSet("exact", mom.f),
                expansion.jackson_coefficients(cfg.N), window,
                cfg.temperature_grid(), cfg.hamiltonian.num_qubits,
                form="generic", on_negative="mask")
        c = np.nan_to_num(curve.C, nan=-np.inf)
        results.append({"value": tag, "dir": os.path.basename(sub),
                        "c_peak": float(c.max()),
                        "T_at_peak": float(curve.T[int(c.argmax())])})
    doc = {"param": param, "results": results}
    _write(out_dir, "sweep.json",
           json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return doc


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermospin")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--format", choices=("csv", "json", "both"),
                       default=None)

    common(sub.add_parser("oracle"))
    common(sub.add_parser("estimate"))
    p = sub.add_parser("mitigate-replay")
    p.add_argument("--audit", required=True, nargs="+")
    p.add_argument("--out", default=None)
    p = sub.add_parser("compare")
    p.add_argument("configs", nargs=2)
    p.add_argument("--out", default=None)
    p = sub.add_parser("sweep")
    common(p)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True,
                   help="comma-separated list, e.g. 2x2,2x3,3x3")
    return ap


def _resolve_out(args, cfg=None) -> str:
    if args.out:
        return args.out
    env = os.environ.get("THERMOSPIN_OUT")
    if env:
        return env
    return cfg.out_dir if cfg is not None else "out"


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command in ("oracle", "estimate", "sweep"):
            overrides = {}
            if args.seed is not None:
                overrides["protocol.seed"] = args.seed
            if args.format is not None:
                overrides["output.formats"] = args.format
            cfg = parse_config(args.config, overrides)
            out_dir = _resolve_out(args, cfg)
            if args.command == "oracle":
                run_oracle(cfg, out_dir)
            elif args.command == "estimate":
                run_estimate(cfg, out_dir, args.threads)
            else:
                run_sweep(args.config, args.param, args.values.split(","),
                          out_dir, args.threads)
        elif args.command == "mitigate-replay":
            out_dir = _resolve_out(args)
            docs = [replay_audit(p) for p in args.audit]
            _write(out_dir, "replay.json",
                   json.dumps({"replays": docs}, indent=2, sort_keys=True)
                   + "\n")
        elif args.command == "compare":
            run_compare(args.configs[0], args.configs[1], _resolve_out(args))
    except ThermospinError as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
