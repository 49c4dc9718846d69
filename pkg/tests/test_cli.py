"""End-to-end runs of the command-line entry point."""

import json
import math
import os

import numpy as np
import pytest

from thermospin.cli import main


ORACLE_TOML = """\
[model]
kind = "tfim"
lattice = "ring"
size = 4
g = 1.0
J = 1.0

[qkfe]
N = 4

[temperature]
min = 0.1
max = 200.0
count = 32
"""

ESTIMATE_TOML = """\
[model]
kind = "tfim"
lattice = "ring"
size = 2
g = 1.0
J = 1.0

[qkfe]
N = 2

[protocol]
kind = "virtual_copy"
num_random_unitaries = 6
shots_per_unitary = 16
seed = 3

[temperature]
count = 8
"""

GEM_TOML = """\
[model]
kind = "tfim"
lattice = "ring"
size = 2
g = 1.0
J = 1.0

[qkfe]
N = 2

[protocol]
kind = "virtual_copy"
num_random_unitaries = 4
seed = 7

[noise]
p2 = 0.01

[mitigation]
method = "gem"
"""

GRID_TOML = """\
[model]
kind = "tfim"
lattice = "grid"
rows = 2
cols = 2
g = 3.0
J = 1.0

[qkfe]
N = 8

[temperature]
min = 0.3
max = 10.0
count = 48
"""


def _write_cfg(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestOracle:
    def test_artifacts_and_exact_deltas(self, tmp_path):
        cfg = _write_cfg(tmp_path, ORACLE_TOML)
        out = tmp_path / "out"
        assert main(["oracle", "--config", cfg, "--out", str(out)]) == 0
        for name in ("moments.csv", "thermo.csv", "summary.json"):
            assert (out / name).exists()
        rows = (out / "moments.csv").read_text().strip().splitlines()
        assert rows[0] == "n,estimate,stderr,exact,abs_delta"
        assert len(rows) == 6  # header + orders 0..4
        for row in rows[1:]:
            assert float(row.split(",")[-1]) == 0.0

    def test_entropy_endpoint_is_l_ln2(self, tmp_path):
        cfg = _write_cfg(tmp_path, ORACLE_TOML)
        out = tmp_path / "out"
        main(["oracle", "--config", cfg, "--out", str(out)])
        last = (out / "thermo.csv").read_text().strip().splitlines()[-1]
        T, F, S = (float(x) for x in last.split(",")[:3])
        assert T == pytest.approx(200.0)
        assert S == pytest.approx(4 * math.log(2), abs=1e-3)

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = _write_cfg(tmp_path, ORACLE_TOML)
        outs = []
        for d in ("a", "b"):
            out = tmp_path / d
            main(["oracle", "--config", cfg, "--out", str(out)])
            outs.append(out)
        for name in ("moments.csv", "thermo.csv", "summary.json"):
            assert _read(outs[0] / name) == _read(outs[1] / name)

    def test_json_format_adds_curve_document(self, tmp_path):
        cfg = _write_cfg(tmp_path, ORACLE_TOML)
        out = tmp_path / "out"
        main(["oracle", "--config", cfg, "--out", str(out),
              "--format", "both"])
        doc = json.loads((out / "thermo.json").read_text())
        assert set(doc) == {"T", "F", "S", "C"}
        assert len(doc["T"]) == 32


class TestEstimate:
    def test_artifacts(self, tmp_path):
        cfg = _write_cfg(tmp_path, ESTIMATE_TOML)
        out = tmp_path / "out"
        assert main(["estimate", "--config", cfg, "--out", str(out)]) == 0
        for name in ("moments.csv", "thermo.csv", "summary.json",
                     "samples_n0.jsonl", "samples_n2.jsonl"):
            assert (out / name).exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["seed"] == 3
        assert summary["config"]["protocol"]["kind"] == "virtual_copy"
        assert "timings" not in summary

    def test_determinism_and_seed_sensitivity(self, tmp_path):
        cfg = _write_cfg(tmp_path, ESTIMATE_TOML)
        blobs = {}
        for tag, seed in (("a", None), ("b", None), ("c", 11)):
            out = tmp_path / tag
            argv = ["estimate", "--config", cfg, "--out", str(out)]
            if seed is not None:
                argv += ["--seed", str(seed)]
            main(argv)
            blobs[tag] = _read(out / "moments.csv")
        assert blobs["a"] == blobs["b"]
        assert blobs["a"] != blobs["c"]

    def test_parallel_matches_serial(self, tmp_path):
        cfg = _write_cfg(tmp_path, ESTIMATE_TOML)
        blobs = []
        for tag, threads in (("serial", "1"), ("par", "2")):
            out = tmp_path / tag
            main(["estimate", "--config", cfg, "--out", str(out),
                  "--threads", threads])
            blobs.append(_read(out / "moments.csv"))
        assert blobs[0] == blobs[1]

    def test_moment_zero_is_exact(self, tmp_path):
        cfg = _write_cfg(tmp_path, ESTIMATE_TOML)
        out = tmp_path / "out"
        main(["estimate", "--config", cfg, "--out", str(out)])
        n0 = (out / "moments.csv").read_text().strip().splitlines()[1]
        assert float(n0.split(",")[1]) == 1.0


class TestMitigateReplay:
    def test_replay_reproduces_mitigated_moments(self, tmp_path):
        cfg = _write_cfg(tmp_path, GEM_TOML)
        out = tmp_path / "out"
        main(["estimate", "--config", cfg, "--out", str(out)])
        audits = sorted(str(out / f"audit_n{n}.jsonl") for n in range(3))
        assert all(os.path.exists(a) for a in audits)
        replay_dir = tmp_path / "replay"
        assert main(["mitigate-replay", "--audit", *audits,
                     "--out", str(replay_dir)]) == 0
        doc = json.loads((replay_dir / "replay.json").read_text())
        means = [r["mean"] for r in doc["replays"]]
        rows = (out / "moments.csv").read_text().strip().splitlines()[1:]
        values = [float(r.split(",")[1]) for r in rows]
        np.testing.assert_allclose(means, values, atol=1e-12)


class TestCompare:
    def test_dual_couplings(self, tmp_path):
        base = ORACLE_TOML.replace('max = 200.0', 'max = 10.0')
        cfg_a = _write_cfg(tmp_path, base, "a.toml")
        cfg_b = _write_cfg(tmp_path, base.replace("g = 1.0", "g = 1.5"),
                           "b.toml")
        out = tmp_path / "cmp"
        assert main(["compare", cfg_a, cfg_b, "--out", str(out)]) == 0
        doc = json.loads((out / "compare.json").read_text())
        assert doc["configs"] == ["a.toml", "b.toml"]
        assert doc["max_abs_delta_F"] > 0.0
        assert np.isfinite(doc["max_abs_delta_F"])

    def test_mismatched_grids_fail(self, tmp_path, capsys):
        cfg_a = _write_cfg(tmp_path, ORACLE_TOML, "a.toml")
        cfg_b = _write_cfg(tmp_path,
                           ORACLE_TOML.replace("count = 32", "count = 16"),
                           "b.toml")
        rc = main(["compare", cfg_a, cfg_b, "--out", str(tmp_path / "cmp")])
        assert rc == 1
        err = json.loads(capsys.readouterr().err)
        assert "temperature grids" in err["message"]


class TestSweep:
    def test_grid_sweep_peak_grows_with_size(self, tmp_path):
        cfg = _write_cfg(tmp_path, GRID_TOML)
        out = tmp_path / "sweep"
        assert main(["sweep", "--config", cfg, "--param", "model.grid",
                     "--values", "2x2,2x3,3x3", "--out", str(out)]) == 0
        doc = json.loads((out / "sweep.json").read_text())
        tags = [r["value"] for r in doc["results"]]
        peaks = [r["c_peak"] for r in doc["results"]]
        assert tags == ["2x2", "2x3", "3x3"]
        assert peaks[0] < peaks[1] < peaks[2]
        assert (out / "sweep_2x3" / "thermo.csv").exists()


class TestFailures:
    def test_bad_config_exits_nonzero_with_json_error(self, tmp_path, capsys):
        cfg = _write_cfg(tmp_path, "[model]\nkind = 'quantum gravity'\n")
        rc = main(["oracle", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ValidationError"
        assert "model.kind" in err["message"]

    def test_unknown_key_reported(self, tmp_path, capsys):
        cfg = _write_cfg(
            tmp_path, ORACLE_TOML + "\n[protocol]\nfoo = 1\n")
        rc = main(["estimate", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == 1
        err = json.loads(capsys.readouterr().err)
        assert "foo" in err["message"]
