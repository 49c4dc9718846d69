"""TOML experiment configs: defaults, validation, cross-field rules."""

import numpy as np
import pytest

from thermospin import parse_config
from thermospin.errors import ParseError, ValidationError

MINIMAL = """
[model]
kind = "tfim"
lattice = "ring"
size = 4
g = 1.0
"""


def write(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestDefaults:
    def test_minimal_config(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL))
        assert cfg.N == 4
        assert cfg.M_policy == "dos"
        assert cfg.window_method == "oracle"
        assert cfg.protocol == "exact_only"
        assert cfg.estimator.seed == 0
        assert cfg.T_count == 64 and cfg.T_spacing == "log"
        assert cfg.T_min == 0.1 and cfg.T_max == 10.0
        grid = cfg.temperature_grid()
        assert grid[0] == pytest.approx(0.1) and grid[-1] == pytest.approx(10)
        assert np.all(np.diff(np.log(grid)) > 0)

    def test_echo_deterministic(self, tmp_path):
        a = parse_config(write(tmp_path, MINIMAL, "a.toml")).echo_json()
        b = parse_config(write(tmp_path, MINIMAL, "b.toml")).echo_json()
        assert a == b

    def test_trotter_policy(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL))
        assert cfg.trotter_steps(3) == 1
        cfg2 = parse_config(write(tmp_path, MINIMAL + """
[qkfe]
M_policy = "match_order"
""", "m.toml"))
        assert cfg2.trotter_steps(3) == 3
        assert cfg2.trotter_steps(0) == 1

    def test_overrides(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL),
                           overrides={"protocol.seed": 99,
                                      "output.directory": "elsewhere"})
        assert cfg.estimator.seed == 99
        assert cfg.out_dir == "elsewhere"


class TestValidation:
    def test_bad_toml(self, tmp_path):
        with pytest.raises(ParseError):
            parse_config(write(tmp_path, "[model\nkind ="))

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ValidationError, match="unknown section"):
            parse_config(write(tmp_path, MINIMAL + "\n[extras]\nx = 1\n"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ValidationError, match="unknown keys"):
            parse_config(write(tmp_path, MINIMAL + "\n[qkfe]\ncutoff = 8\n"))

    def test_missing_g(self, tmp_path):
        with pytest.raises(ValidationError, match="model.g"):
            parse_config(write(tmp_path, """
[model]
kind = "tfim"
lattice = "ring"
size = 4
"""))

    def test_bad_model_kind(self, tmp_path):
        with pytest.raises(ValidationError):
            parse_config(write(tmp_path, """
[model]
kind = "heisenberg"
lattice = "ring"
size = 4
"""))

    def test_bad_temperature_grid(self, tmp_path):
        with pytest.raises(ValidationError, match="temperature"):
            parse_config(write(tmp_path, MINIMAL + """
[temperature]
min = 2.0
max = 1.0
"""))

    def test_wrong_type(self, tmp_path):
        with pytest.raises(ValidationError, match="wrong type"):
            parse_config(write(tmp_path, MINIMAL + """
[qkfe]
N = "four"
"""))


class TestCrossValidation:
    def test_reference_state_needs_u1(self, tmp_path):
        with pytest.raises(ValidationError, match="symmetry|U\\(1\\)"):
            parse_config(write(tmp_path, MINIMAL + """
[protocol]
kind = "reference_state"
"""))

    def test_reference_state_on_xy_ok(self, tmp_path):
        cfg = parse_config(write(tmp_path, """
[model]
kind = "xy"
lattice = "grid"
rows = 2
cols = 2

[protocol]
kind = "reference_state"
"""))
        assert cfg.protocol == "reference_state"

    def test_virtual_copy_needs_bipartite_tfim(self, tmp_path):
        with pytest.raises(ValidationError):
            parse_config(write(tmp_path, """
[model]
kind = "tfim"
lattice = "ring"
size = 5
g = 1.0

[protocol]
kind = "virtual_copy"
"""))

    def test_lzne_even_digital_r_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            parse_config(write(tmp_path, MINIMAL + """
[protocol]
kind = "virtual_copy"

[mitigation]
method = "lzne"
r_pair = [1.0, 2.0]
"""))

    def test_lzne_subset_fractional_r_allowed(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL + """
[protocol]
kind = "virtual_copy"

[mitigation]
method = "lzne"
r_pair = [1.0, 1.25]
subset_k = 1
"""))
        assert cfg.plan.subset_k == 1

    def test_exhaustive_size_limit(self, tmp_path):
        with pytest.raises(ValidationError):
            parse_config(write(tmp_path, """
[model]
kind = "tfim"
lattice = "ring"
size = 6
g = 1.0

[protocol]
kind = "virtual_copy"
mode = "exhaustive"
"""))

    def test_observable_parsed(self, tmp_path):
        cfg = parse_config(write(tmp_path, MINIMAL + """
[observable]
sites = [[0, "Z"], [1, "Z"]]
"""))
        assert cfg.observable.sites == ((0, "Z"), (1, "Z"))
