import json
import shutil
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levyou import cli
from levyou.config import apply_overrides, load_config, parse_config
from levyou.errors import AssumptionViolation, ConfigurationError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

MODEL = """
schema_version = 1
seed = 5

[model]
alpha = 1.0
gamma = { kind = "power", power = 2.0 }
sigma = { kind = "power", power = -0.75 }
z = { kind = "power", power = -1.0 }
"""

SIM = MODEL + """
[simulate]
delta = 0.05
n_max = 10
epsilon = 1.0
reps = 300
grid = { start = 0.0, stop = 1.0, num = 5 }
"""


def write(tmp_path, text, name="exp.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestConfig:
    def test_example_configs_parse(self):
        for p in sorted(CONFIGS.glob("*.toml")):
            load_config(p)

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError, match="simulate.bogus"):
            parse_config(SIM + "bogus = 1\n")

    def test_range_checked(self):
        with pytest.raises(ConfigurationError, match="simulate.reps"):
            parse_config(SIM, ["simulate.reps=0"])
        with pytest.raises(ConfigurationError, match="model.alpha"):
            parse_config(SIM, ["model.alpha=2.0"])

    def test_toml_error_has_line(self):
        with pytest.raises(ConfigurationError, match="line"):
            parse_config("schema_version = 1\nseed = \n")

    def test_schema_version(self):
        with pytest.raises(ConfigurationError, match="schema_version"):
            parse_config(SIM.replace("schema_version = 1", "schema_version = 2"))

    def test_overrides(self):
        cfg = parse_config(SIM, ["simulate.reps=7", "simulate.grid.num=3", "model.gamma.power=1.5"])
        assert cfg.simulate.reps == 7 and cfg.simulate.grid.num == 3
        assert cfg.model.gamma.power == 1.5
        with pytest.raises(ConfigurationError):
            apply_overrides({}, ["novalue"])

    @given(st.integers(1, 10**6 - 1))
    def test_digest_tracks_content_not_output_dir(self, reps):
        a = parse_config(SIM, [f"simulate.reps={reps}"])
        b = parse_config(SIM, [f"simulate.reps={reps}", 'output_dir="elsewhere"'])
        assert a.digest() == b.digest()
        assert a.digest() != parse_config(SIM, [f"simulate.reps={reps + 1}"]).digest()


class TestRun:
    def test_criteria_example(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert cli.main(["criteria", str(CONFIGS / "criteria.toml"), "-o", str(out)]) == 0
        text = (out / "criteria.txt").read_text()
        assert "cylindrically càdlàg but not H-càdlàg" in text
        manifest = json.loads((out / "manifest.json").read_text())
        assert text.startswith(f"# manifest: {manifest['config_hash']}")
        assert manifest["seed"] == 7 and "numpy" in manifest["versions"]

    def test_reps_zero_exits_one(self, tmp_path, capsys):
        p = write(tmp_path, SIM)
        assert cli.main(["simulate", str(p), "--set", "simulate.reps=0", "-o", str(tmp_path / "o")]) == 1
        assert "simulate.reps" in capsys.readouterr().err
        assert not (tmp_path / "o").exists()

    def test_missing_section_and_file(self, tmp_path):
        p = write(tmp_path, MODEL)
        assert cli.main(["simulate", str(p), "-o", str(tmp_path / "o")]) == 1
        assert cli.main(["criteria", str(tmp_path / "missing.toml")]) == 1

    def test_assumption_violation_exits_two(self, tmp_path, monkeypatch, capsys):
        def boom(*args):
            raise AssumptionViolation("int g(a, x)^alpha m(dx) is not finite")
        monkeypatch.setitem(cli.HANDLERS, "criteria", boom)
        assert cli.main(["criteria", str(write(tmp_path, MODEL)), "-o", str(tmp_path / "o")]) == 2
        assert "not finite" in capsys.readouterr().err

    def test_verification_failure_exits_three(self, tmp_path):
        text = MODEL + """
[verify_supbound]
windows = [[1, 3]]
reps = 1000
c_cal = 1e-9
"""
        p = write(tmp_path, text)
        assert cli.main(["verify-supbound", str(p), "-o", str(tmp_path / "o")]) == 3
        rep = json.loads((tmp_path / "o" / "sup_bound_1_3.json").read_text())
        assert rep["passed"] is False

    def test_env_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LEVYOU_OUTPUT_DIR", str(tmp_path / "env"))
        p = write(tmp_path, SIM)
        assert cli.main(["simulate", str(p), "--set", "simulate.reps=20"]) == 0
        files = sorted(f.name for f in (tmp_path / "env").iterdir())
        assert files == ["ecf.tsv", "manifest.json", "paths.tsv", "summary.json"]

    def test_outputs_have_headers_and_hash(self, tmp_path):
        p = write(tmp_path, SIM)
        out = tmp_path / "o"
        assert cli.main(["simulate", str(p), "-o", str(out)]) == 0
        h = json.loads((out / "manifest.json").read_text())["config_hash"]
        for f in out.iterdir():
            if f.name == "manifest.json":
                continue
            body = f.read_text()
            assert h in body
            if f.suffix == ".tsv":
                header = [ln for ln in body.splitlines() if not ln.startswith("#")][0]
                assert header.split("\t")[0] in ("rep", "theta")
        rows = [ln.split("\t") for ln in (out / "paths.tsv").read_text().splitlines()
                if not ln.startswith("#")]
        assert rows[0] == ["rep", "time", "value", "large", "martingale", "remainder"]
        data = np.array(rows[1:], dtype=float)
        np.testing.assert_allclose(data[:, 2], data[:, 3] + data[:, 4] - data[:, 5], atol=1e-12)

    def test_rerun_byte_identical_across_workers(self, tmp_path):
        p = write(tmp_path, SIM)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["simulate", str(p), "-o", str(a), "-w", "1"]) == 0
        assert cli.main(["simulate", str(p), "-o", str(b), "-w", "3"]) == 0
        for f in a.iterdir():
            assert f.read_bytes() == (b / f.name).read_bytes()

    def test_stable_integral_small(self, tmp_path):
        p = write(tmp_path, """
schema_version = 1
seed = 3
[stable_integral]
alpha = 1.5
domain = { kind = "discrete", points = [0.2, 0.6], weights = [0.5, 0.5] }
kernel = { name = "indicator" }
delta = 0.05
reps = 200
grid = { points = [0.5, 1.0] }
""")
        assert cli.main(["stable-integral", str(p), "-o", str(tmp_path / "o")]) == 0
        s = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert s["scale_parameter"] == pytest.approx(1.0)
