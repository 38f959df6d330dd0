import subprocess
import sys
from pathlib import Path

import pytest

from dlab.cli import REQUIRED, format_value, load_config, run
from dlab.errors import ConfigError
from dlab.experiments import EXPERIMENTS
from dlab.fieldio import read_manifest

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_shipped_configs_load(name):
    params = load_config(CONFIGS / f"{name}.cfg", name)
    assert set(REQUIRED[name]) <= set(params)


def test_missing_key_is_a_usage_error_naming_it(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "eps = 0.1\na = 1.0\n")
    assert run(["decoherence", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "a_prime_list" in capsys.readouterr().err


def test_unknown_and_unparsable_keys(tmp_path):
    with pytest.raises(ConfigError, match="bogus"):
        load_config(write_cfg(tmp_path, "eps=0.1\na=1\na_prime_list=1.1\nbogus=3\n"), "decoherence")
    with pytest.raises(ConfigError, match="eps"):
        load_config(write_cfg(tmp_path, "eps=abc\na=1\na_prime_list=1.1\n"), "decoherence")


def test_outputs_and_manifest(tmp_path):
    out = tmp_path / "o"
    assert run(["decoherence", "--config", str(CONFIGS / "decoherence.cfg"), "--out", str(out)]) == 0
    text = (out / "report.csv").read_text()
    assert "summary_key,value" in text
    m = read_manifest(out / "manifest.txt")
    assert m["experiment"] == "decoherence" and m["param.eps"] == format_value(0.1)
    assert "version" in m and m["seed"] == "none"
    assert not any("time" in k or "date" in k for k in m)
    assert list((out / "plots").glob("*.svg"))


def test_fixed_seed_gives_byte_identical_report(tmp_path):
    cfg = write_cfg(tmp_path, "norm=0.5\nT=0.05\nprobes=1\nnum_points=256\n")
    outs = []
    for tag in ("a", "b", "c"):
        seed = "11" if tag != "c" else "12"
        assert run(["kdv-endpoint", "--config", str(cfg), "--out", str(tmp_path / tag), "--seed", seed]) == 0
        outs.append((tmp_path / tag / "report.csv").read_bytes())
    assert outs[0] == outs[1] and outs[0] != outs[2]
    assert read_manifest(tmp_path / "a" / "manifest.txt")["seed"] == "11"
    assert (tmp_path / "a" / "plots" / "lipschitz.svg").exists()


def test_flags_checked_against_experiment(tmp_path, capsys):
    cfg = CONFIGS / "decoherence.cfg"
    assert run(["decoherence", "--config", str(cfg), "--out", str(tmp_path), "--resolution", "64"]) == 2
    assert run(["decoherence", "--config", str(cfg), "--out", str(tmp_path), "--exact"]) == 2
    assert run(["decoherence", "--config", str(cfg), "--out", str(tmp_path), "--seed", "3"]) == 2
    assert run(["decoherence", "--config", str(cfg), "--out", str(tmp_path), "--seed", str(2**64)]) == 2
    capsys.readouterr()


def test_resolution_flag_reaches_the_experiment(tmp_path):
    cfg = write_cfg(tmp_path, "delta_list=0.2,0.1\na=1.0\nnum_points=512\n")
    assert run(["smalldispersion", "--config", str(cfg), "--out", str(tmp_path / "o"), "--resolution", "256"]) == 0
    assert read_manifest(tmp_path / "o" / "manifest.txt")["param.num_points"] == "256"


def test_format_value_is_exact():
    assert format_value(0.1) == "1.000000000000e-01"
    assert format_value(float("nan")) == "nan" and format_value(float("-inf")) == "-inf"
    assert format_value(True) == "1" and format_value((1, 2.5)) == "1,2.500000000000e+00"


def test_console_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "dlab", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "a_prime_list*" in out.stdout and "kdv-endpoint" in out.stdout
