import io
import json
import subprocess
import sys

import pytest

from trustp2p import ConfigError, RunConfig
from trustp2p.cli import ExperimentSpec, main, parse_config, rerun_from_manifest, run_experiment
from trustp2p.engine import write_metrics_csv

TINY = """
n_peers = 60
n_edges_target = 120   # two links per joining peer
files_per_category = 20
copies_per_peer = 10
n_generations = 3
"""


class TestParse:
    def test_empty_gives_defaults(self):
        spec = parse_config("")
        assert spec.base == RunConfig()
        assert (spec.base.n_peers, spec.base.n_categories) == (6000, 32)
        assert (spec.base.degree_of_rewiring, spec.base.degree_of_deception) == (0.3, 0.1)
        assert spec.sweep == [] and spec.replicates == 1
        assert spec.points() == [{}]

    def test_sweep_expansion(self):
        spec = parse_config("pct_malicious = [0.1, 0.2, 0.4, 0.6]\n")
        assert len(spec.points()) == 4
        assert spec.points()[2] == {"pct_malicious": 0.4}

    def test_two_axes_cartesian(self):
        spec = parse_config("pct_malicious = [0.1, 0.2]\ndegree_of_rewiring = [0.0, 0.3, 0.6]\n")
        assert len(spec.points()) == 6

    def test_edge_limit_rejected(self):
        with pytest.raises(ConfigError) as e:
            parse_config("# header\nedge_limit = 0.9\n")
        assert e.value.line == 2
        assert e.value.keys == ["edge_limit"]
        assert "> 1" in str(e.value)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as e:
            parse_config("n_peers = 10\nbogus = 3\n")
        assert e.value.line == 2 and "bogus" in str(e.value)

    def test_malformed_line(self):
        with pytest.raises(ConfigError) as e:
            parse_config("n_peers 10\n")
        assert e.value.line == 1

    def test_wrong_type(self):
        with pytest.raises(ConfigError) as e:
            parse_config("n_peers = 'many'\n")
        assert e.value.keys == ["n_peers"] and e.value.line == 1

    def test_bad_sweep_value(self):
        with pytest.raises(ConfigError) as e:
            parse_config("\npct_malicious = [0.1, 1.5]\n")
        assert e.value.line == 2 and "pct_malicious" in str(e.value)

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            parse_config("n_peers = 10\nn_peers = 20\n")

    def test_special_keys_and_bools(self):
        spec = parse_config("replicates = 3\noutput_dir = out/run1\ndebug = true\n")
        assert spec.replicates == 3
        assert str(spec.output_dir) == "out/run1"
        assert spec.base.debug is True

    @pytest.mark.parametrize("v", ["0", "-1", "1.5", "true"])
    def test_bad_replicates(self, v):
        with pytest.raises(ConfigError):
            parse_config(f"replicates = {v}\n")


def test_config_dict_round_trip():
    cfg = RunConfig(n_peers=77, n_edges_target=231, pct_malicious=0.25, debug=True)
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError) as e:
        RunConfig.from_dict({"n_peers": 10, "nope": 1})
    assert e.value.keys == ["nope"]


def test_two_replicates_one_point(tmp_path):
    spec = parse_config(TINY + "replicates = 2\npct_malicious = [0.2]\n")
    spec.output_dir = tmp_path
    assert run_experiment(spec) == 0
    files = sorted(p.name for p in tmp_path.iterdir())
    assert files == [
        "manifest.json",
        "pct_malicious=0.2.mean.csv",
        "pct_malicious=0.2__seed0.csv",
        "pct_malicious=0.2__seed1.csv",
    ]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["complete"] is True
    assert [r["seed"] for r in manifest["runs"]] == [0, 1]
    assert all(r["status"] == "ok" for r in manifest["runs"])
    mean = (tmp_path / "pct_malicious=0.2.mean.csv").read_text().splitlines()
    assert mean[0].startswith("generation,ar_good,")
    assert len(mean) == 4


def test_rerun_is_byte_identical_and_manifest_reproduces(tmp_path):
    text = TINY + "replicates = 2\npct_malicious = [0.1, 0.3]\n"
    outs = []
    for name in ("a", "b"):
        spec = parse_config(text)
        spec.output_dir = tmp_path / name
        assert run_experiment(spec) == 0
        outs.append({p.name: p.read_bytes() for p in spec.output_dir.iterdir()})
    assert outs[0] == outs[1]
    manifest_path = tmp_path / "a" / "manifest.json"
    manifest = json.loads(manifest_path.read_text())
    for i, entry in enumerate(manifest["runs"]):
        buf = io.StringIO()
        write_metrics_csv(rerun_from_manifest(manifest_path, i), buf)
        assert buf.getvalue().encode() == outs[0][entry["file"]]


def test_unwritable_output_is_nonzero(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    spec = ExperimentSpec(base=parse_config(TINY).base, output_dir=blocker / "sub")
    with pytest.raises(OSError):
        run_experiment(spec)
    assert main(["--out", str(blocker / "sub")]) == 1


def test_main_flags(tmp_path, monkeypatch):
    cfg = tmp_path / "exp.conf"
    cfg.write_text(TINY)
    monkeypatch.setenv("TRUSTP2P_LOG_LEVEL", "WARNING")
    out = tmp_path / "out"
    assert main(["--config", str(cfg), "--seed", "9", "--out", str(out), "--trace", "--dump-graph", "2"]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert "base__seed9.csv" in names
    assert "base__seed9.trace" in names
    assert "base__seed9.g2.edges" in names
    assert "base.mean.csv" in names
    edge_line = (out / "base__seed9.g2.edges").read_text().splitlines()[0].split()
    assert edge_line[2] in ("C", "M")


def test_main_reports_config_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("edge_limit = 0.9\n")
    assert main(["--config", str(cfg)]) == 2
    assert "edge_limit" in capsys.readouterr().err
    assert main(["--config", str(tmp_path / "missing.conf")]) == 2


def test_console_entry_point_help():
    r = subprocess.run([sys.executable, "-m", "trustp2p.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "--dump-graph" in r.stdout
