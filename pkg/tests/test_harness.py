import os

import numpy as np
import pytest

from echo_lab import experiments
from echo_lab.cli import main
from echo_lab.config import load_config, parse_text
from echo_lab.errors import ConfigError
from echo_lab.experiments import run_experiment, sha256
from echo_lab.io import read_csv, write_csv

SMALL_KR = """
experiment = kr_echo
N = 512
T = 12
n_packets = 10
want_cross = true
"""


def small_cfg(tmp_path, text=SMALL_KR, name="run", extra=()):
    return parse_text(text, [f"output_dir={tmp_path / name}", *extra])


def test_csv_round_trip_full_precision(tmp_path):
    path = tmp_path / "x.csv"
    vals = np.array([0.1, 1 / 3, 2.5e-300, -7.0])
    write_csv(path, ["t", "v"], [np.arange(4), vals])
    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[0] == "t,v"
    assert "0.10000000000000001" in text
    header, data = read_csv(path)
    assert header == ["t", "v"] and np.array_equal(data["v"], vals)


def test_config_defaults_and_types():
    cfg = parse_text("experiment = kr_echo\nN = 2048\ncompare_N = 1024, 4096\nfit_window = 1:6\n")
    assert cfg["N"] == 2048 and cfg["K"] == 10.0 and cfg["sigma"] == 1.1
    assert cfg["compare_N"] == [1024, 4096] and cfg["fit_window"] == (1.0, 6.0)
    assert cfg["output_dir"] == "echo_lab_runs/kr_echo"


def test_config_errors():
    with pytest.raises(ConfigError):
        parse_text("experiment = kr_echo\nbogus = 1\n")
    with pytest.raises(ConfigError):
        parse_text("experiment = nonsense\n")
    with pytest.raises(ConfigError):
        parse_text("experiment = kr_echo\nN = many\n")
    with pytest.raises(ConfigError):
        parse_text("experiment = kr_echo\nN = 1\nN = 2\n")
    with pytest.raises(ConfigError):
        parse_text("experiment = kr_echo\njust words\n")
    # keys of one experiment are unknown to another
    with pytest.raises(ConfigError):
        parse_text("experiment = glauber_roundtrip\nN = 8\n")


def test_overrides_win():
    cfg = parse_text("experiment = kr_echo\nN = 2048\n", ["N=1024", "layout = grid"])
    assert cfg["N"] == 1024 and cfg["layout"] == "grid"


def test_resolved_text_round_trips():
    cfg = parse_text("experiment = osc_allegiance\nsigmas_fgr = 0.05,0.1\n")
    again = parse_text(cfg.to_text())
    assert again.values == cfg.values


def test_run_writes_outputs_and_is_deterministic(tmp_path):
    r1 = run_experiment(small_cfg(tmp_path, name="a"))
    r2 = run_experiment(small_cfg(tmp_path, name="b"))
    for name in ("curves.csv", "amplitudes.csv", "report.txt", "manifest.txt", "plot.svg"):
        assert (tmp_path / "a" / name).exists()
    assert sha256(tmp_path / "a" / "curves.csv") == sha256(tmp_path / "b" / "curves.csv")
    header, data = read_csv(tmp_path / "a" / "curves.csv")
    assert header == ["t", "allegiance", "avg_fidelity", "mixed_fidelity", "fluct"]
    assert data["allegiance"][0] == pytest.approx(1.0, abs=1e-12)
    assert r1.flags == {"c6_oracle": True, "c11_identities": True}
    assert r1.passed and r2.passed
    assert "criteria 1, 3, 4, 5 not evaluated" in " ".join(r1.notes)
    amp_header, _ = read_csv(tmp_path / "a" / "amplitudes.csv")
    assert amp_header == ["t", "k", "re_f", "im_f"]


def test_manifest_reproduces_run(tmp_path):
    run_experiment(small_cfg(tmp_path, name="orig"))
    manifest = tmp_path / "orig" / "manifest.txt"
    cfg = load_config(manifest, [f"output_dir={tmp_path / 'again'}"])
    run_experiment(cfg)
    assert sha256(tmp_path / "orig" / "curves.csv") == sha256(tmp_path / "again" / "curves.csv")


def test_plotting_leaves_csv_untouched(tmp_path):
    cfg = small_cfg(tmp_path, name="np", extra=["plot=false"])
    run_experiment(cfg)
    before = sha256(tmp_path / "np" / "curves.csv")
    assert not (tmp_path / "np" / "plot.svg").exists()
    assert main(["plot", str(tmp_path / "np" / "curves.csv")]) == 0
    assert (tmp_path / "np" / "plot.svg").read_text().lstrip().startswith("<?xml")
    assert sha256(tmp_path / "np" / "curves.csv") == before


def test_thread_setting_does_not_change_results(tmp_path):
    run_experiment(small_cfg(tmp_path, name="t1", extra=["threads=1", "plot=false"]))
    run_experiment(small_cfg(tmp_path, name="t4", extra=["threads=4", "plot=false"]))
    assert sha256(tmp_path / "t1" / "curves.csv") == sha256(tmp_path / "t4" / "curves.csv")


def test_cli_fit(tmp_path, capsys):
    path = tmp_path / "d.csv"
    t = np.arange(11.0)
    write_csv(path, ["t", "y"], [t, np.exp(-1.1 * t)])
    assert main(["fit", str(path), "--col", "y", "--window", "1:7"]) == 0
    out = capsys.readouterr().out
    rate = float([l for l in out.splitlines() if l.startswith("rate")][0].split("=")[1])
    assert rate == pytest.approx(1.1, abs=1e-9)
    assert main(["fit", str(path), "--col", "nope", "--window", "1:7"]) == 2


def test_cli_exit_code_follows_flags(tmp_path, monkeypatch):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(SMALL_KR + f"output_dir = {tmp_path / 'cli'}\nplot = false\n", encoding="utf-8")
    assert main(["run", str(cfg)]) == 0

    def failing(config, out, report):
        experiments.run_glauber(config, out, report)
        report.flags["c11_glauber_roundtrip"] = False
        return []

    monkeypatch.setitem(experiments.PIPELINES, "glauber_roundtrip", failing)
    cfg2 = tmp_path / "g.cfg"
    cfg2.write_text(f"experiment = glauber_roundtrip\noutput_dir = {tmp_path / 'g'}\n", encoding="utf-8")
    assert main(["run", str(cfg2)]) == 1
    assert main(["run", str(cfg2), "--set", "unknown_key=1"]) == 2


@pytest.mark.parametrize("name", sorted(os.listdir(os.path.join(os.path.dirname(__file__), "..", "configs"))))
def test_shipped_configs_parse(name):
    path = os.path.join(os.path.dirname(__file__), "..", "configs", name)
    cfg = load_config(path)
    assert cfg.experiment in experiments.PIPELINES


def test_non_chaotic_drive_is_rejected(tmp_path):
    cfg = parse_text("experiment = osc_classical\nkick = 0.01\nn_samples = 2000\nT = 20\n",
                     [f"output_dir={tmp_path / 'weak'}"])
    with pytest.raises(ConfigError, match="rejected"):
        run_experiment(cfg)
