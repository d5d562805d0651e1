import json

import numpy as np
import pytest

from dynepovm.analysis import bias_gap, checkpoints, masked_stats, pair_stats, scheme_stats
from dynepovm.cli import main
from dynepovm.experiments import ConfigError, ExperimentConfig, preset, read_summary, run_experiment
from dynepovm.hilbert import CavityState
from dynepovm.dynamics import Scheme
from dynepovm.povm import PovmEnsemble

SMALL = {"name": "tiny", "M": 4, "t_end": 0.5, "save_trajectories": 2,
         "schemes": ["het_x", "het_y"], "squeezings": [0.0, 0.1]}


def test_config_roundtrip_and_validation():
    cfg = ExperimentConfig.from_dict(SMALL)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    for bad in ({"M": -1}, {"bogus": 1}, {"schemes": ["gksl"]}, {"noise": {"dt": 0.05}},
                {"physics": {"kappa": 0.0}, "schemes": ["adiabatic_x"]}, {"squeezings": [0.9]},
                {"noise": {"colour": 1}}, {"kind": "other"}):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({**SMALL, **bad})
    with pytest.raises(ConfigError):
        preset("nope")


def test_run_outputs_and_determinism(tmp_path):
    cfg = ExperimentConfig.from_dict(SMALL)
    a = run_experiment(cfg, tmp_path / "a")
    b = run_experiment(cfg.replace(workers=2), tmp_path / "b")
    assert (a / "summary.csv").read_bytes() == (b / "summary.csv").read_bytes()
    man = json.loads((a / "manifest.json").read_text())
    assert man["seed"] == 0 and man["config"]["M"] == 4 and "+" in man["code_version"]
    assert len(list((a / "trajectories").glob("*.csv"))) == 2 * 2 * 2
    summ = read_summary(a / "summary.csv")
    assert set(q for (_, _, q) in summ) >= {"mu", "anorm", "gap", "S", "valid", "C", "C_valid"}
    mu = summ[(0.1, "het_x", "mu")]
    assert mu["mean"][0] == pytest.approx(1.0) and mu["n"][0] == 4
    assert (a / "sharpness_s0.1.svg").exists()


def test_cli_commands(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps(SMALL))
    out = tmp_path / "run"
    assert main(["run", "--config", str(conf), "--seed", "3", "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 3
    assert main(["report", str(out)]) == 0
    assert (out / "report.md").exists()
    assert main(["presets"]) == 0
    assert "fig5" in capsys.readouterr().out
    assert main(["presets", "fig5"]) == 0


def test_cli_phasespace(tmp_path):
    out = tmp_path / "ps"
    assert main(["phasespace", "--state", "squeezed:0.25", "--n", "41", "--out", str(out)]) == 0
    header = (out / "marginals.csv").read_text().splitlines()[0]
    assert header == "q,sharp,wigner_q,husimi_q,smeared_sharp"


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"M": -1}))
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "x")]) == 2
    assert not (tmp_path / "x").exists()
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    assert main(["phasespace", "--state", "thermal"]) == 2
    assert main(["report", str(tmp_path)]) == 2


def test_masked_stats():
    v = np.array([[1.0, 2.0], [3.0, np.nan], [5.0, 4.0]])
    st = masked_stats(v, np.array([[True, True], [True, True], [False, True]]))
    assert np.allclose(st.mean, [2.0, 3.0])
    assert list(st.n) == [2, 2]


def test_scheme_and_pair_stats():
    v = np.zeros((3, 2, 4))
    v[..., 0] = 1.0
    v[:, 1, 1] = [0.5, 1.0, 0.2]
    v[2, 1, 0] = 1.9  # above the window
    ens = PovmEnsemble(np.array([0.0, 1.0]), v, Scheme.HET_X, CavityState())
    st = scheme_stats(ens)
    assert list(st["S"].n) == [3, 2]
    assert st["valid"].mean[1] == pytest.approx(2 / 3)
    assert np.allclose(bias_gap(v[0]), [1.0, 0.5])
    c = pair_stats(ens, ens)["C"]
    assert c.mean[0] == pytest.approx(2 * 1.0)  # identical trivial effects
    with pytest.raises(ValueError):
        pair_stats(ens, PovmEnsemble(np.zeros(1), v[:, :1], Scheme.HET_Y, CavityState()))


def test_checkpoints():
    t = np.linspace(0, 10, 251)
    idx = checkpoints(t)
    assert len(idx) == 20 and t[idx[0]] == pytest.approx(0.48) and idx[-1] == 250
