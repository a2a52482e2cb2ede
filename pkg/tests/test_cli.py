import json

import numpy as np
import pytest

from asnrc.cli import main
from asnrc.config import RunConfig
from asnrc.io.model_file import load_model
from asnrc.models.reservoir import ClosedLoop, OpenLoop, run
from asnrc.seeding import derive_rng
from asnrc.tasks.autoencoder import AutoencoderInput, bias_inputs
from asnrc.tasks.signals import gen_signal


@pytest.fixture(autouse=True)
def results_db(tmp_path, monkeypatch):
    monkeypatch.setenv("ASNRC_DATABASE_URL", f"sqlite:///{tmp_path / 'runs.db'}")


def _write_config(path, **fields):
    path.write_text(json.dumps(fields))
    return path


def test_demo_inverter_is_reproducible(tmp_path):
    assert main(["demo", "inverter", "--seed", "7", "--out", str(tmp_path / "a")]) == 0
    assert main(["demo", "inverter", "--seed", "7", "--out", str(tmp_path / "b")]) == 0
    for name in ("summary.json", "traces.csv", "model.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = json.loads((tmp_path / "a" / "summary.json").read_text())
    assert summary["seed"] == 7 and summary["status"] == "ok"


def test_train_without_a_model_fails(tmp_path, capsys):
    assert main(["train", "--out", str(tmp_path)]) != 0
    assert "model not found" in capsys.readouterr().err


def test_unknown_subcommand_prints_usage():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code != 0


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    config = _write_config(tmp_path / "bad.json", task="inverter", spectral_radus=0.9)
    assert main(["gen", "--config", str(config), "--out", str(tmp_path)]) != 0
    assert "invalid configuration" in capsys.readouterr().err


def test_gen_train_run_eval_export(tmp_path):
    out = tmp_path / "ae"
    config = _write_config(tmp_path / "ae.json", task="autoencoder", reservoir={"n": 30},
                           teach_len=300, free_len=100)
    common = ["--config", str(config), "--out", str(out), "--seed", "2"]

    assert main(["gen", *common]) == 0
    model = json.loads((out / "model.json").read_text())
    assert model["reservoir"]["topology"]["n"] == 30
    assert model["readout"] is None

    assert main(["train", *common]) == 0
    model = json.loads((out / "model.json").read_text())
    assert model["readout"]["task"] == "autoencoder"
    assert model["readout"]["bias"] == 0.5

    assert main(["run", "--mode", "closed", "--steps", "60", *common]) == 0
    header = (out / "outputs.csv").read_text().splitlines()[0]
    assert header == "t,target,output"
    assert len((out / "states.csv").read_text().splitlines()) == 61

    assert main(["eval", str(out / "outputs.csv"), *common]) == 0
    scores = json.loads((out / "eval.json").read_text())
    assert scores["nrmse"] >= 0.0

    assert main(["export-netlist", *common]) == 0
    assert (out / "reservoir.cir").read_text().rstrip().endswith(".END")


def test_trials_fan_out_over_seeds(tmp_path):
    assert main(["demo", "inverter", "--seed", "3", "--trials", "2", "--out", str(tmp_path)]) == 0
    seeds = [json.loads((tmp_path / f"trial_{k}" / "summary.json").read_text())["seed"] for k in range(2)]
    assert seeds == [3, 4]


def test_record_and_list_runs(tmp_path, capsys):
    assert main(["demo", "inverter", "--seed", "1", "--out", str(tmp_path), "--record"]) == 0
    capsys.readouterr()
    assert main(["runs", "--task", "inverter"]) == 0
    listing = capsys.readouterr().out
    assert "inverter" in listing and "seed=1" in listing


def test_closed_run_keeps_one_noise_stream_across_the_switch(tmp_path):
    out = tmp_path / "ae"
    config = _write_config(tmp_path / "ae.json", task="autoencoder", reservoir={"n": 20},
                           teach_len=200, free_len=50)
    common = ["--config", str(config), "--out", str(out), "--seed", "5"]
    assert main(["gen", *common]) == 0
    assert main(["train", *common]) == 0
    assert main(["run", "--mode", "closed", "--warmup", "30", "--steps", "40", *common]) == 0

    model = load_model(out / "model.json")
    topo, rp, weights = model.topology(), model.reservoir.params, model.readout_weights()
    s = gen_signal(RunConfig.load(config).resolved_signal().model_copy(update={"length": 70}))
    rng = derive_rng(5, "reservoir/noise")
    level = model.readout.bias
    assert level == AutoencoderInput().bias
    taught = run(topo, rp, bias_inputs(30, level), OpenLoop(teacher=s[:30]), washout=0, rng=rng)
    free = run(topo, rp, bias_inputs(40, level), ClosedLoop(weights=weights), state=taught.final_state,
               washout=0, rng=rng)

    written = np.loadtxt(out / "outputs.csv", delimiter=",", skiprows=1)
    np.testing.assert_array_equal(written[:, 2], free.outputs[0])


def test_partial_params_keep_the_rest_of_the_preset():
    config = RunConfig.model_validate({"task": "autoencoder", "reservoir": {"n": 400, "params": {"decay": 0.2}}})
    assert config.reservoir.n == 400
    assert config.reservoir.spectral_radius == 0.6
    assert config.reservoir.params.decay == 0.2
    assert config.reservoir.params.noise_gain == 1e-5
