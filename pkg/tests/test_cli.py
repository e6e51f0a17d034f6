import json

import numpy as np
import pytest

from wmmd.cli import main
from wmmd.experiments import RunConfig, write_json
from wmmd.cem import TrainConfig
from wmmd.data import MixtureSpec


@pytest.fixture
def tiny_config_file(tmp_path):
    cfg = RunConfig(
        mixture=MixtureSpec(np.array([[0.0, 0.0], [4.0, 0.0]]), np.ones(2),
                            np.array([0.5, 0.5]), np.full((2, 2), 0.7)),
        train=TrainConfig(epochs=2, batch_size=16),
        hidden_dims=(6,),
        seeds=(0,),
        n_source=50,
        n_target=50,
        bias_levels=(0.5, 0.9),
        lambda_grid=(0.0, 0.4),
        out_dir=str(tmp_path / "results"),
        check_fixtures=10,
        check_shuffles=50,
        check_samples=100,
        oracle_n=300,
        oracle_seeds=4,
        grad_configs=4,
    )
    path = tmp_path / "config.json"
    write_json(path, cfg.to_dict())
    return path, tmp_path / "results"


class TestCliVerbs:
    def test_bias_sweep_writes_tables(self, tiny_config_file, capsys):
        config, out = tiny_config_file
        assert main(["bias-sweep", "--config", str(config)]) == 0
        run_dir = out / "run-0001"
        assert (run_dir / "rows.csv").exists()
        assert (run_dir / "summary.json").exists()
        assert (run_dir / "config.json").exists()
        header = (run_dir / "rows.csv").read_text().splitlines()[0]
        assert header == "bias,arm,seed,accuracy,status"

    def test_rerun_reproduces_tables_bit_identically(self, tiny_config_file):
        config, out = tiny_config_file
        assert main(["bias-sweep", "--config", str(config)]) == 0
        emitted = out / "run-0001" / "config.json"
        assert main(["bias-sweep", "--config", str(emitted)]) == 0
        first = (out / "run-0001" / "rows.csv").read_bytes()
        second = (out / "run-0002" / "rows.csv").read_bytes()
        assert first == second

    def test_lambda_sweep(self, tiny_config_file):
        config, out = tiny_config_file
        assert main(["lambda-sweep", "--config", str(config)]) == 0
        rows = (out / "run-0001" / "rows.csv").read_text().splitlines()
        assert rows[0] == "lambda,arm,seed,accuracy,status"
        assert len(rows) == 1 + 2 * 2  # two lambdas x two arms x one seed

    def test_estimator_check_exit_zero(self, tiny_config_file, capsys):
        config, out = tiny_config_file
        assert main(["estimator-check", "--config", str(config)]) == 0
        printed = capsys.readouterr().out
        assert "PASS" in printed
        report = json.loads((out / "run-0001" / "report.json").read_text())
        assert report["passed"]

    def test_grad_check_exit_zero(self, tiny_config_file):
        config, out = tiny_config_file
        assert main(["grad-check", "--config", str(config)]) == 0

    def test_train_then_eval(self, tiny_config_file, tmp_path, capsys):
        config, out = tiny_config_file
        assert main(["train", "--config", str(config), "--arm", "wdan",
                     "--seed", "1"]) == 0
        run_dir = out / "run-0001"
        assert (run_dir / "checkpoint.npz").exists()
        assert (run_dir / "epochs.csv").exists()
        result = json.loads((run_dir / "result.json").read_text())
        assert result["arm"] == "wdan"
        assert result["seed"] == 1

        # score the checkpoint on a labeled CSV through the eval verb
        rng = np.random.default_rng(0)
        rows = [f"{rng.normal()},{rng.normal()},{i % 2}" for i in range(20)]
        data = tmp_path / "eval.csv"
        data.write_text("\n".join(rows) + "\n")
        assert main(["eval", "--model", str(run_dir / "checkpoint.npz"),
                     "--data", str(data)]) == 0
        printed = capsys.readouterr().out
        assert "accuracy" in printed

    def test_flag_overrides(self, tiny_config_file):
        config, out = tiny_config_file
        assert main(["train", "--config", str(config), "--lambda", "0.0",
                     "--gamma", "0.0", "--arm", "dan"]) == 0
        echoed = json.loads((out / "run-0001" / "config.json").read_text())
        assert echoed["train"]["lambda"] == 0.0
        assert echoed["train"]["gamma"] == 0.0
        assert echoed["arm"] == "dan"

    def test_error_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "missing.csv"
        code = main(["eval", "--model", str(tmp_path / "nope.npz"),
                     "--data", str(missing)])
        assert code == 2
        assert "error:" in capsys.readouterr().err
