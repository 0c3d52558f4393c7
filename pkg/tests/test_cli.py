import csv
import json
import warnings

import numpy as np
import pytest

from comanip.cli import main
from comanip.harness.corpus import synthesize_corpus
from comanip.leader import Direction, TaskKind, TaskSpec


@pytest.fixture()
def task_script(tmp_path):
    p = tmp_path / "tasks.json"
    task = TaskSpec(kind=TaskKind.LATERAL_TRANSLATION, direction=Direction.LEFT,
                    magnitude=0.8, duration=6.0)
    p.write_text(json.dumps([task.to_dict()]))
    return p


class TestSim:
    def test_sim_writes_logs_and_summary(self, tmp_path, task_script, capsys):
        out = tmp_path / "out"
        rc = main(["sim", "--controller", "evic", "--task", str(task_script),
                   "--seed", "3", "--out", str(out)])
        assert rc == 0
        assert len(list(out.glob("*.jsonl"))) == 1
        assert (out / "summary.csv").exists()
        assert "1 trials (1 completed" in capsys.readouterr().out

    def test_sim_repetitions(self, tmp_path, task_script):
        out = tmp_path / "out"
        rc = main(["sim", "--controller", "evic", "--task", str(task_script),
                   "--seed", "3", "--out", str(out), "--repetitions", "2"])
        assert rc == 0
        assert len(list(out.glob("*.jsonl"))) == 2


class TestReport:
    def test_report_scores_logs(self, tmp_path, task_script):
        out = tmp_path / "out"
        main(["sim", "--controller", "evic", "--task", str(task_script),
              "--seed", "3", "--out", str(out)])
        csv_path = tmp_path / "table.csv"
        rc = main(["report", "--logs", str(out), "--csv", str(csv_path)])
        assert rc == 0
        with open(csv_path) as fh:
            rows = list(csv.DictReader(fh))
        trans = next(r for r in rows if r["metric"] == "completion_time"
                     and r["task"] == "translation")
        assert float(trans["evic_measured"]) > 0
        assert float(trans["blind_hhi"]) == 7.18

    def test_report_empty_dir_fails(self, tmp_path):
        rc = main(["report", "--logs", str(tmp_path), "--csv",
                   str(tmp_path / "t.csv")])
        assert rc == 1


class TestTrainEval:
    def test_train_then_eval_round_trip(self, tmp_path, capsys):
        data = tmp_path / "corpus"
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            synthesize_corpus(data, n_trials=6, seed=11)
        model_path = tmp_path / "model.bin"
        rc = main(["train", "--data", str(data), "--seed", "0",
                   "--model", str(model_path), "--layers", "1", "--hidden", "6",
                   "--horizon", "2", "--phase0-iters", "30", "--epochs", "1",
                   "--threshold", "0.0"])
        assert rc == 0
        assert model_path.exists()
        capsys.readouterr()  # drain the train command's status line
        rc = main(["eval", "--model", str(model_path), "--data", str(data),
                   "--horizon", "2", "--windows", "10"])
        blob = json.loads(capsys.readouterr().out)
        assert {"model_rmse", "persistence_rmse", "beats_persistence"} <= blob.keys()
        assert rc in (0, 1)  # quality is the acceptance suite's business


class TestConfigEnv:
    def test_env_var_supplies_config(self, tmp_path, task_script, monkeypatch):
        from comanip.harness import BenchConfig
        cfg_path = tmp_path / "bench.json"
        BenchConfig(timeout=9.0).save(cfg_path)
        monkeypatch.setenv("COMANIP_CONFIG", str(cfg_path))
        out = tmp_path / "out"
        rc = main(["sim", "--controller", "evic", "--task", str(task_script),
                   "--seed", "3", "--out", str(out)])
        assert rc == 0
        header = json.loads(
            next(iter(sorted(out.glob("*.jsonl")))).read_text().splitlines()[0])
        assert header["type"] == "header"
