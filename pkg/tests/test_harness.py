import csv
import json

import numpy as np
import pytest

from harness import attack_success_rate, aggregate_rows, cmd_attack, cmd_report, cmd_run, run_trial
from harness.experiment import MESSAGES_DOC, SESSIONS_DOC
from lti.serialization import statespace_from_dict
from privacy import ACCURACY_TOL
from storage import RunManager, validate_config
from vehicle import make_fleet


@pytest.fixture
def finished_run(tiny_config, tmp_path):
    report = cmd_run(tiny_config, tmp_path / "runs")
    return report, RunManager(report.run_dir)


def session_doc(mses):
    return {"vehicles": [{"id": i + 1, "mse": m, "mse_plain": None} for i, m in enumerate(mses)]}


class TestTables:
    def test_aggregate_over_trials(self):
        rows = aggregate_rows([session_doc([1.0, 0.5]), session_doc([3.0, 0.5])])
        assert [r["vehicle"] for r in rows] == ["1", "2"]
        assert float(rows[0]["mean_mse"]) == pytest.approx(2.0)
        assert float(rows[0]["std_mse"]) == pytest.approx(1.0)
        assert float(rows[1]["std_mse"]) == 0.0
        assert rows[0]["mean_mse_plain"] == ""

    def test_attack_success_rate(self):
        rows = [{"distance": "1.0e-03"}, {"distance": "2.0e+00"}]
        assert attack_success_rate(rows, 0.5) == 0.5
        assert attack_success_rate([], 0.5) is None


class TestTrial:
    def test_trial_documents(self, tiny_config):
        cfg = validate_config(tiny_config)
        result = run_trial(cfg, 0)
        assert not result.failed
        sessions = result.documents[SESSIONS_DOC]
        assert [v["id"] for v in sessions["vehicles"]] == [1, 2]
        assert len(sessions["accuracy"]) == 2
        assert all(row["passed"] for row in sessions["accuracy"]), sessions["accuracy"]
        assert all(row["w_hat_distance"] <= ACCURACY_TOL for row in sessions["accuracy"])
        assert len(result.documents[MESSAGES_DOC]["messages"]) == 2
        json.dumps(result.documents)

    def test_session_record_keeps_model_realization(self, tiny_config):
        cfg = validate_config(tiny_config)
        result = run_trial(cfg, 0)
        fleet = make_fleet(cfg.fleet.vehicles, cfg.fleet.base, cfg.fleet.rel_sigma_fleet,
                           cfg.fleet.rel_sigma_model, cfg.run.master_seed, 0)
        for v, doc in zip(fleet, result.documents[SESSIONS_DOC]["vehicles"]):
            model = statespace_from_dict(doc["model"])
            assert np.array_equal(model.A, v.model.A)
            assert np.allclose(np.sort_complex(model.poles()), np.sort_complex(v.model.poles()))

    def test_trial_is_reproducible(self, tiny_config):
        cfg = validate_config(tiny_config)
        a = run_trial(cfg, 1).documents[SESSIONS_DOC]
        b = run_trial(cfg, 1).documents[SESSIONS_DOC]
        assert [v["mse"] for v in a["vehicles"]] == [v["mse"] for v in b["vehicles"]]

    def test_messages_carry_no_plaintext_sensitivities(self, tiny_config):
        cfg = validate_config(tiny_config)
        messages = run_trial(cfg, 0).documents[MESSAGES_DOC]["messages"]
        assert all(set(m) == {"schema", "kind", "sender_id", "T_tilde", "S_tilde", "e_tilde", "w_f_tilde"}
                   for m in messages)


@pytest.mark.slow
class TestCommands:
    def test_run_writes_tables_and_figures(self, finished_run):
        report, manager = finished_run
        assert report.trials == 2 and report.failures == 0
        assert [r["vehicle"] for r in report.aggregate] == ["1", "2"]
        assert report.accuracy_passed is True
        assert manager.list_trials() == [0, 1]
        for name in ("aggregate.csv", "accuracy.csv", "attack.csv", "run_metadata.json"):
            assert (manager.run_dir / name).exists()
        for name in ("mse_by_vehicle.svg", "road_overlay_left.svg", "pole_scatter.svg"):
            assert (manager.figures_dir / name).exists()
        assert manager.read_metadata()["config"]["run"]["trials"] == 2
        assert "accuracy preservation" in report.summary()

    def test_report_rebuilds_same_tables(self, finished_run):
        report, manager = finished_run
        rows = cmd_report(manager.run_dir)
        assert rows == report.aggregate

    def test_attack_reads_stored_messages(self, finished_run):
        _, manager = finished_run
        rows = cmd_attack(manager.run_dir)
        assert len(rows) == 4
        assert {r["vehicle"] for r in rows} == {1, 2}
        with open(manager.run_dir / "attack.csv", newline="", encoding="utf-8") as f:
            assert len(list(csv.DictReader(f))) == 4

    def test_parallel_workers_give_the_same_result(self, tiny_config, tmp_path, monkeypatch, finished_run):
        report, _ = finished_run
        monkeypatch.setenv("ROADCOLLAB_WORKERS", "2")
        parallel = cmd_run(tiny_config, tmp_path / "parallel")
        assert parallel.aggregate == report.aggregate

    def test_report_needs_a_run_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            cmd_report(tmp_path)
