import json
from pathlib import Path

import pytest
import yaml

from promine.runner import ConfigError, ExperimentConfig, config_hash, load_config, main, run_experiment


def small_config(**overrides) -> dict:
    doc = {
        "input": {"kind": "synthetic", "synthetic": {"n": 120, "seed": 5}},
        "cohort_filter": "all",
        "binnings": ["caim"],
        "selector": {"name": "none"},
        "models": ["naive_bayes"],
        "seed": 7,
        "n_folds": 5,
    }
    doc.update(overrides)
    return doc


def write_config(tmp_path: Path, doc: dict) -> Path:
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


class TestConfig:
    def test_round_trips_through_serialization(self):
        config = ExperimentConfig.from_dict(small_config())
        again = ExperimentConfig.from_dict(config.to_dict())
        assert again == config
        assert config_hash(again) == config_hash(config)

    def test_unknown_model_lists_valid_names(self):
        with pytest.raises(ConfigError, match="naive_bayes"):
            ExperimentConfig.from_dict(small_config(models=["boosted_stumps"]))

    def test_out_of_scope_model_distinct_error(self):
        with pytest.raises(ConfigError, match="out of scope"):
            ExperimentConfig.from_dict(small_config(models=["hnb"]))

    def test_out_of_scope_selector(self):
        with pytest.raises(ConfigError, match="out of scope"):
            ExperimentConfig.from_dict(small_config(selector={"name": "rank_search"}))

    def test_bad_filter(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(small_config(cohort_filter="returning"))


class TestRun:
    def test_report_directory_contents(self, tmp_path):
        config = ExperimentConfig.from_dict(small_config())
        out = run_experiment(config, tmp_path / "out")
        expected = [
            "cohort.csv",
            "descriptives.txt",
            "descriptives.csv",
            "crosstab.txt",
            "crosstab.csv",
            "reliable_change_test.txt",
            "odds_ratios.txt",
            "odds_ratios.csv",
            "eval_report.txt",
            "eval_report.csv",
            "eval_report.json",
            "manifest.json",
        ]
        for name in expected:
            assert (out / name).exists(), name
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config_hash"] == config_hash(config)
        artifacts = out / "artifacts"
        assert (artifacts / "models_manifest.json").exists()
        assert (artifacts / "pipeline_caim.json").exists()
        assert (artifacts / "model_naive_bayes_caim.json").exists()

    def test_same_seed_byte_identical_directories(self, tmp_path):
        config = ExperimentConfig.from_dict(small_config())
        out_a = run_experiment(config, tmp_path / "a")
        out_b = run_experiment(config, tmp_path / "b")
        files_a = sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(out_b) for p in out_b.rglob("*") if p.is_file())
        assert files_a == files_b
        for rel in files_a:
            assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes(), rel

    def test_new_only_filter_drops_is_new_feature(self, tmp_path):
        config = ExperimentConfig.from_dict(small_config(cohort_filter="new_only"))
        out = run_experiment(config, tmp_path / "out")
        report = json.loads((out / "eval_report.json").read_text())
        assert report[0]["model"] == "naive_bayes"

    def test_model_by_binning_grid_yields_sorted_rows(self, tmp_path):
        # paper-shaped run: 2 models x 2 binnings on the new-only cohort
        config = ExperimentConfig.from_dict(
            small_config(
                input={"kind": "synthetic", "synthetic": {"n": 150, "seed": 5}},
                cohort_filter="new_only",
                binnings=["bin_target", "caim"],
                models=["naive_bayes", "ensemble"],
            )
        )
        out = run_experiment(config, tmp_path / "out")
        report = json.loads((out / "eval_report.json").read_text())
        assert len(report) == 4
        assert {(r["model"], r["binning"]) for r in report} == {
            ("naive_bayes", "bin_target"),
            ("naive_bayes", "caim"),
            ("ensemble", "bin_target"),
            ("ensemble", "caim"),
        }
        aucs = [r["auc"] for r in report]
        assert aucs == sorted(aucs, reverse=True)

    def test_thread_count_does_not_change_outputs(self, tmp_path):
        serial = ExperimentConfig.from_dict(small_config(models=["naive_bayes", "logistic"]))
        threaded = ExperimentConfig.from_dict(
            small_config(models=["naive_bayes", "logistic"], threads=3)
        )
        out_serial = run_experiment(serial, tmp_path / "serial")
        out_threaded = run_experiment(threaded, tmp_path / "threaded")
        for name in ("eval_report.txt", "eval_report.csv", "odds_ratios.csv", "cohort.csv"):
            assert (out_serial / name).read_bytes() == (out_threaded / name).read_bytes()


class TestCli:
    def test_validate_ok(self, tmp_path, capsys):
        path = write_config(tmp_path, small_config())
        assert main(["validate", "--config", str(path)]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_validate_bad_config_exit_2(self, tmp_path, capsys):
        path = write_config(tmp_path, small_config(models=["hnb"]))
        assert main(["validate", "--config", str(path)]) == 2
        assert "out of scope" in capsys.readouterr().err

    def test_dry_run(self, tmp_path, capsys):
        path = write_config(tmp_path, small_config())
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "o"), "--dry-run"]) == 0
        assert not (tmp_path / "o").exists()

    def test_synth_and_describe(self, tmp_path, capsys):
        cohort = tmp_path / "cohort.csv"
        assert main(["synth", "--n", "80", "--seed", "3", "--out", str(cohort)]) == 0
        assert cohort.exists()
        assert main(["describe", "--cohort", str(cohort), "--out", str(tmp_path / "d")]) == 0
        assert (tmp_path / "d" / "crosstab.txt").exists()

    def test_survey_verb(self, tmp_path, capsys):
        import numpy as np

        rng = np.random.default_rng(0)
        lines = ["clinician_id,q1,q2,q3,q4,q5,q6,q7,q8,q9,q10,years_exp,age,gender,adoption_rate"]
        for i in range(30):
            items = ",".join(str(x) for x in rng.integers(1, 5, 10))
            lines.append(f"c{i},{items},{rng.integers(1, 30)},{rng.integers(25, 60)},female,{rng.random():.2f}")
        path = tmp_path / "survey.csv"
        path.write_text("\n".join(lines) + "\n")
        assert main(["survey", "--survey", str(path), "--out", str(tmp_path / "s")]) == 0
        assert (tmp_path / "s" / "survey_correlations.txt").exists()

    def test_example_configs_validate(self, capsys):
        root = Path(__file__).resolve().parents[1]
        assert main(["validate", "--config", str(root / "configs" / "experiment.example.yaml")]) == 0
        config = load_config(root / "configs" / "experiment.example.yaml")
        assert config.models == ("naive_bayes", "ensemble")
