import json

import pytest

from modelserver.plan import Hyperparameters, PlanError, TrainingPlan, load_plan


class TestRegimenInvariants:
    def test_explicit_requires_both(self):
        with pytest.raises(PlanError):
            TrainingPlan("explicit", pretrain_records=("p.jsonl",))
        with pytest.raises(PlanError):
            TrainingPlan("explicit", finetune_records="f.jsonl")
        TrainingPlan("explicit", pretrain_records=("p.jsonl",), finetune_records="f.jsonl")

    def test_implicit_requires_finetune_only(self):
        TrainingPlan("implicit", finetune_records="f.jsonl")
        with pytest.raises(PlanError):
            TrainingPlan("implicit", pretrain_records=("p.jsonl",), finetune_records="f.jsonl")
        with pytest.raises(PlanError):
            TrainingPlan("implicit")

    def test_non_finetuned_requires_pretrain_only(self):
        TrainingPlan("non_finetuned", pretrain_records=("p.jsonl",))
        with pytest.raises(PlanError):
            TrainingPlan("non_finetuned", pretrain_records=("p.jsonl",), finetune_records="f.jsonl")
        with pytest.raises(PlanError):
            TrainingPlan("non_finetuned")

    def test_unknown_values(self):
        with pytest.raises(PlanError):
            TrainingPlan("magic", finetune_records="f.jsonl")
        with pytest.raises(PlanError):
            TrainingPlan("implicit", encoder="rnn", finetune_records="f.jsonl")
        with pytest.raises(PlanError):
            TrainingPlan("implicit", finetune_records="f.jsonl", mixing="shuffle")


class TestHyperparameters:
    def test_defaults_are_valid(self):
        Hyperparameters()

    def test_validation(self):
        with pytest.raises(PlanError):
            Hyperparameters(learning_rate=0)
        with pytest.raises(PlanError):
            Hyperparameters(validation_fraction=1.0)
        with pytest.raises(PlanError):
            Hyperparameters(embed_dim=30, heads=4)


class TestLoadPlan:
    def test_round_trip_with_relative_paths(self, tmp_path):
        (tmp_path / "f.jsonl").write_text("", encoding="utf-8")
        plan_file = tmp_path / "plan.json"
        plan_file.write_text(
            json.dumps(
                {
                    "regimen": "implicit",
                    "finetune_records": "f.jsonl",
                    "hyperparameters": {"max_epochs": 5},
                }
            ),
            encoding="utf-8",
        )
        plan = load_plan(plan_file)
        assert plan.finetune_records == str(tmp_path / "f.jsonl")
        assert plan.hyperparameters.max_epochs == 5
        assert plan.hyperparameters.patience == Hyperparameters().patience

    def test_single_pretrain_path_becomes_tuple(self, tmp_path):
        plan_file = tmp_path / "plan.json"
        plan_file.write_text(
            json.dumps({"regimen": "non_finetuned", "pretrain_records": "p.jsonl"}),
            encoding="utf-8",
        )
        assert load_plan(plan_file).pretrain_records == (str(tmp_path / "p.jsonl"),)

    def test_unknown_keys_rejected(self, tmp_path):
        plan_file = tmp_path / "plan.json"
        plan_file.write_text(json.dumps({"regimen": "implicit", "zzz": 1}), encoding="utf-8")
        with pytest.raises(PlanError):
            load_plan(plan_file)

    def test_unknown_hyperparameters_rejected(self, tmp_path):
        plan_file = tmp_path / "plan.json"
        plan_file.write_text(
            json.dumps(
                {
                    "regimen": "implicit",
                    "finetune_records": "f.jsonl",
                    "hyperparameters": {"momentum": 0.9},
                }
            ),
            encoding="utf-8",
        )
        with pytest.raises(PlanError):
            load_plan(plan_file)
