"""Accuracy reports, metric checks, and benchmark suites."""

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diffnb.boosting import TrainConfig, train
from diffnb.dataset import Dataset, SchemaError
from diffnb.evaluation import (
    EntryResult,
    ExperimentSpec,
    MetricCheck,
    Report,
    Suite,
    correct_line,
    evaluate,
    format_percent,
    load_suite,
    render_report_machine,
    render_report_text,
    render_suite_machine,
    render_suite_text,
    resolve_data_dir,
    run_benchmark,
    run_experiment,
)

from conftest import small_problems, xor_dataset, xor_schema


@pytest.fixture(scope="module")
def xor_model():
    model, _ = train(xor_dataset(), TrainConfig(topology=2))
    return model


class TestEvaluate:
    def test_perfect_fit(self, xor_model):
        report = evaluate(xor_model, xor_dataset())
        assert report.accuracy == 100.0
        assert report.n_correct == report.n_examples == 4
        assert report.confusion.tolist() == [[2, 0], [0, 2]]
        assert report.per_class_correct == (2, 2)
        assert report.tie_count == 0
        assert report.class_labels == ("c0", "c1")

    def test_one_flipped_label(self, xor_model):
        rows = [((0.0, 0.0), 0), ((1.0, 1.0), 1), ((0.0, 1.0), 1), ((1.0, 0.0), 1)]
        report = evaluate(xor_model, Dataset.build(xor_schema(), rows))
        assert report.n_correct == 3
        assert report.accuracy == 75.0
        # the (1,1) row is truly labeled c1 here but the model says c0
        assert report.confusion.tolist() == [[1, 0], [1, 2]]

    def test_empty_dataset_rejected(self, xor_model):
        empty = Dataset(xor_schema(), ())
        with pytest.raises(ValueError, match="empty"):
            evaluate(xor_model, empty)

    def test_mismatched_schema_rejected(self, xor_model):
        from diffnb.dataset import AttributeSpec, Schema

        other = Schema((AttributeSpec("a", "continuous"),), ("c0", "c1"))
        data = Dataset.build(other, [((0.0,), 0)])
        with pytest.raises(SchemaError, match="expects 2 attributes"):
            evaluate(xor_model, data)

    @given(small_problems(max_n=12, max_attrs=3))
    def test_confusion_conserves_examples(self, problem):
        data, topology = problem
        model, _ = train(data, TrainConfig(max_rounds=3, topology=topology))
        report = evaluate(model, data)
        assert int(report.confusion.sum()) == report.n_examples
        assert int(np.trace(report.confusion)) == report.n_correct
        per_class = tuple(int(v) for v in np.diag(report.confusion))
        assert per_class == report.per_class_correct

    @given(small_problems(max_n=12, max_attrs=3))
    def test_converged_training_scores_100_on_train(self, problem):
        data, topology = problem
        model, trace = train(data, TrainConfig(topology=topology))
        if trace.converged:
            assert evaluate(model, data).accuracy == 100.0


class TestRendering:
    def test_format_percent_trims_zeros(self):
        assert format_percent(96.99) == "96.99"
        assert format_percent(100.0) == "100"
        assert format_percent(97.5) == "97.5"
        assert format_percent(0.0) == "0"

    def test_correct_line(self):
        report = Report(
            n_examples=124,
            n_correct=124,
            accuracy=100.0,
            confusion=np.array([[62, 0], [0, 62]]),
            per_class_correct=(62, 62),
            tie_count=0,
            class_labels=("0", "1"),
        )
        assert correct_line(report) == "62, 62 : 100 %"

    def test_machine_report_is_stable(self):
        report = Report(
            n_examples=4,
            n_correct=3,
            accuracy=75.0,
            confusion=np.array([[1, 0], [1, 2]]),
            per_class_correct=(1, 2),
            tie_count=1,
            class_labels=("c0", "c1"),
        )
        text = render_report_machine(report)
        assert text.splitlines() == [
            "n=4",
            "correct=3",
            "accuracy=75.00",
            "tie_count=1",
            "per_class_correct=1,2",
            "confusion=1,0;1,2",
        ]

    def test_text_report_names_classes(self, xor_model):
        text = render_report_text(evaluate(xor_model, xor_dataset()))
        assert "c0" in text and "c1" in text
        assert "100" in text


class TestMetricCheck:
    def test_bounds_are_inclusive(self):
        check = MetricCheck("test_accuracy", min=60.0, max=75.0)
        assert check.passes(60.0) and check.passes(75.0) and check.passes(66.0)
        assert not check.passes(59.999) and not check.passes(75.001)

    def test_one_sided(self):
        assert MetricCheck("epochs", max=200).passes(1)
        assert not MetricCheck("train_seconds", max=10.0).passes(11.0)
        assert MetricCheck("test_accuracy", min=96.5).passes(96.5)

    def test_describe_mentions_the_metric(self):
        described = MetricCheck("test_accuracy", min=74.95, max=78.95).describe()
        assert "test_accuracy" in described


class TestExperimentSpec:
    def test_split_form(self):
        spec = ExperimentSpec(name="x", schema="s.json", data="x.data", train_count=341, bins=7)
        assert spec.train is None

    def test_pair_form(self):
        spec = ExperimentSpec(name="x", schema="s.json", train="x.train", test="x.test")
        assert spec.data is None

    def test_both_forms_rejected(self):
        with pytest.raises(ValueError, match="either data"):
            ExperimentSpec(name="x", schema="s.json", data="a", train="b", test="c")

    def test_neither_form_rejected(self):
        with pytest.raises(ValueError, match="either data"):
            ExperimentSpec(name="x", schema="s.json")

    def test_split_needs_count(self):
        with pytest.raises(ValueError, match="train_count"):
            ExperimentSpec(name="x", schema="s.json", data="a")


def write_xor_files(tmp_path):
    schema = {
        "attributes": [
            {"name": "a", "kind": "continuous"},
            {"name": "b", "kind": "continuous"},
        ],
        "classes": ["c0", "c1"],
    }
    (tmp_path / "xor.schema.json").write_text(json.dumps(schema))
    rows = ["0 0 c0", "1 1 c0", "0 1 c1", "1 0 c1"]
    (tmp_path / "xor.train").write_text("\n".join(rows) + "\n")
    (tmp_path / "xor.test").write_text("\n".join(rows) + "\n")


def xor_experiment(**overrides):
    base = dict(
        name="xor",
        schema="xor.schema.json",
        train="xor.train",
        test="xor.test",
        bins=2,
        checks=(MetricCheck("test_accuracy", min=100.0),),
    )
    base.update(overrides)
    return ExperimentSpec(**base)


class TestRunExperiment:
    def test_passing_entry(self, tmp_path):
        write_xor_files(tmp_path)
        entry = run_experiment(xor_experiment(), tmp_path, tmp_path)
        assert entry.status == "pass" and entry.ok
        assert entry.metrics["test_accuracy"] == 100.0
        assert entry.metrics["train_accuracy"] == 100.0
        assert entry.metrics["n_train"] == 4 and entry.metrics["n_test"] == 4
        assert entry.metrics["converged"] == 1
        assert entry.metrics["train_seconds"] >= 0.0

    def test_failing_check(self, tmp_path):
        write_xor_files(tmp_path)
        spec = xor_experiment(checks=(MetricCheck("epochs", max=0),))
        entry = run_experiment(spec, tmp_path, tmp_path)
        assert entry.status == "fail" and not entry.ok

    def test_missing_data_reports_hint(self, tmp_path):
        write_xor_files(tmp_path)
        spec = xor_experiment(train="absent.train", fetch_hint="run the fetch script")
        entry = run_experiment(spec, tmp_path, tmp_path)
        assert entry.status == "missing_data" and not entry.ok
        assert "absent.train" in entry.message
        assert "run the fetch script" in entry.message

    def test_corrupt_data_becomes_error_entry(self, tmp_path):
        write_xor_files(tmp_path)
        (tmp_path / "xor.train").write_text("0 not_a_number c0\n")
        entry = run_experiment(xor_experiment(), tmp_path, tmp_path)
        assert entry.status == "error" and not entry.ok
        assert "ParseError" in entry.message

    def test_split_form_runs(self, tmp_path):
        write_xor_files(tmp_path)
        spec = xor_experiment(train=None, test=None, data="xor.train", train_count=4)
        # a 4-of-4 split leaves no test rows and must surface as an error entry
        entry = run_experiment(spec, tmp_path, tmp_path)
        assert entry.status == "error"
        assert "ValueError" in entry.message


class TestSuite:
    def test_load_suite(self, tmp_path, monkeypatch):
        monkeypatch.delenv("DIFFNB_DATA", raising=False)
        write_xor_files(tmp_path)
        suite_json = {
            "data_dir": ".",
            "experiments": [
                {
                    "name": "xor",
                    "schema": "xor.schema.json",
                    "train": "xor.train",
                    "test": "xor.test",
                    "bins": 2,
                    "checks": [{"metric": "test_accuracy", "min": 100.0}],
                }
            ],
        }
        path = tmp_path / "suite.json"
        path.write_text(json.dumps(suite_json))
        suite = load_suite(path)
        assert len(suite.experiments) == 1
        assert suite.experiments[0].checks[0].metric == "test_accuracy"
        report = run_benchmark(suite)
        assert report.ok
        assert report.entries[0].status == "pass"

    def test_data_dir_precedence(self, tmp_path, monkeypatch):
        suite = Suite(experiments=(), base_dir=tmp_path, data_dir="rel")
        monkeypatch.delenv("DIFFNB_DATA", raising=False)
        assert resolve_data_dir(suite, None) == tmp_path / "rel"
        monkeypatch.setenv("DIFFNB_DATA", str(tmp_path / "env"))
        assert resolve_data_dir(suite, None) == tmp_path / "env"
        assert resolve_data_dir(suite, tmp_path / "given") == tmp_path / "given"

    def test_parallel_matches_serial(self, tmp_path, monkeypatch):
        monkeypatch.delenv("DIFFNB_DATA", raising=False)
        write_xor_files(tmp_path)
        experiments = tuple(
            xor_experiment(name=f"xor{i}", bins=2 + i % 2) for i in range(4)
        )
        suite = Suite(experiments=experiments, base_dir=tmp_path, data_dir=".")
        serial = run_benchmark(suite, parallel=1)
        threaded = run_benchmark(suite, parallel=4)
        for a, b in zip(serial.entries, threaded.entries):
            assert a.name == b.name and a.status == b.status
            for key in a.metrics:
                if key != "train_seconds":
                    assert a.metrics[key] == b.metrics[key]

    def test_empty_suite_is_vacuously_ok(self, tmp_path):
        suite = Suite(experiments=(), base_dir=tmp_path)
        report = run_benchmark(suite)
        assert report.ok
        assert "0/0" in render_suite_text(report)

    def test_suite_renderings(self):
        entry = EntryResult(
            name="toy",
            status="pass",
            metrics={
                "train_accuracy": 100.0,
                "test_accuracy": 98.123,
                "epochs": 4,
                "converged": 1,
                "train_seconds": 0.25,
                "n_train": 10,
                "n_test": 10,
            },
            checks=(),
            message="",
        )
        from diffnb.evaluation import SuiteReport

        report = SuiteReport(entries=(entry,))
        text = render_suite_text(report)
        assert "toy: PASS (train 100 %, test 98.12 %, 4 epochs, 0.25 s) checks 0/0" in text
        assert "suite: 1/1 passed" in text
        machine = render_suite_machine(report)
        assert "toy.status=pass" in machine.splitlines()
        assert "toy.epochs=4" in machine.splitlines()
        assert "toy.test_accuracy=98.12" in machine
        assert "suite.ok=1" in machine
