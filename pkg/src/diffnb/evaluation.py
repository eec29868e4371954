"""Model scoring reports and the reproducibility benchmark harness.

``evaluate`` turns a model plus a labeled dataset into a Report: counts,
accuracy, confusion matrix, per-class correct counts, tie count. The
benchmark harness runs a suite of train-and-evaluate experiments
described in a JSON file and checks each metric against declared bounds,
so published results stay pinned by executable checks.
"""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .boosting import Model, TrainConfig, train
from .dataset import Dataset, ParseOptions, SchemaError, load_schema, parse_table, split_dataset
from .inference import predict_batch


@dataclass(frozen=True)
class Report:
    """Outcome of scoring one dataset: counts, accuracy, confusion matrix.

    ``confusion[i, j]`` counts examples of true class i predicted as class
    j; rows are true classes. ``per_class_correct`` is its diagonal.
    """

    n_examples: int
    n_correct: int
    accuracy: float
    confusion: np.ndarray
    per_class_correct: tuple[int, ...]
    tie_count: int
    class_labels: tuple[str, ...]


def _check_schemas(model: Model, data: Dataset) -> None:
    if data.schema == model.schema:
        return
    a, b = model.schema, data.schema
    if a.n_attributes != b.n_attributes:
        raise SchemaError(
            f"model expects {a.n_attributes} attributes, data has {b.n_attributes}"
        )
    for mine, theirs in zip(a.attributes, b.attributes):
        if mine != theirs:
            raise SchemaError(f"attribute {mine.name!r} differs between model and data")
    raise SchemaError(f"classes differ between model {a.classes} and data {b.classes}")


def evaluate(model: Model, data: Dataset) -> Report:
    """Score every example and tally the outcome."""
    if len(data) == 0:
        raise ValueError("dataset is empty")
    _check_schemas(model, data)
    labels = data.labels()
    winners, ties = predict_batch(model, data.value_matrix())
    k = model.schema.n_classes
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (labels, winners), 1)
    n = len(data)
    n_correct = int(np.trace(confusion))
    return Report(
        n_examples=n,
        n_correct=n_correct,
        accuracy=100.0 * n_correct / n,
        confusion=confusion,
        per_class_correct=tuple(int(c) for c in np.diag(confusion)),
        tie_count=int(np.count_nonzero(ties)),
        class_labels=model.schema.classes,
    )


def format_percent(value: float) -> str:
    """Two decimals with trailing zeros trimmed: 96.99 stays, 100.00 -> 100."""
    return f"{value:.2f}".rstrip("0").rstrip(".")


def correct_line(report: Report) -> str:
    """Per-class correct counts and accuracy, e.g. ``214, 205 : 96.99 %``."""
    counts = ", ".join(str(c) for c in report.per_class_correct)
    return f"{counts} : {format_percent(report.accuracy)} %"


def render_report_text(report: Report) -> str:
    width = max(len(label) for label in report.class_labels) + 2
    lines = [
        f"examples: {report.n_examples}",
        f"correct: {report.n_correct} ({format_percent(report.accuracy)} %)",
        f"per-class correct: {correct_line(report)}",
        f"ties: {report.tie_count}",
        "confusion (rows true, columns predicted):",
        " " * width + "".join(f"{label:>{width}}" for label in report.class_labels),
    ]
    for i, label in enumerate(report.class_labels):
        row = "".join(f"{int(c):>{width}}" for c in report.confusion[i])
        lines.append(f"{label:<{width}}" + row)
    return "\n".join(lines)


def render_report_machine(report: Report) -> str:
    confusion = ";".join(",".join(str(int(c)) for c in row) for row in report.confusion)
    lines = [
        f"n={report.n_examples}",
        f"correct={report.n_correct}",
        f"accuracy={report.accuracy:.2f}",
        f"tie_count={report.tie_count}",
        "per_class_correct=" + ",".join(str(c) for c in report.per_class_correct),
        f"confusion={confusion}",
    ]
    return "\n".join(lines)


@dataclass(frozen=True)
class MetricCheck:
    """Closed bound on one numeric metric; either side may be open."""

    metric: str
    min: float | None = None
    max: float | None = None

    def passes(self, value: float) -> bool:
        if self.min is not None and value < self.min:
            return False
        if self.max is not None and value > self.max:
            return False
        return True

    def describe(self) -> str:
        lo = "-inf" if self.min is None else format_percent(self.min)
        hi = "+inf" if self.max is None else format_percent(self.max)
        return f"{self.metric} in [{lo}, {hi}]"


@dataclass(frozen=True)
class ExperimentSpec:
    """One benchmark entry: data + parse layout + training knobs + checks.

    Provide either ``data`` with ``train_count`` (one file split in file
    order, or shuffled when ``split_seed`` is set) or explicit ``train``
    and ``test`` files.
    """

    name: str
    schema: str
    bins: object = None
    alpha: float = 2.0
    max_rounds: int = 500
    data: str | None = None
    train_count: int | None = None
    split_seed: int | None = None
    train: str | None = None
    test: str | None = None
    parse: ParseOptions = field(default_factory=ParseOptions)
    checks: tuple[MetricCheck, ...] = ()
    fetch_hint: str | None = None

    def __post_init__(self):
        single = self.data is not None
        pair = self.train is not None and self.test is not None
        if single == pair:
            raise ValueError(f"experiment {self.name!r}: give either data+train_count or train+test")
        if single and self.train_count is None:
            raise ValueError(f"experiment {self.name!r}: data file needs train_count")


@dataclass(frozen=True)
class Suite:
    experiments: tuple[ExperimentSpec, ...]
    base_dir: Path
    data_dir: str = "."


@dataclass(frozen=True)
class EntryResult:
    name: str
    status: str  # pass | fail | missing_data | error
    metrics: dict
    checks: tuple[tuple[MetricCheck, bool], ...]
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class SuiteReport:
    entries: tuple[EntryResult, ...]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)


def load_suite(path: str | Path) -> Suite:
    """Load a benchmark suite description from JSON."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    experiments = []
    for e in raw.get("experiments", []):
        parse_raw = e.get("parse", {})
        parse = ParseOptions(
            delimiter=parse_raw.get("delimiter"),
            missing_token=parse_raw.get("missing_token", "?"),
            label_col=parse_raw.get("label_col", -1),
            ignore_cols=tuple(parse_raw.get("ignore_cols", ())),
        )
        split = e.get("split", {})
        checks = tuple(
            MetricCheck(c["metric"], c.get("min"), c.get("max")) for c in e.get("checks", [])
        )
        bins = e.get("bins")
        experiments.append(
            ExperimentSpec(
                name=e["name"],
                schema=e["schema"],
                bins=bins,
                alpha=e.get("alpha", 2.0),
                max_rounds=e.get("max_rounds", 500),
                data=e.get("data"),
                train_count=split.get("train_count"),
                split_seed=split.get("seed"),
                train=e.get("train"),
                test=e.get("test"),
                parse=parse,
                checks=checks,
                fetch_hint=e.get("fetch_hint"),
            )
        )
    return Suite(tuple(experiments), path.parent, raw.get("data_dir", "."))


def resolve_data_dir(suite: Suite, override: str | None = None) -> Path:
    """Data root: explicit override, then DIFFNB_DATA, then the suite's own."""
    if override:
        return Path(override)
    env = os.environ.get("DIFFNB_DATA")
    if env:
        return Path(env)
    return suite.base_dir / suite.data_dir


def run_experiment(spec: ExperimentSpec, data_root: Path, schema_root: Path) -> EntryResult:
    """Train and evaluate one benchmark entry against its checks."""
    try:
        schema_path = schema_root / spec.schema
        data_paths = [schema_path]
        if spec.data is not None:
            data_paths.append(data_root / spec.data)
        else:
            data_paths.extend([data_root / spec.train, data_root / spec.test])
        missing = [str(p) for p in data_paths if not p.exists()]
        if missing:
            hint = f" ({spec.fetch_hint})" if spec.fetch_hint else ""
            return EntryResult(
                spec.name, "missing_data", {}, (), f"missing: {', '.join(missing)}{hint}"
            )
        schema = load_schema(schema_path)
        if spec.data is not None:
            full = parse_table(data_root / spec.data, schema, spec.parse)
            trainset, testset = split_dataset(full, spec.train_count, spec.split_seed)
        else:
            trainset = parse_table(data_root / spec.train, schema, spec.parse)
            testset = parse_table(data_root / spec.test, schema, spec.parse)
        config = TrainConfig(alpha=spec.alpha, max_rounds=spec.max_rounds, topology=spec.bins)
        started = time.perf_counter()
        model, trace = train(trainset, config)
        train_seconds = time.perf_counter() - started
        train_report = evaluate(model, trainset)
        test_report = evaluate(model, testset)
        metrics = {
            "train_accuracy": train_report.accuracy,
            "test_accuracy": test_report.accuracy,
            "epochs": trace.epochs,
            "converged": int(trace.converged),
            "train_seconds": train_seconds,
            "n_train": len(trainset),
            "n_test": len(testset),
        }
        outcomes = tuple((c, c.passes(metrics[c.metric])) for c in spec.checks)
        status = "pass" if all(ok for _, ok in outcomes) else "fail"
        return EntryResult(spec.name, status, metrics, outcomes)
    except Exception as err:  # entry failures must not kill the suite
        return EntryResult(spec.name, "error", {}, (), f"{type(err).__name__}: {err}")


def run_benchmark(
    suite: Suite,
    data_dir: str | None = None,
    parallel: int = 1,
    on_entry: Callable[[EntryResult], None] | None = None,
) -> SuiteReport:
    """Run every experiment in the suite; entries are independent.

    Missing data files or crashes mark their entry failed and the suite
    carries on. With ``parallel`` > 1 entries run concurrently; results
    keep suite order either way.
    """
    data_root = resolve_data_dir(suite, data_dir)
    runner = lambda spec: run_experiment(spec, data_root, suite.base_dir)
    if parallel > 1 and len(suite.experiments) > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            entries = tuple(pool.map(runner, suite.experiments))
    else:
        entries = tuple(runner(spec) for spec in suite.experiments)
    if on_entry is not None:
        for entry in entries:
            on_entry(entry)
    return SuiteReport(entries)


def render_entry_text(entry: EntryResult) -> str:
    if entry.status in ("missing_data", "error"):
        return f"{entry.name}: {entry.status.upper()} {entry.message}"
    parts = [
        f"train {format_percent(entry.metrics['train_accuracy'])} %",
        f"test {format_percent(entry.metrics['test_accuracy'])} %",
        f"{entry.metrics['epochs']} epochs",
        f"{entry.metrics['train_seconds']:.2f} s",
    ]
    n_pass = sum(1 for _, ok in entry.checks if ok)
    line = f"{entry.name}: {entry.status.upper()} ({', '.join(parts)}) checks {n_pass}/{len(entry.checks)}"
    failed = [c.describe() + f" got {format_percent(float(entry.metrics[c.metric]))}"
              for c, ok in entry.checks if not ok]
    if failed:
        line += "\n  failed: " + "; ".join(failed)
    return line


def render_suite_text(report: SuiteReport) -> str:
    lines = [render_entry_text(e) for e in report.entries]
    n_ok = sum(1 for e in report.entries if e.ok)
    lines.append(f"suite: {n_ok}/{len(report.entries)} passed")
    return "\n".join(lines)


def render_suite_machine(report: SuiteReport) -> str:
    lines = []
    for e in report.entries:
        lines.append(f"{e.name}.status={e.status}")
        for key in sorted(e.metrics):
            value = e.metrics[key]
            text = f"{value:.2f}" if isinstance(value, float) else str(value)
            lines.append(f"{e.name}.{key}={text}")
    lines.append(f"suite.ok={int(report.ok)}")
    return "\n".join(lines)
