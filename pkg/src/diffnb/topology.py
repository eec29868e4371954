"""Coordinate search over per-attribute bin counts.

Bin counts that help individually tend to help together, so the search
sweeps one attribute at a time from a uniform baseline, keeps each
attribute's best count, then trains the combination of winners to verify
it. Every candidate training is an independent pure function of
(train, validation, topology), which is what makes parallel sweeps safe
and serial/parallel results identical.
"""

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

from .boosting import TrainConfig, train
from .dataset import Dataset
from .density import resolve_topology
from .evaluation import evaluate


@dataclass(frozen=True)
class SearchSpec:
    """Search space and budget.

    ``ranges`` holds one nonempty candidate tuple per attribute; use a
    singleton to pin an attribute (discrete attributes must stay pinned
    to their value count). ``budget`` caps the number of trainings.
    """

    ranges: tuple[tuple[int, ...], ...]
    budget: int = 64
    parallelism: int = 1
    baseline_bins: int = 5
    exhaustive: bool = False

    def __post_init__(self):
        if not self.ranges or any(len(r) == 0 for r in self.ranges):
            raise ValueError("every attribute needs a nonempty candidate range")
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")


@dataclass(frozen=True)
class Trial:
    topology: tuple[int, ...]
    train_accuracy: float
    val_accuracy: float


@dataclass(frozen=True)
class SearchResult:
    best_topology: tuple[int, ...]
    best_accuracy: float
    trials: tuple[Trial, ...]
    truncated: bool


class _Runner:
    """Budgeted, cached trial execution; repeats of a topology are free."""

    def __init__(self, trainset, validation, base_config, spec, on_trial):
        self.trainset = trainset
        self.validation = validation
        self.base_config = base_config
        self.spec = spec
        self.on_trial = on_trial
        self.cache: dict[tuple[int, ...], Trial] = {}
        self.log: list[Trial] = []
        self.spent = 0
        self.truncated = False

    def _train_one(self, topology: tuple[int, ...]) -> Trial:
        config = dataclasses.replace(self.base_config, topology=topology)
        model, _ = train(self.trainset, config)
        return Trial(
            topology,
            evaluate(model, self.trainset).accuracy,
            evaluate(model, self.validation).accuracy,
        )

    def run_batch(self, topologies: Sequence[tuple[int, ...]]) -> None:
        """Run the uncached topologies, charging budget in list order.

        Candidates beyond the remaining budget are dropped and flag the
        result truncated. The batch may execute on threads; results are
        recorded in list order, so parallel and serial runs match.
        """
        fresh: list[tuple[int, ...]] = []
        seen = set()
        for topo in topologies:
            if topo in self.cache or topo in seen:
                continue
            if self.spent + len(fresh) >= self.spec.budget:
                self.truncated = True
                break
            seen.add(topo)
            fresh.append(topo)
        if not fresh:
            return
        if self.spec.parallelism > 1 and len(fresh) > 1:
            with ThreadPoolExecutor(max_workers=self.spec.parallelism) as pool:
                trials = list(pool.map(self._train_one, fresh))
        else:
            trials = [self._train_one(topo) for topo in fresh]
        self.spent += len(fresh)
        for trial in trials:
            self.cache[trial.topology] = trial
            self.log.append(trial)
            if self.on_trial is not None:
                self.on_trial(trial)

    def result(self) -> SearchResult:
        best = max(self.log, key=lambda t: t.val_accuracy)  # first max wins ties
        return SearchResult(best.topology, best.val_accuracy, tuple(self.log), self.truncated)


def coordinate_search(
    trainset: Dataset,
    validation: Dataset,
    spec: SearchSpec,
    base_config: TrainConfig = TrainConfig(),
    on_trial: Callable[[Trial], None] | None = None,
) -> SearchResult:
    """Sweep each attribute's bin count, then verify the combined winners.

    Baseline first, then per-attribute sweeps holding the rest at
    baseline, then one verification run of the per-attribute winners.
    The best topology is the best validation accuracy seen anywhere in
    the trial log (earliest trial wins exact ties). A space of all
    singleton ranges skips straight to its single verification trial.
    """
    m = trainset.schema.n_attributes
    if len(spec.ranges) != m:
        raise ValueError(f"got {len(spec.ranges)} ranges for {m} attributes")
    runner = _Runner(trainset, validation, base_config, spec, on_trial)

    if all(len(r) == 1 for r in spec.ranges):
        runner.run_batch([tuple(r[0] for r in spec.ranges)])
        return runner.result()

    if spec.exhaustive:
        runner.run_batch([tuple(topo) for topo in product(*spec.ranges)])
        return runner.result()

    baseline = resolve_topology(trainset.schema, spec.baseline_bins)
    runner.run_batch([baseline])

    winners = list(baseline)
    for attr in range(m):
        candidates = [baseline[:attr] + (count,) + baseline[attr + 1 :] for count in spec.ranges[attr]]
        runner.run_batch(candidates)
        scored = [(runner.cache[c].val_accuracy, i) for i, c in enumerate(candidates) if c in runner.cache]
        if scored:
            best_acc = max(acc for acc, _ in scored)
            best_i = next(i for acc, i in scored if acc == best_acc)
            winners[attr] = spec.ranges[attr][best_i]

    runner.run_batch([tuple(winners)])
    return runner.result()
