"""Weight boosting: the training loop that grows per-cell weights on misses.

Every likelihood cell (class, attribute, bin) carries a multiplicative
weight, initially 1. Training sweeps the dataset in order; each example
is scored under the weights as they exist at that moment, and a
misclassified example adds

    delta = alpha * (1 - score_true / score_winner)

to the weights of the true class's cells touched by the example. Epochs
repeat until an epoch misclassifies nothing or ``max_rounds`` is hit.

Scoring here is the single authority shared with inference and
evaluation: log-likelihood parts plus log-weights, exponentiated
per row against the row's max log only when the magnitudes demand it,
so moderate scores equal the plain probability products.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, Schema
from .density import DEFAULT_TAG_GAIN, DensityModel, fit_density, likelihood_logs

# exp() of logs beyond this magnitude risks overflow/underflow; such rows
# are shifted by their max log before exponentiation.
_SAFE_LOG = 690.0
_TINY = float(np.finfo(np.float64).tiny)


@dataclass(frozen=True)
class WeightTable:
    """One positive weight per (class, attribute, bin) likelihood cell.

    ``weights`` is (K, M, B_max) float64; cells beyond an attribute's own
    bin count are dead and stay at 1. Weights start at 1 and only grow.
    """

    weights: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    """Knobs of the training loop.

    ``epsilon_floor`` of None means one tenth of a single training count,
    1/(10 n); ``topology`` of None means 5 bins per continuous attribute.
    Both are resolved to concrete values when training starts.
    """

    alpha: float = 2.0
    max_rounds: int = 500
    tag_gain: float = DEFAULT_TAG_GAIN
    epsilon_floor: float | None = None
    topology: object = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if not 0.0 < self.tag_gain <= 1.0:
            raise ValueError(f"tag_gain must be in (0, 1], got {self.tag_gain}")
        if self.epsilon_floor is not None and not self.epsilon_floor > 0:
            raise ValueError(f"epsilon_floor must be > 0, got {self.epsilon_floor}")


@dataclass(frozen=True)
class TrainTrace:
    """Per-epoch misclassification counts on the training set."""

    miss_counts: tuple[int, ...]

    @property
    def epochs(self) -> int:
        return len(self.miss_counts)

    @property
    def converged(self) -> bool:
        return bool(self.miss_counts) and self.miss_counts[-1] == 0

    @property
    def converged_epoch(self) -> int | None:
        """1-based epoch whose sweep first misclassified nothing, if any."""
        return self.epochs if self.converged else None


@dataclass(frozen=True)
class Model:
    """A trained classifier: fitted density tables plus boosted weights."""

    schema: Schema
    topology: tuple[int, ...]
    density: DensityModel
    weights: WeightTable
    config: TrainConfig
    trace: TrainTrace


def weighted_log_scores(logw: np.ndarray, bins: np.ndarray, loglik: np.ndarray) -> np.ndarray:
    """Per-class log scores for a batch: loglik plus the touched cells' log-weights.

    ``logw`` is (K, M, B_max), ``bins`` (n, M) int64, ``loglik`` (n, K).
    Returns (n, K). The gather-and-sum here is the one reduction every
    fresh scoring path uses, so scores never depend on which path
    computed them. Winners and ties are decided on these log scores;
    exponentiation is presentation.
    """
    n, m = bins.shape
    cols = np.arange(m)[None, :]
    picked = logw[:, cols, bins]  # (K, n, M)
    return loglik + picked.sum(axis=2).T


def scores_from_logs(log_scores: np.ndarray) -> np.ndarray:
    """Exponentiate per-class log scores, one row per example.

    Rows whose max log is representable are exponentiated directly, so
    the result equals the plain product of likelihoods and weights; rows
    that would over- or underflow are shifted by their max log first.
    Results are floored at the smallest positive normal float, keeping
    every score finite and strictly positive.
    """
    logs = np.asarray(log_scores, dtype=np.float64)
    squeeze = logs.ndim == 1
    if squeeze:
        logs = logs[None, :]
    rowmax = logs.max(axis=1, keepdims=True)
    shift = np.where(np.abs(rowmax) < _SAFE_LOG, 0.0, rowmax)
    scores = np.maximum(np.exp(logs - shift), _TINY)
    return scores[0] if squeeze else scores


def winner_of(log_scores: np.ndarray) -> tuple[int, bool]:
    """Winning class of one log-score row: argmax, lowest index on exact ties."""
    winner = int(np.argmax(log_scores))
    tie = bool(np.count_nonzero(log_scores == log_scores[winner]) > 1)
    return winner, tie


def boost_example(
    weights: np.ndarray, bins: np.ndarray, label: int, scores: np.ndarray, alpha: float
) -> float:
    """Apply one boosting update for a misclassified example; returns the step.

    ``bins`` is the example's (M,) bin row, ``scores`` its per-class
    unnormalized scores. Adds delta = alpha * (1 - scores[label]/scores[winner])
    to the true class's M touched weight cells, in place. An exact score
    tie broken against the true class is still a miss but yields delta 0
    and changes nothing. Calling this on a correctly classified example
    (the true label wins the argmax) is a caller bug and raises.
    """
    winner = int(np.argmax(scores))
    if winner == label:
        raise ValueError("boost_example called on a correctly classified example")
    delta = alpha * (1.0 - scores[label] / scores[winner])
    if delta > 0.0:
        weights[label, np.arange(len(bins)), bins] += delta
    return float(delta)


@dataclass
class TrainState:
    """Mutable state of one training run; only weights, logw, and scores move.

    ``bins``, ``loglik``, and ``rows_by_cell`` are precomputed over the
    training set once, since the density tables do not change during
    boosting. ``scores`` carries the per-example log scores forward
    across updates and epochs: a boost touches M cells of one class, so
    only rows sharing one of those cells need a score patch, and their
    winner can only flip toward the boosted class.
    """

    density: DensityModel
    config: TrainConfig
    weights: np.ndarray
    logw: np.ndarray
    bins: np.ndarray
    loglik: np.ndarray
    labels: np.ndarray
    scores: np.ndarray
    rows_by_cell: tuple[tuple[np.ndarray, ...], ...]

    @classmethod
    def build(cls, data: Dataset, config: TrainConfig) -> "TrainState":
        density = fit_density(data, config.topology)
        config = dataclasses.replace(
            config,
            topology=density.topology,
            epsilon_floor=(
                density.epsilon_floor if config.epsilon_floor is None else config.epsilon_floor
            ),
        )
        bins, parts = likelihood_logs(
            density, data.value_matrix(), config.tag_gain, config.epsilon_floor
        )
        loglik = parts.sum(axis=2)
        k = data.schema.n_classes
        m = data.schema.n_attributes
        shape = (k, m, max(density.topology))
        rows_by_cell = tuple(
            tuple(np.nonzero(bins[:, col] == b)[0] for b in range(density.topology[col]))
            for col in range(m)
        )
        return cls(
            density=density,
            config=config,
            weights=np.ones(shape),
            logw=np.zeros(shape),
            bins=bins,
            loglik=loglik,
            labels=data.labels(),
            scores=loglik.copy(),  # all log-weights start at 0
            rows_by_cell=rows_by_cell,
        )

    def _apply_update(self, i: int, wins: np.ndarray, missing: np.ndarray) -> None:
        """Propagate example ``i``'s boost into logw, scores, wins, and missing.

        Only the true class's column moved, and upward, so a row's winner
        either stays put or flips to that class; rows at or before ``i``
        are left to the next epoch's fresh argmax.
        """
        label = int(self.labels[i])
        cells = self.bins[i]
        cols = np.arange(len(cells))
        touched = (label, cols, cells)
        old = self.logw[touched]
        new = np.log(self.weights[touched])
        self.logw[touched] = new

        groups = [self.rows_by_cell[m][cells[m]] for m in range(len(cells))]
        amount = np.repeat(new - old, [len(g) for g in groups])
        patch = np.bincount(np.concatenate(groups), weights=amount, minlength=len(self.labels))
        self.scores[:, label] += patch

        rows = np.nonzero(patch > 0.0)[0]
        rows = rows[rows > i]
        held = self.scores[rows, wins[rows]]
        came = self.scores[rows, label]
        flipped = rows[(came > held) | ((came == held) & (label < wins[rows]))]
        wins[flipped] = label
        missing[flipped] = self.labels[flipped] != label

    def _scan(self) -> int:
        """One sequential pass; scores and winners are patched after each boost."""
        labels = self.labels
        n = len(labels)
        wins = np.argmax(self.scores, axis=1)
        missing = wins != labels
        misses = 0
        start = 0
        while start < n:
            ahead = int(np.argmax(missing[start:]))
            if not missing[start + ahead]:
                break
            i = start + ahead
            misses += 1
            start = i + 1
            row_scores = scores_from_logs(self.scores[i])
            label = int(labels[i])
            # a rounding collapse in exp() can hand a log-domain miss
            # the argmax; that is a zero step, not a boost
            if int(np.argmax(row_scores)) == label:
                continue
            delta = boost_example(self.weights, self.bins[i], label, row_scores, self.config.alpha)
            if delta > 0.0:
                self._apply_update(i, wins, missing)
        return misses


def run_epoch(state: TrainState) -> int:
    """One in-order sweep over the training set; returns the miss count.

    Each example is scored under the weights as of its visit; an update
    only disturbs the scores of rows sharing a boosted cell, so the
    sweep patches those incrementally. Incremental patching can drift
    from fresh summation by rounding ulps, so a clean pass is certified:
    scores are rebuilt from scratch and the sweep repeated once. A
    returned 0 therefore agrees exactly with fresh evaluation.
    """
    misses = state._scan()
    if misses == 0:
        state.scores = weighted_log_scores(state.logw, state.bins, state.loglik)
        misses = state._scan()
    return misses


def train(trainset: Dataset, config: TrainConfig = TrainConfig()) -> tuple[Model, TrainTrace]:
    """Fit density tables once, then boost until clean or out of rounds."""
    if len(trainset) == 0:
        raise ValueError("training set is empty")
    state = TrainState.build(trainset, config)
    miss_counts = []
    for _ in range(state.config.max_rounds):
        miss_counts.append(run_epoch(state))
        if miss_counts[-1] == 0:
            break
    trace = TrainTrace(tuple(miss_counts))
    model = Model(
        schema=trainset.schema,
        topology=state.density.topology,
        density=state.density,
        weights=WeightTable(state.weights),
        config=state.config,
        trace=trace,
    )
    return model, trace
