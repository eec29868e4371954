"""Binned joint-probability tables with per-bin attribute windows.

For every class the value range of each attribute is cut into equal-width
bins. A cell (class k, attribute m, bin b) stores the count of training
examples of class k whose attribute m falls in bin b; dividing by the
training-set size gives the joint probability of the bin and the class.

Each populated cell also remembers, for every *other* attribute, the min
and max that attribute took over the cell's member examples. At scoring
time a cell whose window excludes the query (any other attribute outside
its remembered range) has its probability scaled down by a fixed gain:
the bin stops vouching for combinations it never saw.
"""

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .dataset import Dataset, Schema, SchemaError

DEFAULT_TAG_GAIN = 0.25


@dataclass(frozen=True)
class BinSpec:
    """Equal-width bin grid for one attribute: ``count`` bins spanning [lo, hi]."""

    attribute: int
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"attribute {self.attribute}: bin count must be >= 1, got {self.count}")
        if self.hi < self.lo:
            raise ValueError(f"attribute {self.attribute}: hi {self.hi} < lo {self.lo}")

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.count


def make_bin_spec(values: Sequence[float], count: int, attribute: int = 0) -> BinSpec:
    """Fit a grid of ``count`` bins to the observed range of ``values``."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError(f"attribute {attribute}: no values to fit bins to")
    return BinSpec(attribute, float(arr.min()), float(arr.max()), count)


def bin_index(spec: BinSpec, value: float) -> int:
    """Bin of ``value`` on the grid: floor((v - lo) / width), clamped to [0, count-1].

    Values outside [lo, hi] land in the nearest edge bin. A degenerate
    grid (lo == hi) puts everything in bin 0. The clamped-floor rule
    picks the bin whose center is nearest to the value; on an exact
    boundary between two bins the higher-indexed bin wins.
    """
    if spec.width == 0.0:
        return 0
    raw = int(np.floor((value - spec.lo) / spec.width))
    return min(max(raw, 0), spec.count - 1)


def bin_indices(spec: BinSpec, values: np.ndarray) -> np.ndarray:
    """Vectorized :func:`bin_index` over an array of values."""
    values = np.asarray(values, dtype=np.float64)
    if spec.width == 0.0:
        return np.zeros(values.shape, dtype=np.int64)
    raw = np.floor((values - spec.lo) / spec.width)
    # clamp before the cast: a quotient can exceed the int64 range
    return np.clip(raw, 0.0, spec.count - 1).astype(np.int64)


def resolve_topology(schema: Schema, bins: int | Sequence[int] | Mapping[str, int] | None) -> tuple[int, ...]:
    """Normalize a bin-count request into one count per attribute.

    ``bins`` may be a single count applied to every continuous attribute,
    a full per-attribute sequence, a name -> count mapping, or None
    (default of 5 per continuous attribute). Discrete attributes always
    get exactly one bin per declared value; a conflicting explicit count
    is an error.
    """
    m = schema.n_attributes
    counts: list[int | None]
    if bins is None:
        counts = [None] * m
    elif isinstance(bins, int):
        # a broadcast count only applies where the count is free to choose
        counts = [None if a.is_discrete else bins for a in schema.attributes]
    elif isinstance(bins, Mapping):
        names = [a.name for a in schema.attributes]
        unknown = set(bins) - set(names)
        if unknown:
            raise SchemaError(f"bin counts for unknown attributes: {sorted(unknown)}")
        counts = [bins.get(name) for name in names]
    else:
        counts = [int(b) for b in bins]
        if len(counts) != m:
            raise SchemaError(f"got {len(counts)} bin counts for {m} attributes")

    resolved = []
    for spec, count in zip(schema.attributes, counts):
        if spec.is_discrete:
            want = len(spec.values)
            if count is not None and count != want:
                raise SchemaError(
                    f"attribute {spec.name!r}: {count} bins requested but the {spec.kind} "
                    f"attribute declares {want} values"
                )
            resolved.append(want)
        else:
            resolved.append(5 if count is None else int(count))
    for spec, count in zip(schema.attributes, resolved):
        if count < 1:
            raise SchemaError(f"attribute {spec.name!r}: bin count must be >= 1, got {count}")
    return tuple(resolved)


@dataclass(frozen=True)
class JointTable:
    """Per-class, per-attribute, per-bin example counts over a training set.

    ``counts[k, m, b]`` is the number of training examples of class k
    whose attribute m falls in bin b of that class's grid. Bins beyond an
    attribute's own count are dead and stay zero. Dividing by ``n_train``
    turns a cell into the joint probability of (bin, class).
    """

    counts: np.ndarray
    n_train: int

    def probabilities(self) -> np.ndarray:
        return self.counts / float(self.n_train)


@dataclass(frozen=True)
class TagTable:
    """Per-cell windows over the other attributes.

    For a populated cell (k, m, b), ``lo[k, m, b, j]`` / ``hi[k, m, b, j]``
    bound attribute j (j != m) over the cell's member examples. Unpopulated
    cells and the j == m diagonal hold (-inf, +inf), which no value can
    violate.
    """

    lo: np.ndarray
    hi: np.ndarray
    populated: np.ndarray


@dataclass(frozen=True)
class DensityModel:
    """Frozen result of fitting grids, counts, and windows to a training set."""

    schema: Schema
    topology: tuple[int, ...]
    bin_specs: tuple[BinSpec, ...]
    joint: JointTable
    tags: TagTable

    @property
    def epsilon_floor(self) -> float:
        """Probability substituted for empty cells: one tenth of one count."""
        return 1.0 / (10.0 * self.joint.n_train)


def fit_density(
    data: Dataset, bins: int | Sequence[int] | Mapping[str, int] | None = None
) -> DensityModel:
    """Fit bin grids, joint counts, and per-cell windows to a training set.

    Grids use each attribute's observed range over the whole training
    set, so every class shares one grid per attribute. The returned model
    is immutable; scoring never modifies it.
    """
    schema = data.schema
    topology = resolve_topology(schema, bins)
    values = data.value_matrix()
    labels = data.labels()
    n, m = values.shape
    k = schema.n_classes
    b_max = max(topology)

    specs = tuple(make_bin_spec(values[:, j], topology[j], attribute=j) for j in range(m))
    binned = np.stack([bin_indices(specs[j], values[:, j]) for j in range(m)], axis=1)

    counts = np.zeros((k, m, b_max), dtype=np.int64)
    attr_idx = np.broadcast_to(np.arange(m), (n, m))
    label_idx = np.broadcast_to(labels[:, None], (n, m))
    np.add.at(counts, (label_idx, attr_idx, binned), 1)

    lo = np.full((k, m, b_max, m), np.inf)
    hi = np.full((k, m, b_max, m), -np.inf)
    for j in range(m):
        cell = (labels, np.full(n, j), binned[:, j])
        np.minimum.at(lo, cell, values)
        np.maximum.at(hi, cell, values)
    populated = counts > 0
    lo[~populated] = -np.inf
    hi[~populated] = np.inf
    diag = np.arange(m)
    lo[:, diag, :, diag] = -np.inf
    hi[:, diag, :, diag] = np.inf

    return DensityModel(schema, topology, specs, JointTable(counts, n), TagTable(lo, hi, populated))


def tagged_likelihood(
    density: DensityModel,
    values: Sequence[float],
    class_index: int,
    attr_index: int,
    tag_gain: float = DEFAULT_TAG_GAIN,
    epsilon: float | None = None,
) -> float:
    """Likelihood of attribute ``attr_index`` of ``values`` under one class.

    The base value is the joint probability of the attribute's bin with
    the class, with empty cells floored at ``epsilon`` (default: the
    model's tenth-of-a-count floor). If any other attribute of ``values``
    falls outside the cell's window, the result is scaled by ``tag_gain``
    exactly once, however many attributes violate it.
    """
    if epsilon is None:
        epsilon = density.epsilon_floor
    b = bin_index(density.bin_specs[attr_index], values[attr_index])
    count = density.joint.counts[class_index, attr_index, b]
    base = count / float(density.joint.n_train) if count > 0 else epsilon
    lo = density.tags.lo[class_index, attr_index, b]
    hi = density.tags.hi[class_index, attr_index, b]
    arr = np.asarray(values, dtype=np.float64)
    violated = bool(np.any((arr < lo) | (arr > hi)))
    return base * tag_gain if violated else base


def likelihood_logs(
    density: DensityModel,
    values: np.ndarray,
    tag_gain: float = DEFAULT_TAG_GAIN,
    epsilon: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Bins and per-class log-likelihood parts for a batch of rows.

    Returns ``(bins, log_parts)`` where ``bins`` is (n, M) int64 and
    ``log_parts`` is (n, K, M): the log of each attribute's window-gated
    likelihood under each class. Each scalar entry equals
    ``log(tagged_likelihood(...))`` for the same row, class, attribute.
    """
    if epsilon is None:
        epsilon = density.epsilon_floor
    values = np.asarray(values, dtype=np.float64)
    n, m = values.shape
    k = density.schema.n_classes

    binned = np.stack([bin_indices(density.bin_specs[j], values[:, j]) for j in range(m)], axis=1)

    rows = np.arange(n)[:, None]
    attrs = np.arange(m)[None, :]
    counts = density.joint.counts[:, attrs, binned[rows, attrs]]  # (K, n, M)
    base = np.where(counts > 0, counts / float(density.joint.n_train), epsilon)

    violated = np.zeros((k, n, m), dtype=bool)
    for j in range(m):
        lo_j = density.tags.lo[:, :, :, j][:, attrs, binned[rows, attrs]]  # (K, n, M)
        hi_j = density.tags.hi[:, :, :, j][:, attrs, binned[rows, attrs]]
        v_j = values[:, j][None, :, None]
        violated |= (v_j < lo_j) | (v_j > hi_j)

    gated = np.where(violated, base * tag_gain, base)
    return binned, np.log(gated).transpose(1, 0, 2)
