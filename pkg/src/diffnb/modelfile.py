"""Trained-model persistence: a versioned, self-describing JSON document.

Counts are stored as integers and floats in their shortest exact decimal
form, so a load reproduces the in-memory model bit for bit and two model
files diff cleanly. Per-attribute arrays are stored ragged (each
attribute lists exactly its own bins); padding to the rectangular
in-memory layout happens on load.
"""

import json
from pathlib import Path

import numpy as np

from .boosting import Model, TrainConfig, TrainTrace, WeightTable
from .dataset import AttributeSpec, Schema
from .density import BinSpec, DensityModel, JointTable, TagTable

FORMAT_NAME = "diffnb-model"
FORMAT_VERSION = 1


def _schema_to_json(schema: Schema) -> dict:
    tokens = schema.class_tokens or schema.classes
    attributes = []
    for a in schema.attributes:
        entry = {"name": a.name, "kind": a.kind}
        if a.values is not None:
            entry["values"] = list(a.values)
        attributes.append(entry)
    return {
        "classes": [{"label": c, "token": t} for c, t in zip(schema.classes, tokens)],
        "attributes": attributes,
    }


def _schema_from_json(raw: dict) -> Schema:
    attrs = tuple(
        AttributeSpec(a["name"], a["kind"], tuple(a["values"]) if "values" in a else None)
        for a in raw["attributes"]
    )
    classes = tuple(c["label"] for c in raw["classes"])
    tokens = tuple(c["token"] for c in raw["classes"])
    return Schema(attrs, classes, tokens)


def _tags_to_json(model: Model) -> list:
    tags = model.density.tags
    k_n, m_n = model.schema.n_classes, model.schema.n_attributes
    out = []
    for k in range(k_n):
        per_class = []
        for m in range(m_n):
            per_attr = []
            for b in range(model.topology[m]):
                if not tags.populated[k, m, b]:
                    per_attr.append(None)
                    continue
                entry = []
                for j in range(m_n):
                    if j == m:
                        entry.append(None)
                    else:
                        entry.append([float(tags.lo[k, m, b, j]), float(tags.hi[k, m, b, j])])
                per_attr.append(entry)
            per_class.append(per_attr)
        out.append(per_class)
    return out


def model_to_json(model: Model) -> str:
    k_n, m_n = model.schema.n_classes, model.schema.n_attributes
    counts = [
        [[int(c) for c in model.density.joint.counts[k, m, : model.topology[m]]] for m in range(m_n)]
        for k in range(k_n)
    ]
    weights = [
        [[float(w) for w in model.weights.weights[k, m, : model.topology[m]]] for m in range(m_n)]
        for k in range(k_n)
    ]
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "schema": _schema_to_json(model.schema),
        "topology": list(model.topology),
        "n_train": model.density.joint.n_train,
        "bin_specs": [
            {"lo": s.lo, "hi": s.hi, "count": s.count} for s in model.density.bin_specs
        ],
        "counts": counts,
        "tags": _tags_to_json(model),
        "weights": weights,
        "config": {
            "alpha": model.config.alpha,
            "max_rounds": model.config.max_rounds,
            "tag_gain": model.config.tag_gain,
            "epsilon_floor": model.config.epsilon_floor,
        },
        "trace": {"miss_counts": list(model.trace.miss_counts)},
    }
    return json.dumps(doc, indent=1)


def model_from_json(text: str) -> Model:
    doc = json.loads(text)
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')!r}")
    schema = _schema_from_json(doc["schema"])
    topology = tuple(int(b) for b in doc["topology"])
    k_n, m_n = schema.n_classes, schema.n_attributes
    b_max = max(topology)
    n_train = int(doc["n_train"])

    specs = tuple(
        BinSpec(m, float(s["lo"]), float(s["hi"]), int(s["count"]))
        for m, s in enumerate(doc["bin_specs"])
    )
    counts = np.zeros((k_n, m_n, b_max), dtype=np.int64)
    weights = np.ones((k_n, m_n, b_max))
    for k in range(k_n):
        for m in range(m_n):
            counts[k, m, : topology[m]] = doc["counts"][k][m]
            weights[k, m, : topology[m]] = doc["weights"][k][m]

    lo = np.full((k_n, m_n, b_max, m_n), -np.inf)
    hi = np.full((k_n, m_n, b_max, m_n), np.inf)
    for k in range(k_n):
        for m in range(m_n):
            for b, entry in enumerate(doc["tags"][k][m]):
                if entry is None:
                    continue
                for j, bounds in enumerate(entry):
                    if bounds is not None:
                        lo[k, m, b, j], hi[k, m, b, j] = bounds
    tags = TagTable(lo, hi, counts > 0)

    density = DensityModel(schema, topology, specs, JointTable(counts, n_train), tags)
    raw = doc["config"]
    config = TrainConfig(
        alpha=raw["alpha"],
        max_rounds=raw["max_rounds"],
        tag_gain=raw["tag_gain"],
        epsilon_floor=raw["epsilon_floor"],
        topology=topology,
    )
    trace = TrainTrace(tuple(int(c) for c in doc["trace"]["miss_counts"]))
    return Model(schema, topology, density, WeightTable(weights), config, trace)


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> Model:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
