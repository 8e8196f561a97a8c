"""Readers and writers for the JSON/CSV file formats used by the CLI.

Distribution JSON::

    {"variables": [{"name": "X1", "cardinality": 2}, ...], "probs": [...]}

``probs`` is dense and row-major with the last variable fastest. Spin
variables are encoded with category 0 = -1 and 1 = +1.

Samples CSV: a header of variable names, then rows of integer category
indices. Cardinalities are ``max + 1`` per column unless given.

DAG JSON::

    {"nodes": [...], "edges": [["parent", "child"], ...],
     "groups": [["X1"], ["X4", "X5"]], "y": ["Y"]}

Observation-values JSON::

    {"n": 3, "values": {"": 0, "1": 0.5, "1,2": 0.9, ...},
     "ancestral_info": null, "y_is_function_of_obs": true}

Subset keys are comma-joined, sorted, 1-based group indices.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Sequence

from cainfer.dag import Dag
from cainfer.discrete import JointDistribution, SampleTable, VariableDecl
from cainfer.inference import ObservationValues


class FormatError(ValueError):
    """Malformed input file; the message names the path and field."""


def _load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None


def _field(doc: dict, key: str, path) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        raise FormatError(f"{path}: missing field {key!r}")
    return doc[key]


def distribution_from_dict(doc: dict, path="<dict>") -> JointDistribution:
    variables = _field(doc, "variables", path)
    probs = _field(doc, "probs", path)
    try:
        decls = [VariableDecl(str(v["name"]), int(v["cardinality"])) for v in variables]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: field 'variables' is malformed ({exc})") from None
    try:
        return JointDistribution(decls, probs)
    except ValueError as exc:
        raise FormatError(f"{path}: field 'probs': {exc}") from None


def distribution_to_dict(dist: JointDistribution) -> dict:
    return {
        "variables": [{"name": v.name, "cardinality": v.cardinality} for v in dist.variables],
        "probs": [float(p) for p in dist.probs],
    }


def load_distribution(path: str | Path) -> JointDistribution:
    return distribution_from_dict(_load_json(path), path)


def save_distribution(dist: JointDistribution, path: str | Path) -> None:
    Path(path).write_text(json.dumps(distribution_to_dict(dist), indent=2) + "\n", encoding="utf-8")


def load_samples(path: str | Path, cardinalities: dict[str, int] | None = None) -> SampleTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{lineno}: expected {len(header)} columns, got {len(row)}")
            try:
                rows.append(tuple(int(cell) for cell in row))
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer category in {row}") from None
    if not rows:
        raise FormatError(f"{path}: no sample rows")
    cardinalities = cardinalities or {}
    decls = []
    for j, name in enumerate(header):
        observed = max(r[j] for r in rows) + 1
        decls.append(VariableDecl(name, int(cardinalities.get(name, observed))))
    return SampleTable(tuple(decls), tuple(rows))


def load_dag(path: str | Path) -> tuple[Dag, list[list[str]], list[str]]:
    doc = _load_json(path)
    nodes = _field(doc, "nodes", path)
    edges = doc.get("edges", [])
    if any(not isinstance(e, (list, tuple)) or len(e) != 2 for e in edges):
        raise FormatError(f"{path}: field 'edges' must hold [parent, child] pairs")
    try:
        dag = Dag(nodes, [tuple(e) for e in edges])
    except (ValueError, KeyError) as exc:
        raise FormatError(f"{path}: {exc}") from None
    groups = [list(g) for g in doc.get("groups", [])]
    return dag, groups, list(doc.get("y", []))


def _subset_key(key: str, n: int, path) -> frozenset[int]:
    if key.strip() == "":
        return frozenset()
    try:
        idx = [int(part) for part in key.split(",")]
    except ValueError:
        raise FormatError(f"{path}: bad subset key {key!r} in 'values'") from None
    if any(not 1 <= i <= n for i in idx):
        raise FormatError(f"{path}: subset key {key!r} outside 1..{n}")
    return frozenset(i - 1 for i in idx)


def subset_key(s) -> str:
    return ",".join(str(i + 1) for i in sorted(s))


def values_from_dict(doc: dict, path="<dict>") -> ObservationValues:
    n = int(_field(doc, "n", path))
    raw = _field(doc, "values", path)
    values = {_subset_key(k, n, path): float(v) for k, v in raw.items()}
    ancestral = doc.get("ancestral_info")
    try:
        return ObservationValues(
            n,
            values,
            None if ancestral is None else float(ancestral),
            bool(doc.get("y_is_function_of_obs", False)),
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def values_to_dict(obs: ObservationValues) -> dict:
    return {
        "n": obs.n,
        "values": {subset_key(s): v for s, v in sorted(obs.values.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))},
        "ancestral_info": obs.ancestral_info,
        "y_is_function_of_obs": obs.y_is_function_of_obs,
    }


def load_values(path: str | Path) -> ObservationValues:
    return values_from_dict(_load_json(path), path)


def parse_groups(spec: str) -> list[list[str]]:
    """``"X1;X2,X3"`` -> ``[["X1"], ["X2", "X3"]]``."""
    groups = [[m.strip() for m in part.split(",") if m.strip()] for part in spec.split(";")]
    if any(not g for g in groups):
        raise FormatError(f"--groups: empty group in {spec!r}")
    return groups


def parse_int_list(spec: str, flag: str) -> list[int]:
    try:
        return [int(x) for x in spec.split(",")]
    except ValueError:
        raise FormatError(f"{flag}: expected comma-separated integers, got {spec!r}") from None


def _clean(obj: Any) -> Any:
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dump_report(report: dict) -> str:
    """Deterministic JSON text: sorted keys, non-finite floats as null."""
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, out: str | Path | None, stream=None) -> None:
    import sys

    text = dump_report(report)
    if out is None:
        (stream or sys.stdout).write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


__all__: Sequence[str] = [
    "FormatError",
    "distribution_from_dict",
    "distribution_to_dict",
    "dump_report",
    "load_dag",
    "load_distribution",
    "load_samples",
    "load_values",
    "parse_groups",
    "save_distribution",
    "values_from_dict",
    "values_to_dict",
    "write_report",
]
