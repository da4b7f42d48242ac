"""File formats: dataset CSV, collection manifest JSON, path JSON, edge TSV,
and the benchmark / evaluation CSV emitters. All writes are atomic
(temp file + rename).
"""

import csv
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .covariance import Dataset, DatasetCollection
from .exceptions import DimensionMismatch

TIMING_HEADER = ("method", "d", "m", "seed", "wall_ms", "knots")


def atomic_write_text(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_dataset_csv(path, samples, names):
    samples = np.asarray(samples, dtype=float)
    lines = [",".join(names)]
    for row in samples:
        lines.append(",".join(f"{x:.17g}" for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_dataset_csv(path):
    """Returns (samples array, tuple of column names)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            names = tuple(next(reader))
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names):
                raise ValueError(f"{path}:{lineno}: expected {len(names)} fields, got {len(row)}")
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric value") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float), names


def write_matrix_csv(path, matrix, names):
    matrix = np.asarray(matrix, dtype=float)
    lines = [",".join(names)]
    for row in matrix:
        lines.append(",".join(f"{x:.17g}" for x in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_manifest(path):
    """Parse a two-group collection manifest.

    Format: ``{"group_a": [{"path": ..., "source_id": ...}, ...],
    "group_b": [...]}`` with dataset paths resolved relative to the manifest.
    Returns (collection_a, collection_b, variable names).
    """
    path = Path(path)
    try:
        spec = json.loads(path.read_text())
    except json.JSONDecodeError as ex:
        raise ValueError(f"{path}: not valid JSON ({ex})") from None
    if not isinstance(spec, dict) or not {"group_a", "group_b"} <= set(spec):
        raise ValueError(f"{path}: manifest must contain 'group_a' and 'group_b' lists")
    names = None
    collections = []
    for group in ("group_a", "group_b"):
        entries = spec[group]
        if not isinstance(entries, list) or not entries:
            raise ValueError(f"{path}: '{group}' must be a non-empty list")
        datasets = []
        for entry in entries:
            if not isinstance(entry, dict) or "path" not in entry:
                raise ValueError(f"{path}: every dataset entry needs a 'path'")
            csv_path = Path(entry["path"])
            if not csv_path.is_absolute():
                csv_path = path.parent / csv_path
            if not csv_path.exists():
                raise FileNotFoundError(f"dataset file not found: {csv_path}")
            samples, cols = read_dataset_csv(csv_path)
            if names is None:
                names = cols
            elif cols != names:
                raise DimensionMismatch(
                    f"{csv_path}: columns {cols} do not match {names}"
                )
            datasets.append(Dataset(samples, source_id=str(entry.get("source_id", csv_path.stem))))
        collections.append(DatasetCollection(tuple(datasets)))
    return collections[0], collections[1], names


def path_to_dict(path_obj):
    """JSON-ready form: {d, knots: [{lambda, event, entries}], termination_reason}."""
    knots = []
    for knot in path_obj.knots:
        entries = [
            {"i": i, "j": j, "value": value} for i, j, value in knot.delta.entries()
        ]
        event = {
            "kind": knot.event.kind,
            "indices": list(knot.event.indices),
            "sign": knot.event.sign,
            "reason": knot.event.reason,
        }
        knots.append({"lambda": knot.lam, "event": event, "entries": entries})
    return {
        "d": path_obj.dim,
        "knots": knots,
        "termination_reason": path_obj.termination_reason,
    }


def write_edge_list_tsv(path, delta, names):
    """Upper-triangle nonzeros of a sparse solution as (var_i, var_j, value)."""
    rows = sorted(
        (i, j, value) for i, j, value in delta.entries() if i < j
    )
    lines = ["\t".join(("var_i", "var_j", "delta_value"))]
    for i, j, value in rows:
        lines.append(f"{names[i]}\t{names[j]}\t{value:.17g}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_pr_csv(path, rows):
    """Rows: dicts with seed, method, lambda, precision, recall, n_selected."""
    header = ("seed", "method", "lambda", "precision", "recall", "n_selected")
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(str(r[k]) for k in header))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_stability_csv(path, profile):
    lines = ["lambda,instability"]
    for lam, inst in zip(profile.lambdas, profile.instability):
        lines.append(f"{lam:.17g},{'' if np.isnan(inst) else format(inst, '.17g')}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_timing_csv(path, rows):
    lines = [",".join(TIMING_HEADER)]
    for r in rows:
        lines.append(",".join(str(r[k]) for k in TIMING_HEADER))
    atomic_write_text(path, "\n".join(lines) + "\n")
