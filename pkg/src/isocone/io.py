"""File formats: JSON pre-orders, one-column vector CSVs, pair CSVs."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .preorder import PreOrder, PreOrderError, build_preorder, grid_preorder


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(x), ".17g")


def preorder_from_dict(data: dict) -> PreOrder:
    """``{"elements": [...], "edges": [[a, b], ...]}`` or ``{"grid": [r1, r2, ...]}``."""
    if "grid" in data:
        return grid_preorder(data["grid"])
    if "elements" not in data:
        raise PreOrderError("pre-order JSON needs 'elements' (with optional 'edges') or 'grid'")
    elements = [_hashable(e) for e in data["elements"]]
    edges = [(_hashable(a), _hashable(b)) for a, b in data.get("edges", [])]
    return build_preorder(elements, edges)


def _hashable(x):
    return tuple(_hashable(v) for v in x) if isinstance(x, list) else x


def preorder_to_dict(p: PreOrder) -> dict:
    return {
        "elements": [list(e) if isinstance(e, tuple) else e for e in p.elements],
        "edges": [[_plain(p.elements[a]), _plain(p.elements[b])] for a, b in p.edges],
    }


def _plain(x):
    return list(x) if isinstance(x, tuple) else x


def load_preorder(path) -> PreOrder:
    with open(path) as fh:
        return preorder_from_dict(json.load(fh))


def _rows(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows:
        try:
            float(rows[0][-1])
        except ValueError:
            rows = rows[1:]          # header line
    return rows


def read_vector(path) -> np.ndarray:
    """One value per line (last column if several); an optional header is skipped."""
    return np.array([float(r[-1]) for r in _rows(path)])


def read_indices(path) -> np.ndarray:
    return np.array([int(r[0]) for r in _rows(path)], dtype=np.intp)


def read_pairs(path) -> list[tuple[int, float]]:
    return [(int(r[0]), float(r[1])) for r in _rows(path)]


def vector_csv(values) -> str:
    return "".join(format_float(v) + "\n" for v in values)


def write_text(path, text: str) -> None:
    Path(path).write_text(text)
