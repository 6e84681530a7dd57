"""JSON documents for graphs, certificates and reports."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import GraphError
from .signed_graph import SignedGraph


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(doc) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def write_json(path, doc) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise GraphError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise GraphError(f"{path}: invalid JSON ({exc})") from None


def load_graph(path) -> SignedGraph:
    return SignedGraph.from_dict(read_json(path))


def save_graph(g: SignedGraph, path) -> None:
    write_json(path, g.to_dict())
