"""JSON file formats for behaviors, counts, and functionals.

Every file is an object with a ``format_version`` gate and a ``kind`` tag.
Tables are nested lists indexed [x][y][a][b] (joint blocks) or [x][a]
(marginal blocks).  Keys are sorted and floats use Python's shortest
round-tripping decimal form (at most 17 significant digits), so equal
objects serialize to byte-identical files and write-then-read is lossless.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .core import Behavior, BellFunctional, Scenario
from .errors import SchemaError
from .stats import CountTable

FORMAT_VERSION = 1


def write_json(path, payload: dict) -> None:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def read_json(path) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict):
        raise SchemaError(f"{path}: top level must be a JSON object")
    return payload


def file_digest(path) -> str:
    """Content hash of a file, prefixed with the algorithm name."""
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _expect_kind(payload: dict, kind: str) -> None:
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"unsupported format_version {version!r} (this build reads {FORMAT_VERSION})"
        )
    if payload.get("kind") != kind:
        raise SchemaError(f"expected kind {kind!r}, got {payload.get('kind')!r}")


def _scenario_of(payload: dict) -> Scenario:
    for key in ("m", "d"):
        if not isinstance(payload.get(key), int):
            raise SchemaError(f"field {key!r} must be an integer")
    return Scenario(payload["m"], payload["d"])


def _array_of(payload: dict, key: str) -> np.ndarray:
    if key not in payload:
        raise SchemaError(f"missing field {key!r}")
    try:
        return np.asarray(payload[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"field {key!r} is not a rectangular numeric array") from exc


def behavior_to_payload(b: Behavior) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "behavior",
        "m": b.scenario.m,
        "d": b.scenario.d,
        "p": b.p.tolist(),
        "setting_weights": b.setting_weights.tolist(),
    }


def behavior_from_payload(payload: dict) -> Behavior:
    _expect_kind(payload, "behavior")
    sc = _scenario_of(payload)
    weights = _array_of(payload, "setting_weights") if "setting_weights" in payload else None
    return Behavior(sc, _array_of(payload, "p"), weights)


def counts_to_payload(counts: CountTable, meta: dict | None = None) -> dict:
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "counts",
        "m": counts.scenario.m,
        "d": counts.scenario.d,
        "counts": counts.c.tolist(),
    }
    if meta:
        payload["meta"] = dict(meta)
    return payload


def counts_from_payload(payload: dict) -> tuple[CountTable, dict]:
    _expect_kind(payload, "counts")
    sc = _scenario_of(payload)
    meta = payload.get("meta", {})
    if not isinstance(meta, dict):
        raise SchemaError("field 'meta' must be an object")
    return CountTable(sc, _array_of(payload, "counts")), meta


def functional_to_payload(f: BellFunctional) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "functional",
        "m": f.scenario.m,
        "d": f.scenario.d,
        "joint": f.joint.tolist(),
        "marginal_a": f.marginal_a.tolist(),
        "marginal_b": f.marginal_b.tolist(),
    }


def functional_from_payload(payload: dict) -> BellFunctional:
    _expect_kind(payload, "functional")
    sc = _scenario_of(payload)
    marg_a = _array_of(payload, "marginal_a") if "marginal_a" in payload else None
    marg_b = _array_of(payload, "marginal_b") if "marginal_b" in payload else None
    return BellFunctional(sc, _array_of(payload, "joint"), marg_a, marg_b)


def write_behavior(path, b: Behavior) -> None:
    write_json(path, behavior_to_payload(b))


def read_behavior(path) -> Behavior:
    return behavior_from_payload(read_json(path))


def write_counts(path, counts: CountTable, meta: dict | None = None) -> None:
    write_json(path, counts_to_payload(counts, meta))


def read_counts(path) -> tuple[CountTable, dict]:
    return counts_from_payload(read_json(path))


def write_functional(path, f: BellFunctional) -> None:
    write_json(path, functional_to_payload(f))


def read_functional(path) -> BellFunctional:
    return functional_from_payload(read_json(path))
