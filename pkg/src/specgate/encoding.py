"""JSON wire formats shared by plans, reports, and fixtures.

Grammar (documented here; the CLI module owns the plan schema):

* ComplexSeq: ``[[re, im], ...]`` or ``{"entries": [[re, im], ...],
  "tail_bound": t}`` when a tail bound is carried.
* NonNegSeq: ``[x, ...]`` or ``{"entries": [x, ...], "tail_bound": t}``.
* Gauge: ``{"kind": "power", "p": 2.0}``,
  ``{"kind": "table", "breakpoints": [[x, phi_x], ...]}``,
  ``{"kind": "composite", "scale": s, "inner": {...}}``.
* OperatorSpec: ``{"variant": "diagonal", "entries": [[re, im], ...]}``,
  ``{"variant": "weighted_shift", "weights": [...], "dim": N}``,
  ``{"variant": "jordan", "lambda": [re, im], "size": N}``,
  ``{"variant": "dense", "rows": [[[re, im], ...], ...]}``,
  ``{"variant": "scaled", "factor": [re, im], "inner": {...}}``.
* GeneratorSpec: an OperatorSpec object with ``"generator": true`` and an
  optional ``"growth_hint"``.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .errors import ValidationError
from .seqspace import ComplexSeq, Gauge, NonNegSeq, gauge_from_dict
from .operators import OperatorSpec, operator_from_dict
from .semigroup import GeneratorSpec


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples to JSON types."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def nonneg_seq_to_json(f: NonNegSeq):
    entries = [float(x) for x in f.entries]
    if f.tail_bound is None:
        return entries
    return {"entries": entries, "tail_bound": f.tail_bound}


def nonneg_seq_from_json(doc, path: str = "sequence") -> NonNegSeq:
    tail = None
    if isinstance(doc, dict):
        unknown = set(doc) - {"entries", "tail_bound"}
        if unknown:
            raise ValidationError(f"{path}: unknown keys {sorted(unknown)}")
        tail = doc.get("tail_bound")
        doc = doc.get("entries")
    if not isinstance(doc, list):
        raise ValidationError(f"{path}: expected an array of numbers")
    try:
        return NonNegSeq(np.asarray(doc, dtype=np.float64), tail_bound=tail)
    except Exception as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def complex_seq_to_json(a: ComplexSeq):
    entries = [[z.real, z.imag] for z in a.entries]
    if a.tail_bound is None:
        return entries
    return {"entries": entries, "tail_bound": a.tail_bound}


def complex_seq_from_json(doc, path: str = "sequence") -> ComplexSeq:
    tail = None
    if isinstance(doc, dict):
        unknown = set(doc) - {"entries", "tail_bound"}
        if unknown:
            raise ValidationError(f"{path}: unknown keys {sorted(unknown)}")
        tail = doc.get("tail_bound")
        doc = doc.get("entries")
    if not isinstance(doc, list):
        raise ValidationError(f"{path}: expected an array of [re, im] pairs")
    try:
        vals = np.array([complex(re, im) for re, im in doc], dtype=np.complex128)
        return ComplexSeq(vals, tail_bound=tail)
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(f"{path}: {exc}") from exc


_OPERATOR_KEYS = {
    "dense": {"variant", "rows"},
    "diagonal": {"variant", "entries"},
    "weighted_shift": {"variant", "weights", "dim"},
    "jordan": {"variant", "lambda", "size"},
    "scaled": {"variant", "factor", "inner"},
}


def operator_from_json(doc: dict, path: str = "operator", allow_generator: bool = False):
    """Validated OperatorSpec (or GeneratorSpec when flagged) from JSON."""
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected an object")
    doc = dict(doc)
    is_generator = bool(doc.pop("generator", False))
    growth_hint = doc.pop("growth_hint", None)
    if (is_generator or growth_hint is not None) and not allow_generator:
        raise ValidationError(f"{path}: generator spec not allowed in this mode")
    variant = doc.get("variant")
    if variant not in _OPERATOR_KEYS:
        raise ValidationError(f"{path}.variant: unknown variant {variant!r}")
    unknown = set(doc) - _OPERATOR_KEYS[variant]
    if unknown:
        raise ValidationError(f"{path}: unknown keys {sorted(unknown)}")
    if variant == "scaled":
        inner_doc = doc.get("inner")
        operator_from_json(inner_doc, path=f"{path}.inner", allow_generator=False)
    try:
        op = operator_from_dict(doc)
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    if allow_generator:
        hint = float(growth_hint) if growth_hint is not None else None
        return GeneratorSpec(op.densify(), growth_hint=hint)
    return op


def gauge_from_json(doc: dict, path: str = "gauge") -> Gauge:
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected an object")
    allowed = {
        "power": {"kind", "p"},
        "table": {"kind", "breakpoints"},
        "composite": {"kind", "scale", "inner"},
    }
    kind = doc.get("kind")
    if kind not in allowed:
        raise ValidationError(f"{path}.kind: unknown gauge kind {kind!r}")
    unknown = set(doc) - allowed[kind]
    if unknown:
        raise ValidationError(f"{path}: unknown keys {sorted(unknown)}")
    if kind == "composite":
        gauge_from_json(doc.get("inner"), path=f"{path}.inner")
    try:
        return gauge_from_dict(doc)
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(f"{path}: {exc}") from exc
