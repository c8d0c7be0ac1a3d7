"""Analysis plans: the JSON configuration documents driving every run.

A plan is a single JSON object; unknown keys are rejected everywhere and all
defaults are materialized on parse, so re-serializing a parsed plan yields
the canonical normalized form (golden-file friendly).

Top-level schema::

    {
      "mode": "discrete" | "semigroup" | "fuzz",
      "operator": {...},            # required for discrete/semigroup,
                                    # forbidden for fuzz; semigroup takes a
                                    # generator spec ("generator": true)
      "family": {"sequences": [...]} | {"gauges": [...]} | {"p_values": [...]},
                                    # discrete: exactly one kind;
                                    # semigroup/fuzz: p_values only (optional)
      "sample_plan": {"coordinate_pairs": bool, "random_pairs": int, "seed": int},
      "horizons": {"n_terms": int, "r_grid": [..], "quadrature_steps": int,
                   "time_horizon": float, "staircase_blocks": int},
      "fuzz": {"cases": int, "marginal_cases": int, "pipeline": str,
               "workers": int},    # fuzz mode only
      "output": {"report": path|null, "csv_dir": path|null, "quiet": bool}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .encoding import (
    gauge_from_json,
    nonneg_seq_from_json,
    nonneg_seq_to_json,
    operator_from_json,
)
from .errors import ParseError, ValidationError
from .resolvent import SamplePlan, default_r_grid

MODES = ("discrete", "semigroup", "fuzz")
DEFAULT_P_VALUES = (1.0, 2.0, 4.0, 8.0)


@dataclass(frozen=True)
class Horizons:
    n_terms: int = 256
    r_grid: tuple = field(default_factory=default_r_grid)
    quadrature_steps: int = 800
    time_horizon: float = 40.0
    staircase_blocks: int = 64

    def to_dict(self) -> dict:
        return {
            "n_terms": self.n_terms,
            "r_grid": list(self.r_grid),
            "quadrature_steps": self.quadrature_steps,
            "time_horizon": self.time_horizon,
            "staircase_blocks": self.staircase_blocks,
        }


@dataclass(frozen=True)
class FuzzConfig:
    cases: int = 100
    marginal_cases: int = 20
    pipeline: str = "discrete"
    workers: int = 1

    def to_dict(self) -> dict:
        return {
            "cases": self.cases,
            "marginal_cases": self.marginal_cases,
            "pipeline": self.pipeline,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class OutputConfig:
    report: Optional[str] = None
    csv_dir: Optional[str] = None
    quiet: bool = False

    def to_dict(self) -> dict:
        return {"report": self.report, "csv_dir": self.csv_dir, "quiet": self.quiet}


@dataclass(frozen=True)
class AnalysisPlan:
    mode: str
    operator: Optional[object] = None  # OperatorSpec or GeneratorSpec
    family_kind: Optional[str] = None  # sequences | gauges | p_values
    family: tuple = ()
    sample_plan: SamplePlan = field(default_factory=SamplePlan)
    horizons: Horizons = field(default_factory=Horizons)
    fuzz: Optional[FuzzConfig] = None
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> dict:
        """Normalized echo with every default materialized."""
        doc = {
            "mode": self.mode,
            "sample_plan": {
                "coordinate_pairs": self.sample_plan.coordinate_pairs,
                "random_pairs": self.sample_plan.random_pairs,
                "seed": self.sample_plan.seed,
            },
            "horizons": self.horizons.to_dict(),
            "output": self.output.to_dict(),
        }
        if self.operator is not None:
            doc["operator"] = self.operator.to_dict()
        if self.family_kind == "sequences":
            doc["family"] = {"sequences": [nonneg_seq_to_json(f) for f in self.family]}
        elif self.family_kind == "gauges":
            doc["family"] = {"gauges": [g.to_dict() for g in self.family]}
        elif self.family_kind == "p_values":
            doc["family"] = {"p_values": list(self.family)}
        if self.fuzz is not None:
            doc["fuzz"] = self.fuzz.to_dict()
        return doc


def _check_keys(doc: dict, allowed, path: str):
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected an object")
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ValidationError(f"{path}: unknown keys {sorted(unknown)}")


def _int_in(doc, key, default, path, low=0, high=None):
    val = doc.get(key, default)
    if not isinstance(val, int) or isinstance(val, bool):
        raise ValidationError(f"{path}.{key}: expected an integer")
    if val < low or (high is not None and val > high):
        raise ValidationError(f"{path}.{key}: out of range [{low}, {high}]")
    return val


def _parse_family(doc, mode: str):
    if doc is None:
        if mode == "discrete":
            raise ValidationError("family: required in discrete mode")
        return "p_values", tuple(DEFAULT_P_VALUES)
    _check_keys(doc, {"sequences", "gauges", "p_values"}, "family")
    kinds = [k for k in ("sequences", "gauges", "p_values") if k in doc]
    if len(kinds) != 1:
        raise ValidationError(f"family: exactly one kind required, got {kinds or 'none'}")
    kind = kinds[0]
    if mode in ("semigroup",) and kind != "p_values":
        raise ValidationError(f"family: {mode} mode accepts p_values only")
    if kind == "sequences":
        items = doc["sequences"]
        if not isinstance(items, list) or not items:
            raise ValidationError("family.sequences: expected a non-empty array")
        return kind, tuple(
            nonneg_seq_from_json(s, path=f"family.sequences[{i}]") for i, s in enumerate(items)
        )
    if kind == "gauges":
        items = doc["gauges"]
        if not isinstance(items, list) or not items:
            raise ValidationError("family.gauges: expected a non-empty array")
        return kind, tuple(gauge_from_json(g, path=f"family.gauges[{i}]") for i, g in enumerate(items))
    items = doc["p_values"]
    if not isinstance(items, list) or not items:
        raise ValidationError("family.p_values: expected a non-empty array")
    ps = []
    for i, p in enumerate(items):
        if not isinstance(p, (int, float)) or isinstance(p, bool) or p < 1:
            raise ValidationError(f"family.p_values[{i}]: expected a number >= 1")
        ps.append(float(p))
    return kind, tuple(ps)


def _parse_sample_plan(doc) -> SamplePlan:
    if doc is None:
        return SamplePlan()
    _check_keys(doc, {"coordinate_pairs", "random_pairs", "seed"}, "sample_plan")
    coord = doc.get("coordinate_pairs", True)
    if not isinstance(coord, bool):
        raise ValidationError("sample_plan.coordinate_pairs: expected a boolean")
    return SamplePlan(
        coordinate_pairs=coord,
        random_pairs=_int_in(doc, "random_pairs", 32, "sample_plan", low=0, high=10_000),
        seed=_int_in(doc, "seed", 0, "sample_plan", low=0, high=2**63 - 1),
    )


def _parse_horizons(doc) -> Horizons:
    if doc is None:
        return Horizons()
    _check_keys(
        doc,
        {"n_terms", "r_grid", "quadrature_steps", "time_horizon", "staircase_blocks"},
        "horizons",
    )
    grid = doc.get("r_grid")
    if grid is None:
        grid = default_r_grid()
    else:
        if not isinstance(grid, list) or not grid:
            raise ValidationError("horizons.r_grid: expected a non-empty array")
        for i, r in enumerate(grid):
            if not isinstance(r, (int, float)) or isinstance(r, bool) or r <= 1.0:
                raise ValidationError(f"horizons.r_grid[{i}]: entries must be > 1")
        grid = tuple(float(r) for r in grid)
    horizon = doc.get("time_horizon", 40.0)
    if not isinstance(horizon, (int, float)) or isinstance(horizon, bool) or horizon <= 0:
        raise ValidationError("horizons.time_horizon: expected a positive number")
    return Horizons(
        n_terms=_int_in(doc, "n_terms", 256, "horizons", low=8, high=1_000_000),
        r_grid=grid,
        quadrature_steps=_int_in(doc, "quadrature_steps", 800, "horizons", low=2, high=200_000),
        time_horizon=float(horizon),
        staircase_blocks=_int_in(doc, "staircase_blocks", 64, "horizons", low=1, high=100_000),
    )


def _parse_fuzz(doc) -> FuzzConfig:
    if doc is None:
        return FuzzConfig()
    _check_keys(doc, {"cases", "marginal_cases", "pipeline", "workers"}, "fuzz")
    pipeline = doc.get("pipeline", "discrete")
    if pipeline not in ("discrete", "semigroup"):
        raise ValidationError(f"fuzz.pipeline: unknown pipeline {pipeline!r}")
    return FuzzConfig(
        cases=_int_in(doc, "cases", 100, "fuzz", low=0, high=1_000_000),
        marginal_cases=_int_in(doc, "marginal_cases", 20, "fuzz", low=0, high=1_000_000),
        pipeline=pipeline,
        workers=_int_in(doc, "workers", 1, "fuzz", low=1, high=256),
    )


def _parse_output(doc) -> OutputConfig:
    if doc is None:
        return OutputConfig()
    _check_keys(doc, {"report", "csv_dir", "quiet"}, "output")
    report = doc.get("report")
    csv_dir = doc.get("csv_dir")
    quiet = doc.get("quiet", False)
    if report is not None and not isinstance(report, str):
        raise ValidationError("output.report: expected a path string or null")
    if csv_dir is not None and not isinstance(csv_dir, str):
        raise ValidationError("output.csv_dir: expected a path string or null")
    if not isinstance(quiet, bool):
        raise ValidationError("output.quiet: expected a boolean")
    return OutputConfig(report=report, csv_dir=csv_dir, quiet=quiet)


def parse_plan(text: str) -> AnalysisPlan:
    """Parse and validate a plan document; defaults are materialized."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("plan: expected a JSON object")
    _check_keys(doc, {"mode", "operator", "family", "sample_plan", "horizons", "fuzz", "output"}, "plan")
    mode = doc.get("mode")
    if mode not in MODES:
        raise ValidationError(f"plan.mode: expected one of {MODES}, got {mode!r}")

    operator = None
    if mode == "fuzz":
        if "operator" in doc:
            raise ValidationError("operator: forbidden in fuzz mode (cases are generated)")
    else:
        if "operator" not in doc:
            raise ValidationError(f"operator: required in {mode} mode")
        operator = operator_from_json(
            doc["operator"], path="operator", allow_generator=(mode == "semigroup")
        )

    if mode != "fuzz" and "fuzz" in doc:
        raise ValidationError("fuzz: config only allowed in fuzz mode")

    family_kind, family = _parse_family(doc.get("family"), mode)
    return AnalysisPlan(
        mode=mode,
        operator=operator,
        family_kind=family_kind,
        family=family,
        sample_plan=_parse_sample_plan(doc.get("sample_plan")),
        horizons=_parse_horizons(doc.get("horizons")),
        fuzz=_parse_fuzz(doc.get("fuzz")) if mode == "fuzz" else None,
        output=_parse_output(doc.get("output")),
    )
