"""Randomized sweep of the stability pipelines over generated operators.

Stable cases draw eigenvalues strictly inside the unit disk (discrete) or the
open left half-plane (semigroup) and conjugate by a random similarity with
condition number <= 1e3; marginal cases plant one unimodular / imaginary-axis
eigenvalue.  Every case must come out consistent (exit 0) or
hypothesis-unmet (exit 2); an exit-3 case (theorem-violating verdict) is
shrunk by dimension reduction and eigenvalue rounding and dumped as a
reproducer file -- on a correct build the fuzz corpus never produces one.

Cases are fully determined by (seed, index), so summaries are byte-identical
across runs and worker counts.

Discrete fuzz cases run with an orbit truncation of at least 1024 terms:
spectral radii up to 0.9 with transient constants up to 1e3 then decay below
the c0-probe scale well before the final quarter of the window.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .operators import Dense
from .plan import AnalysisPlan
from .resolvent import (
    CONSISTENT,
    COUNTEREXAMPLE,
    SamplePlan,
    analyze_discrete,
)
from .seqspace import PowerGauge
from .semigroup import CERTIFIED, INTERNAL_INCONSISTENCY, analyze_semigroup, make_generator

_MIN_FUZZ_TERMS = 1024
_FUZZ_RANDOM_PAIRS = 8
_STABLE_RADIUS = 0.9
_MARGINAL_REST_RADIUS = 0.8


@dataclass(frozen=True)
class CaseGenotype:
    """Everything needed to rebuild a fuzz case deterministically."""

    index: int
    kind: str  # "stable" | "marginal"
    pipeline: str  # "discrete" | "semigroup"
    eigs: tuple
    cond: float
    sim_seed: int

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "pipeline": self.pipeline,
            "eigs": [[z.real, z.imag] for z in self.eigs],
            "cond": self.cond,
            "sim_seed": self.sim_seed,
        }


def _genotype(seed: int, index: int, kind: str, pipeline: str) -> CaseGenotype:
    rng = np.random.default_rng([seed, index])
    if pipeline == "discrete":
        dim = int(rng.integers(2, 9))
        radii = _STABLE_RADIUS * np.sqrt(rng.uniform(0.0, 1.0, dim))
        phases = rng.uniform(0.0, 2.0 * np.pi, dim)
        eigs = radii * np.exp(1j * phases)
        if kind == "marginal":
            eigs[1:] *= _MARGINAL_REST_RADIUS / _STABLE_RADIUS
            eigs[0] = np.exp(1j * phases[0])
    else:
        dim = int(rng.integers(2, 7))
        res = rng.uniform(-3.0, -0.05, dim)
        ims = rng.uniform(-3.0, 3.0, dim)
        eigs = res + 1j * ims
        if kind == "marginal":
            eigs[0] = 1j * ims[0]
    cond = 10.0 ** rng.uniform(0.0, 3.0)
    sim_seed = int(rng.integers(0, 2**31))
    return CaseGenotype(index, kind, pipeline, tuple(complex(z) for z in eigs), cond, sim_seed)


def _build_matrix(g: CaseGenotype) -> np.ndarray:
    n = len(g.eigs)
    d = np.diag(np.array(g.eigs, dtype=np.complex128))
    if n == 1:
        return d
    rng = np.random.default_rng(g.sim_seed)
    u, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    s = u @ np.diag(np.geomspace(1.0, g.cond, n)) @ v.conj().T
    return s @ d @ np.linalg.inv(s)


def _case_exit(verdict: str, hypothesis_met: bool, pipeline: str) -> int:
    if pipeline == "discrete":
        if verdict == COUNTEREXAMPLE:
            return 3
        return 0 if (verdict == CONSISTENT and hypothesis_met) else 2
    if verdict == INTERNAL_INCONSISTENCY:
        return 3
    return 0 if verdict == CERTIFIED else 2


def run_single_case(plan: AnalysisPlan, index: int) -> dict:
    """Generate, build, and analyze one fuzz case; returns a summary dict."""
    cfg = plan.fuzz
    kind = "stable" if index < cfg.cases else "marginal"
    genotype = _genotype(plan.sample_plan.seed, index, kind, cfg.pipeline)
    return run_genotype(plan, genotype)


def run_genotype(plan: AnalysisPlan, genotype: CaseGenotype) -> dict:
    matrix = _build_matrix(genotype)
    sample_plan = SamplePlan(
        coordinate_pairs=True,
        random_pairs=_FUZZ_RANDOM_PAIRS,
        seed=int(np.random.default_rng([plan.sample_plan.seed, genotype.index, 1]).integers(0, 2**31)),
    )
    if genotype.pipeline == "discrete":
        gauges = [PowerGauge(p) for p in plan.family]
        report = analyze_discrete(
            Dense(matrix),
            sample_plan,
            gauges=gauges,
            n_terms=max(_MIN_FUZZ_TERMS, plan.horizons.n_terms),
            staircase_blocks=plan.horizons.staircase_blocks,
        )
        verdict, hyp = report.verdict, report.hypothesis_met
        oracle = report.r_oracle
    else:
        report = analyze_semigroup(
            make_generator(matrix),
            sample_plan,
            p_plan=plan.family,
            horizon=plan.horizons.time_horizon,
            steps=plan.horizons.quadrature_steps,
        )
        verdict, hyp = report.verdict, report.hypothesis_met
        oracle = report.s_oracle
    return {
        "index": genotype.index,
        "kind": genotype.kind,
        "genotype": genotype.to_dict(),
        "verdict": verdict,
        "hypothesis_met": hyp,
        "oracle": oracle,
        "exit_code": _case_exit(verdict, hyp, genotype.pipeline),
    }


def _worker(payload):
    from .plan import parse_plan  # re-parse inside the worker process

    plan_text, index = payload
    return run_single_case(parse_plan(plan_text), index)


@dataclass(frozen=True)
class FuzzSummary:
    pipeline: str
    seed: int
    counts: dict
    stable_unexpected: tuple
    marginal_unexpected: tuple
    internal: tuple
    reproducers: tuple
    case_results: tuple

    @property
    def exit_code(self) -> int:
        return 3 if self.internal else 0

    def to_dict(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "seed": self.seed,
            "counts": self.counts,
            "stable_unexpected": list(self.stable_unexpected),
            "marginal_unexpected": list(self.marginal_unexpected),
            "internal": list(self.internal),
            "reproducers": list(self.reproducers),
            "cases": list(self.case_results),
        }


def run_fuzz(
    plan: AnalysisPlan,
    fault_hook: Optional[Callable[[CaseGenotype], bool]] = None,
    reproducer_dir: Optional[str] = None,
) -> FuzzSummary:
    """Run the full fuzz corpus of a plan.

    ``fault_hook`` is a test-only injection point: cases whose genotype it
    accepts have their exit code forced to 3, exercising the shrinker without
    a real defect.  Hooked runs are always sequential.
    """
    cfg = plan.fuzz
    total = cfg.cases + cfg.marginal_cases
    indices = list(range(total))
    if cfg.workers > 1 and fault_hook is None and total > 1:
        plan_text = json.dumps(plan.to_dict())
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_worker, [(plan_text, i) for i in indices]))
    else:
        results = []
        for i in indices:
            res = run_single_case(plan, i)
            if fault_hook is not None:
                genotype = _genotype(plan.sample_plan.seed, i, res["kind"], cfg.pipeline)
                if fault_hook(genotype):
                    res = dict(res, exit_code=3, verdict="fault_injected")
            results.append(res)
    results.sort(key=lambda r: r["index"])

    counts = {"exit_0": 0, "exit_2": 0, "exit_3": 0}
    stable_bad, marginal_bad, internal = [], [], []
    for res in results:
        counts[f"exit_{res['exit_code']}"] += 1
        if res["exit_code"] == 3:
            internal.append(res["index"])
        elif res["kind"] == "stable" and res["exit_code"] != 0:
            stable_bad.append(res["index"])
        elif res["kind"] == "marginal" and res["exit_code"] != 2:
            marginal_bad.append(res["index"])

    reproducers = []
    for idx in internal:
        base = next(r for r in results if r["index"] == idx)
        genotype = CaseGenotype(
            index=idx,
            kind=base["kind"],
            pipeline=cfg.pipeline,
            eigs=tuple(complex(re, im) for re, im in base["genotype"]["eigs"]),
            cond=base["genotype"]["cond"],
            sim_seed=base["genotype"]["sim_seed"],
        )
        shrunk = shrink_genotype(plan, genotype, fault_hook)
        path = _dump_reproducer(plan, shrunk, reproducer_dir)
        reproducers.append(path)

    return FuzzSummary(
        pipeline=cfg.pipeline,
        seed=plan.sample_plan.seed,
        counts=counts,
        stable_unexpected=tuple(stable_bad),
        marginal_unexpected=tuple(marginal_bad),
        internal=tuple(internal),
        reproducers=tuple(reproducers),
        case_results=tuple(results),
    )


def _still_failing(plan: AnalysisPlan, g: CaseGenotype, fault_hook) -> bool:
    if fault_hook is not None:
        return bool(fault_hook(g))
    return run_genotype(plan, g)["exit_code"] == 3


def _shrink_candidates(g: CaseGenotype):
    if len(g.eigs) > 1:
        for i in range(len(g.eigs)):
            yield replace(g, eigs=g.eigs[:i] + g.eigs[i + 1 :])
    rounded = tuple(complex(round(z.real, 2), round(z.imag, 2)) for z in g.eigs)
    if rounded != g.eigs:
        yield replace(g, eigs=rounded)
    if g.cond != 1.0:
        yield replace(g, cond=1.0)


def shrink_genotype(
    plan: AnalysisPlan,
    genotype: CaseGenotype,
    fault_hook: Optional[Callable[[CaseGenotype], bool]] = None,
    max_rounds: int = 64,
) -> CaseGenotype:
    """Greedy shrink: keep any dimension-reduction / rounding / conditioning
    simplification that still reproduces the failure."""
    current = genotype
    for _ in range(max_rounds):
        for cand in _shrink_candidates(current):
            if _still_failing(plan, cand, fault_hook):
                current = cand
                break
        else:
            return current
    return current


def _dump_reproducer(plan: AnalysisPlan, g: CaseGenotype, directory: Optional[str]) -> str:
    directory = directory or plan.output.csv_dir or "."
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"specgate_reproducer_{g.index}.json")
    doc = {
        "genotype": g.to_dict(),
        "operator": Dense(_build_matrix(g)).to_dict(),
        "plan": plan.to_dict(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
