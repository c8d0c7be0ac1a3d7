"""Batch front end.

Subcommands (all take a plan JSON document, see ``plan.py`` for the schema):

* ``specgate govern <plan.json>``    -- discrete governing analysis: per-pair
  certificates, spectral oracles, e(r) decay records.
* ``specgate certify <plan.json>``   -- govern plus the resolvent machinery:
  probe curves per unimodular direction, estimate-chain residuals, and
  lower-bound checks at spectral directions.  ``--csv`` emits curve files.
* ``specgate semigroup <plan.json>`` -- continuous-time pipeline ending in a
  strip certificate; ``--csv`` emits the strip verification samples.
* ``specgate fuzz <plan.json> --cases K --seed S --workers W`` -- randomized
  corpus; exit 3 (theorem-violating verdict) must never happen.

Exit codes: 0 consistent/certified, 1 usage or plan errors, 2 hypothesis not
met or inconclusive, 3 internal inconsistency (a bug by construction).

Reports are deterministic for a fixed plan and seed (byte-identical modulo
the ``timestamp`` field) and embed the plan echo, library version, and the
tolerance table.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .encoding import to_jsonable
from .errors import ParseError, SpecgateError, ValidationError
from .fuzz import _case_exit, run_fuzz
from .operators import spectral_radius_oracle
from .plan import AnalysisPlan, parse_plan
from .resolvent import (
    SamplePlan,
    analyze_discrete,
    probe_direction,
    resolvent_lower_bound_check,
    weak_resolvent_bound_check,
)
from .seqspace import (
    NonNegSeq,
    PowerGauge,
    modulus,
    rearrange,
    staircase_covering,
)
from .semigroup import analyze_semigroup
from .tolerances import settings_dict


def _now() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def build_report(plan: AnalysisPlan, result: dict, exit_code: int) -> dict:
    return {
        "specgate_version": __version__,
        "timestamp": _now(),
        "plan": plan.to_dict(),
        "settings": settings_dict(),
        "result": result,
        "exit_code": exit_code,
    }


def _dump_json(doc: dict) -> str:
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _write_csv(path: str, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")


def _gauges_from_family(plan: AnalysisPlan):
    if plan.family_kind == "gauges":
        return list(plan.family)
    if plan.family_kind == "p_values":
        return [PowerGauge(p) for p in plan.family]
    return None


def _run_discrete(plan: AnalysisPlan, with_resolvent: bool):
    T = plan.operator
    kwargs = dict(
        plan=plan.sample_plan,
        n_terms=plan.horizons.n_terms,
        staircase_blocks=plan.horizons.staircase_blocks,
    )
    if plan.family_kind == "sequences":
        report = analyze_discrete(T, sequences=list(plan.family), **kwargs)
    else:
        report = analyze_discrete(T, gauges=_gauges_from_family(plan), **kwargs)
    result = {"analysis": report.to_dict()}
    exit_code = _case_exit(report.verdict, report.hypothesis_met, "discrete")
    csv_files = []
    if with_resolvent:
        rep_f = _representative_sequence(plan, report)
        if rep_f is not None:
            probes = []
            for lam in (1.0 + 0.0j, 1.0j):
                probe = probe_direction(T, lam, rep_f, r_grid=plan.horizons.r_grid)
                probes.append(probe)
            result["probes"] = [
                {
                    "lam": [p.lam.real, p.lam.imag],
                    "rows": [list(row) for row in p.rows()],
                }
                for p in probes
            ]
            result["chains"] = _chain_records(plan, T, rep_f)
            csv_files = [("probe", p) for p in probes]
        result["lower_bounds"] = _lower_bound_records(plan, T)
    return result, exit_code, csv_files


def _representative_sequence(plan: AnalysisPlan, report):
    """Governing sequence used for probe curves: the merge for sequence
    families, else the first gauge's staircase extended over the horizon."""
    n = plan.horizons.n_terms
    if plan.family_kind == "sequences":
        from .seqspace import merge_governing

        try:
            g = merge_governing(list(plan.family))
        except SpecgateError:
            return None
        return g
    gauges = _gauges_from_family(plan)
    for phi in gauges:
        try:
            stair = staircase_covering(phi, n)
        except SpecgateError:
            continue
        return NonNegSeq(stair.seq.entries[:n], sorted_flag=True)
    return None


def _chain_records(plan: AnalysisPlan, T, rep_f: NonNegSeq):
    """Estimate-chain residuals for the first few pairs at lam = 1."""
    xs, xps, pairs = plan.sample_plan.generate(T.dim)
    rows = []
    for ix, ip, label in pairs[:4]:
        from .operators import weak_orbit
        from .seqspace import domination_constant

        orbit = weak_orbit(T, xs[ix], xps[ip], len(rep_f))
        astar = rearrange(modulus(orbit))
        try:
            c = domination_constant(astar, rep_f)
        except SpecgateError as exc:
            rows.append({"pair": label, "error": f"{type(exc).__name__}: {exc}"})
            continue
        for r in plan.horizons.r_grid:
            rec = weak_resolvent_bound_check(T, xs[ix], xps[ip], rep_f, c, r, 1.0, orbit=orbit)
            rows.append({"pair": label, **rec.to_dict()})
    return rows


def _lower_bound_records(plan: AnalysisPlan, T):
    eigs = T.eigenvalues()
    unimodular = [complex(z) for z in eigs if abs(abs(z) - 1.0) <= 1e-9]
    rows = []
    seen = set()
    for lam in unimodular[:4]:
        key = (round(lam.real, 12), round(lam.imag, 12))
        if key in seen:
            continue
        seen.add(key)
        for r in plan.horizons.r_grid:
            rec = resolvent_lower_bound_check(T, r, lam / abs(lam))
            rows.append(rec.to_dict())
    return rows


def _run_semigroup(plan: AnalysisPlan):
    report = analyze_semigroup(
        plan.operator,
        plan.sample_plan,
        p_plan=plan.family,
        horizon=plan.horizons.time_horizon,
        steps=plan.horizons.quadrature_steps,
    )
    exit_code = _case_exit(report.verdict, report.hypothesis_met, "semigroup")
    csv_files = []
    if report.certificate is not None:
        csv_files = [("strip", report.certificate)]
    return {"analysis": report.to_dict()}, exit_code, csv_files


def _run_fuzz(plan: AnalysisPlan):
    summary = run_fuzz(plan, reproducer_dir=plan.output.csv_dir)
    return {"fuzz": summary.to_dict()}, summary.exit_code, []


def _emit_csv(csv_dir: str, csv_files):
    os.makedirs(csv_dir, exist_ok=True)
    written = []
    for idx, (kind, obj) in enumerate(csv_files):
        if kind == "probe":
            path = os.path.join(csv_dir, f"probe_{idx}_re{obj.lam.real:+.3f}_im{obj.lam.imag:+.3f}.csv")
            _write_csv(path, ["r", "e_r", "resolvent_norm", "neumann_norm", "tail"], obj.rows())
        else:
            path = os.path.join(csv_dir, "strip_samples.csv")
            _write_csv(path, ["re_mu", "im_mu", "resolvent_norm", "bound", "pass"], obj.sample_rows())
        written.append(path)
    return written


def _apply_overrides(plan: AnalysisPlan, args) -> AnalysisPlan:
    output = plan.output
    if args.csv is not None:
        output = dataclasses.replace(output, csv_dir=args.csv)
    if args.report is not None:
        output = dataclasses.replace(output, report=args.report)
    if args.quiet:
        output = dataclasses.replace(output, quiet=True)
    plan = dataclasses.replace(plan, output=output)
    if plan.mode == "fuzz":
        fuzz = plan.fuzz
        if getattr(args, "cases", None) is not None:
            fuzz = dataclasses.replace(fuzz, cases=args.cases)
        if getattr(args, "marginal_cases", None) is not None:
            fuzz = dataclasses.replace(fuzz, marginal_cases=args.marginal_cases)
        if getattr(args, "workers", None) is not None:
            fuzz = dataclasses.replace(fuzz, workers=args.workers)
        plan = dataclasses.replace(plan, fuzz=fuzz)
    if getattr(args, "seed", None) is not None:
        plan = dataclasses.replace(
            plan, sample_plan=dataclasses.replace(plan.sample_plan, seed=args.seed)
        )
    return plan


_MODE_FOR_COMMAND = {
    "govern": "discrete",
    "certify": "discrete",
    "semigroup": "semigroup",
    "fuzz": "fuzz",
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="specgate",
        description="Executable stability certificates for weak orbit decay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, hlp in (
        ("govern", "discrete governing analysis"),
        ("certify", "governing analysis plus resolvent certificates"),
        ("semigroup", "continuous-time strip certificate"),
        ("fuzz", "randomized corpus sweep"),
    ):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("plan", help="path to the plan JSON document")
        p.add_argument("--csv", metavar="DIR", default=None, help="emit CSV curve files into DIR")
        p.add_argument("--report", metavar="PATH", default=None, help="override the report path")
        p.add_argument("--quiet", action="store_true", help="suppress the human summary")
        if name == "fuzz":
            p.add_argument("--cases", type=int, default=None, help="stable case count")
            p.add_argument("--marginal-cases", dest="marginal_cases", type=int, default=None)
            p.add_argument("--seed", type=int, default=None, help="corpus seed")
            p.add_argument("--workers", type=int, default=None, help="concurrent case workers")
        else:
            p.add_argument("--seed", type=int, default=None, help="sample-plan seed override")
    args = parser.parse_args(argv)

    try:
        with open(args.plan) as fh:
            text = fh.read()
    except OSError as exc:
        print(f"specgate: cannot read plan: {exc}", file=sys.stderr)
        return 1

    try:
        plan = parse_plan(text)
        expected = _MODE_FOR_COMMAND[args.command]
        if plan.mode != expected:
            raise ValidationError(f"plan.mode: {args.command} requires mode {expected!r}, got {plan.mode!r}")
        plan = _apply_overrides(plan, args)
    except (ParseError, ValidationError) as exc:
        print(f"specgate: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1

    if plan.mode == "discrete":
        result, exit_code, csv_files = _run_discrete(plan, with_resolvent=(args.command == "certify"))
    elif plan.mode == "semigroup":
        result, exit_code, csv_files = _run_semigroup(plan)
    else:
        result, exit_code, csv_files = _run_fuzz(plan)

    written = []
    if plan.output.csv_dir and csv_files:
        written = _emit_csv(plan.output.csv_dir, csv_files)
    result["csv_files"] = written

    report = build_report(plan, result, exit_code)
    payload = _dump_json(report)
    if plan.output.report:
        out_dir = os.path.dirname(plan.output.report)
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
        with open(plan.output.report, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)

    if not plan.output.quiet:
        summary = result.get("analysis", result.get("fuzz", {}))
        verdict = summary.get("verdict") or summary.get("counts")
        print(f"specgate {args.command}: exit={exit_code} verdict={verdict}", file=sys.stderr)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
