"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 input parse or validation error,
3 solver failure (infeasible, unbounded or numerical trouble).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .capacity import (
    CapacityStudy,
    emit_curves,
    minimax_regret_capacity,
    pointwise_extremes,
    reduce_scenarios,
)
from .core import CostMatrix, RegretKind
from .errors import DimensionMismatch, MinimaxError, ParseError, SolverError, ValidationError
from .finite import (
    find_preference_cycles,
    gaming_construct,
    iia_probe,
    minimax_select,
    rationalizability,
)
from .montecarlo import RULES as MC_RULES
from .montecarlo import McConfig, run_study
from .projects import (
    AdditiveProjectInstance,
    essential_scenarios,
    project_iia_probe,
    select_projects,
    subset_label,
)
from .robust import ProbabilityPolytope, block_structure, inner_max, robust_select_finite
from .core import regret_transform

RULE_NAMES = tuple(k.rule_name for k in RegretKind)


class UsageError(Exception):
    pass


def fmt(v: float) -> str:
    """Shortest exact text for a float; integral values print without a point."""
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


# --------------------------------------------------------------------------
# input formats


def _read_text(path: str | Path) -> str:
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise ParseError(f"{path}: file not found") from None
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc.reason})") from None


def _parse_number(text: str, line: int, column: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"expected a number, found {text!r}", line, column) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {text!r}", line, column)
    return v


def _read_table(path: str | Path, first: str = "scenario"):
    """Header and body of a comma-separated table; cells stripped of spaces."""
    text = _read_text(path)
    rows = [(i + 1, [c.strip() for c in r]) for i, r in enumerate(csv.reader(io.StringIO(text)))]
    rows = [(ln, r) for ln, r in rows if any(r)]
    if not rows:
        raise ParseError(f"{path}: empty file", 1, 1)
    ln, header = rows[0]
    if header[0].lower() != first:
        raise ParseError(f"header must start with {first!r}, found {header[0]!r}", ln, 1)
    if len(header) < 2:
        raise ParseError("header names no columns", ln, 2)
    for col, name in enumerate(header[1:], start=2):
        if not name:
            raise ParseError("empty column label", ln, col)
    body = rows[1:]
    if not body:
        raise ParseError(f"{path}: no {first} rows", ln + 1, 1)
    for bl, row in body:
        if len(row) != len(header):
            raise DimensionMismatch(
                f"line {bl}: {len(row)} fields, header has {len(header)}"
            )
        if not row[0]:
            raise ParseError(f"empty {first} label", bl, 1)
    return header, body


def parse_cost_csv(path: str | Path) -> CostMatrix:
    header, body = _read_table(path)
    values = [[_parse_number(c, ln, col) for col, c in enumerate(row[1:], start=2)] for ln, row in body]
    return CostMatrix(tuple(r[0] for _, r in body), tuple(header[1:]), np.array(values))


def format_cost_csv(C: CostMatrix) -> str:
    lines = [",".join(("scenario",) + C.decisions)]
    for s, row in zip(C.scenarios, C.costs):
        lines.append(",".join([s] + [fmt(v) for v in row]))
    return "\n".join(lines) + "\n"


def parse_projects_csv(path: str | Path, base: str | Path | None = None) -> AdditiveProjectInstance:
    """``scenario,<projects...>[,W]``; ``base`` is an optional ``scenario,W`` file."""
    header, body = _read_table(path)
    names = list(header[1:])
    has_w = names[-1] == "W"
    if has_w:
        names = names[:-1]
    nums = [[_parse_number(c, ln, col) for col, c in enumerate(row[1:], start=2)] for ln, row in body]
    scen = tuple(r[0] for _, r in body)
    c = np.array([r[: len(names)] for r in nums]).reshape(len(scen), len(names))
    W = np.array([r[-1] for r in nums]) if has_w else np.zeros(len(scen))
    if base is not None:
        if has_w:
            raise ValidationError("base costs given twice: W column and --base file")
        bh, bb = _read_table(base)
        if len(bh) != 2:
            raise ParseError("base file header must be 'scenario,W'", 1, 3)
        found = {r[0]: _parse_number(r[1], ln, 2) for ln, r in bb}
        missing = [s for s in scen if s not in found]
        extra = [s for s in found if s not in scen]
        if missing or extra:
            raise ValidationError(f"base file scenarios differ (missing {missing}, unexpected {extra})")
        W = np.array([found[s] for s in scen])
    return AdditiveProjectInstance(tuple(names), scen, c, W)


def _load_json(path: str | Path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", exc.lineno, exc.colno) from None


def parse_constraints_json(path: str | Path, scenarios: Sequence[str]) -> ProbabilityPolytope:
    """``{"constraints": [{scenario: coefficient, ...}, ...]}``, each row meaning ``<= 0``."""
    doc = _load_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("constraints"), list):
        raise ParseError(f"{path}: expected an object with a 'constraints' list")
    rows = []
    for r, row in enumerate(doc["constraints"]):
        if not isinstance(row, dict):
            raise ParseError(f"{path}: constraint {r} must be an object")
        for k, v in row.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"{path}: constraint {r}, scenario {k!r}: coefficient must be a number")
        rows.append(row)
    return ProbabilityPolytope(tuple(scenarios), tuple(rows))


def parse_capacity_json(path: str | Path) -> CapacityStudy:
    doc = _load_json(path)
    try:
        return CapacityStudy.from_dict(doc)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"{path}: malformed study ({exc!r})") from None


# --------------------------------------------------------------------------
# reports


def fingerprint(*paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        if p is not None:
            h.update(Path(p).read_bytes())
    return h.hexdigest()


def write_report(path: str | None, report: dict) -> None:
    if path is None:
        return
    report = dict(report, tool_version=__version__)
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def _selection_block(sel) -> dict:
    return {
        "chosen": sel.chosen,
        "value": sel.value,
        "argmin": list(sel.argmin_set),
        "active_scenarios": list(sel.active_scenarios),
        "tie_break": sel.tie_break,
        "worst_case": dict(sel.worst),
    }


def _print_selection(out, rule: str, sel) -> None:
    print(f"rule: {rule}", file=out)
    print(f"chosen: {sel.chosen}", file=out)
    print(f"value: {fmt(sel.value)}", file=out)
    print(f"argmin: {', '.join(sel.argmin_set)}", file=out)
    print(f"active scenarios: {', '.join(sel.active_scenarios)}", file=out)
    print(f"tie-break: {sel.tie_break}", file=out)


# --------------------------------------------------------------------------
# subcommands


def cmd_analyze(args, out) -> int:
    C = parse_cost_csv(args.costs)
    for d in args.drop_decision or ():
        C = C.drop_decision(d)
    for s in args.drop_scenario or ():
        C = C.drop_scenario(s)
    kind = RegretKind.from_rule(args.rule)
    sel = minimax_select(C, kind)
    _print_selection(out, args.rule, sel)
    write_report(args.report, {
        "command": "analyze",
        "rule": args.rule,
        "input_fingerprint": fingerprint(args.costs),
        "dropped_decisions": list(args.drop_decision or ()),
        "dropped_scenarios": list(args.drop_scenario or ()),
        **_selection_block(sel),
    })
    return 0


def cmd_probe(args, out) -> int:
    C = parse_cost_csv(args.costs)
    kind = RegretKind.from_rule(args.rule)
    findings: dict = {}
    if args.iia:
        v = iia_probe(C, kind)
        findings["iia_violations"] = [
            {"removed": x.removed, "old_choice": x.old_choice, "new_choice": x.new_choice} for x in v
        ]
        print(f"IIA violations: {len(v)}", file=out)
        for x in v:
            print(f"  removing {x.removed} changes {x.old_choice} -> {x.new_choice}", file=out)
    elif args.cycles:
        cyc = find_preference_cycles(C, kind)
        findings["cycles"] = [list(c) for c in cyc]
        print(f"preference cycles: {len(cyc)}", file=out)
        for a, b, c in cyc:
            print(f"  {a} > {b} > {c} > {a}", file=out)
    elif args.rationalize is not None:
        r = rationalizability(C, args.rationalize)
        findings["rationalizable"] = r.feasible
        findings["probabilities"] = dict(zip(C.scenarios, r.probabilities)) if r.feasible else None
        if r.feasible:
            ps = ", ".join(f"{s}={fmt(p)}" for s, p in zip(C.scenarios, r.probabilities))
            print(f"{args.rationalize} is rationalizable: {ps}", file=out)
        else:
            print(f"{args.rationalize} is not rationalizable by any probability vector", file=out)
    else:
        if args.pivot is None:
            raise UsageError("--game needs --pivot SCENARIO")
        g = gaming_construct(C, args.game, args.pivot)
        sel = minimax_select(g.augmented, RegretKind.REGRET_MIN)
        findings["gaming"] = {
            "injected_label": g.injected_label,
            "injected_costs": dict(zip(C.scenarios, g.injected_costs)),
            "M": g.M,
            "L": g.L,
            "target": g.target,
            "pivot": g.pivot_scenario,
            "augmented_selection": _selection_block(sel),
        }
        costs = ", ".join(f"{s}={fmt(v)}" for s, v in zip(C.scenarios, g.injected_costs))
        print(f"injected {g.injected_label}: {costs}", file=out)
        print(f"minimax-regret argmin after injection: {', '.join(sel.argmin_set)}", file=out)
        print(f"target {g.target} in argmin: {g.target in sel.argmin_set}", file=out)
    write_report(args.report, {
        "command": "probe",
        "rule": args.rule,
        "input_fingerprint": fingerprint(args.costs),
        "probe": findings,
    })
    return 0


def cmd_robust(args, out) -> int:
    C = parse_cost_csv(args.costs)
    P = parse_constraints_json(args.constraints, C.scenarios)
    kind = RegretKind.from_rule(args.rule)
    sel = robust_select_finite(C, kind, P)
    F = regret_transform(C, kind).values
    p = inner_max(F[:, C.decision_index(sel.chosen)], P).x
    blocks = block_structure(P).components
    _print_selection(out, args.rule, sel)
    print("worst-case probabilities: " + ", ".join(f"{s}={fmt(v)}" for s, v in zip(C.scenarios, p)), file=out)
    print("blocks: " + " | ".join("+".join(b) for b in blocks), file=out)
    write_report(args.report, {
        "command": "robust",
        "rule": args.rule,
        "input_fingerprint": fingerprint(args.costs, args.constraints),
        "worst_case_probabilities": dict(zip(C.scenarios, (float(v) for v in p))),
        "blocks": [list(b) for b in blocks],
        **_selection_block(sel),
    })
    return 0


def cmd_projects(args, out) -> int:
    inst = parse_projects_csv(args.costs, args.base)
    kind = RegretKind.from_rule(args.rule)
    for p in args.drop_project or ():
        inst = inst.drop_project(p)
    sel = select_projects(inst, kind)
    print(f"rule: {args.rule}", file=out)
    print(f"chosen: {sel.label}", file=out)
    print(f"value: {fmt(sel.value)}", file=out)
    print(f"argmin: {', '.join(subset_label(a) for a in sel.argmin)}", file=out)
    print(f"active scenarios: {', '.join(sel.active_scenarios)}", file=out)
    print(f"tie-break: {sel.tie_break}", file=out)
    report = {
        "command": "projects",
        "rule": args.rule,
        "input_fingerprint": fingerprint(args.costs, args.base),
        "chosen": list(sel.chosen),
        "value": sel.value,
        "argmin": [list(a) for a in sel.argmin],
        "active_scenarios": list(sel.active_scenarios),
        "tie_break": sel.tie_break,
        "dropped_projects": list(args.drop_project or ()),
    }
    if args.iia:
        v = project_iia_probe(inst, kind)
        report["iia_violations"] = [
            {"dropped": x.dropped, "old": list(x.old), "new": list(x.new),
             "old_value": x.old_value, "new_value": x.new_value} for x in v
        ]
        print(f"project IIA violations: {len(v)}", file=out)
        for x in v:
            print(f"  dropping {x.dropped} changes {subset_label(x.old)} -> {subset_label(x.new)} "
                  f"(value {fmt(x.old_value)} -> {fmt(x.new_value)})", file=out)
    if args.essential:
        r = essential_scenarios(inst, kind)
        report["essential"] = {
            "count": r.count,
            "outcomes": [{"dropped": o.dropped, "chosen": list(o.chosen), "value": o.value,
                          "essential": o.essential} for o in r.outcomes],
        }
        print(f"essential scenarios: {r.count} of {len(inst.scenarios)}", file=out)
        for o in r.outcomes:
            mark = "essential" if o.essential else "not essential"
            print(f"  drop {o.dropped} -> {subset_label(o.chosen)} ({mark})", file=out)
    write_report(args.report, report)
    return 0


def cmd_capacity(args, out) -> int:
    if (args.curves is None) != (args.grid_step is None):
        raise UsageError("--curves and --grid-step must be given together")
    study = parse_capacity_json(args.model)
    report = {"command": "capacity", "input_fingerprint": fingerprint(args.model),
              "units": {"capacity": "MW", "energy": "MWh", "cost": "GBP"}}
    if args.reduce:
        kept = reduce_scenarios(study)
        if study.shared_lambda is None:
            print("reduction skipped: decay rates differ between scenarios", file=out)
        else:
            print(f"retained scenarios: {', '.join(kept)}", file=out)
        report["retained"] = list(kept)
        study = study.restrict(kept)
    sol = minimax_regret_capacity(study)
    ext = pointwise_extremes(study)
    print(f"capacity-to-secure: {sol.x_star[0]:.3f} MW", file=out)
    print(f"worst regret: {sol.value:.2f} GBP", file=out)
    print(f"determining scenarios: {', '.join(sol.determining)}", file=out)
    print(f"pointwise extremes: {', '.join(ext) if ext else 'none'}", file=out)
    for w in sol.warnings:
        print(f"warning: {w}", file=out)
    report.update({
        "x_star_mw": float(sol.x_star[0]),
        "value_gbp": sol.value,
        "active": list(sol.active),
        "determining": list(sol.determining),
        "pointwise_extremes": list(ext) if ext else None,
        "warnings": list(sol.warnings),
    })
    if args.curves is not None:
        table = emit_curves(study, args.grid_step)
        Path(args.curves).write_text(table.to_csv(), encoding="utf-8")
        print(f"wrote {len(table.rows)} grid points to {args.curves}", file=out)
    write_report(args.report, report)
    return 0


def cmd_montecarlo(args, out) -> int:
    cfg = McConfig(args.samples, args.seed, tuple(args.rule or MC_RULES), args.tie_break, args.workers)
    res = run_study(cfg)
    print(f"samples: {res.samples}  seed: {res.seed}", file=out)
    for rule, est in res.estimates.items():
        print(f"{rule}: mean expected cost {est.mean:.6f} (standard error {est.stderr:.6f})", file=out)
    write_report(args.report, {
        "command": "montecarlo",
        "samples": res.samples,
        "seed": res.seed,
        "tie_break": cfg.tie_break,
        "estimates": {r: {"mean": e.mean, "stderr": e.stderr} for r, e in res.estimates.items()},
    })
    return 0


# --------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="minimax-rules", description="Minimax and minimax-regret decision analysis.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="apply a minimax rule to a cost table")
    a.add_argument("--costs", required=True)
    a.add_argument("--rule", required=True, choices=RULE_NAMES)
    a.add_argument("--drop-decision", action="append", metavar="N")
    a.add_argument("--drop-scenario", action="append", metavar="N")
    a.add_argument("--report")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("probe", help="IIA, cycle, rationalizability and gaming probes")
    b.add_argument("--costs", required=True)
    b.add_argument("--rule", required=True, choices=RULE_NAMES)
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--iia", action="store_true")
    g.add_argument("--cycles", action="store_true")
    g.add_argument("--rationalize", metavar="D")
    g.add_argument("--game", metavar="D")
    b.add_argument("--pivot", metavar="S")
    b.add_argument("--report")
    b.set_defaults(func=cmd_probe)

    r = sub.add_parser("robust", help="robust selection over a probability polytope")
    r.add_argument("--costs", required=True)
    r.add_argument("--constraints", required=True)
    r.add_argument("--rule", required=True, choices=RULE_NAMES)
    r.add_argument("--report")
    r.set_defaults(func=cmd_robust)

    q = sub.add_parser("projects", help="select a project subset with additive costs")
    q.add_argument("--costs", required=True)
    q.add_argument("--base")
    q.add_argument("--rule", required=True, choices=RULE_NAMES)
    q.add_argument("--drop-project", action="append", metavar="N")
    q.add_argument("--essential", action="store_true")
    q.add_argument("--iia", action="store_true")
    q.add_argument("--report")
    q.set_defaults(func=cmd_projects)

    c = sub.add_parser("capacity", help="minimax-regret capacity-to-secure")
    c.add_argument("--model", required=True)
    c.add_argument("--curves")
    c.add_argument("--grid-step", type=float, metavar="MW")
    c.add_argument("--reduce", action="store_true")
    c.add_argument("--report")
    c.set_defaults(func=cmd_capacity)

    m = sub.add_parser("montecarlo", help="two-scenario, three-decision rule comparison")
    m.add_argument("--samples", required=True, type=int)
    m.add_argument("--seed", required=True, type=int)
    m.add_argument("--rule", action="append", choices=MC_RULES)
    m.add_argument("--tie-break", choices=("first", "last"), default="first")
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--report")
    m.set_defaults(func=cmd_montecarlo)
    return p


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return 1
    except SolverError as exc:
        print(f"solver error: {exc}", file=err)
        return 3
    except (ValidationError, MinimaxError) as exc:
        print(f"error: {exc}", file=err)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return 2


run = main


def entry() -> None:
    sys.exit(main())
