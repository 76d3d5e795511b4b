"""Command-line front end.

    treeshift classify -f problem.json [-N 8] [--tol 1e-9] [--depth D] [--format json|text]
    treeshift verify   -f problem_or_report.json
    treeshift truncate -f problem.json --levels 2,4 [--vertex v]
    treeshift moments  -f problem.json -N 4
    treeshift examples [--out DIR] [--seed S]

Exit codes: 0 Subnormal / check passed, 1 NotSubnormal / check failed,
2 evidence or undecided, 3 error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .classify import (
    HankelWitness,
    LeafObstruction,
    ThetaBoundWitness,
    dumps,
    exit_code,
    recheck_certificate,
    recheck_witness,
    render_report,
    system_to_json,
)
from .consistency import propagate
from .corpus import builtin_examples, random_consistent_problem
from .errors import TreeShiftError
from .moments import divergence_certificate, is_stieltjes_prefix
from .problem import ProblemFile, classify_problem, parse_problem
from .scalar import format_scalar, parse_scalar
from .shift import available_order, norm_table
from .truncate import convergence_report, truncate_triplet, verify_truncated

EXIT_OK, EXIT_FAIL, EXIT_OPEN, EXIT_ERROR, EXIT_USAGE = 0, 1, 2, 3, 64
ALIASES = {"truncation-study": "truncate", "verify-consistency": "verify"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _levels(text: str) -> tuple:
    try:
        out = tuple(parse_scalar(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not out or any(not x > 0 for x in out):
        raise argparse.ArgumentTypeError("levels must be a comma-separated list of positive numbers")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treeshift", description="Subnormality checks for weighted shifts on directed trees.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, needs_file=True):
        p.add_argument("-f", "--file", required=needs_file, help="problem file (JSON), '-' for stdin")
        p.add_argument("-N", type=int, dest="N", help="moment order")
        p.add_argument("--tol", type=float, help="tolerance for floating data")
        p.add_argument("--depth", type=int, help="materialization depth (default N+2)")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--seed", type=int, help="seed for generated corpora")

    common(sub.add_parser("classify"))
    common(sub.add_parser("verify", aliases=["verify-consistency"]))
    common(sub.add_parser("moments"))
    p = sub.add_parser("truncate", aliases=["truncation-study"])
    common(p)
    p.add_argument("--levels", type=_levels, help="comma-separated truncation levels, e.g. 2,4")
    p.add_argument("--vertex", help="vertex to study (default the root)")
    p.add_argument("--n-max", type=int, dest="n_max", help="largest power in the table")
    sub.choices["moments"].add_argument("--vertex", help="only this vertex")
    p = sub.add_parser("examples")
    common(p, needs_file=False)
    p.add_argument("--out", help="write one file per example into this directory")
    p.add_argument("--count", type=int, default=3, help="random problems to add when --seed is given")
    return parser


def _overrides(args) -> dict:
    keys = ("N", "tol", "depth", "levels", "vertex", "n_max")
    return {k: getattr(args, k, None) for k in keys if getattr(args, k, None) is not None}


def _load(args) -> ProblemFile:
    return parse_problem(args.file, _overrides(args))


def _emit(data: dict, fmt: str, text_lines=None) -> None:
    if fmt == "json" or text_lines is None:
        sys.stdout.write(dumps(data))
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")


# --- subcommands ---------------------------------------------------------------


def cmd_classify(args) -> int:
    problem = _load(args)
    verdict = classify_problem(problem)
    sys.stdout.write(render_report(verdict, args.format, problem.to_json()))
    return exit_code(verdict)


def _system_for(problem: ProblemFile):
    if problem.system is not None:
        return problem.system
    if problem.frontier_measures is not None or problem.region.complete:
        return propagate(problem.shift, problem.frontier_measures or {})
    return None


def _witness_from_json(problem: ProblemFile, data: dict):
    region = problem.region
    v = region.vertex(data["vertex"])
    kind = data.get("type")
    if kind == "hankel":
        value = parse_scalar(data["determinant"] if data.get("exact", True) else data["min_eigenvalue"])
        return HankelWitness(
            v, int(data["shift"]), tuple(data["indices"]), value, (),
            tuple(parse_scalar(x) for x in data["prefix"]), bool(data.get("exact", True)),
        )
    if kind == "leaf":
        return LeafObstruction(v, parse_scalar(data["weight_modsq"]))
    if kind == "theta":
        return ThetaBoundWitness(
            v, parse_scalar(data["bound"]), parse_scalar(data["theta"]), int(data["index"]),
            tuple(parse_scalar(x) for x in data["prefix"]),
        )
    raise TreeShiftError(f"unknown witness type {kind!r}")


def verify_document(doc: dict, overrides: dict | None = None) -> dict:
    """Re-check a report (certificate or witness) or a problem carrying a system."""
    if "verdict" in doc:
        if "certificate" in doc:
            problem = parse_problem(doc["certificate"]["problem"], overrides)
            problems = recheck_certificate(problem.shift, problem.system, problem.options.N, problem.options.tol)
            return {"checked": "certificate", "valid": not problems, "problems": problems}
        if "witness" in doc:
            problem = parse_problem(doc["witness"]["problem"], overrides)
            witness = _witness_from_json(problem, doc["witness"])
            ok = recheck_witness(problem.shift, witness, problem.options.tol)
            return {"checked": f"{witness.kind} witness", "valid": ok,
                    "problems": [] if ok else ["the witness does not re-verify"]}
        return {"checked": "nothing", "valid": False,
                "problems": [f"a {doc['verdict']} report carries no certificate or witness"]}
    problem = parse_problem(doc, overrides)
    try:
        system = _system_for(problem)
    except TreeShiftError as exc:
        return {"checked": "system", "valid": False, "problems": [str(exc)]}
    if system is None:
        return {"checked": "nothing", "valid": False, "problems": ["the problem has no system or frontier_measures"]}
    problems = recheck_certificate(problem.shift, system, problem.options.N, problem.options.tol)
    out = {"checked": "system", "valid": not problems, "problems": problems}
    if problem.system is None:
        out["system"] = system_to_json(problem.region, system)
    return out


def cmd_verify(args) -> int:
    if args.file == "-":
        text = sys.stdin.read()
    else:
        try:
            text = Path(args.file).read_text(encoding="utf-8")
        except OSError as exc:
            raise TreeShiftError(f"cannot read {args.file}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeShiftError(f"line {exc.lineno}: {exc.msg}") from exc
    result = verify_document(doc, _overrides(args))
    lines = [f"checked: {result['checked']}", f"valid: {result['valid']}"]
    lines += [f"  - {p}" for p in result["problems"]]
    _emit(result, args.format, lines)
    return EXIT_OK if result["valid"] else EXIT_FAIL


def cmd_truncate(args) -> int:
    problem = _load(args)
    system = _system_for(problem)
    if system is None:
        raise TreeShiftError("truncation needs a system, frontier measures, or a finite tree")
    shift, region, opts = problem.shift, problem.region, problem.options
    u = 0 if opts.vertex is None else region.vertex(opts.vertex)
    n_max = opts.n_max if opts.n_max is not None else available_order(shift, u, min(opts.N, 4))
    table = convergence_report(shift, system, u, n_max, opts.levels)
    triplets = {}
    ok = bool(table)
    for i in sorted(set(opts.levels)):
        trip = truncate_triplet(shift, system, i)
        check = verify_truncated(trip, 0 if trip.system.mu[0].is_exact else opts.tol)
        ok = ok and check.passed
        triplets[str(format_scalar(i))] = {
            "weights_modsq": {str(region.label(v)): format_scalar(trip.shift.modsq(v)) for v in region.non_root},
            "system": system_to_json(region, trip.system),
            "consistent": check.passed,
            "norm_bound_M": format_scalar(check.norm_M),
            "problems": check.problems,
        }
    rows = [
        {
            "level": format_scalar(r.level),
            "n": r.n,
            "truncated": format_scalar(r.truncated),
            "restricted_moment": format_scalar(r.identity_value),
            "target": format_scalar(r.target),
            "gap": format_scalar(r.gap),
            "vector_distance": format_scalar(r.vector_distance),
            "inner_gap": format_scalar(r.inner_gap),
            "above_kappa": r.above_kappa,
        }
        for r in table.rows
    ]
    data = {
        "vertex": str(region.label(u)),
        "levels": [format_scalar(i) for i in sorted(opts.levels)],
        "rows": rows,
        "monotone": table.monotone,
        "zero_beyond_support": table.zero_beyond_support,
        "problems": table.problems,
        "triplets": triplets,
        "passed": ok,
    }
    cols = ("level", "n", "truncated", "target", "gap", "vector_distance", "inner_gap")
    text = [[str(row[c]) for c in cols] for row in rows]
    widths = [max(len(c), *(len(t[j]) for t in text)) if text else len(c) for j, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(x.ljust(w) for x, w in zip(t, widths)) for t in text]
    lines.append(f"monotone: {table.monotone}  zero beyond support: {table.zero_beyond_support}  passed: {ok}")
    _emit(data, args.format, lines)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_moments(args) -> int:
    problem = _load(args)
    shift, region, opts = problem.shift, problem.region, problem.options
    table = norm_table(shift, opts.N)
    targets = [region.vertex(args.vertex)] if args.vertex is not None else list(region.vertices)
    vertices = {}
    first_failure = None
    lines = []
    for u in targets:
        prefix = table[u]
        report = is_stieltjes_prefix(prefix, opts.tol)
        entry = {
            "prefix": [format_scalar(t) for t in prefix],
            "passed": report.passed,
            "hankel": [{"shift": c.shift, "size": c.size, "psd": c.psd} for c in report.checks],
        }
        cert = divergence_certificate(prefix, problem.support_bound)
        entry["quasi_analytic"] = {"certified": cert.certified, "route": cert.route, "detail": cert.detail}
        bad = report.failure
        if bad is not None:
            entry["failure"] = {
                "shift": bad.shift,
                "indices": list(bad.indices),
                "minor": [[format_scalar(x) for x in row] for row in bad.witness_matrix()],
                "determinant" if bad.exact else "min_eigenvalue": format_scalar(bad.value),
            }
            if first_failure is None:
                first_failure = {"vertex": str(region.label(u)), **entry["failure"]}
        vertices[str(region.label(u))] = entry
        status = "pass" if report.passed else f"FAIL {entry['failure']}"
        lines.append(f"{region.label(u)}: order {len(prefix) - 1} {status}")
    data = {"order": opts.N, "vertices": vertices, "failure": first_failure, "passed": first_failure is None}
    _emit(data, args.format, lines)
    return EXIT_OK if first_failure is None else EXIT_FAIL


def cmd_examples(args) -> int:
    examples = builtin_examples()
    if args.seed is not None:
        rng = random.Random(args.seed)
        for k in range(args.count):
            name = f"random_{args.seed}_{k}"
            examples[name] = random_consistent_problem(rng, name)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, problem in examples.items():
            (out / f"{name}.json").write_text(dumps(problem), encoding="utf-8")
        sys.stdout.write("".join(f"{out / name}.json\n" for name in examples))
    else:
        sys.stdout.write(dumps(examples))
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "verify": cmd_verify,
    "truncate": cmd_truncate,
    "moments": cmd_moments,
    "examples": cmd_examples,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"treeshift: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    command = ALIASES.get(args.command, args.command)
    try:
        return COMMANDS[command](args)
    except TreeShiftError as exc:
        print(f"treeshift: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (KeyError, ValueError) as exc:
        print(f"treeshift: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())
