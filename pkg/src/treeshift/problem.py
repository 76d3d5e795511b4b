"""Problem files: a JSON description of a tree template, weights and measures.

Example::

    {"template": {"kind": "path"},
     "weights": {"kind": "constant", "c": 1},
     "frontier_measures": {"*": {"atoms": [[1, 1]]}},
     "options": {"N": 8}}

Rationals are written as "p/q" strings or integers; JSON floats stay floats.
Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .classify import classify
from .consistency import MeasureSystem
from .errors import OversizeRegion, ParseError, ValidationError
from .measure import from_json as measure_from_json
from .measure import is_probability
from .scalar import parse_scalar
from .shift import (
    ShiftRegion,
    WeightFamily,
    bergman_weights,
    by_depth_weights,
    constant_weights,
    geometric_weights,
)
from .tree import (
    ExplicitFinite,
    FreeKAry,
    OneBranch,
    RootedPath,
    TableGenerated,
    TreeRegion,
    materialize,
)

TOP_KEYS = {"name", "template", "depth", "weights", "system", "frontier_measures", "support_bound", "options"}
OPTION_KEYS = {"N", "tol", "levels", "vertex", "n_max"}
TEMPLATE_KEYS = {
    "path": set(),
    "kary": {"k"},
    "one_branch": {"kappa", "eta"},
    "explicit": {"parents", "labels"},
    "table": {"table", "default"},
}
WEIGHT_KEYS = {
    "table": {"modsq", "phase", "default"},
    "constant": {"c"},
    "bergman": set(),
    "geometric": {"r"},
    "by_depth": {"table", "default"},
}
DEFAULT_LEVELS = (1, 2, 4, 8)


@dataclass
class Options:
    N: int = 8
    tol: float = 1e-9
    levels: tuple = DEFAULT_LEVELS
    vertex: object = None  # None means the root
    n_max: int | None = None


@dataclass
class ProblemFile:
    raw: dict
    template: object
    depth: int
    shift: ShiftRegion
    options: Options
    system: MeasureSystem | None = None
    frontier_measures: dict | None = None
    support_bound: object = None
    name: str | None = None
    weight_spec: dict = field(default_factory=dict, repr=False)

    @property
    def region(self) -> TreeRegion:
        return self.shift.region

    def at_depth(self, depth: int, max_vertices: int | None = None) -> ShiftRegion:
        """The same template and weights materialized to another depth."""
        region = materialize(self.template, depth, max_vertices)
        violations: list[str] = []
        weights = _build_weights(self.weight_spec, region, violations)
        if violations:
            raise ValidationError(violations)
        return ShiftRegion(region, weights)

    def to_json(self) -> dict:
        """The problem as parsed, with the effective depth and options written out."""
        out = copy.deepcopy(self.raw)
        out["depth"] = self.depth
        opts = dict(out.get("options", {}))
        opts["N"] = self.options.N
        opts["tol"] = self.options.tol
        out["options"] = opts
        return out


# --- helpers -------------------------------------------------------------------


class _Ctx:
    """Collects violations and locates fields in the source text for messages."""

    def __init__(self, text: str | None):
        self.text = text
        self.violations: list[str] = []

    def line_of(self, field_path: str) -> int | None:
        if not self.text:
            return None
        last = field_path.split(".")[-1]
        pos = self.text.find(f'"{last}"')
        return self.text.count("\n", 0, pos) + 1 if pos >= 0 else None

    def fail(self, message: str, field_path: str):
        raise ParseError(message, line=self.line_of(field_path), field=field_path)


def _check_keys(ctx: _Ctx, obj, allowed: set, where: str, required: set = frozenset()):
    if not isinstance(obj, dict):
        ctx.fail(f"{where or 'problem'} must be an object", where or "<root>")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        ctx.violations.append(f"{where or 'problem'}: unknown keys {unknown}")
    for key in sorted(required - set(obj)):
        ctx.violations.append(f"{where or 'problem'}: missing required key '{key}'")


def _int(ctx: _Ctx, value, where: str, minimum: int = 0) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        ctx.fail(f"expected an integer, got {value!r}", where)
    if value < minimum:
        ctx.fail(f"must be at least {minimum}, got {value}", where)
    return value


def _scalar(ctx: _Ctx, value, where: str, nonneg: bool = True):
    try:
        x = parse_scalar(value)
    except ValueError as exc:
        ctx.fail(str(exc), where)
    if x != x or x in (float("inf"), float("-inf")):
        ctx.fail(f"must be finite, got {value!r}", where)
    if nonneg and x < 0:
        ctx.fail(f"must be nonnegative, got {value!r}", where)
    return x


def _measure(ctx: _Ctx, value, where: str):
    try:
        return measure_from_json(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        ctx.fail(f"bad measure: {exc}", where)


def _resolve(region: TreeRegion, key):
    try:
        return region.vertex(key)
    except KeyError:
        return None


# --- templates -----------------------------------------------------------------


def _template(ctx: _Ctx, data) -> object:
    _check_keys(ctx, data, {"kind"} | set().union(*TEMPLATE_KEYS.values()), "template", {"kind"})
    kind = data.get("kind")
    if kind not in TEMPLATE_KEYS:
        ctx.fail(f"unknown template kind {kind!r}; expected one of {sorted(TEMPLATE_KEYS)}", "template.kind")
    extra = sorted(set(data) - TEMPLATE_KEYS[kind] - {"kind"})
    if extra:
        ctx.violations.append(f"template: keys {extra} do not apply to kind '{kind}'")
    try:
        if kind == "path":
            return RootedPath()
        if kind == "kary":
            return FreeKAry(_int(ctx, data.get("k"), "template.k", 1))
        if kind == "one_branch":
            return OneBranch(
                _int(ctx, data.get("kappa"), "template.kappa", 0),
                _int(ctx, data.get("eta"), "template.eta", 1),
            )
        if kind == "table":
            table = data.get("table", {})
            if not isinstance(table, dict):
                ctx.fail("must map depths to child counts", "template.table")
            parsed = {}
            for k, v in table.items():
                if not str(k).isdigit():
                    ctx.fail(f"depth key {k!r} is not a nonnegative integer", "template.table")
                parsed[int(k)] = _int(ctx, v, f"template.table.{k}", 0)
            return TableGenerated(parsed, _int(ctx, data.get("default", 0), "template.default", 0))
        return _explicit(ctx, data)
    except ValueError as exc:
        ctx.fail(str(exc), "template")


def _explicit(ctx: _Ctx, data) -> ExplicitFinite:
    parents = data.get("parents")
    if isinstance(parents, dict):
        if "labels" in data:
            ctx.violations.append("template: 'labels' is implied by a parents mapping")
        labels = list(parents)
        index = {lab: j for j, lab in enumerate(labels)}
        table = []
        for lab, par in parents.items():
            if par is None:
                table.append(None)
            elif str(par) in index:
                table.append(index[str(par)])
            else:
                ctx.fail(f"vertex {lab!r} names unknown parent {par!r}", f"template.parents.{lab}")
        return ExplicitFinite(tuple(table), tuple(labels))
    if not isinstance(parents, list):
        ctx.fail("must be a list (null for the root) or a label -> parent mapping", "template.parents")
    table = []
    for j, par in enumerate(parents):
        table.append(None if par is None else _int(ctx, par, f"template.parents.{j}", 0))
    labels = data.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(x, (str, int)) for x in labels):
            ctx.fail("must be a list of strings or integers", "template.labels")
        labels = tuple(str(x) for x in labels)
    return ExplicitFinite(tuple(table), labels)


# --- weights -------------------------------------------------------------------


def _build_weights(spec: dict, region: TreeRegion, violations: list) -> WeightFamily:
    """Weights for ``region`` from an already type-checked weight description.

    Integer vertex keys beyond a generated region are ignored (they apply at
    larger depths); anything else unresolvable is a violation.
    """
    kind = spec["kind"]
    if kind == "constant":
        return constant_weights(region, spec["c"])
    if kind == "bergman":
        return bergman_weights(region)
    if kind == "geometric":
        return geometric_weights(region, spec["r"])
    if kind == "by_depth":
        table, default = spec["table"], spec.get("default")
        missing = sorted({region.level[v] for v in region.non_root} - set(table)) if default is None else []
        if missing:
            violations.append(f"weights.table has no entry for depths {missing} and no default")
            return WeightFamily(tuple([0] * len(region)))
        return by_depth_weights(region, table, default)
    modsq: dict = {}
    phase: dict = {}
    for name, target in (("modsq", modsq), ("phase", phase)):
        for key, val in spec.get(name, {}).items():
            v = _resolve(region, key)
            if v is None:
                generated = not isinstance(region.template, ExplicitFinite)
                if generated and str(key).isdigit():
                    continue
                violations.append(f"weights.{name}: unknown vertex {key!r}")
            elif v == 0:
                violations.append(f"weights.{name}: the root carries no weight")
            else:
                target[v] = val
    default = spec.get("default")
    missing = [region.label(v) for v in region.non_root if v not in modsq]
    if missing and default is None:
        violations.append(f"weights.modsq is missing vertices {missing}")
        return WeightFamily(tuple([0] * len(region)))
    ms = [0] + [modsq.get(v, default) for v in region.non_root]
    ph: tuple = ()
    if phase:
        ph = tuple([0.0] + [float(phase.get(v, 0.0)) for v in region.non_root])
    return WeightFamily(tuple(ms), ph)


def _weight_spec(ctx: _Ctx, data) -> dict:
    _check_keys(ctx, data, {"kind"} | set().union(*WEIGHT_KEYS.values()), "weights", {"kind"})
    kind = data.get("kind")
    if kind not in WEIGHT_KEYS:
        ctx.fail(f"unknown weight kind {kind!r}; expected one of {sorted(WEIGHT_KEYS)}", "weights.kind")
    extra = sorted(set(data) - WEIGHT_KEYS[kind] - {"kind"})
    if extra:
        ctx.violations.append(f"weights: keys {extra} do not apply to kind '{kind}'")
    spec: dict = {"kind": kind}
    if kind == "constant":
        spec["c"] = _scalar(ctx, data.get("c"), "weights.c")
    elif kind == "geometric":
        spec["r"] = _scalar(ctx, data.get("r"), "weights.r")
    elif kind == "by_depth":
        table = data.get("table", {})
        if not isinstance(table, dict):
            ctx.fail("must map depths to moduli squared", "weights.table")
        parsed = {}
        for k, v in table.items():
            if not str(k).isdigit() or int(k) < 1:
                ctx.fail(f"depth key {k!r} is not a positive integer", "weights.table")
            parsed[int(k)] = _scalar(ctx, v, f"weights.table.{k}")
        spec["table"] = parsed
        if "default" in data:
            spec["default"] = _scalar(ctx, data["default"], "weights.default")
    elif kind == "table":
        modsq = data.get("modsq")
        if not isinstance(modsq, dict):
            ctx.fail("must map vertices to moduli squared", "weights.modsq")
        spec["modsq"] = {k: _scalar(ctx, v, f"weights.modsq.{k}") for k, v in modsq.items()}
        if "phase" in data:
            if not isinstance(data["phase"], dict):
                ctx.fail("must map vertices to phases in radians", "weights.phase")
            spec["phase"] = {k: float(_scalar(ctx, v, f"weights.phase.{k}", nonneg=False)) for k, v in data["phase"].items()}
        if "default" in data:
            spec["default"] = _scalar(ctx, data["default"], "weights.default")
    return spec


# --- measures and systems ------------------------------------------------------


def _system(ctx: _Ctx, data, region: TreeRegion) -> MeasureSystem | None:
    _check_keys(ctx, data, {"measures", "eps"}, "system", {"measures", "eps"})
    measures, eps = data.get("measures", {}), data.get("eps", {})
    if not isinstance(measures, dict) or not isinstance(eps, dict):
        ctx.fail("'measures' and 'eps' must be objects keyed by vertex", "system")
    mu, ep = {}, {}
    for key, val in measures.items():
        v = _resolve(region, key)
        if v is None:
            ctx.violations.append(f"system.measures: unknown vertex {key!r}")
            continue
        mu[v] = _measure(ctx, val, f"system.measures.{key}")
    for key, val in eps.items():
        v = _resolve(region, key)
        if v is None:
            ctx.violations.append(f"system.eps: unknown vertex {key!r}")
            continue
        ep[v] = _scalar(ctx, val, f"system.eps.{key}")
    for name, got in (("measures", mu), ("eps", ep)):
        missing = [region.label(v) for v in region.vertices if v not in got]
        if missing:
            ctx.violations.append(f"system.{name} is missing vertices {missing}")
    if ctx.violations:
        return None
    try:
        return MeasureSystem(dict(sorted(mu.items())), dict(sorted(ep.items())))
    except ValueError as exc:
        ctx.violations.append(f"system: {exc}")
        return None


def _frontier(ctx: _Ctx, data, region: TreeRegion) -> dict | None:
    if not isinstance(data, dict):
        ctx.fail("must be an object keyed by frontier vertex (or '*')", "frontier_measures")
    out = {}
    wildcard = None
    for key, val in data.items():
        mu = _measure(ctx, val, f"frontier_measures.{key}")
        if key == "*":
            wildcard = mu
            continue
        v = _resolve(region, key)
        if v is None:
            ctx.violations.append(f"frontier_measures: unknown vertex {key!r}")
        elif not region.frontier[v]:
            ctx.violations.append(f"frontier_measures: vertex {key!r} is not on the frontier")
        else:
            out[v] = mu
    for v in region.frontier_vertices():
        if v not in out:
            if wildcard is None:
                ctx.violations.append(f"frontier_measures: no measure for frontier vertex {region.label(v)!r}")
            else:
                out[v] = wildcard
    for v, mu in out.items():
        if not is_probability(mu):
            ctx.violations.append(f"frontier_measures: vertex {region.label(v)!r} is not a probability measure")
    return out


# --- entry point ---------------------------------------------------------------


def _options(ctx: _Ctx, data, overrides: dict) -> Options:
    data = dict(data or {})
    _check_keys(ctx, data, OPTION_KEYS, "options")
    data.update({k: v for k, v in overrides.items() if k in OPTION_KEYS and v is not None})
    opts = Options()
    if "N" in data:
        opts.N = _int(ctx, data["N"], "options.N", 0)
    if "tol" in data:
        tol = data["tol"]
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
            ctx.fail(f"must be a positive number, got {tol!r}", "options.tol")
        opts.tol = float(tol)
    if "levels" in data:
        levels = data["levels"]
        if not isinstance(levels, (list, tuple)) or not levels:
            ctx.fail("must be a nonempty list of positive levels", "options.levels")
        parsed = tuple(_scalar(ctx, x, "options.levels") for x in levels)
        if any(not x > 0 for x in parsed):
            ctx.fail("levels must be positive", "options.levels")
        opts.levels = parsed
    if "vertex" in data:
        opts.vertex = data["vertex"]
    if "n_max" in data:
        opts.n_max = _int(ctx, data["n_max"], "options.n_max", 0)
    return opts


def _read(source) -> tuple[str | None, object]:
    if isinstance(source, dict):
        return None, source
    if source == "-" or source is None:
        text = sys.stdin.read()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{source}: not UTF-8 ({exc.reason})") from exc
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc.strerror}") from exc
    try:
        return text, json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc


def parse_problem(source, overrides: dict | None = None, max_vertices: int | None = None) -> ProblemFile:
    """Read, validate and materialize a problem.

    ``source`` is a path, "-" for stdin, an open file, or an already-decoded
    dict.  ``overrides`` (N, tol, levels, depth, vertex) take precedence over
    the file, as command-line flags do.
    """
    overrides = dict(overrides or {})
    text, data = _read(source)
    ctx = _Ctx(text)
    _check_keys(ctx, data, TOP_KEYS, "", {"template", "weights"})
    if ctx.violations:
        raise ValidationError(ctx.violations)
    opts = _options(ctx, data.get("options"), overrides)
    template = _template(ctx, data["template"])
    spec = _weight_spec(ctx, data["weights"])
    if ctx.violations:
        raise ValidationError(ctx.violations)

    depth = overrides.get("depth")
    if depth is None and "depth" in data:
        depth = _int(ctx, data["depth"], "depth", 0)
    if depth is None:
        depth = opts.N + 2
        if isinstance(template, ExplicitFinite):
            depth = max(depth, template.height())
    region = materialize(template, depth, max_vertices)
    violations: list[str] = []
    weights = _build_weights(spec, region, violations)
    ctx.violations.extend(violations)
    if ctx.violations:
        raise ValidationError(ctx.violations)
    shift = ShiftRegion(region, weights)

    system = _system(ctx, data["system"], region) if "system" in data else None
    frontier = _frontier(ctx, data["frontier_measures"], region) if "frontier_measures" in data else None
    support = _scalar(ctx, data["support_bound"], "support_bound") if "support_bound" in data else None
    if opts.vertex is not None and _resolve(region, opts.vertex) is None:
        ctx.violations.append(f"options.vertex: unknown vertex {opts.vertex!r}")
    name = data.get("name")
    if name is not None and not isinstance(name, str):
        ctx.fail("must be a string", "name")
    if ctx.violations:
        raise ValidationError(ctx.violations)
    raw = copy.deepcopy(data)
    return ProblemFile(raw, template, depth, shift, opts, system, frontier, support, name, spec)


PROBE_MAX_VERTICES = 200_000


def probe_shift(problem: ProblemFile) -> ShiftRegion | None:
    """The shift materialized N levels below the region, when the weights extend there."""
    if problem.region.complete:
        return None
    try:
        return problem.at_depth(problem.depth + problem.options.N, PROBE_MAX_VERTICES)
    except (ValidationError, OversizeRegion):
        return None


def classify_problem(problem: ProblemFile, probe: bool = True):
    """Classify a parsed problem, checking frontier measures against deeper weights when possible."""
    deeper = None
    if probe and (problem.system is not None or problem.frontier_measures is not None):
        deeper = probe_shift(problem)
    return classify(
        problem.shift,
        problem.options.N,
        system=problem.system,
        frontier_measures=problem.frontier_measures,
        support_bound=problem.support_bound,
        tol=problem.options.tol,
        probe=deeper,
    )
