"""Built-in example problems and seeded random generators.

Problems are plain JSON-ready dicts in the problem-file schema, so they can be
written to disk, fed to the command line, or parsed with ``parse_problem``.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .consistency import build_parent
from .measure import Measure, dirac, mass_at_zero, measure, moment, to_json
from .shift import ShiftRegion, WeightFamily
from .tree import ExplicitFinite, FreeKAry, OneBranch, RootedPath, TableGenerated, TreeRegion, materialize

ATOM_POINTS = (1, 2, 3, 5)


def _delta(p) -> dict:
    return {"atoms": [[str(Fraction(p)), "1"]]}


def path_isometry() -> dict:
    return {
        "name": "path_isometry",
        "template": {"kind": "path"},
        "weights": {"kind": "constant", "c": 1},
        "frontier_measures": {"*": _delta(1)},
    }


def bergman_path(depth: int = 10) -> dict:
    # the vertex at depth d carries the density proportional to s^d on [0, 1]
    return {
        "name": "bergman_path",
        "template": {"kind": "path"},
        "depth": depth,
        "weights": {"kind": "bergman"},
        "frontier_measures": {"*": {"boxes": [["0", "1", "1", depth]]}},
    }


def binary_half() -> dict:
    return {
        "name": "binary_half",
        "template": {"kind": "kary", "k": 2},
        "weights": {"kind": "constant", "c": "1/2"},
        "frontier_measures": {"*": _delta(1)},
        "options": {"N": 6},
    }


def one_branch(kappa: int = 2, eta: int = 3) -> dict:
    return {
        "name": f"one_branch_{kappa}_{eta}",
        "template": {"kind": "one_branch", "kappa": kappa, "eta": eta},
        "weights": {"kind": "by_depth", "table": {str(kappa + 1): f"1/{eta}"}, "default": 1},
        "frontier_measures": {"*": _delta(1)},
    }


def two_child(second_atom: int = 2) -> dict:
    """Root with two children of modsq 1/2 carrying delta_1 and delta_{second_atom}."""
    return {
        "name": f"two_child_{second_atom}",
        "template": {"kind": "one_branch", "kappa": 0, "eta": 2},
        "depth": 1,
        "weights": {"kind": "table", "modsq": {"1": "1/2", "2": "1/2"}},
        "frontier_measures": {"1": _delta(1), "2": _delta(second_atom)},
        "options": {"levels": ["3/2", 2, 4]},
    }


def hankel_counterexample() -> dict:
    """Path whose second weight jumps to 4: norm prefix (1, 1, 4, 4, 4, ...)."""
    return {
        "name": "hankel_counterexample",
        "template": {"kind": "path"},
        "weights": {"kind": "by_depth", "table": {"1": 1, "2": 4}, "default": 1},
        "options": {"N": 4},
    }


def star(leaves: int = 3, modsq="1") -> dict:
    return {
        "name": f"star_{leaves}",
        "template": {"kind": "explicit", "parents": [None] + [0] * leaves},
        "weights": {"kind": "constant", "c": modsq},
    }


def builtin_examples() -> dict[str, dict]:
    items = [
        path_isometry(),
        bergman_path(),
        binary_half(),
        one_branch(2, 3),
        one_branch(0, 2),
        two_child(2),
        two_child(3),
        hankel_counterexample(),
    ]
    return {p["name"]: p for p in items}


# --- random generation ---------------------------------------------------------


def random_template(rng: random.Random):
    kind = rng.choice(["path", "kary", "one_branch", "table", "explicit"])
    if kind == "path":
        return RootedPath()
    if kind == "kary":
        return FreeKAry(rng.randint(1, 3))
    if kind == "one_branch":
        return OneBranch(rng.randint(0, 3), rng.randint(1, 3))
    if kind == "table":
        table = {d: rng.randint(0, 3) for d in range(rng.randint(0, 4))}
        return TableGenerated(table, rng.randint(1, 2))
    n = rng.randint(1, 14)
    return ExplicitFinite(tuple([None] + [rng.randrange(j) for j in range(1, n)]))


def random_region(rng: random.Random, max_depth: int = 6, max_vertices: int = 400) -> TreeRegion:
    """A random template materialized to a random depth, kept small."""
    while True:
        template = random_template(rng)
        depth = rng.randint(0, max_depth)
        try:
            return materialize(template, depth, max_vertices)
        except Exception:  # oversize: draw again
            continue


def random_rational(rng: random.Random, num_max: int = 6, den_max: int = 6) -> Fraction:
    return Fraction(rng.randint(0, num_max), rng.randint(1, den_max))


def random_weights(rng: random.Random, region: TreeRegion, zero_rate: float = 0.1) -> WeightFamily:
    ms = [Fraction(0)]
    for _ in region.non_root:
        ms.append(Fraction(0) if rng.random() < zero_rate else Fraction(rng.randint(1, 6), rng.randint(1, 6)))
    return WeightFamily(tuple(ms))


def random_atomic(rng: random.Random, points=ATOM_POINTS, max_atoms: int = 3) -> Measure:
    """Random atomic probability measure with rational masses and no atom at 0."""
    chosen = rng.sample(list(points), rng.randint(1, min(max_atoms, len(points))))
    raw = [rng.randint(1, 5) for _ in chosen]
    total = sum(raw)
    return measure([(Fraction(p), Fraction(r, total)) for p, r in zip(chosen, raw)])


def random_frontier(rng: random.Random, region: TreeRegion, points=ATOM_POINTS) -> dict:
    return {v: random_atomic(rng, points) for v in region.frontier_vertices()}


def consistent_shift(rng: random.Random, region: TreeRegion, frontier: dict, slack: float = 0.3):
    """Weights for which propagation from ``frontier`` succeeds.

    Built bottom-up: children whose measure has an atom at 0 get weight 0,
    the rest share random weights scaled so the consistency sum is 1 (or,
    with probability ``slack``, a random value below 1).
    """
    modsq = [Fraction(0)] * len(region)
    mu: dict[int, Measure] = {}
    for u in reversed(region.vertices):
        if region.frontier[u]:
            mu[u] = frontier[u]
            continue
        kids = [v for v in region.children[u] if mass_at_zero(mu[v]) == 0]
        raw = {v: Fraction(rng.randint(1, 4)) for v in kids}
        total = sum((raw[v] * moment(mu[v], -1) for v in kids), Fraction(0))
        if total > 0:
            target = Fraction(1) if rng.random() >= slack else Fraction(rng.randint(1, 3), 4)
            for v in kids:
                modsq[v] = raw[v] * target / total
        partial = ShiftRegion(region, WeightFamily(tuple(modsq)))
        mu[u], _ = build_parent(partial, u, mu)
    return ShiftRegion(region, WeightFamily(tuple(modsq)))


# --- problem dicts for the classifier corpus -----------------------------------


def _template_json(template) -> dict:
    if isinstance(template, RootedPath):
        return {"kind": "path"}
    if isinstance(template, FreeKAry):
        return {"kind": "kary", "k": template.k}
    if isinstance(template, OneBranch):
        return {"kind": "one_branch", "kappa": template.kappa, "eta": template.eta}
    if isinstance(template, TableGenerated):
        return {
            "kind": "table",
            "table": {str(d): c for d, c in sorted(template.table.items())},
            "default": template.default,
        }
    return {"kind": "explicit", "parents": list(template.parents)}


def problem_from_parts(shift: ShiftRegion, frontier: dict | None = None, name: str | None = None, N: int = 4) -> dict:
    """Serialize a shift (and frontier measures) as a problem dict with a weight table."""
    region = shift.region
    out: dict = {
        "template": _template_json(region.template),
        "depth": region.depth,
        "weights": {
            "kind": "table",
            "modsq": {str(region.label(v)): str(shift.modsq(v)) for v in region.non_root},
        },
        "options": {"N": N},
    }
    if name:
        out["name"] = name
    if frontier:
        out["frontier_measures"] = {str(region.label(v)): to_json(m) for v, m in sorted(frontier.items())}
    return out


def random_consistent_problem(rng: random.Random, name: str, max_depth: int = 4) -> dict:
    while True:
        template = rng.choice([RootedPath(), FreeKAry(2), OneBranch(1, 2), OneBranch(0, 3), TableGenerated({0: 2}, 1)])
        region = materialize(template, rng.randint(1, max_depth))
        frontier = random_frontier(rng, region)
        shift = consistent_shift(rng, region, frontier, slack=0.0)
        if shift.all_nonzero():
            return problem_from_parts(shift, frontier, name, N=region.depth)


def _system_json(measures: dict, eps: dict) -> dict:
    return {
        "measures": {k: to_json(m) for k, m in measures.items()},
        "eps": {k: str(e) for k, e in eps.items()},
    }


def classifier_corpus(seed: int = 7) -> list[tuple[dict, str, str | None]]:
    """Labeled cases: (problem, expected verdict kind, expected witness type)."""
    rng = random.Random(seed)
    cases: list[tuple[dict, str, str | None]] = []

    positives = [
        path_isometry(),
        bergman_path(),
        binary_half(),
        one_branch(2, 3),
        two_child(2),
        two_child(3),
        {
            "name": "path_weight_two",
            "template": {"kind": "path"},
            "weights": {"kind": "constant", "c": 2},
            "frontier_measures": {"*": _delta(2)},
        },
        {
            "name": "star_zero_weights",
            "template": {"kind": "explicit", "parents": [None, 0, 0, 0]},
            "weights": {"kind": "constant", "c": 0},
        },
        random_consistent_problem(rng, "random_consistent_a"),
        random_consistent_problem(rng, "random_consistent_b"),
    ]
    cases += [(p, "Subnormal", None) for p in positives]

    negatives = [
        hankel_counterexample(),
        {"name": "path_drop_2_1", "template": {"kind": "path"},
         "weights": {"kind": "by_depth", "table": {"1": 2}, "default": 1}},
        {"name": "path_jump_late", "template": {"kind": "path"},
         "weights": {"kind": "by_depth", "table": {"1": 1, "2": 1, "3": 4}, "default": 1}},
        {"name": "path_halving", "template": {"kind": "path"},
         "weights": {"kind": "by_depth", "table": {"1": 1, "2": "1/2"}, "default": "1/2"}},
        {"name": "binary_drop", "template": {"kind": "kary", "k": 2}, "options": {"N": 5},
         "weights": {"kind": "by_depth", "table": {"1": 1}, "default": "1/4"}},
        {"name": "one_branch_thin", "template": {"kind": "one_branch", "kappa": 1, "eta": 2},
         "weights": {"kind": "by_depth", "table": {"2": "1/4"}, "default": 1}},
        {"name": "ternary_drop", "template": {"kind": "kary", "k": 3}, "options": {"N": 4},
         "weights": {"kind": "by_depth", "table": {"1": "1/3", "2": "1/9"}, "default": "1/3"}},
        {"name": "table_tree_drop", "template": {"kind": "table", "table": {"0": 2}, "default": 1},
         "weights": {"kind": "by_depth", "table": {"1": 1, "2": "1/3"}, "default": 1}},
        {"name": "path_exact_prefix_1_3_3", "template": {"kind": "path"},
         "weights": {"kind": "by_depth", "table": {"1": 1, "2": 3}, "default": 1}},
        {"name": "path_bergman_broken", "template": {"kind": "path"}, "depth": 10,
         "weights": {"kind": "by_depth", "table": {str(d): f"{d}/{d + 1}" for d in range(1, 11) if d != 4},
                     "default": 2}},
    ]
    cases += [(p, "NotSubnormal", "hankel") for p in negatives]

    leaves = [
        star(3),
        {"name": "explicit_mixed", "template": {"kind": "explicit", "parents": [None, 0, 1, 1, 3]},
         "weights": {"kind": "constant", "c": 1}},
        {"name": "finite_path", "template": {"kind": "explicit", "parents": [None, 0, 1, 2]},
         "weights": {"kind": "constant", "c": "1/2"}},
        {"name": "table_dies_out", "template": {"kind": "table", "table": {"3": 0}, "default": 1},
         "weights": {"kind": "constant", "c": 1}},
        {"name": "labeled_tree",
         "template": {"kind": "explicit", "parents": {"r": None, "a": "r", "b": "r", "c": "a"}},
         "weights": {"kind": "table", "modsq": {"a": "1/2", "b": "1/2", "c": 1}}},
    ]
    cases += [(p, "NotSubnormal", "leaf") for p in leaves]

    wrong_eps = two_child(2)
    del wrong_eps["frontier_measures"]
    wrong_eps["name"] = "two_child_wrong_eps"
    wrong_eps["system"] = _system_json(
        {"0": measure([(1, Fraction(1, 2)), (2, Fraction(1, 4)), (0, Fraction(1, 4))]), "1": dirac(1), "2": dirac(2)},
        {"0": 0, "1": 0, "2": 0},
    )
    undecided = [
        {"name": "path_isometry_wrong_frontier", "template": {"kind": "path"},
         "weights": {"kind": "constant", "c": 1}, "frontier_measures": {"*": _delta(2)}},
        {"name": "binary_half_wrong_frontier", "template": {"kind": "kary", "k": 2}, "options": {"N": 5},
         "weights": {"kind": "constant", "c": "1/2"}, "frontier_measures": {"*": _delta(2)}},
        wrong_eps,
        {"name": "path_weights_change_below_frontier", "template": {"kind": "path"}, "depth": 6,
         "options": {"N": 4},
         "weights": {"kind": "by_depth", "table": {str(d): 1 for d in range(1, 7)}, "default": 4},
         "frontier_measures": {"*": _delta(1)}},
        {"name": "path_system_for_other_weights", "template": {"kind": "path"}, "depth": 3,
         "options": {"N": 1},
         "weights": {"kind": "constant", "c": 2},
         "system": _system_json({str(v): dirac(1) for v in range(4)}, {str(v): 0 for v in range(4)})},
    ]
    cases += [(p, "Undecided", None) for p in undecided]
    return cases
