import pytest

import oracles
from treeshift.errors import DepthExceeded, OversizeRegion, ValidationError
from treeshift.tree import (
    ExplicitFinite,
    FreeKAry,
    OneBranch,
    RootedPath,
    TableGenerated,
    from_parent_list,
    is_leafless_within,
    materialize,
)


def test_path_depth_three():
    r = materialize(RootedPath(), 3)
    assert len(r) == 4
    assert all(len(r.children[v]) == 1 for v in range(3))
    assert r.frontier == (False, False, False, True)


def test_binary_depth_two():
    r = materialize(FreeKAry(2), 2)
    assert len(r) == 7
    assert len(r.children[0]) == 2
    assert all(len(r.children[c]) == 2 for c in r.children[0])


def test_one_branch_enumeration():
    r = materialize(OneBranch(2, 3), 3)
    assert len(r) == 6
    branching = [v for v in r.vertices if r.level[v] == 2]
    assert len(branching) == 1 and len(r.children[branching[0]]) == 3
    assert len(r.chi_n(0, 3)) == 3


def test_chi_n_examples():
    path = materialize(RootedPath(), 5)
    assert path.chi_n(0, 3) == {3}
    assert path.chi_n(2, 0) == {2}
    binary = materialize(FreeKAry(2), 3)
    assert len(binary.chi_n(0, 2)) == 4


def test_descendants_examples():
    assert materialize(RootedPath(), 4).descendants(0, 2) == {0, 1, 2}
    assert len(materialize(FreeKAry(2), 3).descendants(0, 2)) == 7
    r = materialize(OneBranch(1, 2), 4)
    assert all(r.descendants(u, 0) == {u} for u in r.vertices)


def test_depth_exceeded_on_incomplete_region():
    r = materialize(RootedPath(), 2)
    with pytest.raises(DepthExceeded):
        r.chi_n(0, 3)
    with pytest.raises(DepthExceeded):
        r.descendants(1, 2)


def test_complete_explicit_region_answers_beyond_depth():
    r = materialize(from_parent_list([None, 0, 0]), 5)
    assert r.complete
    assert r.chi_n(0, 3) == frozenset()


def test_oversize_region(monkeypatch):
    with pytest.raises(OversizeRegion):
        materialize(FreeKAry(3), 10, max_vertices=100)
    monkeypatch.setenv("TREESHIFT_MAX_VERTICES", "20")
    with pytest.raises(OversizeRegion):
        materialize(FreeKAry(2), 5)


def test_table_generated_template():
    r = materialize(TableGenerated({0: 3, 1: 0}, 2), 3)
    assert len(r.children[0]) == 3
    assert all(not r.children[c] and not r.frontier[c] for c in r.children[0])


@pytest.mark.parametrize(
    "parents",
    [
        (None, None),  # two roots
        (1, 0),  # no root
        (None, 2, 1),  # cycle away from the root
        (None, 5),  # out of range
    ],
)
def test_explicit_validation(parents):
    with pytest.raises(ValidationError):
        ExplicitFinite(parents)


def test_explicit_labels_resolve():
    r = materialize(ExplicitFinite((None, 0, 0, 1), ("r", "a", "b", "c")), 3)
    assert r.label(0) == "r"
    c = r.vertex("c")
    assert r.parent[c] == r.vertex("a")
    with pytest.raises(KeyError):
        r.vertex("zz")


def test_explicit_unlabeled_keys_follow_parent_table():
    # entry 1 hangs below entry 2, so BFS renumbers them
    t = ExplicitFinite((None, 2, 0))
    r = materialize(t, 3)
    v = r.vertex("1")
    assert r.level[v] == 2 and r.label(v) == 1


def test_leaf_status_examples():
    star = materialize(from_parent_list([None, 0, 0, 0]), 2)
    status = is_leafless_within(star)
    assert status.kind == "has_leaf" and status.witness in (1, 2, 3)
    assert is_leafless_within(materialize(RootedPath(), 5)).kind == "leafless"
    single = is_leafless_within(materialize(from_parent_list([None]), 0))
    assert single.kind == "has_leaf" and single.witness == 0


def test_leaf_status_never_inconclusive_for_explicit():
    r = materialize(from_parent_list([None, 0, 1, 2]), 1)
    assert is_leafless_within(r).kind == "has_leaf"


def test_leaf_status_table_generated_inconclusive():
    assert is_leafless_within(materialize(TableGenerated({}, 1), 3)).kind == "leafless"
    # leaves at depth 5 lie below the cut-off
    assert is_leafless_within(materialize(TableGenerated({5: 0}, 1), 3)).kind == "inconclusive"


def test_chi_n_matches_parent_walk_oracle():
    for template in (FreeKAry(2), OneBranch(1, 3), TableGenerated({0: 2, 2: 0}, 1)):
        r = materialize(template, 4)
        for u in r.vertices:
            for n in range(0, r.depth - r.level[u] + 1):
                assert r.chi_n(u, n) == oracles.chi_n(r, u, n)


def test_par_n_and_path_up():
    r = materialize(FreeKAry(2), 3)
    w = sorted(r.chi_n(0, 3))[5]
    assert r.par_n(w, 3) == 0
    chain = r.path_up(0, w)
    assert len(chain) == 3 and chain[0] == w


def test_leaf_at_cutoff_level_answers_any_order():
    # vertex 1 is a genuine leaf at the cut-off depth, vertex 2 is frontier
    r = materialize(ExplicitFinite((None, 0, 0, 2)), 1)
    v1, v2 = r.vertex(1), r.vertex(2)
    assert not r.frontier[v1] and r.frontier[v2]
    assert r.chi_n(v1, 3) == frozenset()
    with pytest.raises(DepthExceeded):
        r.chi_n(v2, 1)
    with pytest.raises(DepthExceeded):
        r.chi_n(0, 2)
