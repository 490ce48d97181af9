import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdspc.curvature import CurvatureProfile, PlannerState, integrate
from fdspc.searchtree import EmptyIndexError, HeuristicIndex, PathTree, TreeError, key_for

DT = 0.01


def seg(n, kappa=0.0):
    return CurvatureProfile(DT, np.full(n, kappa))


def test_index_matches_sorted_list_over_10000_ops():
    rng = np.random.default_rng(7)
    idx = HeuristicIndex()
    oracle = {}  # locator -> (key, insertion order)
    order = 0
    for _ in range(10_000):
        op = rng.random()
        if op < 0.5 or not oracle:
            loc = f"n{int(rng.integers(500))}"
            key = float(rng.integers(0, 50))  # many ties
            idx.push(key, loc)
            oracle[loc] = (key, order)
            order += 1
        elif op < 0.8:
            loc, key = idx.pop_min()
            want = min(oracle, key=lambda k: oracle[k])
            assert (loc, key) == (want, oracle[want][0])
            del oracle[loc]
        else:
            loc = f"n{int(rng.integers(500))}"
            assert idx.remove(loc) == (loc in oracle)
            oracle.pop(loc, None)
        assert len(idx) == len(oracle)
    items = [loc for _, _, loc in idx.items()]
    assert items == sorted(oracle, key=lambda loc: oracle[loc])


def test_pop_from_empty_index():
    idx = HeuristicIndex()
    assert idx.peek() is None
    with pytest.raises(EmptyIndexError):
        idx.pop_min()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=60))
def test_index_pops_in_order(keys):
    idx = HeuristicIndex()
    for i, k in enumerate(keys):
        idx.push(k, str(i))
    popped = [idx.pop_min()[1] for _ in keys]
    assert popped == sorted(keys)


def test_keys_are_goal_distances():
    goal = (5.0, 0.0)
    tree = PathTree(PlannerState(), goal=goal, dt=DT)
    loc = tree.insert("", "L", seg(100), goal)
    node = tree.node(loc)
    assert node.exit_state.x == pytest.approx(1.0)
    ((k0, _, l0), (k1, _, l1)) = tree.index.items()
    assert (l0, k0) == ("L", pytest.approx(4.0))
    assert (l1, k1) == ("", pytest.approx(5.0))
    assert key_for(node.exit_state, goal) == pytest.approx(4.0)


def test_parent_pruned_only_when_both_children_exist():
    goal = (5.0, 0.0)
    tree = PathTree(PlannerState(), goal=goal, dt=DT)
    tree.insert("", "L", seg(10, 0.1), goal)
    assert "" in tree.index and tree.n_pruned == 0
    tree.insert("", "R", seg(10, -0.1), goal)
    assert "" not in tree.index and tree.n_pruned == 1
    with pytest.raises(TreeError):
        tree.insert("", "L", seg(1), goal)
    with pytest.raises(ValueError):
        tree.insert("L", "X", seg(1), goal)
    with pytest.raises(TreeError):
        tree.node("RRR")


def test_reconstruct_concatenates_root_to_leaf():
    goal = (9.0, 9.0)
    tree = PathTree(PlannerState(), seg(5, 0.0), goal=goal, dt=DT)
    tree.insert("", "L", seg(3, 0.2), goal)
    tree.insert("L", "R", seg(4, -0.1), goal)
    tree.insert("", "R", seg(7, 0.5), goal)
    prof = tree.reconstruct("LR")
    np.testing.assert_array_equal(prof.kappas, [0] * 5 + [0.2] * 3 + [-0.1] * 4)
    # exit state of the leaf equals integrating the concatenated profile
    final = integrate(PlannerState(), prof).final
    leaf = tree.node("LR").exit_state
    assert (final.x, final.y, final.theta) == pytest.approx((leaf.x, leaf.y, leaf.theta))
    assert [n.sequ for n in tree.path_to("LR")] == ["", "L", "LR"]


def test_remove_subtree():
    goal = (9.0, 0.0)
    tree = PathTree(PlannerState(), goal=goal, dt=DT)
    for loc in ("", "L", "LL", "LR"):
        for side in "LR":
            if loc + side not in tree:
                tree.insert(loc, side, seg(10), goal)
    n_before = len(tree)
    removed = tree.remove_subtree("L")
    assert removed == 7  # L, LL, LR and their four children
    assert len(tree) == n_before - removed
    assert all(not loc.startswith("L") for _, _, loc in tree.index.items())
    assert tree.root.left is None and tree.node("R") is tree.root.right
    with pytest.raises(TreeError):
        tree.remove_subtree("")


def test_to_dict_shape():
    goal = (3.0, 4.0)
    tree = PathTree(PlannerState(), goal=goal, dt=DT)
    tree.insert("", "L", seg(2), goal)
    d = tree.to_dict()
    assert {n["locator"] for n in d["nodes"]} == {"", "L"}
    assert next(n for n in d["nodes"] if n["locator"] == "")["key"] == pytest.approx(5.0)
    assert math.isfinite(d["nodes"][1]["x"])
