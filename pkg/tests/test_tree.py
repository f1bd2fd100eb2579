import logging

import numpy as np
import pytest

from sicta.policy import biased, custom, fair
from sicta.tree import (
    SplitTree,
    TreeDepthError,
    TreeFormatError,
    check_tree,
    generate,
    parse_tree,
)

from conftest import tree_stream

log = logging.getLogger(__name__)


@pytest.mark.parametrize("n", [0, 1])
def test_small_trees_are_leaves(n, rng):
    tree = generate(n, fair(3), rng)
    assert tree.size == 1
    assert tree.n == n
    assert len(tree.children(0)) == 0


def test_pair_collision_has_d_children(rng):
    tree = generate(2, fair(3), rng)
    kids = tree.children(0)
    assert len(kids) == 3
    assert sum(tree.occupancy[c] for c in kids) == 2


def test_same_seed_same_tree():
    a = generate(300, biased(4), np.random.default_rng(5))
    b = generate(300, biased(4), np.random.default_rng(5))
    assert a == b
    assert np.array_equal(a.occupancy, b.occupancy)


def test_tree_is_read_only(rng):
    tree = generate(20, fair(2), rng)
    with pytest.raises(ValueError):
        tree.occupancy[0] = 3


def test_occupancy_conservation_over_many_trees():
    count = 0
    for tree in tree_stream(11, 100_000):
        check_tree(tree)
        leaves = tree.occupancy[tree.first_child < 0]
        assert leaves.max() <= 1
        count += 1
    assert count == 100_000


def test_depth_limit_raises():
    sticky = custom([0.999, 0.001])
    with pytest.raises(TreeDepthError) as info:
        generate(50, sticky, np.random.default_rng(0), max_depth=3)
    assert info.value.depth == 3
    assert info.value.max_depth == 3


def test_argument_checks(rng):
    with pytest.raises(ValueError):
        generate(-1, fair(2), rng)
    with pytest.raises(ValueError):
        generate(3, fair(2), rng, max_depth=0)


@pytest.mark.slow
def test_default_depth_limit_not_reached_in_practice():
    # statistical: a hit is logged, not treated as a failure
    hits = 0
    for k in range(20_000):
        rng = np.random.default_rng([3, k])
        d = 2 + k % 4
        policy = fair(d) if k % 2 else biased(d)
        try:
            generate(int(rng.integers(2, 1001)), policy, rng)
        except TreeDepthError as exc:
            hits += 1
            log.warning("depth limit reached: %s", exc)
    log.info("depth-limit hits: %d of 20000", hits)


@pytest.mark.parametrize(
    "text",
    ["0", "1", "2(1,1,0)", "2(0,1,1)", "2(0,0,2(1,1,0))", "3(2(1,1),1)", "4(2(0,2(1,1)),2(1,1))"],
)
def test_dump_parse_round_trip(text):
    assert parse_tree(text).dump() == text


def test_parse_infers_d():
    assert parse_tree("2(0,0,2(1,1,0))").d == 3
    assert parse_tree("3(2(1,1),1)").d == 2


@pytest.mark.parametrize(
    "text", ["2(1,0)x", "2(1,1", "1(1,0)", "2(1,0,0)", "2(1,1,0)", "3(2(1,1,0),1,0)", ""]
)
def test_parse_rejects_bad_trees(text):
    with pytest.raises(TreeFormatError):
        parse_tree(text, 2)


def test_generated_tree_round_trips(rng):
    tree = generate(40, fair(3), rng)
    assert parse_tree(tree.dump(), 3) == tree
    assert isinstance(repr(tree), str)
    assert hash(tree) == hash(parse_tree(str(tree), 3))
