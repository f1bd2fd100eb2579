"""Realized random splitting trees.

A tree is stored as a flat node table.  Node 0 is the root; ``occupancy[i]``
is the number of users at node ``i`` and, for a collision node
(``occupancy >= 2``), its ``d`` children sit at indices
``first_child[i] .. first_child[i] + d - 1`` in group order.  Leaves have
``first_child == -1``.  Children are always allocated after their parent,
so every child index exceeds its parent's index; the evaluators rely on
that to run bottom-up by scanning the table backwards.

Every collision node is fully expanded, including groups that the early-stop
receiver never visits, so all evaluators can be run on one realization.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from numba import njit

from .policy import SplitPolicy

DEFAULT_MAX_DEPTH = 10_000


class TreeDepthError(RuntimeError):
    """Splitting went deeper than ``max_depth``."""

    def __init__(self, depth: int, max_depth: int):
        super().__init__(f"split tree reached depth {depth} (max_depth={max_depth})")
        self.depth = depth
        self.max_depth = max_depth


class TreeFormatError(ValueError):
    pass


@njit(nogil=True, cache=True)
def _grow(rng, n, cum, d, max_depth):
    cap = 64
    occ = np.empty(cap, np.int64)
    first = np.full(cap, -1, np.int64)
    depth = np.zeros(cap, np.int64)
    occ[0] = n
    size = 1
    stack = [0]
    while len(stack) > 0:
        i = stack.pop()
        m = occ[i]
        if m < 2:
            continue
        if depth[i] >= max_depth:
            return occ[:size].copy(), first[:size].copy(), depth[i]
        if size + d > cap:
            while size + d > cap:
                cap *= 2
            occ2 = np.empty(cap, np.int64)
            first2 = np.full(cap, -1, np.int64)
            depth2 = np.zeros(cap, np.int64)
            occ2[:size] = occ[:size]
            first2[:size] = first[:size]
            depth2[:size] = depth[:size]
            occ, first, depth = occ2, first2, depth2
        base = size
        size += d
        first[i] = base
        for j in range(d):
            occ[base + j] = 0
            depth[base + j] = depth[i] + 1
        for _ in range(m):
            g = np.searchsorted(cum, rng.random(), side="right")
            if g > d - 1:
                g = d - 1
            occ[base + g] += 1
        for j in range(d - 1, -1, -1):
            if occ[base + j] >= 2:
                stack.append(base + j)
    return occ[:size].copy(), first[:size].copy(), -1


@dataclass(frozen=True, eq=False)
class SplitTree:
    """Immutable node-table splitting tree (see module docstring)."""

    d: int
    occupancy: np.ndarray
    first_child: np.ndarray

    def __post_init__(self):
        for arr in (self.occupancy, self.first_child):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.occupancy[0])

    @property
    def size(self) -> int:
        return len(self.occupancy)

    def children(self, i: int) -> range:
        f = int(self.first_child[i])
        return range(0) if f < 0 else range(f, f + self.d)

    def internal_count(self) -> int:
        return int(np.count_nonzero(self.occupancy >= 2))

    def dump(self) -> str:
        """Parenthesized pre-order text, e.g. ``2(0,0,2(1,1,0))``."""
        out: list[str] = []

        def walk(i):
            out.append(str(int(self.occupancy[i])))
            kids = self.children(i)
            if len(kids):
                out.append("(")
                for k, c in enumerate(kids):
                    if k:
                        out.append(",")
                    walk(c)
                out.append(")")

        walk(0)
        return "".join(out)

    __str__ = dump

    def __repr__(self) -> str:
        return f"SplitTree(d={self.d}, {self.dump()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, SplitTree):
            return NotImplemented
        return self.d == other.d and self.dump() == other.dump()

    def __hash__(self) -> int:
        return hash((self.d, self.dump()))


def generate(
    n: int,
    policy: SplitPolicy,
    rng: np.random.Generator,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> SplitTree:
    """Draw a fully expanded splitting tree for ``n`` initially colliding users.

    Raises :class:`TreeDepthError` if a collision node at depth ``max_depth``
    would have to be split again.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if max_depth < 1:
        raise ValueError(f"max_depth must be >= 1, got {max_depth}")
    occ, first, failed_at = _grow(rng, n, policy.cumulative, policy.d, max_depth)
    if failed_at >= 0:
        raise TreeDepthError(int(failed_at), max_depth)
    return SplitTree(policy.d, occ, first)


_TOKEN = re.compile(r"\s*(\d+|[(),])")


def parse_tree(text: str, d: int | None = None) -> SplitTree:
    """Inverse of :meth:`SplitTree.dump`.

    ``d`` is inferred from the first child list when not given.  Structural
    invariants are checked: leaves hold at most one user, collision nodes
    have exactly ``d`` children whose occupancies add up to the parent's.
    """
    pos = 0
    tokens = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TreeFormatError(f"unexpected character at {pos} in {text!r}")
        tokens.append(m.group(1))
        pos = m.end()

    k = 0

    def node():
        nonlocal k
        if k >= len(tokens) or not tokens[k].isdigit():
            raise TreeFormatError(f"expected an occupancy in {text!r}")
        occ = int(tokens[k])
        k += 1
        kids = []
        if k < len(tokens) and tokens[k] == "(":
            k += 1
            kids.append(node())
            while k < len(tokens) and tokens[k] == ",":
                k += 1
                kids.append(node())
            if k >= len(tokens) or tokens[k] != ")":
                raise TreeFormatError(f"unbalanced parentheses in {text!r}")
            k += 1
        return occ, kids

    root = node()
    if k != len(tokens):
        raise TreeFormatError(f"trailing input in {text!r}")
    if d is None:
        d = _infer_d(root)

    occ_list = [root[0]]
    first_list = [-1]
    stack = [(0, root)]
    while stack:
        i, (occ, kids) = stack.pop()
        if occ < 2:
            if kids:
                raise TreeFormatError(f"node with occupancy {occ} cannot have children")
            continue
        if len(kids) != d:
            raise TreeFormatError(f"collision node {occ} needs {d} children, got {len(kids)}")
        if sum(c[0] for c in kids) != occ:
            raise TreeFormatError(f"children of {occ} hold {sum(c[0] for c in kids)} users")
        base = len(occ_list)
        first_list[i] = base
        for c in kids:
            occ_list.append(c[0])
            first_list.append(-1)
        for j in range(d - 1, -1, -1):
            stack.append((base + j, kids[j]))
    return SplitTree(d, np.array(occ_list, np.int64), np.array(first_list, np.int64))


def _infer_d(root) -> int:
    stack = [root]
    while stack:
        occ, kids = stack.pop()
        if kids:
            return len(kids)
    # a single leaf: any d is consistent
    return 2


def check_tree(tree: SplitTree) -> None:
    """Raise ``AssertionError`` if the structural invariants are broken."""
    occ, first, d = tree.occupancy, tree.first_child, tree.d
    for i in range(tree.size):
        if occ[i] < 2:
            assert first[i] == -1, f"node {i} with occupancy {occ[i]} has children"
        else:
            f = first[i]
            assert f > i, f"children of node {i} are not allocated after it"
            assert occ[f : f + d].sum() == occ[i], f"occupancy not conserved at node {i}"
