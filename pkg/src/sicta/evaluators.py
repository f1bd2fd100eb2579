"""CRI length of a realized splitting tree under different receiver models.

* :func:`slot_level_cri` replays the receiver slot by slot with successive
  interference cancellation and early stopping.  It is the ground truth.
* :func:`corrected_length` is the early-stop recursion, which visits only
  the leading ``d_min`` groups of every collision.
* :func:`yg_length` is the recursion that visits every group and never pays
  for the collision slot itself.  It agrees with the ground truth only for
  binary splitting.
* :func:`standard_ta_length` is the classical tree algorithm without SIC.

All of them are pure functions of the tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .tree import SplitTree


class ContractError(ValueError):
    pass


@dataclass(frozen=True)
class CriBreakdown:
    total_slots: int
    collision_slots: int
    singleton_slots: int
    idle_slots: int
    derived_signals: int
    sic_recoveries: int


def d_min(occ: Sequence[int], n: int) -> int:
    """Number of leading groups the receiver must resolve for a collision of ``n``.

    Smallest ``o`` such that ``occ[0] + ... + occ[o-1] >= n - 1``.  The last
    user is then recovered from the parent signal, so later groups are not
    visited.
    """
    if n < 2:
        raise ContractError(f"d_min is defined for collisions (n >= 2), got n={n}")
    if sum(occ) != n:
        raise ContractError(f"occupancy {tuple(occ)} does not add up to n={n}")
    cum = 0
    for o, k in enumerate(occ, start=1):
        cum += k
        if cum >= n - 1:
            return o
    raise AssertionError("unreachable: full occupancy equals n")


@njit(nogil=True, cache=True)
def _yg_kernel(occ, first, d):
    val = np.empty(len(occ), np.int64)
    for i in range(len(occ) - 1, -1, -1):
        f = first[i]
        if f < 0:
            val[i] = 1
        else:
            s = 0
            for j in range(d):
                s += val[f + j]
            val[i] = s
    return val[0]


@njit(nogil=True, cache=True)
def _standard_kernel(occ, first, d):
    val = np.empty(len(occ), np.int64)
    for i in range(len(occ) - 1, -1, -1):
        f = first[i]
        if f < 0:
            val[i] = 1
        else:
            s = 1
            for j in range(d):
                s += val[f + j]
            val[i] = s
    return val[0]


@njit(nogil=True, cache=True)
def _corrected_kernel(occ, first, d):
    val = np.empty(len(occ), np.int64)
    for i in range(len(occ) - 1, -1, -1):
        f = first[i]
        if f < 0:
            val[i] = 1
            continue
        need = occ[i] - 1
        cum = 0
        s = 1
        used = d
        for j in range(d):
            cum += occ[f + j]
            s += val[f + j]
            if cum >= need:
                used = j + 1
                break
        if used == d:
            # last group's signal is the parent minus its decoded siblings
            s -= 1
        val[i] = s
    return val[0]


@njit(nogil=True, cache=True)
def _decode(u, via_sic, decoded, avail, resid, parent, leaf_of, lo, occ):
    """Mark user ``u`` decoded and run the SIC cascade; return SIC decodes."""
    sic = 0
    users = [u]
    flags = [via_sic]
    while len(users) > 0:
        w = users.pop()
        s = flags.pop()
        if decoded[w]:
            continue
        decoded[w] = True
        if s:
            sic += 1
        v = leaf_of[w]
        while v >= 0:
            if avail[v]:
                resid[v] -= 1
                if resid[v] == 1:
                    for x in range(lo[v], lo[v] + occ[v]):
                        if not decoded[x]:
                            users.append(x)
                            flags.append(True)
                            break
            v = parent[v]
    return sic


@njit(nogil=True, cache=True)
def _slot_level_kernel(occ, first, d):
    size = len(occ)
    n = occ[0]
    parent = np.full(size, -1, np.int64)
    group = np.zeros(size, np.int64)
    lo = np.zeros(size, np.int64)
    # users are numbered by pre-order leaf position, so every node owns the
    # contiguous id range [lo, lo + occ)
    for i in range(size):
        f = first[i]
        if f >= 0:
            acc = lo[i]
            for j in range(d):
                c = f + j
                parent[c] = i
                group[c] = j
                lo[c] = acc
                acc += occ[c]
    leaf_of = np.full(max(n, 1), -1, np.int64)
    for i in range(size):
        if occ[i] == 1:
            leaf_of[lo[i]] = i

    decoded = np.zeros(max(n, 1), np.bool_)
    avail = np.zeros(size, np.bool_)
    resid = np.zeros(size, np.int64)
    total = collision = singleton = idle = derived = sic = 0

    stack = [0]
    while len(stack) > 0:
        if avail[0] and resid[0] == 0:
            break
        i = stack.pop()
        derivable = False
        if i != 0:
            p = parent[i]
            if resid[p] == 0:
                # parent fully decoded: this group's content is known
                continue
            if group[i] == d - 1:
                derivable = True
                f = first[p]
                for j in range(d - 1):
                    if not avail[f + j] or resid[f + j] != 0:
                        derivable = False
                        break
        r = 0
        last = -1
        for x in range(lo[i], lo[i] + occ[i]):
            if not decoded[x]:
                r += 1
                last = x
        avail[i] = True
        resid[i] = r
        if derivable:
            derived += 1
        else:
            total += 1
            if occ[i] == 0:
                idle += 1
            elif occ[i] == 1:
                singleton += 1
            else:
                collision += 1
        if r == 1:
            clean = occ[i] == 1 and not derivable
            resid[i] = 1
            sic += _decode(last, not clean, decoded, avail, resid, parent, leaf_of, lo, occ)
        elif r >= 2:
            f = first[i]
            for j in range(d - 1, -1, -1):
                stack.append(f + j)
    return total, collision, singleton, idle, derived, sic


def corrected_length(tree: SplitTree) -> int:
    """CRI length with SIC and early stopping, by the ``d_min`` recursion."""
    return int(_corrected_kernel(tree.occupancy, tree.first_child, tree.d))


def yg_length(tree: SplitTree) -> int:
    """CRI length under the sum-over-all-groups recursion (``l_n = sum_j l_{I_j}``)."""
    return int(_yg_kernel(tree.occupancy, tree.first_child, tree.d))


def standard_ta_length(tree: SplitTree) -> int:
    """CRI length of the classical tree algorithm: every node costs a slot."""
    return int(_standard_kernel(tree.occupancy, tree.first_child, tree.d))


def slot_level_cri(tree: SplitTree) -> CriBreakdown:
    """Simulate the SIC receiver slot by slot in depth-first group order.

    The receiver keeps every signal it has obtained and the set of decoded
    users.  A scheduled group is skipped when its parent is already fully
    decoded.  The last group is obtained for free, by cancelling its decoded
    siblings from the parent signal, once all earlier siblings are resolved.
    Any other group costs a slot.  Whenever a stored signal is left with one
    undecoded packet, that packet is decoded, which may cascade further.  The
    interval ends as soon as every user of the root collision is decoded.
    """
    counts = _slot_level_kernel(tree.occupancy, tree.first_child, tree.d)
    return CriBreakdown(*(int(c) for c in counts))
