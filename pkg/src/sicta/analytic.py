"""Exact conditional expectations of the CRI length.

``L_n`` is built up in ``n``: for every composition ``I`` of ``n`` into ``d``
groups, weighted by its multinomial probability, the subtrees are
independent given the split, so the conditional mean is

* standard:  ``1 + sum_j L[I_j]``
* yg:        ``sum_j L[I_j]``
* corrected: ``1 + sum_{j <= d_min(I)} L[I_j] - [d_min(I) == d]``

Compositions that put all ``n`` users into one group refer back to ``L_n``
itself.  Collecting their probability mass ``c`` and the remaining constant
``b`` gives ``L_n = b / (1 - c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln, xlogy

from .evaluators import ContractError, d_min
from .policy import SplitPolicy, fair

VARIANTS = ("standard", "yg", "corrected")

#: Largest table the rational mode is meant for; the CLI enforces it.
EXACT_N_MAX = 64
DEFAULT_BUDGET = 10**7


class CompositionBudgetError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExpectedCriTable:
    variant: str
    policy: SplitPolicy
    values: tuple
    exact: bool

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


@dataclass(frozen=True)
class ThroughputCurve:
    n: np.ndarray
    throughput: np.ndarray
    mst_proxy: float


@dataclass(frozen=True)
class RelationRow:
    n: int
    lhs: object
    rhs: object
    holds: bool


@dataclass(frozen=True)
class RelationReport:
    d: int
    variant: str
    rows: tuple[RelationRow, ...]

    @property
    def holds(self) -> bool:
        return all(r.holds for r in self.rows)

    def failures(self) -> list[RelationRow]:
        return [r for r in self.rows if not r.holds]


def compositions(n: int, d: int) -> Iterator[tuple[int, ...]]:
    """All ways to put ``n`` users into ``d`` ordered groups, in colex order."""
    if d == 1:
        yield (n,)
        return
    for last in range(n + 1):
        for head in compositions(n - last, d - 1):
            yield head + (last,)


def _composition_array(n: int, d: int, cache: dict) -> np.ndarray:
    key = (n, d)
    if key in cache:
        return cache[key]
    if d == 1:
        out = np.array([[n]], dtype=np.int64)
    else:
        blocks = []
        for last in range(n + 1):
            head = _composition_array(n - last, d - 1, cache)
            blocks.append(np.hstack([head, np.full((len(head), 1), last, np.int64)]))
        out = np.vstack(blocks)
    cache[key] = out
    return out


def composition_count(n_max: int, d: int) -> int:
    """Compositions enumerated while building a table up to ``n_max``."""
    return sum(math.comb(n + d - 1, d - 1) for n in range(2, n_max + 1))


def multinomial_pmf(occ: Sequence[int], n: int, policy: SplitPolicy, exact: bool = False):
    """Probability that a split of ``n`` users lands on occupancy ``occ``.

    Returns a :class:`~fractions.Fraction` when ``exact`` is true.
    """
    occ = tuple(int(k) for k in occ)
    if len(occ) != policy.d or sum(occ) != n or min(occ) < 0:
        raise ContractError(f"occupancy {occ} is not a split of n={n} into {policy.d} groups")
    coef = math.factorial(n)
    for k in occ:
        coef //= math.factorial(k)
    if exact:
        p = Fraction(coef)
        for k, q in zip(occ, policy.exact):
            p *= q**k
        return p
    p = float(coef)
    for k, q in zip(occ, policy.probs):
        p *= q**k
    return p


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")


def _exact_step(n: int, policy: SplitPolicy, variant: str, L: list) -> Fraction:
    d = policy.d
    b = Fraction(0)
    c = Fraction(0)
    for comp in compositions(n, d):
        p = multinomial_pmf(comp, n, policy, exact=True)
        if p == 0:
            continue
        if variant == "corrected":
            used = d_min(comp, n)
            const = 1 - (used == d)
        else:
            used = d
            const = 1 if variant == "standard" else 0
        self_refs = 0
        for k in comp[:used]:
            if k == n:
                self_refs += 1
            else:
                const += L[k]
        b += p * const
        c += p * self_refs
    return b / (1 - c)


def _float_step(n: int, policy: SplitPolicy, variant: str, L: np.ndarray, cache: dict) -> float:
    d = policy.d
    comps = _composition_array(n, d, cache)
    logp = (
        gammaln(n + 1)
        - gammaln(comps + 1).sum(axis=1)
        + xlogy(comps, np.asarray(policy.probs)).sum(axis=1)
    )
    p = np.exp(logp)
    known = np.where(comps == n, 0.0, L[np.minimum(comps, n - 1)])
    self_ref = comps == n
    if variant == "corrected":
        reached = np.cumsum(comps, axis=1) >= n - 1
        last = reached.argmax(axis=1)
        mask = np.arange(d)[None, :] <= last[:, None]
        const = 1.0 + (known * mask).sum(axis=1) - (last == d - 1)
        coef = (self_ref & mask).sum(axis=1)
    else:
        const = known.sum(axis=1) + (1.0 if variant == "standard" else 0.0)
        coef = self_ref.sum(axis=1)
    b = float(p @ const)
    c = float(p @ coef)
    return b / (1.0 - c)


def expected_cri_table(
    n_max: int,
    policy: SplitPolicy,
    variant: str = "corrected",
    exact: bool = False,
    budget: int = DEFAULT_BUDGET,
) -> ExpectedCriTable:
    """Table of ``L_0 .. L_{n_max}`` for one receiver model.

    ``exact=True`` works in rationals (meant for ``n_max <= 64``); otherwise
    the per-``n`` enumeration is vectorised in double precision.  Raises
    :class:`CompositionBudgetError` if more than ``budget`` compositions
    would be enumerated.
    """
    _check_variant(variant)
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    count = composition_count(n_max, policy.d)
    if count > budget:
        raise CompositionBudgetError(
            f"n_max={n_max}, d={policy.d} needs {count} compositions (budget {budget})"
        )
    if exact:
        L: list = [Fraction(1), Fraction(1)][: n_max + 1]
        for n in range(2, n_max + 1):
            L.append(_exact_step(n, policy, variant, L))
        return ExpectedCriTable(variant, policy, tuple(L), True)

    arr = np.ones(n_max + 1)
    cache: dict = {}
    for n in range(2, n_max + 1):
        arr[n] = _float_step(n, policy, variant, arr, cache)
    return ExpectedCriTable(variant, policy, tuple(float(v) for v in arr), False)


def check_yg_relation(
    n_max: int,
    d: int,
    policy: SplitPolicy | None = None,
    variant: str = "yg",
    exact: bool = True,
    tol: float = 1e-9,
) -> RelationReport:
    """Test ``(d-1)(L'_n - 1) == d (L_n - 1)`` for ``n = 0 .. n_max``.

    ``L'`` is the standard tree algorithm, ``L`` the chosen ``variant``.  The
    identity is exact for the yg recursion; for the corrected one it breaks
    down as soon as ``d > 2``.  Float mode compares within ``tol`` relative
    to the larger side.
    """
    policy = fair(d) if policy is None else policy
    if policy.d != d:
        raise ValueError(f"policy has d={policy.d}, expected {d}")
    std = expected_cri_table(n_max, policy, "standard", exact=exact)
    other = expected_cri_table(n_max, policy, variant, exact=exact)
    rows = []
    for n in range(n_max + 1):
        lhs = (d - 1) * (std[n] - 1)
        rhs = d * (other[n] - 1)
        if exact:
            holds = lhs == rhs
        else:
            holds = abs(lhs - rhs) <= tol * max(1.0, abs(lhs), abs(rhs))
        rows.append(RelationRow(n, lhs, rhs, bool(holds)))
    return RelationReport(d, variant, tuple(rows))


def throughput_estimate(table: ExpectedCriTable) -> ThroughputCurve:
    """Finite-``n`` throughput proxy ``T_n = n / L_n``; the last entry stands in for the MST."""
    if table.n_max < 2:
        raise ValueError("throughput proxy needs a table up to at least n=2")
    n = np.arange(table.n_max + 1)
    t = n / table.as_array()
    return ThroughputCurve(n, t, float(t[-1]))


def yg_closed_form_mst(d: int) -> float:
    """Throughput ``ln(d) / (d - 1)`` claimed for fair ``d``-ary splitting."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return math.log(d) / (d - 1)
