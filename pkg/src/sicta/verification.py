"""Invariant suites run by ``sicta verify``.

Evaluators are looked up on :mod:`sicta.evaluators` at call time, so a test
can swap one for a mutant and check that the suites notice.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from fractions import Fraction

from . import analytic
from . import evaluators as ev
from .montecarlo import run_rng
from .policy import biased, fair
from .tree import SplitTree, generate, parse_tree

MAX_REPORTED = 5


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    violations: list[str] = field(default_factory=list)
    violation_count: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def fail(self, message: str) -> None:
        self.violation_count += 1
        if len(self.violations) < MAX_REPORTED:
            self.violations.append(message)


@dataclass
class VerificationReport:
    trees: int
    seed: int
    suites: list[SuiteResult]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def to_dict(self) -> dict:
        return {
            "trees": self.trees,
            "seed": self.seed,
            "passed": self.passed,
            "suites": [dict(asdict(s), passed=s.passed) for s in self.suites],
        }

    def lines(self) -> list[str]:
        out = []
        for s in self.suites:
            status = "PASS" if s.passed else "FAIL"
            out.append(f"{status} {s.name}: {s.checked} checked, {s.violation_count} violations")
            out.extend(f"    {v}" for v in s.violations)
        out.append("ALL SUITES PASS" if self.passed else "VERIFICATION FAILED")
        return out


def random_tree(seed: int, k: int) -> tuple[SplitTree, str]:
    """Tree ``k`` of the verification stream and a label that re-derives it."""
    rng = run_rng(seed, k)
    d = 2 + k % 4
    policy = fair(d) if (k // 4) % 2 == 0 else biased(d)
    n = int(rng.integers(2, 51))
    tree = generate(n, policy, rng)
    return tree, f"tree #{k} (seed={seed}, d={d}, policy={policy.name}, n={n}): {tree.dump()}"


def _counterexample_vectors() -> SuiteResult:
    res = SuiteResult("counterexample_vectors")
    cases = [("2(1,1,0)", 2, 3), ("2(0,1,1)", 3, 3)]
    for text, corrected, yg in cases:
        tree = parse_tree(text, 3)
        got = (ev.corrected_length(tree), ev.slot_level_cri(tree).total_slots, ev.yg_length(tree))
        res.checked += 1
        if got != (corrected, corrected, yg):
            res.fail(f"{text}: corrected/slot/yg = {got}, expected {(corrected, corrected, yg)}")
    return res


def _tree_suites(trees: int, seed: int) -> list[SuiteResult]:
    truth = SuiteResult("ground_truth_equivalence")
    binary = SuiteResult("binary_equivalence")
    dom = SuiteResult("dominance")
    acct = SuiteResult("no_sic_accounting")
    bounds = SuiteResult("bounds")
    purity = SuiteResult("purity")
    for k in range(trees):
        tree, label = random_tree(seed, k)
        c = ev.corrected_length(tree)
        y = ev.yg_length(tree)
        s = ev.standard_ta_length(tree)
        b = ev.slot_level_cri(tree)

        truth.checked += 1
        if c != b.total_slots:
            truth.fail(f"corrected={c} slot_level={b.total_slots} on {label}")
        if tree.d == 2:
            binary.checked += 1
            if c != y:
                binary.fail(f"corrected={c} yg={y} on {label}")
        dom.checked += 1
        if c > y:
            dom.fail(f"corrected={c} > yg={y} on {label}")
        acct.checked += 1
        if s - y != tree.internal_count():
            acct.fail(f"standard-yg={s - y}, internal nodes={tree.internal_count()} on {label}")
        bounds.checked += 1
        slots = b.collision_slots + b.singleton_slots + b.idle_slots
        if c < 1 or (tree.n >= 2 and c < 2) or slots != b.total_slots:
            bounds.fail(f"corrected={c}, breakdown={b} on {label}")
        if k % 100 == 0:
            purity.checked += 1
            again = (ev.corrected_length(tree), ev.yg_length(tree),
                     ev.standard_ta_length(tree), ev.slot_level_cri(tree))
            if again != (c, y, s, b):
                purity.fail(f"repeated evaluation changed on {label}")

    # strict dominance has to show up at d = 3
    strict = 0
    policy = fair(3)
    for k in range(10_000):
        tree = generate(10, policy, run_rng(seed + 1, k))
        if ev.corrected_length(tree) < ev.yg_length(tree):
            strict += 1
    dom.notes["strict_cases_n10_d3"] = strict
    if strict == 0:
        dom.fail("no tree with corrected < yg among 10000 trees at n=10, d=3")
    return [truth, binary, dom, acct, bounds, purity]


def _analytic_suites() -> list[SuiteResult]:
    hand = SuiteResult("exact_hand_values")
    expected = [
        (2, "corrected", Fraction(3)),
        (3, "corrected", Fraction(19, 6)),
        (3, "yg", Fraction(4)),
        (3, "standard", Fraction(11, 2)),
    ]
    for d, variant, value in expected:
        got = analytic.expected_cri_table(2, fair(d), variant, exact=True)[2]
        hand.checked += 1
        if got != value:
            hand.fail(f"d={d} {variant}: L_2={got}, expected {value}")

    rel = SuiteResult("yg_relation")
    for d in (2, 3, 4):
        report = analytic.check_yg_relation(30, d, variant="yg", exact=True)
        rel.checked += len(report.rows)
        for row in report.failures():
            rel.fail(f"d={d} n={row.n}: {row.lhs} != {row.rhs}")
    broken = analytic.check_yg_relation(2, 3, variant="corrected", exact=True).rows[2]
    rel.checked += 1
    if broken.holds or (broken.lhs, broken.rhs) != (9, Fraction(13, 2)):
        rel.fail(f"corrected d=3 n=2 should give 9 vs 13/2, got {broken.lhs} vs {broken.rhs}")

    order = SuiteResult("dp_ordering")
    for d in (2, 3, 4):
        tables = {v: analytic.expected_cri_table(20, fair(d), v, exact=True) for v in analytic.VARIANTS}
        for n in range(21):
            order.checked += 1
            c, y, s = tables["corrected"][n], tables["yg"][n], tables["standard"][n]
            if not c <= y <= s:
                order.fail(f"d={d} n={n}: corrected={c}, yg={y}, standard={s}")
            if d == 2 and c != y:
                order.fail(f"d=2 n={n}: corrected table {c} differs from yg {y}")
    return [hand, rel, order]


def run_verification(trees: int = 100_000, seed: int = 0) -> VerificationReport:
    if trees < 1:
        raise ValueError("trees must be >= 1")
    suites = [_counterexample_vectors()] + _tree_suites(trees, seed) + _analytic_suites()
    return VerificationReport(trees, seed, suites)
