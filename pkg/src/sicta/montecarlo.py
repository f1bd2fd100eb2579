"""Seeded Monte Carlo experiments over the CRI evaluators.

Run ``i`` of an experiment draws its tree from
``PCG64(SeedSequence(master_seed, spawn_key=(i,)))``, so each run is
reproducible on its own and the result does not depend on how runs are
spread over threads.  Every requested variant is evaluated on the same tree
(a paired design), and statistics are reduced over the run-indexed array.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.stats import norm

from . import evaluators as ev
from .analytic import yg_closed_form_mst
from .policy import SplitPolicy, biased, fair
from .tree import DEFAULT_MAX_DEPTH, SplitTree, TreeDepthError, generate

MC_VARIANTS = ("corrected", "yg", "standard", "slot_level")
GENERATOR = "numpy.random.PCG64 seeded by SeedSequence(master_seed, spawn_key=(run,))"
Z95 = float(norm.ppf(0.975))


class ExperimentError(RuntimeError):
    def __init__(self, message: str, failed_runs: Sequence[int] = ()):
        super().__init__(message)
        self.failed_runs = list(failed_runs)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    policy: SplitPolicy
    runs: int
    master_seed: int = 0
    variants: tuple[str, ...] = ("corrected", "yg", "standard")
    max_depth: int = DEFAULT_MAX_DEPTH

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        bad = [v for v in self.variants if v not in MC_VARIANTS]
        if bad or not self.variants:
            raise ValueError(f"variants must be a non-empty subset of {MC_VARIANTS}, got {self.variants}")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


@dataclass(frozen=True)
class VariantSummary:
    variant: str
    runs: int
    mean: float
    std: float
    ci95: float
    throughput_ratio_of_means: float
    throughput_mean_of_ratios: float

    @property
    def stderr(self) -> float:
        return self.std / math.sqrt(self.runs)


@dataclass(frozen=True)
class RunSummary:
    config: ExperimentConfig
    variants: dict[str, VariantSummary]
    generator: str = GENERATOR
    numpy_version: str = np.__version__
    wall_time: float = field(default=0.0, compare=False)

    def __getitem__(self, variant: str) -> VariantSummary:
        return self.variants[variant]


def run_rng(master_seed: int, run: int) -> np.random.Generator:
    """Private random stream of one run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(run,))))


def run_tree(config: ExperimentConfig, run: int) -> SplitTree:
    return generate(config.n, config.policy, run_rng(config.master_seed, run), config.max_depth)


def _evaluate(tree: SplitTree, variant: str) -> int:
    occ, first, d = tree.occupancy, tree.first_child, tree.d
    if variant == "corrected":
        return ev._corrected_kernel(occ, first, d)
    if variant == "yg":
        return ev._yg_kernel(occ, first, d)
    if variant == "standard":
        return ev._standard_kernel(occ, first, d)
    return ev._slot_level_kernel(occ, first, d)[0]


def _fill(config: ExperimentConfig, out: np.ndarray, start: int, stop: int) -> list[int]:
    failed = []
    for i in range(start, stop):
        try:
            tree = run_tree(config, i)
        except TreeDepthError:
            failed.append(i)
            continue
        for k, v in enumerate(config.variants):
            out[k, i] = _evaluate(tree, v)
    return failed


def run_lengths(config: ExperimentConfig, threads: int = 1) -> np.ndarray:
    """CRI lengths, shape ``(len(config.variants), config.runs)``.

    Raises :class:`ExperimentError` listing the runs whose tree exceeded
    ``max_depth``.
    """
    out = np.zeros((len(config.variants), config.runs), dtype=np.int64)
    threads = max(1, min(int(threads), config.runs))
    bounds = np.linspace(0, config.runs, threads + 1).astype(int)
    if threads == 1:
        failed = _fill(config, out, 0, config.runs)
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = pool.map(lambda k: _fill(config, out, bounds[k], bounds[k + 1]), range(threads))
            failed = [i for part in parts for i in part]
    if failed:
        raise ExperimentError(
            f"{len(failed)} of {config.runs} runs exceeded max_depth={config.max_depth} "
            f"(first: run {min(failed)})",
            sorted(failed),
        )
    return out


def summarize(variant: str, n: int, lengths: np.ndarray) -> VariantSummary:
    runs = len(lengths)
    values = lengths.astype(np.float64)
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if runs > 1 else 0.0
    return VariantSummary(
        variant=variant,
        runs=runs,
        mean=mean,
        std=std,
        ci95=Z95 * std / math.sqrt(runs),
        throughput_ratio_of_means=n / mean,
        throughput_mean_of_ratios=float((n / values).mean()),
    )


def run_experiment(config: ExperimentConfig, threads: int = 1) -> RunSummary:
    """Run ``config.runs`` independent collision resolutions and summarise them."""
    t0 = time.perf_counter()
    lengths = run_lengths(config, threads)
    variants = {v: summarize(v, config.n, lengths[k]) for k, v in enumerate(config.variants)}
    return RunSummary(config, variants, wall_time=time.perf_counter() - t0)


@dataclass(frozen=True)
class SweepRow:
    d: int
    policy: str
    summary: RunSummary
    yg_closed_form: float

    @property
    def throughput(self) -> float:
        return self.summary["corrected"].throughput_ratio_of_means

    @property
    def ci95(self) -> float:
        """Half-width of the 95% interval on ``throughput``, by the delta method."""
        s = self.summary["corrected"]
        return self.throughput * s.ci95 / s.mean


_POLICIES = {"fair": fair, "biased": biased}


def sweep(
    d_values: Iterable[int],
    policies: Iterable[str],
    base: ExperimentConfig,
    threads: int = 1,
) -> list[SweepRow]:
    """Simulated throughput for every ``(d, policy)`` pair.

    ``base`` supplies ``n``, ``runs``, the seed and ``max_depth``; its policy
    is replaced per row and only the corrected variant is simulated.
    """
    rows = []
    policies = list(policies)
    for d in d_values:
        for name in policies:
            if name not in _POLICIES:
                raise ValueError(f"sweep policies must be fair or biased, got {name!r}")
            config = replace(base, policy=_POLICIES[name](d), variants=("corrected",))
            rows.append(SweepRow(d, name, run_experiment(config, threads), yg_closed_form_mst(d)))
    return rows


BREAKDOWN_COLUMNS = (
    "n", "d", "policy", "corrected", "yg", "standard", "slots_idle",
    "slots_collision", "slots_singleton", "sic_recoveries", "derived_signals",
)


def breakdown_rows(config: ExperimentConfig) -> Iterator[dict]:
    """One row per run with every evaluator applied to that run's tree."""
    for i in range(config.runs):
        tree = run_tree(config, i)
        b = ev.slot_level_cri(tree)
        yield {
            "n": config.n,
            "d": tree.d,
            "policy": config.policy.label(),
            "corrected": ev.corrected_length(tree),
            "yg": ev.yg_length(tree),
            "standard": ev.standard_ta_length(tree),
            "slots_idle": b.idle_slots,
            "slots_collision": b.collision_slots,
            "slots_singleton": b.singleton_slots,
            "sic_recoveries": b.sic_recoveries,
            "derived_signals": b.derived_signals,
        }
