"""Splitting policies: how colliding users pick one of ``d`` groups."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

#: Allowed deviation of ``sum(probs)`` from one.
PROB_TOLERANCE = 1e-12


class PolicyError(ValueError):
    """A splitting policy failed validation."""


class SplittingFactorError(PolicyError):
    pass


class NegativeProbabilityError(PolicyError):
    pass


class ProbabilitySumError(PolicyError):
    pass


class DegeneratePolicyError(PolicyError):
    """Fewer than two groups can be chosen, so a collision never resolves."""


@dataclass(frozen=True)
class SplitPolicy:
    """Splitting factor ``d`` and the group-selection probabilities.

    ``probs`` are floats used for sampling; ``exact`` holds the same law as
    fractions for the rational DP.  Build instances with :func:`fair`,
    :func:`biased` or :func:`custom` rather than directly.
    """

    d: int
    probs: tuple[float, ...]
    exact: tuple[Fraction, ...]
    name: str = "custom"

    def __post_init__(self):
        _validate(self.probs, self.exact)
        if len(self.probs) != self.d:
            raise PolicyError(f"expected {self.d} probabilities, got {len(self.probs)}")

    @property
    def cumulative(self) -> np.ndarray:
        """Cumulative probabilities, with the tail pinned to exactly 1.0."""
        cum = np.cumsum(np.asarray(self.probs, dtype=np.float64))
        last = max(j for j, p in enumerate(self.probs) if p > 0)
        cum[last:] = 1.0
        return cum

    def label(self) -> str:
        if self.name == "custom":
            return "custom:" + ",".join(repr(p) for p in self.probs)
        return self.name


def _validate(probs: Sequence[float], exact: Sequence[Fraction]) -> None:
    if len(probs) < 2:
        raise SplittingFactorError(f"splitting factor d must be >= 2, got {len(probs)}")
    if any(p < 0 for p in probs):
        raise NegativeProbabilityError(f"negative group probability in {tuple(probs)}")
    total = sum(exact)
    if abs(float(total) - 1.0) > PROB_TOLERANCE:
        raise ProbabilitySumError(f"probabilities sum to {float(total)!r}, not 1")
    if sum(1 for p in probs if p > 0) < 2:
        raise DegeneratePolicyError(
            "at least two groups need positive probability, otherwise splitting never terminates"
        )


def _check_d(d: int) -> int:
    if isinstance(d, bool) or int(d) != d:
        raise SplittingFactorError(f"splitting factor must be an integer, got {d!r}")
    d = int(d)
    if d < 2:
        raise SplittingFactorError(f"splitting factor d must be >= 2, got {d}")
    return d


def fair(d: int) -> SplitPolicy:
    """Uniform splitting, each group chosen with probability ``1/d``."""
    d = _check_d(d)
    return SplitPolicy(d, (1.0 / d,) * d, (Fraction(1, d),) * d, "fair")


def biased(d: int) -> SplitPolicy:
    """Geometric splitting: ``p_j = 2**-j`` for ``j < d`` and ``p_d = 2**-(d-1)``.

    Powers of two are exact in binary floating point, so the float vector sums
    to one exactly as well.
    """
    d = _check_d(d)
    exact = tuple(Fraction(1, 2**j) for j in range(1, d)) + (Fraction(1, 2 ** (d - 1)),)
    return SplitPolicy(d, tuple(float(p) for p in exact), exact, "biased")


def _to_fraction(p) -> Fraction:
    if isinstance(p, (Rational, str)):
        return Fraction(p)
    # shortest decimal repr, so 0.7 becomes 7/10 rather than its binary expansion
    return Fraction(repr(float(p)))


def custom(probs: Sequence) -> SplitPolicy:
    """Validate an arbitrary probability vector.

    Entries may be floats, ints, :class:`~fractions.Fraction` or strings such
    as ``"1/3"``.  Zero entries are allowed.  A float vector that sums to one
    only within :data:`PROB_TOLERANCE` (``(1/3, 1/3, 1/3)``) is renormalised on
    the rational side so the exact DP sees a proper distribution.
    """
    probs = list(probs)
    if len(probs) < 2:
        raise SplittingFactorError(f"splitting factor d must be >= 2, got {len(probs)}")
    exact = [_to_fraction(p) for p in probs]
    floats = tuple(float(p) for p in exact)
    _validate(floats, exact)
    total = sum(exact)
    if total != 1:
        exact = [p / total for p in exact]
    return SplitPolicy(len(floats), floats, tuple(exact), "custom")


def from_name(name: str, d: int | None = None, probs: Sequence | None = None) -> SplitPolicy:
    """Resolve ``fair`` / ``biased`` / ``custom`` as used on the command line."""
    if name == "fair":
        return fair(d)
    if name == "biased":
        return biased(d)
    if name == "custom":
        if probs is None:
            raise PolicyError("custom policy needs an explicit probability vector")
        policy = custom(probs)
        if d is not None and policy.d != d:
            raise PolicyError(f"--d {d} does not match {policy.d} custom probabilities")
        return policy
    raise PolicyError(f"unknown policy {name!r} (expected fair, biased or custom)")


def sample_split(policy: SplitPolicy, n: int, rng: np.random.Generator) -> np.ndarray:
    """Assign ``n`` users to groups independently; return the occupancy vector.

    The counts ``I_1..I_d`` are multinomial with parameters ``(n, policy.probs)``.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    groups = np.searchsorted(policy.cumulative, rng.random(n), side="right")
    np.minimum(groups, policy.d - 1, out=groups)
    return np.bincount(groups, minlength=policy.d).astype(np.int64)
