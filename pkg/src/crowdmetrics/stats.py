"""Platform-level statistics: inequality, distributions, resampling intervals.

The Gini coefficient here is the standard (unnormalized) one,

    G = sum_i sum_j |x_i - x_j| / (2 * n**2 * mean(x)),

computed through the equivalent sorted-values form for O(n log n) cost. For n
values the coefficient lives in [0, (n-1)/n]: it only approaches 1 as the
number of projects grows, even when a single project holds everything.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .events import ProjectProfile
from .projects import BalanceValue, Unbounded
from .volunteers import PlatformClass, ProjectClass


class UndefinedGiniError(ValueError):
    """Gini is undefined: no values, or all values are zero."""


def gini(values: Iterable[float]) -> float:
    """Gini coefficient of non-negative values, in [0, (n-1)/n].

    0 means every value is equal; larger means more concentrated. Scale
    invariant: gini(c * x) == gini(x) for c > 0.

    Raises:
        UndefinedGiniError: on an empty input or all-zero values.
        ValueError: on negative values.
    """
    data = np.asarray(list(values), dtype=float)
    if data.size == 0:
        raise UndefinedGiniError("gini of an empty collection is undefined")
    if np.any(data < 0):
        raise ValueError("gini requires non-negative values")
    total = float(data.sum())
    if total == 0.0:
        raise UndefinedGiniError("gini of all-zero values is undefined")
    data = np.sort(data)
    n = data.size
    ranks = np.arange(1, n + 1, dtype=float)
    return float(2.0 * float(ranks @ data) / (n * total) - (n + 1) / n)


def recruitment_inequality(projects: Mapping[str, ProjectProfile]) -> float:
    """Gini over per-project counts of volunteers recruited from outside."""
    return gini(len(p.recruited) for p in projects.values())


def contribution_inequality(projects: Mapping[str, ProjectProfile]) -> float:
    """Gini over per-project counts of performed tasks."""
    return gini(p.task_count for p in projects.values())


@dataclass(frozen=True)
class Ecdf:
    """Right-continuous empirical CDF over the finite values of a sample.

    Unbounded balance values are excluded from the curve but counted, so a
    report can still say how many projects sit beyond the finite range on
    each side.
    """

    values: tuple[float, ...]      # distinct finite values, ascending
    fractions: tuple[float, ...]   # cumulative fraction at each value
    finite_count: int
    unbounded_negative: int = 0
    unbounded_positive: int = 0

    def fraction_at(self, x: float) -> float:
        """F(x): fraction of finite values <= x."""
        if not self.values:
            raise ValueError("ECDF has no finite points")
        idx = bisect_right(self.values, x)
        if idx == 0:
            return 0.0
        return self.fractions[idx - 1]

    def points(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self.values, self.fractions))


def ecdf(values: Iterable[BalanceValue]) -> Ecdf:
    """Build the ECDF of a sample, separating out tagged Unbounded values.

    Raises:
        ValueError: when the sample contains no finite value.
    """
    finite: list[float] = []
    negative = positive = 0
    for value in values:
        if isinstance(value, Unbounded):
            if value.sign < 0:
                negative += 1
            else:
                positive += 1
        else:
            finite.append(float(value))
    if not finite:
        raise ValueError("ECDF requires at least one finite value")
    finite.sort()
    n = len(finite)
    distinct: list[float] = []
    fractions: list[float] = []
    for i, value in enumerate(finite):
        if i + 1 < n and finite[i + 1] == value:
            continue
        distinct.append(value)
        fractions.append((i + 1) / n)
    return Ecdf(
        values=tuple(distinct),
        fractions=tuple(fractions),
        finite_count=n,
        unbounded_negative=negative,
        unbounded_positive=positive,
    )


@dataclass(frozen=True)
class BootstrapCI:
    """Percentile-bootstrap confidence interval for a sample mean."""

    estimate: float
    lower: float
    upper: float
    level: float
    resamples: int
    seed: int


def bootstrap_mean_ci(
    sample: Sequence[float] | np.ndarray,
    level: float = 0.95,
    resamples: int = 10_000,
    seed: int = 0,
) -> BootstrapCI:
    """Percentile bootstrap CI for the mean; deterministic for a fixed seed.

    Lower and upper bounds are the (1-level)/2 and 1-(1-level)/2 empirical
    quantiles of the resampled means. Resampling is chunked to bound memory,
    with a chunk policy that depends only on (n, resamples) so the random
    stream, and therefore the interval, is reproducible.
    """
    data = np.asarray(sample, dtype=float)
    if data.size == 0:
        raise ValueError("bootstrap sample must be non-empty")
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must be in (0, 1)")
    if resamples < 1:
        raise ValueError("resamples must be >= 1")
    n = data.size
    rng = np.random.default_rng(seed)
    means = np.empty(resamples, dtype=float)
    chunk = max(1, min(resamples, 8_000_000 // n))
    start = 0
    while start < resamples:
        size = min(chunk, resamples - start)
        indices = rng.integers(0, n, size=(size, n))
        means[start : start + size] = data[indices].mean(axis=1)
        start += size
    alpha = 1.0 - level
    lower, upper = np.quantile(means, [alpha / 2.0, 1.0 - alpha / 2.0])
    return BootstrapCI(
        estimate=float(data.mean()),
        lower=float(lower),
        upper=float(upper),
        level=level,
        resamples=resamples,
        seed=seed,
    )


@dataclass(frozen=True)
class ClassDistribution:
    """Volunteer counts per class in both dimensions, with exact percentages.

    Percentages are kept as exact fractions so each dimension sums to 100%
    identically; rounding happens only at presentation time.
    """

    total: int
    platform_counts: Mapping[PlatformClass, int]
    project_counts: Mapping[ProjectClass, int]

    def platform_percentages(self) -> dict[PlatformClass, Fraction]:
        return {
            cls: Fraction(100 * count, self.total)
            for cls, count in self.platform_counts.items()
        }

    def project_percentages(self) -> dict[ProjectClass, Fraction]:
        return {
            cls: Fraction(100 * count, self.total)
            for cls, count in self.project_counts.items()
        }


def class_distribution(
    classes: Iterable[tuple[PlatformClass, ProjectClass]],
) -> ClassDistribution:
    """Count volunteers per class; both dimensions partition the volunteers.

    Raises:
        ValueError: with no volunteers the distribution is undefined.
    """
    platform_counts = {cls: 0 for cls in PlatformClass}
    project_counts = {cls: 0 for cls in ProjectClass}
    total = 0
    for platform_class, project_class in classes:
        platform_counts[platform_class] += 1
        project_counts[project_class] += 1
        total += 1
    if total == 0:
        raise ValueError("class distribution requires at least one volunteer")
    return ClassDistribution(
        total=total, platform_counts=platform_counts, project_counts=project_counts
    )
