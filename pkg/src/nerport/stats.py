"""Statistical helpers: sample Pearson correlation, one-way ANOVA with exact
F-tail p-values, Cohen's kappa, and run aggregation.

The F-distribution upper tail is evaluated through the regularized
incomplete beta function, computed with a modified Lentz continued fraction,
so no external statistics dependency is needed. The implementation is
validated in the test suite against a precomputed reference grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient.

    Raises on length mismatch, fewer than two points, or a constant series
    (zero variance makes the coefficient undefined).
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch ({len(xs)} vs {len(ys)})")
    if len(xs) < 2:
        raise ValueError("need at least two points")
    mean_x = sum(xs) / len(xs)
    mean_y = sum(ys) / len(ys)
    cov = 0.0
    var_x = 0.0
    var_y = 0.0
    for x, y in zip(xs, ys):
        dx = x - mean_x
        dy = y - mean_y
        cov += dx * dy
        var_x += dx * dx
        var_y += dy * dy
    if var_x == 0.0 or var_y == 0.0:
        raise ValueError("correlation undefined for a constant series")
    return cov / math.sqrt(var_x * var_y)


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    tiny = 1e-300
    eps = 3e-15
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        numerator = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        numerator = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + numerator * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + numerator / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("shape parameters must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = math.exp(
        a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b)
    )
    # The continued fraction converges fast only below the symmetry point.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def f_distribution_sf(f_value: float, df_between: int, df_within: int) -> float:
    """Upper-tail probability P(F > f) for an F(df_between, df_within) law."""
    if f_value < 0:
        raise ValueError("F statistic must be non-negative")
    if df_between < 1 or df_within < 1:
        raise ValueError("degrees of freedom must be positive")
    if f_value == 0.0:
        return 1.0
    if math.isinf(f_value):
        return 0.0
    x = df_within / (df_within + df_between * f_value)
    return regularized_incomplete_beta(df_within / 2.0, df_between / 2.0, x)


@dataclass(frozen=True)
class AnovaResult:
    f_statistic: float
    df_between: int
    df_within: int
    p_value: float
    group_means: tuple[float, ...]


def one_way_anova(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """One-way ANOVA: F = (between-group MS) / (within-group MS).

    Requires at least two groups, each with at least two values. Degenerate
    variance follows the usual conventions: all values identical gives F = 0
    and p = 1; zero within-group variance with real between-group spread
    gives an infinite F and p = 0.
    """
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    for i, group in enumerate(groups):
        if len(group) < 2:
            raise ValueError(f"group {i} has fewer than two values")
    n_total = sum(len(g) for g in groups)
    grand_mean = sum(sum(g) for g in groups) / n_total
    group_means = tuple(sum(g) / len(g) for g in groups)
    ss_between = sum(
        len(g) * (mean - grand_mean) ** 2
        for g, mean in zip(groups, group_means)
    )
    ss_within = sum(
        (x - mean) ** 2 for g, mean in zip(groups, group_means) for x in g
    )
    df_between = len(groups) - 1
    df_within = n_total - len(groups)
    ms_between = ss_between / df_between
    ms_within = ss_within / df_within
    if ms_within == 0.0:
        if ms_between == 0.0:
            f_value, p_value = 0.0, 1.0
        else:
            f_value, p_value = math.inf, 0.0
    else:
        f_value = ms_between / ms_within
        p_value = f_distribution_sf(f_value, df_between, df_within)
    return AnovaResult(
        f_statistic=f_value,
        df_between=df_between,
        df_within=df_within,
        p_value=p_value,
        group_means=group_means,
    )


def cohens_kappa(a: Sequence[str], b: Sequence[str]) -> float:
    """Cohen's kappa between two equal-length label sequences.

    With chance agreement 1 (both raters constant on the same label space),
    kappa is 1 if observed agreement is perfect and 0 otherwise.
    """
    if len(a) != len(b):
        raise ValueError(f"length mismatch ({len(a)} vs {len(b)})")
    if not a:
        raise ValueError("need at least one item")
    n = len(a)
    observed = sum(1 for x, y in zip(a, b) if x == y) / n
    labels = sorted(set(a) | set(b))
    expected = sum(
        (sum(1 for x in a if x == label) / n)
        * (sum(1 for y in b if y == label) / n)
        for label in labels
    )
    if expected == 1.0:
        return 1.0 if observed == 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)


@dataclass(frozen=True)
class RunAggregate:
    metric: str
    values: tuple[float, ...]
    mean: float
    std: float
    runs: int


def aggregate_runs(values: Sequence[float], metric: str = "") -> RunAggregate:
    """Mean and sample standard deviation (n-1); one value has std 0."""
    if not values:
        raise ValueError("need at least one value")
    n = len(values)
    mean = sum(values) / n
    if n > 1:
        std = math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))
    else:
        std = 0.0
    return RunAggregate(
        metric=metric, values=tuple(values), mean=mean, std=std, runs=n
    )
