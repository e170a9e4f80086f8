"""Duty-cycle balancing across hardware generations.

Newer generations tend to run at higher utilization, and higher duty
cycles mean better energy per FLOP, so raw cross-generation comparisons
conflate hardware gains with usage patterns. This module removes that
confounding by inverse-propensity weighting over duty-cycle levels: group
observations into equal-width duty buckets, score each observation by its
generation's share of the bucket, and weight it by the inverse share.

Scores and weights are exact rationals (counts over counts), which makes
the reweighted per-bucket mass identities hold exactly, not just within
float tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ComputationError


@dataclass(frozen=True)
class Observation:
    """One machine-interval: which generation, how busy, and its metrics."""

    generation: str
    duty_cycle: float
    metrics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.duty_cycle <= 1.0:
            raise ValueError(f"duty_cycle {self.duty_cycle} outside [0, 1]")
        for name, value in self.metrics.items():
            if not math.isfinite(value):
                raise ValueError(f"metric {name!r} is not finite")


@dataclass(frozen=True)
class BucketScheme:
    """Equal-width, right-closed duty-cycle levels covering [0, 1].

    The first bucket additionally includes 0 itself: idle machines still
    burn power and must stay in the analysis.
    """

    buckets: int = 10

    def __post_init__(self) -> None:
        if self.buckets < 1:
            raise ValueError("bucket count must be >= 1")

    @property
    def width(self) -> float:
        return 1.0 / self.buckets

    def bucket_of(self, duty_cycle: float) -> int:
        if not 0.0 <= duty_cycle <= 1.0:
            raise ValueError(f"duty_cycle {duty_cycle} outside [0, 1]")
        return max(0, math.ceil(duty_cycle * self.buckets) - 1)

    def boundaries(self) -> tuple[float, ...]:
        return tuple(i / self.buckets for i in range(self.buckets + 1))


@dataclass(frozen=True)
class PropensityScores:
    """Per (bucket, generation) share of the bucket's observations."""

    scheme: BucketScheme
    bucket_totals: dict[int, int]
    counts: dict[tuple[int, str], int]

    def score(self, bucket: int, generation: str) -> Fraction:
        count = self.counts.get((bucket, generation), 0)
        if count == 0:
            raise ComputationError(
                f"generation {generation!r} has no observations in bucket {bucket}"
            )
        return Fraction(count, self.bucket_totals[bucket])

    def generations(self) -> tuple[str, ...]:
        return tuple(sorted({gen for (_, gen) in self.counts}))

    def populated_buckets(self) -> tuple[int, ...]:
        return tuple(sorted(self.bucket_totals))

    def missing_pairs(self) -> tuple[tuple[int, str], ...]:
        """(bucket, generation) pairs where a populated bucket lacks a generation."""
        gens = self.generations()
        return tuple(
            (bucket, gen)
            for bucket in self.populated_buckets()
            for gen in gens
            if (bucket, gen) not in self.counts
        )


@dataclass(frozen=True)
class GenerationMetrics:
    generation: str
    observations: int
    weighted: dict[str, float]
    ratios: dict[str, float | None]  # vs the baseline generation
    no_overlap: bool = False


@dataclass(frozen=True)
class BalancedComparison:
    baseline: str
    scheme: BucketScheme
    per_generation: dict[str, GenerationMetrics]
    warnings: tuple[str, ...] = ()


def propensity_scores(cohort: list[Observation], scheme: BucketScheme) -> PropensityScores:
    """Count bucket shares per generation.

    Within each populated bucket the shares over generations sum to one;
    empty buckets simply carry no scores.
    """
    if not cohort:
        raise ComputationError("empty cohort")
    bucket_totals: dict[int, int] = {}
    counts: dict[tuple[int, str], int] = {}
    for obs in cohort:
        b = scheme.bucket_of(obs.duty_cycle)
        bucket_totals[b] = bucket_totals.get(b, 0) + 1
        key = (b, obs.generation)
        counts[key] = counts.get(key, 0) + 1
    return PropensityScores(scheme=scheme, bucket_totals=bucket_totals, counts=counts)


def weights(cohort: list[Observation], scores: PropensityScores) -> list[Fraction]:
    """Inverse-propensity weight for each observation, in cohort order.

    An observation's own presence guarantees its (bucket, generation)
    count is positive, so every weight is finite and strictly positive.
    """
    scheme = scores.scheme
    return [
        1 / scores.score(scheme.bucket_of(obs.duty_cycle), obs.generation) for obs in cohort
    ]


def weighted_average(values: list[float], obs_weights: list[Fraction | float]) -> float:
    """Plain weighted mean: sum(w*v) / sum(w)."""
    if len(values) != len(obs_weights):
        raise ValueError("values and weights differ in length")
    if not values:
        raise ComputationError("empty selection")
    total_weight = math.fsum(float(w) for w in obs_weights)
    if total_weight <= 0:
        raise ComputationError("weights sum to zero")
    return math.fsum(float(w) * v for w, v in zip(obs_weights, values)) / total_weight


# Metric keys consumed from Observation.metrics.
METRIC_POWER_W = "power_w"
METRIC_FLOPS_PER_S = "flops_per_s"

_JOULES_PER_KWH = 3.6e6


def _weighted_metrics(
    observations: list[Observation],
    obs_weights: list[Fraction],
    factor_g_per_kwh: float,
    pue: float,
) -> dict[str, float]:
    duty = weighted_average([o.duty_cycle for o in observations], obs_weights)
    power = weighted_average([o.metrics[METRIC_POWER_W] for o in observations], obs_weights)
    flops_rate = weighted_average(
        [o.metrics[METRIC_FLOPS_PER_S] for o in observations], obs_weights
    )
    out = {
        "duty_cycle": duty,
        "power_w": power,
        "flops_per_s": flops_rate,
    }
    if flops_rate > 0:
        energy_per_ef = power / flops_rate * 1e18 / _JOULES_PER_KWH * pue
        out["energy_kwh_per_exaflop"] = energy_per_ef
        out["carbon_g_per_exaflop"] = energy_per_ef * factor_g_per_kwh
    return out


def balanced_comparison(
    cohort: list[Observation],
    scheme: BucketScheme,
    baseline: str,
    factor_g_per_kwh: float = 0.0,
    pue: float = 1.0,
) -> BalancedComparison:
    """Weighted per-generation metrics plus ratios against a baseline.

    Generations sharing no populated bucket with the baseline violate
    positivity; they are flagged "no overlap" and their ratios withheld
    rather than extrapolated. Buckets missing a generation are reported as
    warnings.
    """
    scores = propensity_scores(cohort, scheme)
    generations = scores.generations()
    if len(generations) < 2:
        raise ComputationError("balanced comparison needs at least two generations")
    if baseline not in generations:
        raise ComputationError(f"baseline generation {baseline!r} not present in cohort")

    warnings = [
        f"bucket {bucket} has no {gen!r} observations (positivity violation)"
        for bucket, gen in scores.missing_pairs()
    ]

    by_gen: dict[str, list[Observation]] = {g: [] for g in generations}
    for obs in cohort:
        by_gen[obs.generation].append(obs)

    buckets_of = {
        gen: {scores.scheme.bucket_of(o.duty_cycle) for o in group}
        for gen, group in by_gen.items()
    }

    weighted: dict[str, dict[str, float]] = {}
    for gen, group in by_gen.items():
        w = weights(group, scores)
        weighted[gen] = _weighted_metrics(group, w, factor_g_per_kwh, pue)

    base_metrics = weighted[baseline]
    per_generation: dict[str, GenerationMetrics] = {}
    for gen in generations:
        overlap = gen == baseline or bool(buckets_of[gen] & buckets_of[baseline])
        if not overlap:
            warnings.append(f"generation {gen!r} shares no duty-cycle bucket with {baseline!r}: no overlap")
        ratios: dict[str, float | None] = {}
        for key, value in weighted[gen].items():
            base_value = base_metrics.get(key)
            if overlap and base_value:
                ratios[key] = value / base_value
            else:
                ratios[key] = None
        per_generation[gen] = GenerationMetrics(
            generation=gen,
            observations=len(by_gen[gen]),
            weighted=weighted[gen],
            ratios=ratios,
            no_overlap=not overlap,
        )
    return BalancedComparison(
        baseline=baseline,
        scheme=scheme,
        per_generation=per_generation,
        warnings=tuple(warnings),
    )


def stratified_oracle(cohort, scheme: BucketScheme, generation: str, metric) -> float:
    """Brute-force stratified estimate: per-bucket generation means combined
    with pooled bucket masses. Equals the inverse-propensity weighted
    average wherever both are defined; kept as an independent cross-check.

    `metric` maps an Observation to the value being averaged.
    """
    scores = propensity_scores(cohort, scheme)
    per_bucket: dict[int, list[float]] = {}
    for obs in cohort:
        if obs.generation != generation:
            continue
        per_bucket.setdefault(scheme.bucket_of(obs.duty_cycle), []).append(metric(obs))
    if not per_bucket:
        raise ComputationError(f"generation {generation!r} absent from cohort")
    num = math.fsum(
        scores.bucket_totals[b] * (math.fsum(vals) / len(vals)) for b, vals in per_bucket.items()
    )
    den = math.fsum(scores.bucket_totals[b] for b in per_bucket)
    return num / den
