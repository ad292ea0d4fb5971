"""Cooke's Classical Model for three-quantile elicitations.

Experts are scored on calibration questions with known realizations:

* calibration ``C`` is the chi-square (3 d.o.f.) survival probability of
  ``2 N KL(s || p)``, where ``s`` are the observed inter-quantile hit rates
  and ``p = (0.05, 0.45, 0.45, 0.05)``;
* information ``I`` is the mean relative entropy of the expert's
  piecewise-uniform density against the uniform background on each item's
  intrinsic range.

Global weights are proportional to ``C * I`` for experts with ``C >= alpha``.
The decision maker (DM) is the weighted mixture of the experts' densities,
and the optimized DM picks the cutoff ``alpha`` that maximizes the DM's own
``C * I`` when scored as a virtual expert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .domain import BIN_PROBABILITIES, ElicitationStudy, QuantileTriple
from .errors import (
    AllExpertsExcluded,
    DimensionMismatch,
    InvalidParameter,
    NegativeArgument,
    NoCalibrationQuestions,
)
from .marginal import DEFAULT_OVERSHOOT, Marginal, marginal_on_range

#: Relative floor on bin widths used by the information score.
WIDTH_FLOOR = 1e-9
_ALPHA_MAX = math.nextafter(1.0, 0.0)


# -- calibration -------------------------------------------------------------


def chi2_sf_df3(x: float) -> float:
    """Survival function of the chi-square distribution with 3 degrees of freedom.

    Uses the closed form ``2 (1 - Phi(sqrt(x))) + sqrt(2x/pi) exp(-x/2)``,
    written with ``erfc`` so the upper tail keeps full relative precision.
    """
    x = float(x)
    if not x >= 0:
        raise NegativeArgument(x)
    if x == 0.0:
        return 1.0
    return math.erfc(math.sqrt(x / 2.0)) + math.sqrt(2.0 * x / math.pi) * math.exp(-x / 2.0)


def empirical_bins(triples: Sequence[QuantileTriple], realizations: Sequence[float]) -> np.ndarray:
    """Fraction of realizations in each inter-quantile bin.

    A realization equal to a quantile is counted in the lower bin.
    """
    if len(triples) != len(realizations):
        raise DimensionMismatch(len(triples), len(realizations))
    if not triples:
        raise NoCalibrationQuestions()
    counts = np.zeros(4)
    for t, r in zip(triples, realizations):
        if r <= t.q05:
            counts[0] += 1
        elif r <= t.q50:
            counts[1] += 1
        elif r <= t.q95:
            counts[2] += 1
        else:
            counts[3] += 1
    return counts / len(triples)


def relative_entropy(s: Sequence[float], p: Sequence[float] = BIN_PROBABILITIES) -> float:
    """KL(s || p) with the convention 0 ln 0 = 0."""
    total = 0.0
    for si, pi in zip(s, p):
        if si > 0:
            total += si * math.log(si / pi)
    return max(total, 0.0)


def calibration_score(s: Sequence[float], n: int) -> float:
    s = np.asarray(s, dtype=float)
    if s.shape != (4,) or (s < 0).any() or abs(s.sum() - 1.0) > 1e-9:
        raise InvalidParameter("s", tuple(s), "must be a probability vector over 4 bins")
    if n < 1:
        raise InvalidParameter("n", n, "must be >= 1")
    return chi2_sf_df3(2.0 * n * relative_entropy(s))


# -- information -------------------------------------------------------------


def intrinsic_range(
    triples: Sequence[QuantileTriple],
    realization: float | None = None,
    k: float = DEFAULT_OVERSHOOT,
) -> tuple[float, float]:
    """Range of all quantiles (and the realization) widened by ``k`` per side."""
    if not triples:
        raise InvalidParameter("triples", (), "need at least one assessment")
    values = [v for t in triples for v in t.as_tuple()]
    if realization is not None:
        values.append(float(realization))
    lo, hi = min(values), max(values)
    if hi == lo:
        return lo - 1.0, hi + 1.0
    return lo - k * (hi - lo), hi + k * (hi - lo)


def item_information(triple: QuantileTriple, lower: float, upper: float) -> float:
    """Relative entropy of one assessment against the uniform on ``[lower, upper]``."""
    span = upper - lower
    knots = (lower, *triple.as_tuple(), upper)
    total = 0.0
    for p, a, b in zip(BIN_PROBABILITIES, knots, knots[1:]):
        width = max(b - a, WIDTH_FLOOR * span)
        total += p * math.log(p * span / width)
    return total


def information_score(
    triples: Sequence[QuantileTriple], ranges: Sequence[tuple[float, float]]
) -> float:
    """Mean item information over the given assessments and their ranges."""
    if len(triples) != len(ranges):
        raise DimensionMismatch(len(ranges), len(triples))
    if not triples:
        raise InvalidParameter("triples", (), "need at least one assessment")
    return math.fsum(item_information(t, lo, hi) for t, (lo, hi) in zip(triples, ranges)) / len(
        triples
    )


def study_ranges(study: ElicitationStudy, k: float = DEFAULT_OVERSHOOT) -> dict[str, tuple[float, float]]:
    """Intrinsic range of every question, over every expert who answered it."""
    out = {}
    for q in study.questions:
        triples = [study.assessments[(e, q.id)] for e in study.experts if (e, q.id) in study.assessments]
        if triples:
            out[q.id] = intrinsic_range(triples, q.realization, k)
    return out


# -- expert scores and weights -----------------------------------------------


@dataclass(frozen=True)
class ExpertScore:
    expert: str
    calibration: float
    information: float
    information_all: float | None = None
    bins: tuple[float, ...] | None = None
    n_items: int = 0

    @property
    def combined(self) -> float:
        return self.calibration * self.information


def _score_assessor(triples, realizations, ranges, all_triples=None, all_ranges=None, name=""):
    s = empirical_bins(triples, realizations)
    cal = calibration_score(s, len(triples))
    info = information_score(triples, ranges)
    info_all = information_score(all_triples, all_ranges) if all_triples else info
    return ExpertScore(name, cal, info, info_all, tuple(float(v) for v in s), len(triples))


def score_experts(study: ElicitationStudy, k: float = DEFAULT_OVERSHOOT, ranges=None) -> list[ExpertScore]:
    """Calibration and information of every expert.

    ``information`` is taken over the calibration questions (the quantity
    that enters the weights); ``information_all`` covers every answered
    question.
    """
    ranges = study_ranges(study, k) if ranges is None else ranges
    cal_qs = study.calibration_questions
    if not cal_qs:
        raise NoCalibrationQuestions()
    scores = []
    for e in study.experts:
        triples = [study.assessment(e, q.id) for q in cal_qs]
        answered = [q for q in study.questions if (e, q.id) in study.assessments]
        scores.append(
            _score_assessor(
                triples,
                [q.realization for q in cal_qs],
                [ranges[q.id] for q in cal_qs],
                [study.assessments[(e, q.id)] for q in answered],
                [ranges[q.id] for q in answered],
                name=e,
            )
        )
    return scores


def global_weights(scores: Sequence[ExpertScore], alpha: float = 0.0) -> dict[str, float]:
    """Normalized weights ``C * I * 1{C >= alpha}``."""
    if not 0.0 <= alpha < 1.0:
        raise InvalidParameter("alpha", alpha, "must lie in [0, 1)")
    raw = {s.expert: (s.combined if s.calibration >= alpha else 0.0) for s in scores}
    total = math.fsum(raw.values())
    if not total > 0:
        raise AllExpertsExcluded(alpha)
    return {e: w / total for e, w in raw.items()}


def equal_weights(experts: Sequence[str]) -> dict[str, float]:
    return {e: 1.0 / len(experts) for e in experts}


# -- pooling -----------------------------------------------------------------


@dataclass(frozen=True)
class MixtureDistribution:
    """Finite mixture of piecewise-uniform expert densities on a shared range."""

    weights: tuple[float, ...]
    components: tuple[Marginal, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.components) or not self.components:
            raise DimensionMismatch(len(self.components), len(self.weights))

    @property
    def support(self) -> tuple[float, float]:
        return (
            min(c.knots[0] for c in self.components),
            max(c.knots[4] for c in self.components),
        )

    def pdf(self, x):
        return sum(w * np.asarray(c.pdf(x)) for w, c in zip(self.weights, self.components))

    def cdf(self, x):
        return sum(w * np.asarray(c.cdf(x)) for w, c in zip(self.weights, self.components))

    def cdf_left(self, x):
        return sum(w * np.asarray(c.cdf_left(x)) for w, c in zip(self.weights, self.components))

    def mean(self) -> float:
        return math.fsum(w * c.mean() for w, c in zip(self.weights, self.components))

    def total_mass(self) -> float:
        return float(self.cdf(self.support[1]))

    def quantile(self, u: float) -> float:
        """Smallest ``x`` with ``cdf(x) >= u``.

        The CDF is linear between the union of component knots, so inversion
        is exact up to rounding.
        """
        if not 0.0 <= u <= 1.0:
            raise InvalidParameter("u", u, "must lie in [0, 1]")
        pts = np.unique(np.concatenate([np.asarray(c.knots) for c in self.components]))
        right = np.asarray(self.cdf(pts), dtype=float)
        left = np.asarray(self.cdf_left(pts), dtype=float)
        if u <= 0.0:
            return float(pts[0])
        j = int(np.searchsorted(right, u, side="left"))
        j = min(j, len(pts) - 1)
        if j == 0 or u >= left[j]:
            return float(pts[j])
        return float(pts[j - 1] + (u - right[j - 1]) / (left[j] - right[j - 1]) * (pts[j] - pts[j - 1]))


@dataclass(frozen=True)
class PooledItem:
    distribution: MixtureDistribution
    quantiles: QuantileTriple
    range: tuple[float, float]


def pool_item(
    weights: Sequence[float], triples: Sequence[QuantileTriple], bounds: tuple[float, float]
) -> PooledItem:
    """Weighted mixture of the experts' densities on ``bounds`` and its 5/50/95 quantiles."""
    w = np.asarray(weights, dtype=float)
    if len(w) != len(triples):
        raise DimensionMismatch(len(triples), len(w))
    if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
        raise InvalidParameter("weights", tuple(w), "must be non-negative and sum to 1")
    lo, hi = bounds
    keep = [i for i in range(len(w)) if w[i] > 0]
    mix = MixtureDistribution(
        tuple(float(w[i]) for i in keep),
        tuple(marginal_on_range(triples[i], lo, hi) for i in keep),
    )
    q = QuantileTriple(mix.quantile(0.05), mix.quantile(0.5), mix.quantile(0.95))
    return PooledItem(mix, q, (lo, hi))


@dataclass(frozen=True)
class DecisionMaker:
    weights: Mapping[str, float]
    items: Mapping[str, PooledItem]
    ranges: Mapping[str, tuple[float, float]]
    alpha: float | None = None
    unanswered: tuple[str, ...] = ()
    score: ExpertScore | None = field(default=None, compare=False)

    def quantiles(self, qid: str) -> QuantileTriple:
        return self.items[qid].quantiles


def build_dm(
    study: ElicitationStudy,
    weights: Mapping[str, float],
    k: float = DEFAULT_OVERSHOOT,
    ranges=None,
    alpha: float | None = None,
) -> DecisionMaker:
    """Pool every question with the given expert weights and score the result.

    Experts missing a target assessment are dropped for that item and the
    remaining weights renormalized.
    """
    ranges = study_ranges(study, k) if ranges is None else ranges
    items, unanswered = {}, []
    for q in study.questions:
        present = [e for e in study.experts if (e, q.id) in study.assessments and weights.get(e, 0) > 0]
        total = math.fsum(weights[e] for e in present)
        if not present or not total > 0:
            unanswered.append(q.id)
            continue
        items[q.id] = pool_item(
            [weights[e] / total for e in present],
            [study.assessments[(e, q.id)] for e in present],
            ranges[q.id],
        )
    dm = DecisionMaker(dict(weights), items, ranges, alpha, tuple(unanswered))
    cal_qs = [q for q in study.calibration_questions if q.id in items]
    if len(cal_qs) == len(study.calibration_questions):
        answered = [q for q in study.questions if q.id in items]
        score = _score_assessor(
            [items[q.id].quantiles for q in cal_qs],
            [q.realization for q in cal_qs],
            [ranges[q.id] for q in cal_qs],
            [items[q.id].quantiles for q in answered],
            [ranges[q.id] for q in answered],
            name="DM",
        )
        dm = DecisionMaker(dm.weights, items, ranges, alpha, dm.unanswered, score)
    return dm


def global_weight_dm(study: ElicitationStudy, alpha: float = 0.0, k: float = DEFAULT_OVERSHOOT) -> DecisionMaker:
    ranges = study_ranges(study, k)
    weights = global_weights(score_experts(study, k, ranges), alpha)
    return build_dm(study, weights, k, ranges, alpha)


class OptimizedDM(NamedTuple):
    alpha: float
    dm: DecisionMaker
    score: ExpertScore
    trials: tuple[tuple[float, float], ...]


def optimize_alpha(study: ElicitationStudy, k: float = DEFAULT_OVERSHOOT) -> OptimizedDM:
    """Choose the calibration cutoff maximizing the DM's combined score.

    Candidates are 0 and every expert's calibration score; ties go to the
    smaller (more inclusive) cutoff. ``trials`` lists ``(alpha, C*I)`` for
    every candidate evaluated.
    """
    ranges = study_ranges(study, k)
    scores = score_experts(study, k, ranges)
    # a cutoff just below 1 selects exactly the C == 1 experts
    candidates = sorted({0.0} | {min(s.calibration, _ALPHA_MAX) for s in scores})
    best, trials = None, []
    for a in candidates:
        try:
            weights = global_weights(scores, a)
        except AllExpertsExcluded:
            continue
        dm = build_dm(study, weights, k, ranges, a)
        trials.append((a, dm.score.combined))
        if best is None or dm.score.combined > best.score.combined:
            best = dm
    if best is None:
        raise AllExpertsExcluded(0.0)
    return OptimizedDM(best.alpha, best, best.score, tuple(trials))
