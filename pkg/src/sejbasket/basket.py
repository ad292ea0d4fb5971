"""Basket-level aggregation of correlated category price changes.

A scenario fits one :class:`~sejbasket.marginal.Marginal` per category,
draws correlated uniforms from the copula engine (optionally pinning one
category at a percentile), maps them through the inverse CDFs and combines
the resulting percentage changes with each basket's expenditure weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .copula import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    SampleBlock,
    build_matrix,
    condition,
    sample,
)
from .domain import BasketSpec, CategorySet, CorrelationSpec, QuantileTriple
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    MissingCategory,
    TooFewSamples,
    UnknownEntity,
)
from .marginal import DEFAULT_OVERSHOOT, Marginal, fit_marginal

PCT = "pct"
GBP = "gbp"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    quantiles: Mapping[str, QuantileTriple]
    correlations: CorrelationSpec = field(default_factory=CorrelationSpec)
    baskets: tuple[BasketSpec, ...] = ()
    categories: CategorySet = field(default_factory=CategorySet)
    overshoot: float = DEFAULT_OVERSHOOT
    n_samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    condition: tuple[str, float] | None = None
    rank_transform: bool = True
    workers: int = 1

    def __post_init__(self):
        q = {}
        for cat, t in dict(self.quantiles).items():
            q[cat] = t if isinstance(t, QuantileTriple) else QuantileTriple.of(tuple(t), question=cat)
        for cat in q:
            if cat not in self.categories:
                raise UnknownEntity("category", cat)
        for cat in self.categories:
            if cat not in q:
                raise MissingCategory(cat, f"scenario {self.name!r}")
        object.__setattr__(self, "quantiles", {c: q[c] for c in self.categories})
        object.__setattr__(self, "baskets", tuple(self.baskets))
        names = [b.name for b in self.baskets]
        if len(set(names)) != len(names):
            raise InvalidParameter("baskets", names, "basket names must be unique")
        for b in self.baskets:
            b.check_covers(self.categories)
        if not self.overshoot >= 0:
            raise InvalidParameter("overshoot", self.overshoot, "must be >= 0")
        if self.n_samples < 2:
            raise InvalidParameter("n_samples", self.n_samples, "must be >= 2")
        if self.condition is not None:
            cat, p = self.condition
            if cat not in self.categories:
                raise UnknownEntity("category", cat)
            if not 0.0 < p < 1.0:
                raise InvalidParameter("percentile", p, "must lie strictly between 0 and 1")
            object.__setattr__(self, "condition", (cat, float(p)))

    def basket(self, name: str) -> BasketSpec:
        for b in self.baskets:
            if b.name == name:
                return b
        raise UnknownEntity("basket", name)

    def with_options(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    sd: float
    median: float
    q05: float
    q95: float

    def as_dict(self) -> dict[str, float]:
        return {"mean": self.mean, "sd": self.sd, "median": self.median, "q05": self.q05, "q95": self.q95}


STATISTICS = ("mean", "sd", "median", "q05", "q95")


def summarize(samples) -> SummaryStats:
    """Mean, population sd and linearly interpolated 5/50/95 percentiles.

    Moments are computed about the first sample, so constant input gives
    exactly zero spread.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 2:
        raise TooFewSamples(int(x.size))
    shift = x[0]
    d = x - shift
    q05, med, q95 = np.percentile(x, [5, 50, 95])
    return SummaryStats(
        float(shift + d.mean()),
        float(d.std()),
        float(med),
        float(q05),
        float(q95),
    )


def basket_pct_samples(category_samples, weights) -> np.ndarray:
    """Weighted percentage change per sample (row-wise ``sum w_i pct_i``)."""
    x = np.asarray(category_samples, dtype=float)
    w = np.asarray(weights, dtype=float)
    if x.ndim != 2 or x.shape[1] != w.shape[0]:
        raise DimensionMismatch(("n", w.shape[0]), x.shape)
    if abs(w.sum() - 1.0) > 1e-9:
        raise InvalidParameter("weights", tuple(w), "must sum to 1")
    # anchored on the first column: rows with equal entries are reproduced exactly
    anchor = x[:, 0]
    return anchor + (x - anchor[:, None]) @ w


def basket_cost_samples(category_samples, basket: BasketSpec, categories: CategorySet) -> np.ndarray:
    """Weekly cost change (GBP) per sample for ``basket``."""
    pct = basket_pct_samples(category_samples, basket.weight_vector(categories))
    return pct * basket.total / 100.0


def scenario_marginals(config: ScenarioConfig) -> dict[str, Marginal]:
    return {c: fit_marginal(t, config.overshoot) for c, t in config.quantiles.items()}


def draw_uniforms(config: ScenarioConfig):
    matrix = build_matrix(config.correlations, config.categories, config.rank_transform)
    if config.condition is None:
        block = sample(matrix, config.n_samples, config.seed, config.workers)
    else:
        cat, p = config.condition
        block = condition(matrix, cat, p, config.n_samples, config.seed, config.workers)
    return matrix, block


def category_samples(marginals: Mapping[str, Marginal], block: SampleBlock) -> np.ndarray:
    """Percentage changes per category from copula uniforms via inverse CDFs."""
    cats = block.categories
    out = np.empty(block.u.shape)
    for i, c in enumerate(cats):
        out[:, i] = marginals[c].inv_cdf(block.u[:, i])
    return out


@dataclass(frozen=True)
class NodeSummary:
    basket: str
    unit: str
    stats: SummaryStats

    @property
    def label(self) -> str:
        return f"{self.basket} {'%' if self.unit == PCT else 'GBP'}"


@dataclass(frozen=True, eq=False)
class ScenarioReport:
    scenario: str
    seed: int
    n_samples: int
    overshoot: float
    nodes: tuple[NodeSummary, ...]
    condition: tuple[str, float] | None = None
    condition_value: float | None = None
    matrix_provenance: str = "as-specified"
    matrix_drift: float = 0.0
    sampler_version: str = ""
    samples: Mapping[tuple[str, str], np.ndarray] | None = None

    def node(self, basket: str, unit: str) -> NodeSummary:
        for n in self.nodes:
            if n.basket == basket and n.unit == unit:
                return n
        raise UnknownEntity("output node", f"{basket} {unit}")

    def stats(self, basket: str, unit: str) -> SummaryStats:
        return self.node(basket, unit).stats


def run_scenario(config: ScenarioConfig, keep_samples: bool = False) -> ScenarioReport:
    """Fit marginals, sample (or condition), map, aggregate and summarize.

    Every basket yields a percentage node and a GBP node.
    """
    marginals = scenario_marginals(config)
    matrix, block = draw_uniforms(config)
    x = category_samples(marginals, block)
    nodes, kept = [], {}
    for b in config.baskets:
        pct = basket_pct_samples(x, b.weight_vector(config.categories))
        gbp = pct * b.total / 100.0
        for unit, s in ((PCT, pct), (GBP, gbp)):
            nodes.append(NodeSummary(b.name, unit, summarize(s)))
            if keep_samples:
                kept[(b.name, unit)] = s
    cond_value = None
    if config.condition is not None:
        cat, p = config.condition
        cond_value = float(marginals[cat].inv_cdf(p))
    return ScenarioReport(
        scenario=config.name,
        seed=config.seed,
        n_samples=config.n_samples,
        overshoot=config.overshoot,
        nodes=tuple(nodes),
        condition=config.condition,
        condition_value=cond_value,
        matrix_provenance=matrix.provenance,
        matrix_drift=matrix.drift,
        sampler_version=block.version,
        samples=kept if keep_samples else None,
    )


def expected_pct_change(marginals: Mapping[str, Marginal], basket: BasketSpec) -> float:
    """Closed-form basket mean ``sum w_i E[pct_i]``; independent of the copula."""
    return float(sum(w * marginals[c].mean() for c, w in basket.weights.items()))
