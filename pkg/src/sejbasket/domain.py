"""Core data types shared by the scoring, sampling and aggregation modules.

All types validate on construction and are immutable afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateEntity,
    DuplicatePair,
    EmptyStudy,
    InvalidBasket,
    InvalidEntry,
    InvalidParameter,
    MissingAssessment,
    MissingCategory,
    MissingRealization,
    NonMonotoneQuantiles,
    SelfPair,
    UnexpectedRealization,
    UnknownEntity,
)

#: Theoretical probability mass of the four inter-quantile bins of a
#: (5th, 50th, 95th) percentile judgement.
BIN_PROBABILITIES = (0.05, 0.45, 0.45, 0.05)
#: Cumulative probabilities at the knots (L, q05, q50, q95, U).
KNOT_PROBABILITIES = (0.0, 0.05, 0.5, 0.95, 1.0)

BREXIT_CATEGORIES = (
    "SoftDrinks",
    "CoffeeTeaCocoa",
    "SugarJam",
    "Vegetables",
    "Fruit",
    "OilsFats",
    "MilkCheeseEggs",
    "Fish",
    "Meat",
    "BreadCereals",
)

CALIBRATION = "calibration"
TARGET = "target"


@dataclass(frozen=True)
class QuantileTriple:
    """A (5th, 50th, 95th) percentile judgement."""

    q05: float
    q50: float
    q95: float

    def __post_init__(self):
        vals = (float(self.q05), float(self.q50), float(self.q95))
        if any(math.isnan(v) for v in vals) or not (vals[0] <= vals[1] <= vals[2]):
            raise NonMonotoneQuantiles(None, None, vals)
        object.__setattr__(self, "q05", vals[0])
        object.__setattr__(self, "q50", vals[1])
        object.__setattr__(self, "q95", vals[2])

    @classmethod
    def of(cls, values: Sequence[float], *, expert=None, question=None) -> "QuantileTriple":
        """Build from a 3-sequence, attaching expert/question to any error."""
        if len(values) != 3:
            raise NonMonotoneQuantiles(expert, question, tuple(values))
        try:
            return cls(*values)
        except NonMonotoneQuantiles:
            raise NonMonotoneQuantiles(expert, question, tuple(values)) from None

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.q05, self.q50, self.q95)

    @property
    def degenerate(self) -> bool:
        return self.q05 == self.q95


@dataclass(frozen=True)
class Question:
    id: str
    kind: str
    units: str = ""
    realization: float | None = None

    def __post_init__(self):
        if self.kind not in (CALIBRATION, TARGET):
            raise UnknownEntity("question kind", self.kind)
        if self.kind == CALIBRATION and self.realization is None:
            raise MissingRealization(self.id)
        if self.kind == TARGET and self.realization is not None:
            raise UnexpectedRealization(self.id)
        if self.realization is not None:
            object.__setattr__(self, "realization", float(self.realization))

    @property
    def is_calibration(self) -> bool:
        return self.kind == CALIBRATION


@dataclass(frozen=True)
class ElicitationStudy:
    """Experts x questions with one :class:`QuantileTriple` per answered cell.

    Every expert must answer every calibration question. Missing target
    assessments are allowed and listed in :attr:`missing_targets`.
    """

    experts: tuple[str, ...]
    questions: tuple[Question, ...]
    assessments: Mapping[tuple[str, str], QuantileTriple]
    missing_targets: tuple[tuple[str, str], ...] = field(init=False, default=())

    def __post_init__(self):
        experts = tuple(self.experts)
        questions = tuple(self.questions)
        if not experts:
            raise EmptyStudy("no experts")
        _check_unique(experts, "expert")
        _check_unique([q.id for q in questions], "question")
        if not any(q.is_calibration for q in questions):
            raise EmptyStudy("no calibration questions")
        known_e, known_q = set(experts), {q.id for q in questions}
        for e, q in self.assessments:
            if e not in known_e:
                raise UnknownEntity("expert", e)
            if q not in known_q:
                raise UnknownEntity("question", q)
        missing = []
        for q in questions:
            for e in experts:
                if (e, q.id) not in self.assessments:
                    if q.is_calibration:
                        raise MissingAssessment(e, q.id)
                    missing.append((e, q.id))
        object.__setattr__(self, "experts", experts)
        object.__setattr__(self, "questions", questions)
        object.__setattr__(self, "assessments", MappingProxyType(dict(self.assessments)))
        object.__setattr__(self, "missing_targets", tuple(missing))

    @property
    def calibration_questions(self) -> tuple[Question, ...]:
        return tuple(q for q in self.questions if q.is_calibration)

    @property
    def target_questions(self) -> tuple[Question, ...]:
        return tuple(q for q in self.questions if not q.is_calibration)

    def question(self, qid: str) -> Question:
        for q in self.questions:
            if q.id == qid:
                return q
        raise UnknownEntity("question", qid)

    def assessment(self, expert: str, qid: str) -> QuantileTriple:
        try:
            return self.assessments[(expert, qid)]
        except KeyError:
            raise MissingAssessment(expert, qid) from None


def validate_study(raw: Mapping) -> ElicitationStudy:
    """Build an :class:`ElicitationStudy` from plain parsed records.

    ``raw`` has keys ``experts`` (list of ids), ``questions`` (list of dicts
    with ``id``, ``kind``, optional ``units`` and ``realization``) and
    ``assessments`` (``{expert: {question: [q05, q50, q95]}}``).
    """
    experts = list(raw.get("experts") or [])
    if not experts:
        raise EmptyStudy("no experts")
    questions = []
    for rec in raw.get("questions") or []:
        questions.append(
            Question(
                id=str(rec["id"]),
                kind=rec.get("kind", TARGET),
                units=rec.get("units", ""),
                realization=rec.get("realization"),
            )
        )
    if not questions:
        raise EmptyStudy("no questions")
    assessments = {}
    for expert, answers in (raw.get("assessments") or {}).items():
        for qid, values in answers.items():
            assessments[(expert, qid)] = QuantileTriple.of(values, expert=expert, question=qid)
    return ElicitationStudy(tuple(experts), tuple(questions), assessments)


@dataclass(frozen=True)
class CategorySet:
    """Ordered, unique category names shared by every vector and matrix."""

    names: tuple[str, ...] = BREXIT_CATEGORIES

    def __post_init__(self):
        names = tuple(self.names)
        if not names:
            raise InvalidParameter("categories", names, "must not be empty")
        _check_unique(names, "category")
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return name in self.names

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownEntity("category", name) from None


@dataclass(frozen=True)
class BasketSpec:
    """Weekly cost of each category in a household or index basket (in GBP)."""

    name: str
    costs: Mapping[str, float]
    total: float

    def __post_init__(self):
        costs = {k: float(v) for k, v in dict(self.costs).items()}
        if not costs:
            raise InvalidBasket(self.name, "no category costs")
        for cat, c in costs.items():
            if not (c >= 0) or math.isinf(c):
                raise InvalidBasket(self.name, f"cost of {cat!r} must be a finite value >= 0, got {c!r}")
        total = float(self.total)
        if not total > 0:
            raise InvalidBasket(self.name, f"total must be > 0, got {total!r}")
        if abs(math.fsum(costs.values()) - total) > 0.01 + 1e-9:
            raise InvalidBasket(
                self.name,
                f"category costs sum to {math.fsum(costs.values()):.2f}, stated total is {total:.2f}",
            )
        object.__setattr__(self, "costs", MappingProxyType(costs))
        object.__setattr__(self, "total", total)

    @property
    def weights(self) -> dict[str, float]:
        """Expenditure shares ``cost / sum(costs)``."""
        s = math.fsum(self.costs.values())
        return {k: v / s for k, v in self.costs.items()}

    def check_covers(self, categories: Iterable[str]) -> None:
        cats = list(categories)
        for c in cats:
            if c not in self.costs:
                raise MissingCategory(c, f"basket {self.name!r}")
        for c in self.costs:
            if c not in cats:
                raise UnknownEntity("category", c)

    def weight_vector(self, categories: CategorySet) -> np.ndarray:
        self.check_covers(categories)
        w = self.weights
        return np.array([w[c] for c in categories], dtype=float)

    def cost_vector(self, categories: CategorySet) -> np.ndarray:
        self.check_covers(categories)
        return np.array([self.costs[c] for c in categories], dtype=float)


@dataclass(frozen=True)
class CorrelationSpec:
    """Named pairwise rank correlations; pairs not listed are 0."""

    pairs: tuple[tuple[str, str, float], ...] = ()

    def __post_init__(self):
        seen = set()
        clean = []
        for a, b, r in self.pairs:
            r = float(r)
            if a == b:
                raise SelfPair(a)
            key = frozenset((a, b))
            if key in seen:
                raise DuplicatePair(a, b)
            if not (-1.0 <= r <= 1.0):
                raise InvalidEntry(a, b, r)
            seen.add(key)
            clean.append((a, b, r))
        object.__setattr__(self, "pairs", tuple(clean))

    def __len__(self) -> int:
        return len(self.pairs)

    def get(self, a: str, b: str) -> float:
        for x, y, r in self.pairs:
            if {x, y} == {a, b}:
                return r
        return 0.0


#: Correlations between category price changes used for the Brexit baskets.
BREXIT_CORRELATIONS = CorrelationSpec(
    (
        ("Vegetables", "Fruit", 0.75),
        ("Meat", "BreadCereals", 0.4),
        ("Meat", "SugarJam", 0.4),
        ("MilkCheeseEggs", "Meat", 0.4),
        ("BreadCereals", "SugarJam", 0.72),
        ("SugarJam", "SoftDrinks", 0.3),
    )
)


def _check_unique(names: Iterable[str], kind: str) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateEntity(kind, n)
        seen.add(n)
