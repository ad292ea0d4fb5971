"""Structured expert judgement (Classical Model) and copula-based food basket risk."""

from .basket import ScenarioConfig, ScenarioReport, SummaryStats, run_scenario, summarize
from .classical import (
    DecisionMaker,
    ExpertScore,
    build_dm,
    calibration_score,
    chi2_sf_df3,
    global_weight_dm,
    global_weights,
    information_score,
    optimize_alpha,
    score_experts,
)
from .copula import CorrelationMatrix, build_matrix, condition, sample
from .domain import (
    BasketSpec,
    CategorySet,
    CorrelationSpec,
    ElicitationStudy,
    Question,
    QuantileTriple,
    validate_study,
)
from .errors import InputError, NumericalError, SEJError
from .fileio import parse_basket, parse_correlations, parse_scenario, parse_study
from .marginal import Marginal, fit_marginal
from .report import render_report

__version__ = "0.1.0"

__all__ = [
    "BasketSpec",
    "build_dm",
    "build_matrix",
    "calibration_score",
    "CategorySet",
    "chi2_sf_df3",
    "condition",
    "CorrelationMatrix",
    "CorrelationSpec",
    "DecisionMaker",
    "ElicitationStudy",
    "ExpertScore",
    "fit_marginal",
    "global_weight_dm",
    "global_weights",
    "information_score",
    "InputError",
    "Marginal",
    "NumericalError",
    "optimize_alpha",
    "parse_basket",
    "parse_correlations",
    "parse_scenario",
    "parse_study",
    "QuantileTriple",
    "Question",
    "render_report",
    "run_scenario",
    "sample",
    "ScenarioConfig",
    "ScenarioReport",
    "score_experts",
    "SEJError",
    "summarize",
    "SummaryStats",
    "validate_study",
]
