"""Runtime self-checks against independent oracles.

Each check recomputes a worked example with a different method (numerical
integration, Monte Carlo sampling, eigen/determinant computation) and
compares it with the library's closed-form result.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from .classical import calibration_score, chi2_sf_df3, item_information, pool_item, relative_entropy
from .copula import build_matrix, rank_to_normal
from .domain import BREXIT_CATEGORIES, BREXIT_CORRELATIONS, CategorySet, CorrelationSpec, QuantileTriple
from .errors import RepairDriftExceeded
from .marginal import fit_marginal, marginal_on_range


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _chi2_density(x: float) -> float:
    return math.sqrt(x) * math.exp(-x / 2.0) / (2.0**1.5 * math.gamma(1.5))


def chi2_quad(x: float) -> float:
    """Chi-square(3) survival by direct integration of the density."""
    val, _ = integrate.quad(_chi2_density, x, np.inf, epsabs=1e-13, epsrel=1e-12)
    return val


def _check_chi2() -> CheckResult:
    worst = 0.0
    for x in (0.1, 0.888, 2.0, 7.8147, 15.0, 30.0):
        worst = max(worst, abs(chi2_sf_df3(x) - chi2_quad(x)))
    crit = chi2_sf_df3(7.8147)
    ok = worst < 1e-9 and abs(crit - 0.05) < 1e-4
    return CheckResult("chi-square(3) survival vs quadrature", ok, f"max |diff| {worst:.2e}, sf(7.8147) = {crit:.5f}")


def _check_calibration() -> CheckResult:
    s = (0.1, 0.4, 0.4, 0.1)
    by_hand = 0.2 * math.log(0.1 / 0.05) + 0.8 * math.log(0.4 / 0.45)
    stat = 20 * relative_entropy(s)
    c = calibration_score(s, 10)
    c_worst = calibration_score((0, 0, 0, 1), 10)
    ok = abs(stat - 20 * by_hand) < 1e-12 and abs(c - chi2_quad(20 * by_hand)) < 1e-9 and c_worst < 1e-12
    return CheckResult("calibration score examples", ok, f"2N*KL = {stat:.4f}, C = {c:.4f}, C(0,0,0,1) = {c_worst:.2e}")


def _check_information() -> CheckResult:
    t = QuantileTriple(0.0, 6.0, 26.0)
    lo, hi = -2.6, 28.6
    got = item_information(t, lo, hi)
    knots = (lo, 0.0, 6.0, 26.0, hi)
    mass = (0.05, 0.45, 0.45, 0.05)
    # integrate f ln(f * (hi - lo)) piece by piece
    oracle = 0.0
    for i in range(4):
        dens = mass[i] / (knots[i + 1] - knots[i])
        val, _ = integrate.quad(lambda x, d=dens: d * math.log(d * (hi - lo)), knots[i], knots[i + 1])
        oracle += val
    return CheckResult("information score vs quadrature", abs(got - oracle) < 1e-9, f"I = {got:.9f}, oracle {oracle:.9f}")


def _check_marginal_means(rng: np.random.Generator, n: int) -> CheckResult:
    details, ok = [], True
    for triple, expected in (((-10.0, 3.0, 20.0), 4.10), ((0.0, 6.0, 26.0), 9.85)):
        m = fit_marginal(triple, 0.1)
        mc = float(m.inv_cdf(rng.random(n)).mean())
        sd = math.sqrt(m.moments()[1])
        ok &= abs(m.mean() - expected) < 1e-9 and abs(mc - m.mean()) < 5 * sd / math.sqrt(n)
        details.append(f"{triple}: {m.mean():.4f} (MC {mc:.4f})")
    return CheckResult("marginal means vs sampling", ok, "; ".join(details))


def _check_pooling(rng: np.random.Generator, n: int) -> CheckResult:
    a, b = QuantileTriple(0.0, 1.0, 2.0), QuantileTriple(10.0, 11.0, 12.0)
    bounds = (-1.2, 13.2)
    item = pool_item([0.5, 0.5], [a, b], bounds)
    pick = rng.random(n) < 0.5
    u = rng.random(n)
    x = np.where(pick, marginal_on_range(a, *bounds).inv_cdf(u), marginal_on_range(b, *bounds).inv_cdf(u))
    mc = np.quantile(x, [0.05, 0.5, 0.95])
    diff = float(np.abs(np.array(item.quantiles.as_tuple()) - mc).max())
    ok = diff < 0.05 and item.quantiles.q05 < min(a.q50, b.q50)
    return CheckResult("pooled quantiles vs mixture sampling", ok, f"max |diff| {diff:.4f}")


def _check_brexit_psd() -> CheckResult:
    m = build_matrix(BREXIT_CORRELATIONS, CategorySet(BREXIT_CATEGORIES))
    eig = float(np.linalg.eigvalsh(m.values).min())
    return CheckResult("correlation matrix is PSD without repair", eig > 0 and not m.repaired, f"min eigenvalue {eig:.4f}")


def _check_non_psd() -> CheckResult:
    rho = rank_to_normal([0.9, 0.9, -0.9])
    a = np.array([[1, rho[0], rho[1]], [rho[0], 1, rho[2]], [rho[1], rho[2], 1]])
    det = float(np.linalg.det(a))
    spec = CorrelationSpec((("A", "B", 0.9), ("A", "C", 0.9), ("B", "C", -0.9)))
    try:
        m = build_matrix(spec, CategorySet(("A", "B", "C")))
        outcome = f"repaired, drift {m.drift:.3f}"
        handled = m.repaired
    except RepairDriftExceeded as e:
        outcome = f"aborted: {e}"
        handled = True
    return CheckResult("inconsistent 3x3 correlations detected", det < 0 and handled, f"det {det:.4f}; {outcome}")


def run_selftest(seed: int = 20180704, n_samples: int = 1_000_000) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    checks: list[Callable[[], CheckResult]] = [
        _check_chi2,
        _check_calibration,
        _check_information,
        lambda: _check_marginal_means(rng, n_samples),
        lambda: _check_pooling(rng, n_samples),
        _check_brexit_psd,
        _check_non_psd,
    ]
    return [c() for c in checks]
