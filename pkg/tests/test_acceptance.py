"""Acceptance criteria 1-7.

Each test records one PASS/FAIL line; the lines are printed together in the
pytest terminal summary (see conftest.py) and also when this file is run
directly with ``python tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest
from scipy import stats

from sejbasket.basket import GBP, PCT, run_scenario, scenario_marginals, category_samples, draw_uniforms
from sejbasket.classical import chi2_sf_df3, global_weight_dm, optimize_alpha, score_experts
from sejbasket.copula import build_matrix, condition, sample
from sejbasket.domain import BREXIT_CORRELATIONS, CorrelationSpec
from sejbasket.selftest import chi2_quad

from conftest import make_study
from test_classical import CHI2_SF_ORACLE, perfect_study, random_study

RESULTS: dict[int, str] = {}


class Checks:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.failed, self.notes = [], []

    def near(self, label, value, target, tol):
        ok = abs(value - target) <= tol
        self.notes.append(f"{label} {value:.3f} (target {target:+.2f} ± {tol})")
        if not ok:
            self.failed.append(self.notes[-1])

    def true(self, label, ok, detail=""):
        self.notes.append(f"{label}{': ' + detail if detail else ''}")
        if not ok:
            self.failed.append(self.notes[-1])

    def finish(self):
        status = "PASS" if not self.failed else "FAIL"
        if self.failed:
            body = "; ".join(self.failed)
        elif len(self.notes) <= 6:
            body = "; ".join(self.notes)
        else:
            body = f"all {len(self.notes)} checks hold"
        RESULTS[self.number] = f"criterion {self.number} [{status}] {self.title}: {body}"
        assert not self.failed, RESULTS[self.number]


def test_criterion_1_deal_cpi_pct(deal_config, reports):
    c = Checks(1, "Deal CPI % change")
    start = time.perf_counter()
    run_scenario(deal_config)
    elapsed = time.perf_counter() - start
    s = reports["deal"].stats("cpi", PCT)
    c.near("median", s.median, 6.1, 1.0)
    c.near("mean", s.mean, 6.4, 1.0)
    c.near("sd", s.sd, 6.0, 1.5)
    c.near("q05", s.q05, -2.7, 2.0)
    c.near("q95", s.q95, 16.9, 2.0)
    c.true("runtime <= 30 s", elapsed <= 30.0, f"{elapsed:.1f} s")
    c.finish()


def test_criterion_2_nodeal_cpi_pct(reports):
    c = Checks(2, "No-deal CPI % change")
    s = reports["nodeal"].stats("cpi", PCT)
    c.near("median", s.median, 22.5, 2.0)
    c.near("mean", s.mean, 24.0, 2.0)
    c.near("sd", s.sd, 15.4, 2.5)
    c.near("q05", s.q05, 1.5, 3.0)
    c.near("q95", s.q95, 51.7, 3.0)
    c.finish()


def test_criterion_3_weekly_cost_medians(reports):
    c = Checks(3, "weekly GBP cost medians")
    targets = {
        "cpi": ((3.53, 0.60), (13.00, 1.20)),
        "family": ((5.80, 1.00), (20.98, 2.00)),
        "pensioner": ((2.09, 0.40), (7.55, 0.80)),
    }
    for basket, (deal, nodeal) in targets.items():
        c.near(f"{basket} deal", reports["deal"].stats(basket, GBP).median, *deal)
        c.near(f"{basket} no-deal", reports["nodeal"].stats(basket, GBP).median, *nodeal)
    c.finish()


def test_criterion_4_meat_conditioning(reports):
    c = Checks(4, "Meat conditioning")
    low, high = reports["deal_meat05"], reports["nodeal_meat95"]
    c.near("deal/meat@5 cpi mean %", low.stats("cpi", PCT).mean, -0.1, 1.0)
    c.near("deal/meat@5 family mean GBP", low.stats("family", GBP).mean, -1.26, 1.00)
    c.near("no-deal/meat@95 cpi mean %", high.stats("cpi", PCT).mean, 44.0, 2.0)
    c.near("no-deal/meat@95 family mean GBP", high.stats("family", GBP).mean, 44.84, 3.00)
    c.near("no-deal/meat@95 cpi q95 %", high.stats("cpi", PCT).q95, 62.2, 3.0)
    c.near("no-deal/meat@95 family q95 GBP", high.stats("family", GBP).q95, 61.56, 3.0)
    for cond, base in ((low, reports["deal"]), (high, reports["nodeal"])):
        for n in cond.nodes:
            b = base.stats(n.basket, n.unit)
            c.true(f"{cond.scenario} {n.label} sd shrinks", n.stats.sd < b.sd, f"{n.stats.sd:.3f} < {b.sd:.3f}")
    c.finish()


def test_criterion_5_classical_model_properties():
    c = Checks(5, "Classical Model properties")
    (s,) = score_experts(perfect_study())
    c.true("perfect calibration C == 1.0", s.calibration == 1.0, repr(s.calibration))
    grid_err = max(abs(chi2_sf_df3(x) - v) for x, v in CHI2_SF_ORACLE)
    quad_err = max(abs(chi2_sf_df3(x) - chi2_quad(x)) for x, _ in CHI2_SF_ORACLE)
    c.true("chi2 sf vs integration oracle, 20 points", max(grid_err, quad_err) <= 1e-6, f"{max(grid_err, quad_err):.1e}")

    rng = np.random.default_rng(99)
    one = random_study(rng, n_experts=1)
    dm = optimize_alpha(one).dm
    err = max(
        abs(a - b)
        for q in one.questions
        for a, b in zip(dm.quantiles(q.id).as_tuple(), one.assessments[("E0", q.id)].as_tuple())
    )
    c.true("single-expert DM equals expert", err <= 1e-9, f"{err:.1e}")

    worse = 0
    for _ in range(100):
        study = random_study(rng)
        worse += optimize_alpha(study).score.combined < global_weight_dm(study, 0.0).score.combined
    c.true("optimized DM >= alpha=0 DM on 100 studies", worse == 0, f"{worse} violations")

    study = random_study(rng)
    a, b = 37.5, -1234.0
    moved = make_study(
        list(study.experts),
        [a * q.realization + b for q in study.calibration_questions],
        {e: [tuple(a * v + b for v in study.assessments[(e, q.id)].as_tuple()) for q in study.questions]
         for e in study.experts},
        targets=[None] * len(study.target_questions),
    )
    diff = max(abs(x.information - y.information) for x, y in zip(score_experts(study), score_experts(moved)))
    c.true("information affine invariance", diff <= 1e-9, f"{diff:.1e}")
    c.finish()


def test_criterion_6_copula(deal_config, nodeal_config):
    c = Checks(6, "copula engine")
    cats = deal_config.categories
    matrix = build_matrix(BREXIT_CORRELATIONS, cats)
    block = sample(matrix, 1_000_000, deal_config.seed)
    rho = stats.spearmanr(block.u).statistic
    for x, y, r in BREXIT_CORRELATIONS.pairs:
        c.near(f"spearman {x}~{y}", rho[cats.index(x), cats.index(y)], r, 0.02)

    for cfg in (deal_config, nodeal_config):
        marg = scenario_marginals(cfg)
        _, blk = draw_uniforms(cfg)
        x = category_samples(marg, blk)
        worst = 0.0
        for j, cat in enumerate(cats):
            q = np.percentile(x[:, j], [5, 50, 95])
            worst = max(worst, float(np.abs(q - np.array(cfg.quantiles[cat].as_tuple())).max()))
        c.true(f"{cfg.name} marginal 5/50/95 within 0.5 pp", worst <= 0.5, f"max error {worst:.3f} pp")

    ident = build_matrix(CorrelationSpec(), cats)
    cond = condition(ident, "Meat", 0.05, 1_000_000, deal_config.seed).u
    ks = max(stats.kstest(cond[:, j], "uniform").statistic for j in range(len(cats)) if j != cats.index("Meat"))
    c.true("identity conditioning KS < 0.002", ks < 0.002, f"{ks:.5f}")

    n = 200_000
    ref = sample(matrix, n, 11, workers=1).u.tobytes()
    same = all(sample(matrix, n, 11, workers=w).u.tobytes() == ref for w in (1, 2, 4, 7))
    c.true("bit-identical across worker counts", same)
    c.finish()


def test_criterion_7_point_mass_exactness(deal_config):
    c = Checks(7, "point-mass exactness")
    q = {cat: (10.0, 10.0, 10.0) for cat in deal_config.categories}
    for seed in (0, 1, 20180704, 2**31 + 5):
        rep = run_scenario(deal_config.with_options(quantiles=q, seed=seed, n_samples=10_000), keep_samples=True)
        for b in deal_config.baskets:
            pct = rep.samples[(b.name, PCT)]
            gbp = rep.samples[(b.name, GBP)]
            expected_gbp = b.total * 10.0 / 100.0
            c.true(f"seed {seed} {b.name} %", bool(np.all(pct == 10.0)) and rep.stats(b.name, PCT).sd == 0.0)
            c.true(f"seed {seed} {b.name} GBP", bool(np.all(gbp == expected_gbp)) and rep.stats(b.name, GBP).sd == 0.0)
    c.finish()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
