import numpy as np
import pytest
from scipy import stats

from sejbasket.copula import (
    BLOCK_SIZE,
    SAMPLER_VERSION,
    build_matrix,
    condition,
    conditional_normal,
    factor,
    rank_to_normal,
    sample,
)
from sejbasket.domain import BREXIT_CATEGORIES, BREXIT_CORRELATIONS, CategorySet, CorrelationSpec
from sejbasket.errors import FactorizationFailure, InputError, RepairDriftExceeded, UnknownEntity

CATS = CategorySet(BREXIT_CATEGORIES)
N = 1_000_000
SEED = 20180704

# Smallest eigenvalue of the rank-transformed matrix for the six listed pairs,
# computed independently with mpmath at 30 digits; frozen oracle value.
BREXIT_MIN_EIGENVALUE = 0.198480720142998


@pytest.fixture(scope="module")
def brexit():
    return build_matrix(BREXIT_CORRELATIONS, CATS)


@pytest.fixture(scope="module")
def identity():
    return build_matrix(CorrelationSpec(), CATS)


@pytest.fixture(scope="module")
def brexit_sample(brexit):
    return sample(brexit, N, SEED)


def ks_uniform(x):
    return stats.kstest(x, "uniform").statistic


def test_rank_transform():
    assert rank_to_normal(0.0) == 0.0
    assert rank_to_normal(1.0) == pytest.approx(1.0)
    assert rank_to_normal(0.75) == pytest.approx(2 * np.sin(np.pi * 0.75 / 6))


def test_brexit_matrix_psd_without_repair(brexit):
    assert brexit.provenance == "as-specified" and brexit.drift == 0.0
    assert brexit.min_eigenvalue == pytest.approx(BREXIT_MIN_EIGENVALUE, abs=1e-12)
    np.testing.assert_array_equal(np.diag(brexit.values), 1.0)
    np.testing.assert_array_equal(brexit.values, brexit.values.T)
    assert brexit.entry("Fruit", "Vegetables") == pytest.approx(rank_to_normal(0.75))
    assert brexit.entry("Fish", "Meat") == 0.0


def test_matrix_is_read_only(brexit):
    with pytest.raises(ValueError):
        brexit.values[0, 1] = 0.5


def test_empty_spec_gives_identity(identity):
    np.testing.assert_array_equal(identity.values, np.eye(10))


def test_strongly_inconsistent_triangle_aborts():
    rho = rank_to_normal([0.9, 0.9, -0.9])
    a = np.array([[1, rho[0], rho[1]], [rho[0], 1, rho[2]], [rho[1], rho[2], 1]])
    # determinant oracle: 1 + 2abc - a^2 - b^2 - c^2
    det = 1 + 2 * rho[0] * rho[1] * rho[2] - rho[0] ** 2 - rho[1] ** 2 - rho[2] ** 2
    assert det == pytest.approx(np.linalg.det(a)) and det < 0
    spec = CorrelationSpec((("A", "B", 0.9), ("A", "C", 0.9), ("B", "C", -0.9)))
    with pytest.raises(RepairDriftExceeded) as e:
        build_matrix(spec, CategorySet(("A", "B", "C")))
    assert e.value.exit_code == 3


def test_mildly_inconsistent_triangle_is_repaired():
    spec = CorrelationSpec((("A", "B", 0.75), ("A", "C", 0.75), ("B", "C", 0.1)))
    m = build_matrix(spec, CategorySet(("A", "B", "C")))
    assert m.repaired and 0 < m.drift <= 0.05
    assert m.min_eigenvalue >= -1e-10
    np.testing.assert_allclose(np.diag(m.values), 1.0)
    u = sample(m, 10_000, 1).u
    assert np.all((u > 0) & (u < 1))


def test_unknown_category_rejected():
    with pytest.raises(UnknownEntity):
        build_matrix(CorrelationSpec((("Meat", "Tofu", 0.2),)), CATS)


def test_factor_rejects_indefinite():
    with pytest.raises(FactorizationFailure):
        factor(np.array([[1.0, 2.0], [2.0, 1.0]]))
    a = factor(np.ones((2, 2)))
    np.testing.assert_allclose(a @ a.T, np.ones((2, 2)), atol=1e-12)


def test_identity_sampling_is_independent_uniform(identity):
    u = sample(identity, N, SEED).u
    rho = stats.spearmanr(u).statistic
    off = rho[~np.eye(10, dtype=bool)]
    assert np.abs(off).max() < 0.02
    for j in range(10):
        q = np.percentile(u[:, j], [5, 50, 95])
        np.testing.assert_allclose(q, [0.05, 0.5, 0.95], atol=0.002)


def test_brexit_marginals_stay_uniform(brexit_sample):
    for j in range(10):
        assert ks_uniform(brexit_sample.u[:, j]) < 0.002


def test_brexit_spearman_matches_spec(brexit_sample):
    rho = stats.spearmanr(brexit_sample.u).statistic
    for a, b, r in BREXIT_CORRELATIONS.pairs:
        assert abs(rho[CATS.index(a), CATS.index(b)] - r) < 0.02, (a, b)
    unlinked = rho[CATS.index("Fish"), CATS.index("Fruit")]
    assert abs(unlinked) < 0.02


def test_sampling_is_reproducible_across_workers(brexit):
    n = 3 * BLOCK_SIZE + 17
    ref = sample(brexit, n, 7, workers=1)
    assert ref.version == SAMPLER_VERSION
    for w in (2, 3, 8):
        assert sample(brexit, n, 7, workers=w).u.tobytes() == ref.u.tobytes()
    assert sample(brexit, n, 7).u.tobytes() == ref.u.tobytes()
    assert sample(brexit, n, 8).u.tobytes() != ref.u.tobytes()


def test_conditioning_reproducible_across_workers(brexit):
    n = 2 * BLOCK_SIZE + 5
    ref = condition(brexit, "Meat", 0.95, n, 3)
    assert condition(brexit, "Meat", 0.95, n, 3, workers=4).u.tobytes() == ref.u.tobytes()


def test_prefix_stability(brexit):
    short = sample(brexit, 1000, 5).u
    long = sample(brexit, 1000 + BLOCK_SIZE, 5).u
    np.testing.assert_array_equal(short, long[:1000])


def test_identity_conditioning_leaves_others_unchanged(identity):
    meat = CATS.index("Meat")
    free = sample(identity, N, SEED).u
    cond = condition(identity, "Meat", 0.05, N, SEED).u
    assert np.all(cond[:, meat] == 0.05)
    others = [j for j in range(10) if j != meat]
    for j in others:
        assert ks_uniform(cond[:, j]) < 0.002
        assert stats.ks_2samp(cond[:, j], free[:, j]).statistic < 0.002
    np.testing.assert_array_equal(cond[:, others], free[:, others])


def test_conditioning_follows_correlation_sign(brexit):
    u = condition(brexit, "Meat", 0.95, 200_000, SEED)
    assert u.conditioned == ("Meat", 0.95)
    assert u.column("BreadCereals").mean() > 0.5
    assert u.column("Fish").mean() == pytest.approx(0.5, abs=0.005)
    low = condition(brexit, "Meat", 0.05, 200_000, SEED)
    assert low.column("BreadCereals").mean() < 0.5


def test_conditional_variance_never_grows(brexit):
    for j in range(10):
        for z in (-1.645, 0.0, 1.645):
            others, mean, cov = conditional_normal(brexit.values, j, z)
            assert np.all(np.diag(cov) <= 1.0 + 1e-15)
            np.testing.assert_allclose(mean, brexit.values[others, j] * z)


def test_parameter_validation(brexit):
    with pytest.raises(InputError):
        sample(brexit, 0, 1)
    with pytest.raises(InputError):
        sample(brexit, 10, 1, workers=0)
    with pytest.raises(InputError):
        sample(brexit, 10, -1)
    with pytest.raises(InputError):
        condition(brexit, "Meat", 1.0, 10, 1)
    with pytest.raises(UnknownEntity):
        condition(brexit, "Tofu", 0.5, 10, 1)
