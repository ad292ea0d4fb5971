"""Gaussian-copula sampling of correlated uniforms, with single-node conditioning.

Rank correlations ``r`` are mapped to normal-copula correlations with
``rho = 2 sin(pi r / 6)``, which makes the Spearman correlation of the
sampled uniforms equal ``r``.

Sampling is split into fixed-size blocks; block ``b`` draws from its own
stream ``SeedSequence(seed, spawn_key=(b,))``, so the output depends only on
``(matrix, n_samples, seed)`` and never on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .domain import CategorySet, CorrelationSpec
from .errors import FactorizationFailure, InvalidParameter, RepairDriftExceeded, UnknownEntity

SAMPLER_VERSION = "gauss-copula/pcg64/block65536/v1"
BLOCK_SIZE = 65536
DEFAULT_SAMPLES = 1_000_000
DEFAULT_SEED = 20180704
MAX_REPAIR_DRIFT = 0.05
PSD_TOLERANCE = 1e-10

_U_MIN = np.nextafter(0.0, 1.0)
_U_MAX = np.nextafter(1.0, 0.0)


def rank_to_normal(r):
    """Normal-copula correlation giving Spearman rank correlation ``r``."""
    return 2.0 * np.sin(np.pi * np.asarray(r, dtype=float) / 6.0)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    categories: CategorySet
    values: np.ndarray
    provenance: str = "as-specified"
    drift: float = 0.0
    rank_transformed: bool = True

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.values).min())

    @property
    def repaired(self) -> bool:
        return self.provenance == "repaired"

    def entry(self, a: str, b: str) -> float:
        return float(self.values[self.categories.index(a), self.categories.index(b)])


def repair_psd(a: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues to zero and rescale back to a unit diagonal."""
    vals, vecs = np.linalg.eigh((a + a.T) / 2.0)
    clipped = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    d = np.sqrt(np.diag(clipped))
    if (d <= 0).any():
        raise FactorizationFailure(float(vals.min()))
    out = clipped / np.outer(d, d)
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return out


def build_matrix(
    spec: CorrelationSpec,
    categories: CategorySet,
    rank_transform: bool = True,
    max_drift: float = MAX_REPAIR_DRIFT,
) -> CorrelationMatrix:
    n = len(categories)
    a = np.eye(n)
    for x, y, r in spec.pairs:
        if x not in categories:
            raise UnknownEntity("category", x)
        if y not in categories:
            raise UnknownEntity("category", y)
        rho = float(rank_to_normal(r)) if rank_transform else r
        i, j = categories.index(x), categories.index(y)
        a[i, j] = a[j, i] = rho
    if np.linalg.eigvalsh(a).min() >= -PSD_TOLERANCE:
        return CorrelationMatrix(categories, a, "as-specified", 0.0, rank_transform)
    fixed = repair_psd(a)
    drift = float(np.abs(fixed - a).max())
    if drift > max_drift:
        raise RepairDriftExceeded(drift, max_drift)
    return CorrelationMatrix(categories, fixed, "repaired", drift, rank_transform)


def factor(values: np.ndarray) -> np.ndarray:
    """Return ``A`` with ``A @ A.T == values``: Cholesky, or eigen for singular PSD input."""
    if values.size == 0:
        return values.copy()
    try:
        return np.linalg.cholesky(values)
    except np.linalg.LinAlgError:
        pass
    vals, vecs = np.linalg.eigh(values)
    if vals.min() < -PSD_TOLERANCE:
        raise FactorizationFailure(float(vals.min()))
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


@dataclass(frozen=True, eq=False)
class SampleBlock:
    """``n_samples x n_categories`` uniforms in (0, 1)."""

    u: np.ndarray
    categories: CategorySet
    seed: int
    version: str = SAMPLER_VERSION
    conditioned: tuple[str, float] | None = None

    @property
    def n_samples(self) -> int:
        return self.u.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.u[:, self.categories.index(name)]


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_blocks(n_samples: int, dim: int, seed: int, workers: int, fill) -> np.ndarray:
    if n_samples < 1:
        raise InvalidParameter("n_samples", n_samples, "must be >= 1")
    if workers < 1:
        raise InvalidParameter("workers", workers, "must be >= 1")
    if seed < 0:
        raise InvalidParameter("seed", seed, "must be >= 0")
    out = np.empty((n_samples, dim))
    n_blocks = math.ceil(n_samples / BLOCK_SIZE)

    def work(b):
        lo = b * BLOCK_SIZE
        hi = min(lo + BLOCK_SIZE, n_samples)
        eps = _block_rng(seed, b).standard_normal((hi - lo, dim))
        out[lo:hi] = fill(eps)

    if workers == 1 or n_blocks == 1:
        for b in range(n_blocks):
            work(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, range(n_blocks)))
    return out


def _to_uniform(z: np.ndarray) -> np.ndarray:
    return np.clip(ndtr(z), _U_MIN, _U_MAX)


def sample(
    matrix: CorrelationMatrix,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> SampleBlock:
    """Correlated uniforms from the Gaussian copula of ``matrix``."""
    a_t = factor(matrix.values).T
    u = _run_blocks(n_samples, len(matrix.categories), seed, workers, lambda eps: _to_uniform(eps @ a_t))
    u.setflags(write=False)
    return SampleBlock(u, matrix.categories, seed)


def conditional_normal(values: np.ndarray, node: int, z: float):
    """Mean and covariance of the other coordinates given coordinate ``node`` = ``z``."""
    others = [i for i in range(values.shape[0]) if i != node]
    c = values[others, node]
    mean = c * z
    cov = values[np.ix_(others, others)] - np.outer(c, c)
    return others, mean, cov


def condition(
    matrix: CorrelationMatrix,
    node: str,
    u_star: float,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> SampleBlock:
    """Sample with ``node`` pinned at the uniform value ``u_star``.

    The remaining coordinates come from the exact Gaussian conditional law.
    They consume the same normal draws as :func:`sample`, so with an identity
    matrix the other columns are identical to the unconditional ones.
    """
    if not 0.0 < u_star < 1.0:
        raise InvalidParameter("u_star", u_star, "must lie strictly between 0 and 1")
    j = matrix.categories.index(node)
    z_star = float(ndtri(u_star))
    others, mean, cov = conditional_normal(matrix.values, j, z_star)
    b_t = factor(cov).T

    def fill(eps):
        out = np.empty_like(eps)
        out[:, others] = _to_uniform(mean + eps[:, others] @ b_t)
        out[:, j] = u_star
        return out

    u = _run_blocks(n_samples, len(matrix.categories), seed, workers, fill)
    u.setflags(write=False)
    return SampleBlock(u, matrix.categories, seed, conditioned=(node, float(u_star)))
