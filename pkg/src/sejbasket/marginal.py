"""Continuous distributions reconstructed from three quantiles.

A :class:`Marginal` is piecewise uniform on the knots ``(L, q05, q50, q95, U)``
with bin masses ``(0.05, 0.45, 0.45, 0.05)``, so its CDF is continuous and
piecewise linear through the elicited quantiles. Zero-width bins carry their
mass as a point mass (the CDF jumps there); a fully degenerate triple is a
point mass at ``q50``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import BIN_PROBABILITIES, KNOT_PROBABILITIES, QuantileTriple
from .errors import InvalidParameter, NonMonotoneQuantiles, OutOfSupport

DEFAULT_OVERSHOOT = 0.10

_MASS = np.array(BIN_PROBABILITIES)
_CUM = np.array(KNOT_PROBABILITIES)


@dataclass(frozen=True)
class Marginal:
    knots: tuple[float, float, float, float, float]

    def __post_init__(self):
        k = tuple(float(v) for v in self.knots)
        if len(k) != 5 or any(np.isnan(k)) or any(a > b for a, b in zip(k, k[1:])):
            raise NonMonotoneQuantiles(None, None, k)
        object.__setattr__(self, "knots", k)

    @property
    def support(self) -> tuple[float, float]:
        return self.knots[0], self.knots[4]

    @property
    def quantiles(self) -> QuantileTriple:
        return QuantileTriple(*self.knots[1:4])

    @property
    def degenerate(self) -> bool:
        return self.knots[0] == self.knots[4]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.knots)

    def _piecewise(self, x: np.ndarray, side: str) -> np.ndarray:
        kn = np.array(self.knots)
        b = np.searchsorted(kn, x, side=side) - 1
        inner = np.clip(b, 0, 3)
        w = kn[inner + 1] - kn[inner]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(w > 0, (x - kn[inner]) / np.where(w > 0, w, 1.0), 0.0)
        out = _CUM[inner] + _MASS[inner] * frac
        out = np.where(b < 0, 0.0, out)
        return np.where(b > 3, 1.0, out)

    def cdf(self, x):
        """Right-continuous CDF; values outside the support clamp to 0 or 1."""
        xa = np.asarray(x, dtype=float)
        if np.isnan(xa).any():
            raise OutOfSupport(x)
        out = self._piecewise(xa, "right")
        return out if out.ndim else float(out)

    def cdf_left(self, x):
        """Left limit of the CDF, ``P(X < x)``."""
        xa = np.asarray(x, dtype=float)
        if np.isnan(xa).any():
            raise OutOfSupport(x)
        out = self._piecewise(xa, "left")
        out = np.where(xa > self.knots[4], 1.0, out)
        return out if out.ndim else float(out)

    def inv_cdf(self, u):
        """Quantile function; ``inv_cdf(0.05/0.5/0.95)`` returns the knots exactly."""
        ua = np.asarray(u, dtype=float)
        if np.isnan(ua).any() or (ua < 0).any() or (ua > 1).any():
            raise OutOfSupport(u)
        kn = np.array(self.knots)
        b = np.clip(np.searchsorted(_CUM, ua, side="right") - 1, 0, 3)
        w = kn[b + 1] - kn[b]
        x = kn[b] + (ua - _CUM[b]) / _MASS[b] * w
        # a zero-width bin has x == its left knot already; keep inside the bin
        x = np.minimum(x, kn[b + 1])
        return x if x.ndim else float(x)

    def pdf(self, x):
        """Density of the continuous part; point masses are not represented."""
        xa = np.asarray(x, dtype=float)
        kn = np.array(self.knots)
        b = np.clip(np.searchsorted(kn, xa, side="right") - 1, 0, 3)
        w = kn[b + 1] - kn[b]
        inside = (xa >= kn[0]) & (xa <= kn[4]) & (w > 0)
        out = np.where(inside, _MASS[b] / np.where(w > 0, w, 1.0), 0.0)
        return out if out.ndim else float(out)

    def moments(self) -> tuple[float, float]:
        """Exact (mean, variance) of the piecewise-uniform density."""
        a = np.array(self.knots[:4])
        b = np.array(self.knots[1:])
        mean = float(np.dot(_MASS, (a + b) / 2))
        second = float(np.dot(_MASS, (a * a + a * b + b * b) / 3))
        var = max(second - mean * mean, 0.0)
        if self.degenerate:
            return self.knots[2], 0.0
        return mean, var

    def mean(self) -> float:
        return self.moments()[0]


def fit_marginal(triple: QuantileTriple | tuple, k: float = DEFAULT_OVERSHOOT) -> Marginal:
    """Extend the 90% interval by ``k`` times its width on each side."""
    if not isinstance(triple, QuantileTriple):
        triple = QuantileTriple.of(tuple(triple))
    if not k >= 0:
        raise InvalidParameter("overshoot", k, "must be >= 0")
    q05, q50, q95 = triple.as_tuple()
    span = q95 - q05
    return Marginal((q05 - k * span, q05, q50, q95, q95 + k * span))


def marginal_on_range(triple: QuantileTriple, lower: float, upper: float) -> Marginal:
    """Marginal for ``triple`` on an externally fixed range (e.g. an intrinsic range)."""
    return Marginal((lower, *triple.as_tuple(), upper))
