"""Closed-form truncated normal oracles and empirical checks.

The CDF and moment formulas here are the analytic yardsticks the samplers
are validated against; the far-tail branches go through scaled
complementary-error-function ratios so they stay accurate where naive
differences of CDF values cancel catastrophically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import erfcx

from .errors import ExtremeTruncationError
from .numerics import SQRT_2PI, normal_cdf, normal_interval_prob, normal_pdf, normal_sf
from .univariate import DrawResult, UnivariateTruncationSpec, standardize

INF = math.inf
_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_MIN_MASS = 1e-300
_TAIL_SWITCH = 5.0  # beyond this the scaled-erfcx route takes over


def _interval_mass(a: float, b: float) -> float:
    mass = normal_interval_prob(a, b)
    if mass < _MIN_MASS:
        raise ExtremeTruncationError(
            f"truncation interval [{a}, {b}] carries mass below {_MIN_MASS:g}"
        )
    return mass


def truncated_cdf(spec: UnivariateTruncationSpec, x: float) -> float:
    """CDF of the truncated normal described by ``spec`` evaluated at ``x``."""
    sb = standardize(spec)
    mass = _interval_mass(sb.a, sb.b)
    if x <= spec.lower:
        return 0.0
    if x >= spec.upper:
        return 1.0
    z = (x - spec.mu) / spec.sigma
    z = min(max(z, sb.a), sb.b)
    return min(1.0, max(0.0, normal_interval_prob(sb.a, z) / mass))


def _tail_moments_scaled(a: float, b: float):
    """Standardized moments for 0 <= a < b via erfcx ratios; b may be inf."""
    e_a = erfcx(a * _INV_SQRT2)
    if b == INF:
        w = 0.0
        e_b = 0.0
    else:
        w = math.exp(0.5 * (a * a - b * b))
        e_b = erfcx(b * _INV_SQRT2)
    mass_over_pdf = 0.5 * SQRT_2PI * (e_a - w * e_b)  # (CDF(b)-CDF(a)) / pdf(a)
    delta = (1.0 - w) / mass_over_pdf
    edge = (a - (0.0 if b == INF else b * w)) / mass_over_pdf  # (a*pdf(a)-b*pdf(b)) / mass
    return delta, 1.0 + edge - delta * delta


def _standard_truncated_moments(a: float, b: float):
    if a == -INF and b == INF:
        return 0.0, 1.0
    if b == INF:
        if a >= _TAIL_SWITCH:
            return _tail_moments_scaled(a, INF)
        delta = normal_pdf(a) / normal_sf(a)
        return delta, 1.0 + a * delta - delta * delta
    if a == -INF:
        delta, var = _standard_truncated_moments(-b, INF)
        return -delta, var
    if a >= _TAIL_SWITCH:
        return _tail_moments_scaled(a, b)
    if b <= -_TAIL_SWITCH:
        delta, var = _tail_moments_scaled(-b, -a)
        return -delta, var
    mass = normal_interval_prob(a, b)
    pa = normal_pdf(a)
    pb = normal_pdf(b)
    delta = (pa - pb) / mass
    return delta, 1.0 + (a * pa - b * pb) / mass - delta * delta


def truncated_moments(spec: UnivariateTruncationSpec):
    """Mean and variance of the truncated normal; raises on negligible mass."""
    sb = standardize(spec)
    _interval_mass(sb.a, sb.b)
    delta, var = _standard_truncated_moments(sb.a, sb.b)
    return spec.mu + spec.sigma * delta, spec.sigma * spec.sigma * var


@dataclass(frozen=True)
class KsReport:
    """One-sample Kolmogorov-Smirnov result with asymptotic p-value."""

    statistic: float
    n: int
    p_value: float


def kolmogorov_pvalue(lam: float) -> float:
    """Asymptotic Kolmogorov survival function, series truncated at 100 terms."""
    if lam <= 1e-3:
        return 1.0
    total = 0.0
    sign = 1.0
    for k in range(1, 101):
        term = sign * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-18:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_test(samples: Sequence[float], cdf: Callable[[float], float]) -> KsReport:
    """One-sample KS test of sorted ``samples`` against the CDF ``cdf``."""
    n = len(samples)
    if n < 10:
        raise ValueError(f"need at least 10 samples, got {n}")
    statistic = 0.0
    prev = -INF
    for i, x in enumerate(samples, start=1):
        if x < prev:
            raise ValueError("samples must be sorted in nondecreasing order")
        prev = x
        f = cdf(x)
        statistic = max(statistic, abs(i / n - f), abs(f - (i - 1) / n))
    return KsReport(statistic=statistic, n=n, p_value=kolmogorov_pvalue(math.sqrt(n) * statistic))


@dataclass(frozen=True)
class AcceptanceStats:
    """Accept-reject bookkeeping: draws kept versus proposals consumed."""

    proposals: int
    accepts: int

    def __post_init__(self):
        if self.proposals < 1:
            raise ValueError("proposals must be >= 1")
        if not 0 <= self.accepts <= self.proposals:
            raise ValueError("accepts must lie in [0, proposals]")

    @property
    def rate(self) -> float:
        return self.accepts / self.proposals

    @property
    def std_error(self) -> float:
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.proposals)


def collect_acceptance(draw: Callable[[], DrawResult], min_proposals: int) -> AcceptanceStats:
    """Call ``draw`` until at least ``min_proposals`` proposals have been consumed."""
    if min_proposals < 1:
        raise ValueError("min_proposals must be >= 1")
    proposals = 0
    accepts = 0
    while proposals < min_proposals:
        res = draw()
        proposals += res.trials
        accepts += 1
    return AcceptanceStats(proposals=proposals, accepts=accepts)


@dataclass(frozen=True)
class MultiChainSpread:
    """Between/within variance spread of one scalar across chains."""

    means: np.ndarray
    variances: np.ndarray
    ratio: float


def multi_chain_spread(chains: Sequence[Sequence[float]]) -> MultiChainSpread:
    """Compare chains started apart: ratio near zero indicates mixing.

    The ratio is the variance of the per-chain means over the average
    within-chain variance; chains frozen at distinct points give the +inf
    sentinel.
    """
    arrs = [np.asarray(c, dtype=np.float64) for c in chains]
    if len(arrs) < 2:
        raise ValueError("need at least 2 chains")
    length = arrs[0].shape[0]
    if any(a.ndim != 1 or a.shape[0] != length for a in arrs):
        raise ValueError("chains must be one-dimensional and of equal length")
    if length < 100:
        raise ValueError(f"chains must have length >= 100, got {length}")
    means = np.array([a.mean() for a in arrs])
    variances = np.array([a.var(ddof=1) for a in arrs])
    between = float(np.var(means, ddof=1))
    within = float(variances.mean())
    if between == 0.0:
        ratio = 0.0
    elif within == 0.0:
        ratio = INF
    else:
        ratio = between / within
    return MultiChainSpread(means=means, variances=variances, ratio=ratio)
