"""One-sided and two-sided truncated normal samplers.

Four interchangeable sampling routes are provided (repeated normal draws,
CDF inversion, an optimal shifted-exponential accept-reject step, and a
uniform accept-reject step for bounded intervals), together with their
closed-form acceptance probabilities and an automatic dispatcher that picks
the route with the highest single-pass acceptance for the given bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import erfcx

from .errors import DegenerateIntervalError, SamplingCapError
from .numerics import (
    SQRT_2PI,
    RandomStream,
    draw_standard_normal,
    normal_cdf,
    normal_interval_prob,
    normal_quantile,
    normal_sf,
)

INF = math.inf
DEFAULT_MAX_PROPOSALS = 1_000_000
DEGENERATE_WIDTH = 1e-12

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_SQRT_HALF_PI = 0.5 * SQRT_2PI  # sqrt(pi/2)


class SamplerMethod(Enum):
    """Available sampling routes; values double as CLI names."""

    REPEATED_NORMAL = "normal"
    INVERSION = "inversion"
    EXPONENTIAL_AR = "exp-ar"
    UNIFORM_AR = "uniform-ar"
    ONE_SIDED_THEN_REJECT = "one-sided-reject"
    AUTO = "auto"


@dataclass(frozen=True)
class UnivariateTruncationSpec:
    """Location, scale and (possibly infinite) truncation bounds.

    ``allow_untruncated`` must be set explicitly to describe a plain normal
    (both bounds infinite); that degenerate case is otherwise rejected so a
    missing bound is caught early.
    """

    mu: float
    sigma: float
    lower: float = -INF
    upper: float = INF
    allow_untruncated: bool = False

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError(f"location must be finite, got {self.mu}")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise ValueError(f"scale must be positive and finite, got {self.sigma}")
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("truncation bounds must not be NaN")
        if not self.lower < self.upper:
            raise ValueError(f"bounds out of order: [{self.lower}, {self.upper}]")
        if self.lower == INF or self.upper == -INF:
            raise ValueError("truncation bound has the wrong sign of infinity")
        if self.lower == -INF and self.upper == INF and not self.allow_untruncated:
            raise ValueError(
                "both bounds infinite; pass allow_untruncated=True for a plain normal"
            )


class StandardizedBounds(NamedTuple):
    """Bounds mapped to the standard normal scale; infinities preserved."""

    a: float
    b: float


@dataclass(frozen=True)
class ExponentialProposal:
    """Shifted exponential proposal with its accept-reject envelope constant."""

    alpha: float
    shift: float
    bound_constant: float


class DrawResult(NamedTuple):
    """A single draw plus the number of proposals it consumed."""

    value: float
    trials: int


def standardize(spec: UnivariateTruncationSpec) -> StandardizedBounds:
    """Map the truncation bounds onto the standard normal scale."""
    a = (spec.lower - spec.mu) / spec.sigma
    b = (spec.upper - spec.mu) / spec.sigma
    if a == b:
        raise DegenerateIntervalError(
            f"interval [{spec.lower}, {spec.upper}] collapses after rescaling"
        )
    return StandardizedBounds(a, b)


def alpha_star(a: float) -> float:
    """Acceptance-maximizing rate of the shifted-exponential proposal at bound ``a``."""
    if not math.isfinite(a):
        raise ValueError(f"truncation point must be finite, got {a}")
    return 0.5 * (a + math.sqrt(a * a + 4.0))


def exponential_proposal(shift: float, alpha: float | None = None) -> ExponentialProposal:
    """Build the shifted-exponential proposal for a lower bound at ``shift``.

    ``alpha`` defaults to the optimal rate. The envelope constant M satisfies
    density(z) <= M * proposal(z) on [shift, inf) with equality at the mode
    of the ratio, so 1/M is the single-pass acceptance probability.
    """
    if alpha is None:
        alpha = alpha_star(shift)
    if not alpha > 0.0:
        raise ValueError(f"proposal rate must be positive, got {alpha}")
    if shift >= 0.0:
        scaled_tail = _SQRT_HALF_PI * erfcx(shift * _INV_SQRT2)  # exp(s^2/2)*sqrt(2pi)*Phi(-s)
        if alpha >= shift:
            gap = alpha - shift
            m = math.exp(0.5 * gap * gap) / (alpha * scaled_tail)
        else:
            m = 1.0 / (alpha * scaled_tail)
    else:
        # alpha > 0 > shift always lands in the first case
        m = math.exp(0.5 * alpha * alpha - alpha * shift) / (alpha * SQRT_2PI * normal_sf(shift))
    return ExponentialProposal(alpha=alpha, shift=shift, bound_constant=m)


def acceptance_one_sided(a: float, alpha: float) -> float:
    """Single-pass acceptance of the exponential AR sampler on [a, inf)."""
    if not alpha > 0.0:
        raise ValueError(f"proposal rate must be positive, got {alpha}")
    if not math.isfinite(a):
        raise ValueError(f"truncation point must be finite, got {a}")
    if a >= 0.0:
        scaled_tail = erfcx(a * _INV_SQRT2)  # exp(a^2/2) * erfc(a/sqrt(2))
        if alpha > a:
            gap = alpha - a
            p = alpha * _SQRT_HALF_PI * math.exp(-0.5 * gap * gap) * scaled_tail
        else:
            p = alpha * _SQRT_HALF_PI * scaled_tail
    else:
        p = alpha * math.exp(alpha * a - 0.5 * alpha * alpha) * normal_sf(a) * SQRT_2PI
    return min(p, 1.0)


def eq21_bound(a: float) -> float:
    """Smallest upper bound above which one-sided-then-reject beats uniform AR.

    Defined for a >= 0; the gap above ``a`` shrinks monotonically as ``a``
    grows, so tight intervals far in the tail favor the uniform proposal.
    """
    if not a >= 0.0:
        raise ValueError(f"bound rule only applies for nonnegative lower bound, got {a}")
    root = math.sqrt(a * a + 4.0)
    return a + (2.0 * math.sqrt(math.e) / (a + root)) * math.exp(0.25 * (a * a - a * root))


def choose_one_sided_method(a: float) -> SamplerMethod:
    """Best one-sided route: exponential AR once the bound reaches the mean."""
    return SamplerMethod.EXPONENTIAL_AR if a >= 0.0 else SamplerMethod.REPEATED_NORMAL


def choose_two_sided_method(a: float, b: float) -> SamplerMethod:
    """Best two-sided route for standardized bounds (infinities allowed).

    Intervals in the lower tail are dispatched via their mirror image. For
    intervals at or above zero the choice follows the exact crossover of
    eq21_bound; for intervals straddling zero, repeated normal sampling wins
    exactly when the width reaches sqrt(2*pi).
    """
    if not a < b:
        raise ValueError(f"bounds out of order: ({a}, {b})")
    if b <= 0.0:
        return choose_two_sided_method(-b, -a)
    if a >= 0.0:
        if b > eq21_bound(a):
            return SamplerMethod.ONE_SIDED_THEN_REJECT
        return SamplerMethod.UNIFORM_AR
    if b - a >= SQRT_2PI:
        return SamplerMethod.REPEATED_NORMAL
    return SamplerMethod.UNIFORM_AR


def _scaled_interval_mass(a: float, b: float) -> float:
    """exp(a^2/2) * (CDF(b) - CDF(a)) for 0 <= a < b, stable far into the tail."""
    first = erfcx(a * _INV_SQRT2)
    if b == INF:
        second = 0.0
    else:
        second = math.exp(0.5 * (a * a - b * b)) * erfcx(b * _INV_SQRT2)
    return 0.5 * (first - second)


def acceptance_two_sided(a: float, b: float, method: SamplerMethod) -> float:
    """Single-pass acceptance of ``method`` on the standardized interval [a, b]."""
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"bounds must be finite and ordered, got ({a}, {b})")
    if method is SamplerMethod.AUTO:
        method = choose_two_sided_method(a, b)
    if method is SamplerMethod.INVERSION:
        return 1.0
    if method is SamplerMethod.REPEATED_NORMAL:
        return normal_interval_prob(a, b)
    if method is SamplerMethod.UNIFORM_AR:
        width = b - a
        if a > 0.0:
            p = SQRT_2PI * _scaled_interval_mass(a, b) / width
        elif b < 0.0:
            p = SQRT_2PI * _scaled_interval_mass(-b, -a) / width
        else:
            p = SQRT_2PI * normal_interval_prob(a, b) / width
        return min(p, 1.0)
    if method is SamplerMethod.ONE_SIDED_THEN_REJECT:
        if b <= 0.0:
            return acceptance_two_sided(-b, -a, method)
        ast = alpha_star(a)
        if a >= 0.0:
            gap = ast - a
            p = ast * SQRT_2PI * math.exp(-0.5 * gap * gap) * _scaled_interval_mass(a, b)
        else:
            p = (
                ast
                * math.exp(ast * a - 0.5 * ast * ast)
                * SQRT_2PI
                * normal_interval_prob(a, b)
            )
        return min(p, 1.0)
    raise ValueError(f"no acceptance formula for method {method!r}")


def draw_one_sided(
    a: float,
    method: SamplerMethod = SamplerMethod.AUTO,
    rng: RandomStream | None = None,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> DrawResult:
    """Draw a standard normal truncated to [a, inf)."""
    if rng is None:
        raise ValueError("a RandomStream is required")
    if not math.isfinite(a):
        raise ValueError(f"truncation point must be finite, got {a}")
    if method is SamplerMethod.AUTO:
        method = choose_one_sided_method(a)

    if method is SamplerMethod.INVERSION:
        u = rng.next_uniform()
        # Complementary form keeps tail resolution when a is large.
        z = -normal_quantile((1.0 - u) * normal_sf(a))
        return DrawResult(max(z, a), 1)

    if method is SamplerMethod.EXPONENTIAL_AR:
        ast = alpha_star(a)
        inv_ast = 1.0 / ast
        trials = 0
        while trials < max_proposals:
            trials += 1
            z = a - math.log(rng.next_uniform()) * inv_ast
            gap = z - ast
            if rng.next_uniform() <= math.exp(-0.5 * gap * gap):
                return DrawResult(z, trials)
        raise SamplingCapError("exponential accept-reject exhausted its budget", trials)

    if method is SamplerMethod.REPEATED_NORMAL:
        trials = 0
        while trials < max_proposals:
            trials += 1
            z = draw_standard_normal(rng)
            if z >= a:
                return DrawResult(z, trials)
        raise SamplingCapError("repeated normal sampling exhausted its budget", trials)

    raise ValueError(f"method {method!r} does not apply to a one-sided interval")


def draw_right_truncated(
    b: float,
    method: SamplerMethod = SamplerMethod.AUTO,
    rng: RandomStream | None = None,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> DrawResult:
    """Draw a standard normal truncated to (-inf, b] by reflecting the one-sided sampler."""
    res = draw_one_sided(-b, method, rng, max_proposals)
    return DrawResult(-res.value, res.trials)


def draw_two_sided(
    a: float,
    b: float,
    method: SamplerMethod = SamplerMethod.AUTO,
    rng: RandomStream | None = None,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> DrawResult:
    """Draw a standard normal truncated to the finite interval [a, b]."""
    if rng is None:
        raise ValueError("a RandomStream is required")
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"bounds must be finite and ordered, got ({a}, {b})")
    width = b - a
    if width < DEGENERATE_WIDTH:
        raise DegenerateIntervalError(
            f"interval width {width:g} is below the supported resolution"
        )
    if method is SamplerMethod.AUTO:
        method = choose_two_sided_method(a, b)

    if method is SamplerMethod.INVERSION:
        u = rng.next_uniform()
        if a >= 0.0:
            fa = normal_sf(a)
            fb = normal_sf(b)
            z = -normal_quantile(fa - u * (fa - fb))
        else:
            fa = normal_cdf(a)
            fb = normal_cdf(b)
            z = normal_quantile(fa + u * (fb - fa))
        return DrawResult(min(max(z, a), b), 1)

    if method is SamplerMethod.UNIFORM_AR:
        if b < 0.0:
            shift_sq = b * b
        elif a > 0.0:
            shift_sq = a * a
        else:
            shift_sq = 0.0
        trials = 0
        while trials < max_proposals:
            trials += 1
            z = a + width * rng.next_uniform()
            if rng.next_uniform() <= math.exp(0.5 * (shift_sq - z * z)):
                return DrawResult(z, trials)
        raise SamplingCapError("uniform accept-reject exhausted its budget", trials)

    if method is SamplerMethod.REPEATED_NORMAL:
        trials = 0
        while trials < max_proposals:
            trials += 1
            z = draw_standard_normal(rng)
            if a <= z <= b:
                return DrawResult(z, trials)
        raise SamplingCapError("repeated normal sampling exhausted its budget", trials)

    if method is SamplerMethod.ONE_SIDED_THEN_REJECT:
        if b <= 0.0:
            res = draw_two_sided(-b, -a, method, rng, max_proposals)
            return DrawResult(-res.value, res.trials)
        ast = alpha_star(a)
        inv_ast = 1.0 / ast
        trials = 0
        while trials < max_proposals:
            trials += 1
            z = a - math.log(rng.next_uniform()) * inv_ast
            gap = z - ast
            if rng.next_uniform() <= math.exp(-0.5 * gap * gap) and z <= b:
                return DrawResult(z, trials)
        raise SamplingCapError("one-sided-then-reject exhausted its budget", trials)

    raise ValueError(f"unknown sampling method {method!r}")


def _one_sided_method(method: SamplerMethod) -> SamplerMethod:
    if method is SamplerMethod.UNIFORM_AR:
        raise ValueError("uniform-ar requires two finite bounds")
    if method is SamplerMethod.ONE_SIDED_THEN_REJECT:
        # with no upper bound the outer rejection never fires
        return SamplerMethod.EXPONENTIAL_AR
    return method


def draw_truncated(
    spec: UnivariateTruncationSpec,
    method: SamplerMethod = SamplerMethod.AUTO,
    rng: RandomStream | None = None,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> DrawResult:
    """Draw from a truncated normal with arbitrary location/scale and bounds.

    Standardizes the bounds, routes to the matching one- or two-sided
    sampler, and maps the draw back with value = mu + sigma * z, so a shared
    stream yields bit-identical results to sampling on the standard scale.
    """
    if rng is None:
        raise ValueError("a RandomStream is required")
    sb = standardize(spec)
    if sb.a == -INF and sb.b == INF:
        if method is SamplerMethod.INVERSION:
            inner = DrawResult(normal_quantile(rng.next_uniform()), 1)
        else:
            inner = DrawResult(draw_standard_normal(rng), 1)
    elif sb.b == INF:
        inner = draw_one_sided(sb.a, _one_sided_method(method), rng, max_proposals)
    elif sb.a == -INF:
        inner = draw_right_truncated(sb.b, _one_sided_method(method), rng, max_proposals)
    else:
        inner = draw_two_sided(sb.a, sb.b, method, rng, max_proposals)
    # clamp shields the support guarantee from 1-ulp rounding of the affine map
    value = min(max(spec.mu + spec.sigma * inner.value, spec.lower), spec.upper)
    return DrawResult(value, inner.trials)


def sample_truncated(
    spec: UnivariateTruncationSpec,
    n: int,
    method: SamplerMethod = SamplerMethod.AUTO,
    rng: RandomStream | None = None,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> tuple[np.ndarray, int]:
    """Draw ``n`` values; returns (numpy array of draws, total proposals consumed)."""
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    out = np.empty(n, dtype=np.float64)
    trials = 0
    for i in range(n):
        res = draw_truncated(spec, method, rng, max_proposals)
        out[i] = res.value
        trials += res.trials
    return out, trials
