"""Gibbs sampling for multivariate normals restricted to convex regions.

The conditional means and variances of each coordinate given the others are
precomputed from a single inversion of the covariance matrix; each Gibbs
sweep then reduces to one univariate truncated normal draw per coordinate,
with the truncation interval supplied by the region's slice bounds. A plain
multivariate rejection sampler is included as the exact i.i.d. baseline.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateIntervalError,
    IllConditionedError,
    InconsistentStateError,
    NotPositiveDefiniteError,
    SamplingCapError,
)
from .numerics import RandomStream, draw_standard_normal
from .univariate import (
    DEFAULT_MAX_PROPOSALS,
    SamplerMethod,
    UnivariateTruncationSpec,
    draw_truncated,
)

INF = math.inf
TANGENT_WIDTH = 1e-12
COND_WARN = 1e6
COND_ERROR = 1e12


@dataclass
class MvnSpec:
    """Mean vector and covariance matrix of the untruncated normal."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        self.covariance = np.atleast_2d(np.asarray(self.covariance, dtype=np.float64))
        p = self.mean.shape[0]
        if p < 1 or self.mean.ndim != 1:
            raise ValueError("mean must be a vector of length >= 1")
        if self.covariance.shape != (p, p):
            raise ValueError(
                f"covariance shape {self.covariance.shape} does not match mean length {p}"
            )
        scale = np.abs(self.covariance).max()
        if scale <= 0.0 or not np.isfinite(scale):
            raise NotPositiveDefiniteError("covariance must be finite and nonzero")
        if np.abs(self.covariance - self.covariance.T).max() > 1e-12 * scale:
            raise NotPositiveDefiniteError("covariance must be symmetric")
        try:
            np.linalg.cholesky(self.covariance)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefiniteError("covariance is not positive definite") from exc

    @property
    def p(self) -> int:
        return self.mean.shape[0]


def invert_spd(covariance: np.ndarray) -> np.ndarray:
    """Invert a symmetric positive definite matrix via its Cholesky factor.

    Warns above condition number 1e6 and refuses above 1e12; downstream
    submatrix identities amplify inversion error.
    """
    cov = np.atleast_2d(np.asarray(covariance, dtype=np.float64))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    cond = float(np.linalg.cond(cov))
    if cond > COND_ERROR:
        raise IllConditionedError(f"condition number {cond:.3g} exceeds {COND_ERROR:.0e}")
    if cond > COND_WARN:
        warnings.warn(
            f"covariance condition number {cond:.3g} exceeds {COND_WARN:.0e};"
            " conditional moments may lose accuracy",
            RuntimeWarning,
            stacklevel=2,
        )
    inv_chol = np.linalg.inv(chol)
    precision = inv_chol.T @ inv_chol
    return 0.5 * (precision + precision.T)


def submatrix_inverse(precision: np.ndarray, i: int) -> np.ndarray:
    """Inverse of the covariance submatrix with row/column ``i`` removed.

    Uses the rank-one identity on the global precision matrix, so no
    per-coordinate matrix inversions are needed.
    """
    v = np.asarray(precision, dtype=np.float64)
    p = v.shape[0]
    if not 0 <= i < p:
        raise IndexError(f"coordinate index {i} out of range for p={p}")
    v_ii = v[i, i]
    if v_ii <= 0.0:
        raise ValueError(f"precision diagonal entry {i} is not positive: {v_ii}")
    keep = np.arange(p) != i
    v_rest = v[np.ix_(keep, keep)]
    v_cross = v[keep, i]
    return v_rest - np.outer(v_cross, v_cross) / v_ii


@dataclass
class ConditionalMoments:
    """Per-coordinate conditional mean coefficients and variances.

    ``coeffs[i]`` multiplies (theta_rest - mean_rest) in the conditional
    mean of coordinate i; ``cond_vars[i]`` is its conditional variance.
    """

    mean: np.ndarray
    coeffs: list[np.ndarray]
    cond_vars: np.ndarray
    precision: np.ndarray
    rest_indices: list[np.ndarray] = field(repr=False)
    mean_rest: list[np.ndarray] = field(repr=False)
    cond_sds: np.ndarray = field(repr=False)


def conditional_moments(spec: MvnSpec) -> ConditionalMoments:
    """Precompute all conditional coefficients from one covariance inversion."""
    p = spec.p
    cov = spec.covariance
    precision = invert_spd(cov)
    coeffs: list[np.ndarray] = []
    cond_vars = np.empty(p)
    rest_indices: list[np.ndarray] = []
    mean_rest: list[np.ndarray] = []
    for i in range(p):
        keep = np.flatnonzero(np.arange(p) != i)
        sub_inv = submatrix_inverse(precision, i)
        cross = cov[keep, i]
        coeff = sub_inv @ cross
        var_i = float(cov[i, i] - coeff @ cross)
        if var_i <= 0.0:
            raise NotPositiveDefiniteError(
                f"conditional variance of coordinate {i} is not positive: {var_i}"
            )
        residual = abs(var_i * precision[i, i] - 1.0)
        if residual > 1e-8:
            warnings.warn(
                f"conditional variance identity residual {residual:.3g} for coordinate {i};"
                " covariance may be too ill-conditioned",
                RuntimeWarning,
                stacklevel=2,
            )
        coeffs.append(coeff)
        cond_vars[i] = var_i
        rest_indices.append(keep)
        mean_rest.append(spec.mean[keep].copy())
    return ConditionalMoments(
        mean=spec.mean.copy(),
        coeffs=coeffs,
        cond_vars=cond_vars,
        precision=precision,
        rest_indices=rest_indices,
        mean_rest=mean_rest,
        cond_sds=np.sqrt(cond_vars),
    )


class ConvexRegion:
    """Convex truncation region exposing per-coordinate slice intervals."""

    def slice_bounds(self, i: int, theta_rest: np.ndarray):
        """Interval [lo, hi] available to coordinate ``i`` given the others, or None."""
        raise NotImplementedError

    def contains(self, theta: np.ndarray, tol: float = 0.0) -> bool:
        raise NotImplementedError

    def initial_point(self, p: int) -> np.ndarray:
        """A canonical interior point, used as the default chain start."""
        raise NotImplementedError


class Ball(ConvexRegion):
    """Euclidean ball with given center and radius."""

    def __init__(self, center, radius: float):
        self.center = np.atleast_1d(np.asarray(center, dtype=np.float64))
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {radius}")
        self._center_rest = [np.delete(self.center, i) for i in range(self.center.shape[0])]

    def slice_bounds(self, i: int, theta_rest):
        rest = np.asarray(theta_rest, dtype=np.float64)
        center_rest = self._center_rest[i]
        diff = rest - center_rest
        r_sq = self.radius * self.radius
        disc = r_sq - float(diff @ diff)
        if disc < 0.0:
            # tangent states sit on the boundary up to rounding; only a
            # genuinely exterior state yields an empty slice
            if disc < -1e-12 * r_sq:
                return None
            disc = 0.0
        half = math.sqrt(disc)
        c = self.center[i]
        return (c - half, c + half)

    def contains(self, theta, tol: float = 0.0) -> bool:
        diff = np.asarray(theta, dtype=np.float64) - self.center
        return math.sqrt(float(diff @ diff)) <= self.radius + tol

    def initial_point(self, p: int) -> np.ndarray:
        if p != self.center.shape[0]:
            raise ValueError(f"ball is {self.center.shape[0]}-dimensional, requested p={p}")
        return self.center.copy()


class Box(ConvexRegion):
    """Axis-aligned box; individual bounds may be infinite."""

    def __init__(self, lower, upper):
        self.lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
        self.upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
        if self.lower.shape != self.upper.shape:
            raise ValueError("box bounds must have equal length")
        if not np.all(self.lower < self.upper):
            raise ValueError("box bounds must satisfy lower < upper componentwise")

    def slice_bounds(self, i: int, theta_rest):
        return (float(self.lower[i]), float(self.upper[i]))

    def contains(self, theta, tol: float = 0.0) -> bool:
        t = np.asarray(theta, dtype=np.float64)
        return bool(np.all(t >= self.lower - tol) and np.all(t <= self.upper + tol))

    def initial_point(self, p: int) -> np.ndarray:
        if p != self.lower.shape[0]:
            raise ValueError(f"box is {self.lower.shape[0]}-dimensional, requested p={p}")
        point = np.empty(p)
        for j in range(p):
            lo, hi = self.lower[j], self.upper[j]
            if math.isfinite(lo) and math.isfinite(hi):
                point[j] = 0.5 * (lo + hi)
            elif math.isfinite(lo):
                point[j] = lo + 1.0
            elif math.isfinite(hi):
                point[j] = hi - 1.0
            else:
                point[j] = 0.0
        return point


class OrderCone(ConvexRegion):
    """Nondecreasing-coordinates cone, optionally capped below and above."""

    def __init__(self, lower: float = -INF, upper: float = INF):
        self.lower = float(lower)
        self.upper = float(upper)
        if not self.lower < self.upper:
            raise ValueError("cap bounds must satisfy lower < upper")

    def slice_bounds(self, i: int, theta_rest):
        rest = np.asarray(theta_rest, dtype=np.float64)
        p = rest.shape[0] + 1
        lo = self.lower if i == 0 else max(self.lower, float(rest[i - 1]))
        hi = self.upper if i == p - 1 else min(self.upper, float(rest[i]))
        if lo > hi:
            return None
        return (lo, hi)

    def contains(self, theta, tol: float = 0.0) -> bool:
        t = np.asarray(theta, dtype=np.float64)
        if np.any(np.diff(t) < -tol):
            return False
        return bool(t[0] >= self.lower - tol and t[-1] <= self.upper + tol)

    def initial_point(self, p: int) -> np.ndarray:
        if math.isfinite(self.lower) and math.isfinite(self.upper):
            return np.linspace(self.lower, self.upper, p + 2)[1:-1].copy()
        if math.isfinite(self.lower):
            return self.lower + np.arange(1, p + 1, dtype=np.float64)
        if math.isfinite(self.upper):
            return self.upper - np.arange(p, 0, -1, dtype=np.float64)
        return np.zeros(p)


@dataclass
class ChainConfig:
    """Run-length control for a Gibbs chain."""

    initial: np.ndarray
    n_keep: int
    burn_in: int = 1000
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        self.initial = np.atleast_1d(np.asarray(self.initial, dtype=np.float64))
        if self.n_keep < 1:
            raise ValueError(f"n_keep must be >= 1, got {self.n_keep}")
        if self.burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.thin < 1:
            raise ValueError(f"thin must be >= 1, got {self.thin}")


@dataclass
class ChainOutput:
    """Kept Gibbs draws plus sweep and proposal counters."""

    draws: np.ndarray
    total_sweeps: int
    univariate_trials: int


def gibbs_sweep(
    state: np.ndarray,
    moments: ConditionalMoments,
    region: ConvexRegion,
    rng: RandomStream,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
):
    """One full ascending-scan sweep; returns (new state, proposals consumed).

    A slice narrower than 1e-12 leaves its coordinate unchanged (tangent
    states arise from rounding at curved boundaries and must not kill the
    chain); an empty slice raises, since it means the state left the region.
    """
    theta = np.array(state, dtype=np.float64, copy=True)
    mean = moments.mean
    trials = 0
    for i in range(theta.shape[0]):
        rest = theta[moments.rest_indices[i]]
        bounds = region.slice_bounds(i, rest)
        if bounds is None:
            raise InconsistentStateError(
                f"slice for coordinate {i} is empty; state {theta.tolist()} left the region"
            )
        lo, hi = bounds
        if hi - lo < TANGENT_WIDTH:
            continue
        cond_mean = float(mean[i] + moments.coeffs[i] @ (rest - moments.mean_rest[i]))
        spec_i = UnivariateTruncationSpec(cond_mean, float(moments.cond_sds[i]), lo, hi)
        try:
            res = draw_truncated(spec_i, SamplerMethod.AUTO, rng, max_proposals)
        except DegenerateIntervalError:
            continue
        theta[i] = res.value
        trials += res.trials
    return theta, trials


def run_chain(
    spec: MvnSpec,
    region: ConvexRegion,
    config: ChainConfig,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
) -> ChainOutput:
    """Run a Gibbs chain: burn-in sweeps, then keep every thin-th state."""
    initial = config.initial
    if initial.shape[0] != spec.p:
        raise ValueError(
            f"initial point has length {initial.shape[0]}, expected {spec.p}"
        )
    if not region.contains(initial):
        raise ValueError(f"initial point {initial.tolist()} lies outside the region")
    moments = conditional_moments(spec)
    rng = RandomStream(config.seed)
    state = initial.copy()
    trials = 0
    for _ in range(config.burn_in):
        state, t = gibbs_sweep(state, moments, region, rng, max_proposals)
        trials += t
    draws = np.empty((config.n_keep, spec.p))
    for k in range(config.n_keep):
        for _ in range(config.thin):
            state, t = gibbs_sweep(state, moments, region, rng, max_proposals)
            trials += t
        draws[k] = state
    return ChainOutput(
        draws=draws,
        total_sweeps=config.burn_in + config.n_keep * config.thin,
        univariate_trials=trials,
    )


@dataclass(frozen=True)
class RejectionDraw:
    """One exact draw from the restricted normal plus proposals consumed."""

    value: np.ndarray
    trials: int


def mvn_rejection(
    spec: MvnSpec,
    region: ConvexRegion,
    rng: RandomStream,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
    chol: np.ndarray | None = None,
) -> RejectionDraw:
    """Propose from the unrestricted normal until a draw lands in the region.

    Exact and i.i.d., so it serves as the gold-standard oracle for chain
    validation; expect it to be slow when the region carries little mass.
    """
    if chol is None:
        chol = np.linalg.cholesky(spec.covariance)
    p = spec.p
    mean = spec.mean
    z = np.empty(p)
    trials = 0
    while trials < max_proposals:
        trials += 1
        for j in range(p):
            z[j] = draw_standard_normal(rng)
        x = mean + chol @ z
        if region.contains(x):
            return RejectionDraw(value=x, trials=trials)
    raise SamplingCapError("multivariate rejection exhausted its budget", trials)


def ergodic_average(draws, f) -> float:
    """Empirical mean of f(theta) along the chain."""
    arr = np.atleast_2d(np.asarray(draws, dtype=np.float64))
    if arr.shape[0] == 0:
        raise ValueError("cannot average over an empty set of draws")
    return float(np.mean([f(row) for row in arr]))


def running_average(draws, f) -> np.ndarray:
    """Partial ergodic means after 1, 2, ..., N draws, for convergence monitoring."""
    arr = np.atleast_2d(np.asarray(draws, dtype=np.float64))
    if arr.shape[0] == 0:
        raise ValueError("cannot average over an empty set of draws")
    values = np.array([f(row) for row in arr], dtype=np.float64)
    return np.cumsum(values) / np.arange(1, values.shape[0] + 1)
