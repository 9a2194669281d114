"""Tests for conditional moments, convex regions, the Gibbs chain, and rejection."""

import math

import numpy as np
import pytest
from scipy.stats import kstest

from oracles import vectorized

from truncsim import (
    Ball,
    Box,
    ChainConfig,
    IllConditionedError,
    InconsistentStateError,
    MvnSpec,
    NotPositiveDefiniteError,
    OrderCone,
    RandomStream,
    SamplingCapError,
    UnivariateTruncationSpec,
    conditional_moments,
    ergodic_average,
    gibbs_sweep,
    invert_spd,
    mvn_rejection,
    run_chain,
    running_average,
    submatrix_inverse,
    truncated_cdf,
)

INF = math.inf

# Frozen from closed-form oracles: 1 - exp(-9/2) and (Phi(0.1) - Phi(-0.1))^2.
BALL_R3_ACCEPTANCE = 0.9888910034617577
TINY_BOX_ACCEPTANCE = 0.006345026488661997


def random_spd(p: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((p, p))
    return a @ a.T + p * np.eye(p)


# ---------------------------------------------------------------------------
# MvnSpec and invert_spd


def test_spec_validation():
    MvnSpec([0.0], [[2.0]])
    with pytest.raises(NotPositiveDefiniteError):
        MvnSpec([0.0, 0.0], [[1.0, 0.9], [0.7, 1.0]])  # asymmetric
    with pytest.raises(NotPositiveDefiniteError):
        MvnSpec([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])  # indefinite
    with pytest.raises(ValueError):
        MvnSpec([0.0, 0.0], [[1.0]])


def test_invert_identity():
    assert np.allclose(invert_spd(np.eye(3)), np.eye(3), atol=1e-14)


def test_invert_two_by_two_closed_form():
    rho = 0.5
    cov = np.array([[1.0, rho], [rho, 1.0]])
    expected = np.array([[1.0, -rho], [-rho, 1.0]]) / (1.0 - rho * rho)
    assert np.allclose(invert_spd(cov), expected, atol=1e-14)


def test_invert_hilbert_like_residual():
    cov = np.array([[1, 1 / 2, 1 / 3], [1 / 2, 1 / 3, 1 / 4], [1 / 3, 1 / 4, 1 / 5]])
    v = invert_spd(cov)
    assert np.abs(cov @ v - np.eye(3)).max() <= 1e-8


def test_invert_rejects_non_spd():
    with pytest.raises(NotPositiveDefiniteError):
        invert_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_invert_condition_guards():
    with pytest.warns(RuntimeWarning):
        invert_spd(np.diag([1.0, 1e-7]))
    with pytest.raises(IllConditionedError):
        invert_spd(np.diag([1.0, 1e-13]))


def test_invert_residual_on_random_suite():
    for p in (2, 3, 5, 8):
        cov = random_spd(p, seed=p)
        v = invert_spd(cov)
        assert np.abs(cov @ v - np.eye(p)).max() <= 1e-10


# ---------------------------------------------------------------------------
# submatrix_inverse


def test_submatrix_p2_is_unit():
    cov = np.array([[1.0, 0.7], [0.7, 1.0]])
    v = invert_spd(cov)
    assert np.allclose(submatrix_inverse(v, 0), np.array([[1.0]]), atol=1e-12)
    assert np.allclose(submatrix_inverse(v, 1), np.array([[1.0]]), atol=1e-12)


def test_submatrix_diagonal_case():
    cov = np.diag([1.0, 4.0, 9.0])
    v = invert_spd(cov)
    assert np.allclose(submatrix_inverse(v, 1), np.diag([1.0, 1.0 / 9.0]), atol=1e-12)


def test_submatrix_matches_direct_inverse():
    cov = random_spd(5, seed=42)
    v = invert_spd(cov)
    for i in range(5):
        keep = np.arange(5) != i
        direct = np.linalg.inv(cov[np.ix_(keep, keep)])
        assert np.abs(submatrix_inverse(v, i) - direct).max() <= 1e-10


def test_submatrix_identity_residual_suite():
    for p in (2, 3, 4, 5, 6):
        for seed in range(10):
            cov = random_spd(p, seed=100 * p + seed)
            v = invert_spd(cov)
            for i in range(p):
                keep = np.arange(p) != i
                prod = submatrix_inverse(v, i) @ cov[np.ix_(keep, keep)]
                assert np.abs(prod - np.eye(p - 1)).max() <= 1e-10


def test_submatrix_validation():
    v = invert_spd(np.eye(3))
    with pytest.raises(IndexError):
        submatrix_inverse(v, 3)
    bad = np.array([[-1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        submatrix_inverse(bad, 0)


# ---------------------------------------------------------------------------
# conditional_moments


def test_bivariate_conditional_moments():
    for rho in (0.0, 0.5, 0.9):
        spec = MvnSpec([0.0, 0.0], [[1.0, rho], [rho, 1.0]])
        moments = conditional_moments(spec)
        for i in range(2):
            assert moments.coeffs[i] == pytest.approx([rho], abs=1e-12)
            assert moments.cond_vars[i] == pytest.approx(1.0 - rho * rho, abs=1e-12)


def test_diagonal_conditional_moments():
    spec = MvnSpec([1.0, -2.0, 3.0], np.diag([1.0, 4.0, 9.0]))
    moments = conditional_moments(spec)
    for i, var in enumerate((1.0, 4.0, 9.0)):
        assert np.allclose(moments.coeffs[i], 0.0, atol=1e-14)
        assert moments.cond_vars[i] == pytest.approx(var, abs=1e-12)


def test_conditional_mean_centering():
    spec = MvnSpec(np.array([1.0, 2.0, -1.0, 0.5]), random_spd(4, seed=7))
    moments = conditional_moments(spec)
    for i in range(4):
        centered = moments.mean[i] + moments.coeffs[i] @ (
            moments.mean_rest[i] - moments.mean_rest[i]
        )
        assert centered == pytest.approx(spec.mean[i], abs=1e-14)


def test_conditional_variance_identity():
    spec = MvnSpec(np.zeros(6), random_spd(6, seed=11))
    moments = conditional_moments(spec)
    for i in range(6):
        assert abs(moments.cond_vars[i] * moments.precision[i, i] - 1.0) <= 1e-10


def test_single_coordinate_degenerates_to_marginal():
    spec = MvnSpec([3.0], [[4.0]])
    moments = conditional_moments(spec)
    assert moments.coeffs[0].shape == (0,)
    assert moments.cond_vars[0] == pytest.approx(4.0, abs=1e-13)


# ---------------------------------------------------------------------------
# regions


def test_ball_slice_at_center():
    ball = Ball((0.0, 0.0), 1.0)
    assert ball.slice_bounds(0, np.array([0.0])) == pytest.approx((-1.0, 1.0))


def test_ball_tangent_slice():
    ball = Ball((0.0, 0.0), 1.0)
    lo, hi = ball.slice_bounds(0, np.array([1.0]))
    assert lo == hi == 0.0


def test_ball_empty_slice():
    ball = Ball((0.0, 0.0), 1.0)
    assert ball.slice_bounds(0, np.array([1.5])) is None


def test_ball_contains_and_initial():
    ball = Ball((1.0, -1.0), 2.0)
    assert ball.contains(np.array([1.0, -1.0]))
    assert ball.contains(np.array([3.0, -1.0]))
    assert not ball.contains(np.array([3.0 + 1e-9, -1.0]))
    assert ball.contains(np.array([3.0 + 1e-13, -1.0]), tol=1e-12)
    assert np.array_equal(ball.initial_point(2), np.array([1.0, -1.0]))


def test_ball_slice_symmetric_under_consistent_permutation():
    ball = Ball((0.5, -0.25, 1.5), 3.0)
    permuted = Ball((0.5, 1.5, -0.25), 3.0)
    rest = np.array([0.3, 0.9])
    assert ball.slice_bounds(0, rest) == permuted.slice_bounds(0, rest[::-1])


def test_ball_validation():
    with pytest.raises(ValueError):
        Ball((0.0, 0.0), 0.0)


def test_box_slices_and_contains():
    box = Box([-1.0, 0.0], [1.0, 2.0])
    assert box.slice_bounds(0, np.array([0.5])) == (-1.0, 1.0)
    assert box.slice_bounds(1, np.array([0.5])) == (0.0, 2.0)
    assert box.contains(np.array([0.0, 1.0]))
    assert not box.contains(np.array([0.0, 2.1]))
    assert np.array_equal(box.initial_point(2), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        Box([0.0, 0.0], [1.0, 0.0])


def test_box_with_infinite_sides():
    box = Box([0.0, -INF], [INF, 0.0])
    assert box.slice_bounds(0, np.array([-1.0])) == (0.0, INF)
    assert box.contains(np.array([5.0, -3.0]))
    assert box.contains(box.initial_point(2))


def test_order_cone_middle_slice():
    cone = OrderCone()
    assert cone.slice_bounds(1, np.array([0.0, 2.0])) == (0.0, 2.0)


def test_order_cone_end_slices_and_caps():
    cone = OrderCone(lower=-1.0, upper=4.0)
    assert cone.slice_bounds(0, np.array([0.5, 2.0])) == (-1.0, 0.5)
    assert cone.slice_bounds(2, np.array([0.5, 2.0])) == (2.0, 4.0)
    assert cone.contains(np.array([-0.5, 0.0, 3.0]))
    assert not cone.contains(np.array([0.0, -0.5, 3.0]))
    assert not cone.contains(np.array([0.0, 0.5, 5.0]))


@pytest.mark.parametrize(
    "cone", [OrderCone(), OrderCone(lower=0.0), OrderCone(upper=1.0), OrderCone(-2.0, 2.0)]
)
def test_order_cone_initial_point_is_inside(cone):
    for p in (1, 2, 5):
        assert cone.contains(cone.initial_point(p))


# ---------------------------------------------------------------------------
# gibbs_sweep


def _standard_bivariate(rho: float) -> MvnSpec:
    return MvnSpec([0.0, 0.0], [[1.0, rho], [rho, 1.0]])


def test_sweep_stays_in_region():
    spec = _standard_bivariate(0.5)
    moments = conditional_moments(spec)
    ball = Ball((0.0, 0.0), 2.0)
    rng = RandomStream(3)
    state = np.zeros(2)
    for _ in range(2000):
        state, trials = gibbs_sweep(state, moments, ball, rng)
        assert ball.contains(state, tol=1e-12)
        assert trials >= 2


def test_sweep_tangent_point_rule():
    spec = _standard_bivariate(0.0)
    moments = conditional_moments(spec)
    ball = Ball((0.0, 0.0), 1.0)
    rng = RandomStream(4)
    state = np.array([0.0, 1.0])  # on the boundary: coordinate 0 slice is a point
    new_state, _ = gibbs_sweep(state, moments, ball, rng)
    assert new_state[0] == 0.0
    assert -1.0 <= new_state[1] <= 1.0


def test_sweep_empty_slice_raises():
    spec = _standard_bivariate(0.0)
    moments = conditional_moments(spec)
    ball = Ball((0.0, 0.0), 1.0)
    rng = RandomStream(5)
    with pytest.raises(InconsistentStateError):
        gibbs_sweep(np.array([5.0, 5.0]), moments, ball, rng)


# ---------------------------------------------------------------------------
# run_chain


def test_chain_stays_inside_ball():
    spec = _standard_bivariate(0.5)
    config = ChainConfig(initial=[0.0, 0.0], n_keep=100_000, burn_in=1000, thin=1, seed=12)
    out = run_chain(spec, Ball((0.0, 0.0), 2.0), config)
    norms = np.linalg.norm(out.draws, axis=1)
    assert norms.max() <= 2.0 + 1e-12
    assert out.total_sweeps == 101_000
    assert out.univariate_trials >= 2 * 101_000


def test_chain_determinism():
    spec = _standard_bivariate(0.5)
    region = Ball((0.0, 0.0), 2.0)
    config = ChainConfig(initial=[0.1, -0.2], n_keep=2000, burn_in=100, thin=2, seed=77)
    a = run_chain(spec, region, config)
    b = run_chain(spec, region, config)
    assert np.array_equal(a.draws, b.draws)
    assert a.univariate_trials == b.univariate_trials
    c = run_chain(spec, region, ChainConfig([0.1, -0.2], 2000, 100, 2, seed=78))
    assert not np.array_equal(a.draws, c.draws)


def test_chain_rejects_bad_initials():
    spec = _standard_bivariate(0.0)
    region = Ball((0.0, 0.0), 1.0)
    with pytest.raises(ValueError):
        run_chain(spec, region, ChainConfig([2.0, 0.0], 10, 0, 1, 0))
    with pytest.raises(ValueError):
        run_chain(spec, region, ChainConfig([0.0, 0.0, 0.0], 10, 0, 1, 0))


def test_chain_config_validation():
    with pytest.raises(ValueError):
        ChainConfig([0.0], n_keep=0)
    with pytest.raises(ValueError):
        ChainConfig([0.0], n_keep=1, thin=0)
    with pytest.raises(ValueError):
        ChainConfig([0.0], n_keep=1, burn_in=-1)


def test_independent_box_marginals_match_univariate_oracle():
    # diagonal covariance + box: coordinates factorize into independent
    # univariate truncated normals, checked marginal by marginal
    spec = MvnSpec([0.0, 0.0], np.eye(2))
    region = Box([-1.0, -1.0], [1.0, 1.0])
    config = ChainConfig(initial=[0.0, 0.0], n_keep=200_000, burn_in=1000, thin=5, seed=21)
    out = run_chain(spec, region, config)
    target = UnivariateTruncationSpec(0.0, 1.0, -1.0, 1.0)
    for j in range(2):
        res = kstest(out.draws[:, j], vectorized(lambda x: truncated_cdf(target, x)))
        assert res.pvalue > 0.001, (j, res)


def test_order_cone_chain_is_ordered():
    spec = MvnSpec(np.zeros(3), np.eye(3))
    region = OrderCone(lower=-2.0, upper=2.0)
    config = ChainConfig(initial=region.initial_point(3), n_keep=5000, burn_in=200, thin=1, seed=9)
    out = run_chain(spec, region, config)
    assert np.all(np.diff(out.draws, axis=1) >= -1e-12)
    assert out.draws.min() >= -2.0 - 1e-12
    assert out.draws.max() <= 2.0 + 1e-12


# ---------------------------------------------------------------------------
# mvn_rejection


def test_rejection_ball_acceptance_matches_chi_square():
    spec = _standard_bivariate(0.0)
    region = Ball((0.0, 0.0), 3.0)
    rng = RandomStream(31)
    chol = np.linalg.cholesky(spec.covariance)
    proposals = 0
    accepts = 0
    while proposals < 100_000:
        res = mvn_rejection(spec, region, rng, chol=chol)
        proposals += res.trials
        accepts += 1
        assert region.contains(res.value, tol=1e-12)
    assert accepts / proposals == pytest.approx(BALL_R3_ACCEPTANCE, abs=0.003)


def test_rejection_tiny_box_acceptance():
    spec = _standard_bivariate(0.0)
    region = Box([-0.1, -0.1], [0.1, 0.1])
    rng = RandomStream(32)
    chol = np.linalg.cholesky(spec.covariance)
    proposals = 0
    accepts = 0
    while proposals < 100_000:
        res = mvn_rejection(spec, region, rng, chol=chol)
        proposals += res.trials
        accepts += 1
    assert accepts / proposals == pytest.approx(TINY_BOX_ACCEPTANCE, abs=0.0005)


def test_rejection_cap_error():
    spec = _standard_bivariate(0.0)
    region = Ball((50.0, 50.0), 0.1)
    rng = RandomStream(33)
    with pytest.raises(SamplingCapError):
        mvn_rejection(spec, region, rng, max_proposals=100)


# ---------------------------------------------------------------------------
# ergodic averages


def test_ergodic_average_of_constant():
    draws = np.zeros((50, 2))
    assert ergodic_average(draws, lambda row: 1.0) == 1.0


def test_ergodic_average_empty_error():
    with pytest.raises(ValueError):
        ergodic_average(np.empty((0, 2)), lambda row: 1.0)


def test_running_average_converges_to_ergodic():
    rng = np.random.default_rng(0)
    draws = rng.standard_normal((500, 2))
    runner = running_average(draws, lambda row: row[0])
    assert runner.shape == (500,)
    assert runner[-1] == pytest.approx(ergodic_average(draws, lambda row: row[0]), abs=1e-12)


def test_symmetric_ball_means_and_indicator():
    spec = _standard_bivariate(0.0)
    config = ChainConfig(initial=[0.0, 0.0], n_keep=50_000, burn_in=500, thin=1, seed=15)
    out = run_chain(spec, Ball((0.0, 0.0), 2.0), config)
    for j in range(2):
        assert abs(ergodic_average(out.draws, lambda row: row[j])) <= 0.02
    share = ergodic_average(out.draws, lambda row: 1.0 if row[0] > 0 else 0.0)
    assert share == pytest.approx(0.5, abs=0.02)
