import math

import numpy as np
import pytest

from intentd.baseline import (
    BaselineParams,
    BayesIntentFilter,
    PosteriorState,
    reset,
    step_likelihood,
    update,
)
from intentd.features import FeatureFrame
from intentd.planner import GridPlanner
from intentd.world import Goal, GoalSet, ObstacleMap


def frame_with_thetas(*thetas, t=0.0):
    return FeatureFrame(t=t, per_goal=tuple((0.0, 1.0, th) for th in thetas))


UNINFORMATIVE = BaselineParams(kappa=0.0, lam=0.0, self_transition=0.95)


class TestReset:
    def test_two_goals(self):
        assert reset(2).probabilities == (0.5, 0.5)

    def test_five_goals(self):
        assert reset(5).probabilities == (0.2,) * 5

    def test_too_few_rejected(self):
        with pytest.raises(ValueError):
            reset(1)

    def test_first_update_skips_progress(self):
        assert reset(3).last_path_lengths is None


class TestStepLikelihood:
    def test_uninformative(self):
        lik = step_likelihood(UNINFORMATIVE, frame_with_thetas(0.3, -1.0, 2.0), [0, 0, 0])
        assert lik == (1.0, 1.0, 1.0)

    def test_heading_ratio_e4(self):
        params = BaselineParams(kappa=2.0, lam=0.0)
        lik = step_likelihood(params, frame_with_thetas(0.0, math.pi), [0.0, 0.0])
        assert lik[0] / lik[1] == pytest.approx(math.exp(4.0))

    def test_progress_ratio(self):
        params = BaselineParams(kappa=0.0, lam=1.5)
        lik = step_likelihood(params, frame_with_thetas(0.5, 0.5), [0.2, 0.0])
        assert lik[0] / lik[1] == pytest.approx(math.exp(0.3))

    def test_progress_clamped(self):
        params = BaselineParams(kappa=0.0, lam=1.0)
        lik = step_likelihood(params, frame_with_thetas(0.0, 0.0), [50.0, -50.0])
        assert lik[0] == pytest.approx(math.exp(0.5))
        assert lik[1] == pytest.approx(math.exp(-0.5))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            step_likelihood(UNINFORMATIVE, frame_with_thetas(0.0, 0.0), [math.nan, 0.0])

    def test_positive(self):
        rng = np.random.default_rng(0)
        params = BaselineParams(kappa=3.0, lam=2.0)
        for _ in range(100):
            lik = step_likelihood(
                params,
                frame_with_thetas(*rng.uniform(-math.pi, math.pi, 4)),
                list(rng.uniform(-2, 2, 4)),
            )
            assert all(v > 0 and math.isfinite(v) for v in lik)


class TestUpdate:
    def test_uniform_fixed_point(self):
        state = reset(3)
        for i in range(10):
            state = update(state, UNINFORMATIVE, frame_with_thetas(1.0, 1.0, 1.0, t=i),
                           [5.0, 5.0, 5.0])
            for p in state.probabilities:
                assert p == pytest.approx(1 / 3)

    def test_transition_contracts_to_uniform(self):
        eps = 1e-3
        state = PosteriorState(probabilities=(1 - 2 * eps, eps, eps))
        top = state.probabilities[0]
        for _ in range(5):
            state = update(state, UNINFORMATIVE, frame_with_thetas(0, 0, 0), [1, 1, 1])
            assert state.probabilities[0] < top
            top = state.probabilities[0]

    def test_one_step_bayes_by_hand(self):
        # N=2, uniform prior, likelihood (e, 1), identity transition
        params = BaselineParams(kappa=1.0, lam=0.0, self_transition=1.0, prob_floor=0.0)
        state = reset(2)
        # theta 0 -> exp(kappa*1) = e; theta pi/2 -> exp(0) = 1
        state = update(state, params, frame_with_thetas(0.0, math.pi / 2), [1.0, 1.0])
        e = math.e
        assert state.probabilities[0] == pytest.approx(e / (e + 1), abs=1e-12)
        assert state.probabilities[1] == pytest.approx(1 / (e + 1), abs=1e-12)

    def test_normalized_after_every_update(self):
        rng = np.random.default_rng(1)
        params = BaselineParams(kappa=2.0, lam=1.5, self_transition=0.9)
        state = reset(4)
        lengths = list(rng.uniform(1, 10, 4))
        for i in range(200):
            lengths = [max(0.1, l + rng.uniform(-0.3, 0.3)) for l in lengths]
            state = update(
                state, params,
                frame_with_thetas(*rng.uniform(-math.pi, math.pi, 4), t=i), lengths)
            assert abs(sum(state.probabilities) - 1.0) <= 1e-9
            assert min(state.probabilities) >= params.prob_floor

    def test_sequential_equals_batch_with_identity_transition(self):
        rng = np.random.default_rng(3)
        params = BaselineParams(kappa=1.3, lam=0.8, self_transition=1.0, prob_floor=0.0)
        state = reset(3)
        frames = [frame_with_thetas(*rng.uniform(-3, 3, 3), t=i) for i in range(6)]
        lengths = [list(rng.uniform(2, 8, 3)) for _ in range(6)]
        for f, l in zip(frames, lengths):
            state = update(state, params, f, l)

        # batch: prior * product of the same per-step likelihoods
        post = [1 / 3] * 3
        prev = None
        for f, l in zip(frames, lengths):
            progress = [0.0] * 3 if prev is None else [a - b for a, b in zip(prev, l)]
            lik = step_likelihood(params, f, progress)
            post = [p * v for p, v in zip(post, lik)]
            prev = l
        z = sum(post)
        post = [p / z for p in post]
        for got, want in zip(state.probabilities, post):
            assert got == pytest.approx(want, rel=1e-9)

    def test_floor_keeps_goals_recoverable(self):
        params = BaselineParams(kappa=3.0, lam=0.0, self_transition=0.95)
        state = reset(2)
        # hammer goal 1 with contrary evidence
        for i in range(300):
            state = update(state, params, frame_with_thetas(0.0, math.pi, t=i), [1, 1])
        assert state.probabilities[1] >= params.prob_floor
        # now goal 1 becomes the target; posterior must recover quickly
        for i in range(40):
            state = update(state, params, frame_with_thetas(math.pi, 0.0, t=i), [1, 1])
        assert state.probabilities[1] > 0.9

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            update(reset(3), UNINFORMATIVE, frame_with_thetas(0.0, 0.0), [1, 1])


class TestBaselineParams:
    def test_self_transition_bounds(self):
        BaselineParams(self_transition=1.0).validate(3)  # upper bound inclusive
        BaselineParams(self_transition=1 / 3).validate(3)
        with pytest.raises(ValueError):
            BaselineParams(self_transition=0.2).validate(3)
        with pytest.raises(ValueError):
            BaselineParams(self_transition=1.1).validate(3)

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            BaselineParams(kappa=-1.0).validate(2)


class TestBayesIntentFilter:
    @pytest.fixture
    def setup(self):
        omap = ObstacleMap((10.0, 10.0), obstacles=((4.0, 0.0, 1.0, 6.0),))
        goals = GoalSet((Goal(0, "a", (8.0, 2.0)), Goal(1, "b", (2.0, 8.0))))
        planner = GridPlanner(omap, inflation_radius=0.2)
        return goals, planner

    def test_path_lengths_match_planner(self, setup):
        goals, planner = setup
        filt = BayesIntentFilter(goals, planner)
        p = (1.0, 1.0)
        lengths = filt.path_lengths_at(p)
        assert lengths[0] == planner.path_length(p, goals[0].position)
        assert lengths[1] == planner.path_length(p, goals[1].position)

    def test_emits_boir_estimates(self, setup):
        goals, planner = setup
        filt = BayesIntentFilter(goals, planner)
        est = filt.update(frame_with_thetas(0.0, 2.0, t=0.5), (1.0, 1.0))
        assert est.source == "boir"
        assert est.t == 0.5
        assert abs(sum(est.probabilities) - 1) < 1e-9
        assert est.predicted == 0

    def test_restart(self, setup):
        goals, planner = setup
        filt = BayesIntentFilter(goals, planner)
        filt.update(frame_with_thetas(0.0, 2.0), (1.0, 1.0))
        filt.restart()
        assert filt.state.probabilities == (0.5, 0.5)
        assert filt.state.last_path_lengths is None
