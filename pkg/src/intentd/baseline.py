"""Reconstructed Bayesian goal estimator (path length + angle features).

A recursive filter over the goal set: a sticky uniform-offdiagonal
transition spreads belief each step, then an exponential-family likelihood
built from the heading error to each goal and the per-step decrease in
planned path length re-weights it. A small probability floor keeps every
goal recoverable after the operator switches intent.

The comparison method this stands in for is described in its source paper
only by its feature set; every constant here is a surfaced parameter and is
recorded in evaluation reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .features import FeatureFrame
from .forest import IntentEstimate
from .planner import GridPlanner
from .world import GoalSet

PROGRESS_CLAMP = 0.5  # meters per step; bounds likelihood ratios against planner noise


@dataclass(frozen=True)
class BaselineParams:
    kappa: float = 2.0            # heading concentration
    lam: float = 1.5              # path-progress weight per meter
    self_transition: float = 0.95
    prob_floor: float = 1e-6

    def validate(self, n_goals: int) -> None:
        if self.kappa < 0 or self.lam < 0:
            raise ValueError("kappa and lam must be non-negative")
        if not (1.0 / n_goals <= self.self_transition <= 1.0):
            raise ValueError(
                f"self_transition must lie in [1/{n_goals}, 1], got {self.self_transition}")
        if not 0.0 <= self.prob_floor < 1.0 / n_goals:
            raise ValueError("prob_floor must be in [0, 1/N)")


@dataclass(frozen=True)
class PosteriorState:
    probabilities: tuple[float, ...]
    last_path_lengths: Optional[tuple[float, ...]] = None
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "probabilities", tuple(self.probabilities))
        if self.last_path_lengths is not None:
            object.__setattr__(self, "last_path_lengths", tuple(self.last_path_lengths))
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ValueError("posterior must sum to 1")


def reset(n_goals: int, t0: float = 0.0) -> PosteriorState:
    """Uniform posterior; the first update skips the path-progress term."""
    if n_goals < 2:
        raise ValueError(f"need at least 2 goals, got {n_goals}")
    return PosteriorState(probabilities=(1.0 / n_goals,) * n_goals, t=t0)


def step_likelihood(
    params: BaselineParams,
    frame: FeatureFrame,
    progress: Sequence[float],
) -> tuple[float, ...]:
    """Per-goal likelihood exp(kappa*cos(theta)) * exp(lam*clamp(dpath))."""
    if len(progress) != frame.n_goals:
        raise ValueError(f"progress has {len(progress)} entries, frame has {frame.n_goals} goals")
    out = []
    for (_, _, theta), dp in zip(frame.per_goal, progress):
        if not (math.isfinite(theta) and math.isfinite(dp)):
            raise ValueError("non-finite observation in likelihood input")
        dp = max(-PROGRESS_CLAMP, min(PROGRESS_CLAMP, dp))
        out.append(math.exp(params.kappa * math.cos(theta)) * math.exp(params.lam * dp))
    return tuple(out)


def update(
    state: PosteriorState,
    params: BaselineParams,
    frame: FeatureFrame,
    path_lengths: Sequence[float],
) -> PosteriorState:
    """One predict/correct cycle of the recursive goal filter."""
    n = len(state.probabilities)
    if frame.n_goals != n or len(path_lengths) != n:
        raise ValueError("frame/path_lengths size does not match posterior")
    params.validate(n)
    st = params.self_transition
    off = (1.0 - st) / (n - 1)
    p = state.probabilities
    total = sum(p)
    predicted = [st * p[g] + off * (total - p[g]) for g in range(n)]

    if state.last_path_lengths is None:
        progress = [0.0] * n
    else:
        progress = [prev - cur for prev, cur in zip(state.last_path_lengths, path_lengths)]
    lik = step_likelihood(params, frame, progress)

    post = [l * q for l, q in zip(lik, predicted)]
    z = sum(post)
    if z <= 0.0 or not math.isfinite(z):
        raise RuntimeError("posterior normalizer degenerate; likelihoods must stay positive")
    post = [q / z for q in post]
    if params.prob_floor > 0.0:
        for _ in range(4):
            if min(post) >= params.prob_floor:
                break
            post = [max(q, params.prob_floor) for q in post]
            z = sum(post)
            post = [q / z for q in post]
    return PosteriorState(
        probabilities=tuple(post), last_path_lengths=tuple(path_lengths), t=frame.t)


def _argmax_lowest(values: Sequence[float]) -> int:
    best_i, best_v = 0, values[0]
    for i, v in enumerate(values):
        if v > best_v:
            best_i, best_v = i, v
    return best_i


class BayesIntentFilter:
    """Per-trial convenience wrapper binding the filter to a scenario.

    Precomputes one distance field per goal so per-frame path lengths are
    grid lookups; unreachable cells fall back to the planner's penalty
    length, keeping posterior support full.
    """

    def __init__(self, goals: GoalSet, planner: GridPlanner,
                 params: BaselineParams = BaselineParams()):
        params.validate(len(goals))
        self.goals = goals
        self.planner = planner
        self.params = params
        self.fields = [planner.distance_field(g.position) for g in goals]
        self.state = reset(len(goals))

    def path_lengths_at(self, position: tuple[float, float]) -> list[float]:
        return [self.planner.field_lookup(f, position) for f in self.fields]

    def restart(self, t0: float = 0.0) -> None:
        self.state = reset(len(self.goals), t0)

    def update(self, frame: FeatureFrame, position: tuple[float, float]) -> IntentEstimate:
        self.state = update(self.state, self.params, frame, self.path_lengths_at(position))
        p = self.state.probabilities
        return IntentEstimate(
            t=frame.t, probabilities=p, predicted=_argmax_lowest(p), source="boir")
