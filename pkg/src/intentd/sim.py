"""Unicycle-kinematics teleoperation simulator with a scripted noisy pilot.

Replaces human-driven trials: a pure-pursuit operator with seeded heading,
speed, and pause noise drives the robot through each scenario's script,
while every sample is labeled with the goal currently intended. The same
``step`` function drives live human sessions in the teleop service.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .features import TrajectorySample
from .planner import GridPlanner, InvalidEndpointError, UnreachableGoalError
from .world import (
    Directive,
    Pose2D,
    ScenarioSpec,
    ScriptNoise,
    bearing,
    sample_start,
    wrap_angle,
)

DT = 0.1
ARRIVAL_RADIUS = 0.5
TIMEOUT_S = 180.0
LOOKAHEAD = 0.8
RECOVERY_LOOKAHEAD = 0.2
RECOVERY_STEPS = 15
HEADING_GAIN = 2.0
PILOT_PLAN_MARGIN = 0.15  # extra inflation when planning, so corner cuts stay collision-free


class ScriptError(ValueError):
    """An operator script cannot be executed (e.g. unreachable goal)."""


@dataclass(frozen=True)
class RobotState:
    pose: Pose2D
    v: float = 0.0
    omega: float = 0.0
    v_max: float = 1.0
    omega_max: float = 1.5


def step(
    state: RobotState,
    cmd: tuple[float, float],
    planner: Optional[GridPlanner],
    dt: float = DT,
) -> RobotState:
    """Advance the unicycle one tick; blocked moves keep position and zero v."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    v = max(-state.v_max, min(state.v_max, cmd[0]))
    w = max(-state.omega_max, min(state.omega_max, cmd[1]))
    p = state.pose
    nx = p.x + v * math.cos(p.yaw) * dt
    ny = p.y + v * math.sin(p.yaw) * dt
    nyaw = wrap_angle(p.yaw + w * dt)
    if planner is not None and planner.is_blocked((nx, ny)):
        return replace(state, pose=Pose2D(p.x, p.y, nyaw), v=0.0, omega=w)
    return replace(state, pose=Pose2D(nx, ny, nyaw), v=v, omega=w)


class PurePursuitPilot:
    """Noisy pure-pursuit tracker of one planned waypoint path.

    Per call it draws exactly three values from its stream (heading noise,
    speed noise, pause trigger) so command sequences are reproducible for a
    given seed regardless of the noise magnitudes.
    """

    def __init__(self, path: Sequence[tuple[float, float]], noise: ScriptNoise,
                 rng: np.random.Generator):
        if not path:
            raise ValueError("pilot needs a non-empty path")
        self.path = [tuple(p) for p in path]
        self.noise = noise
        self.rng = rng
        self.idx = 0
        self._pause_left = 0
        self._stall = 0
        self._last_forward = 0.0
        self.arc = [0.0]
        for a, b in zip(self.path, self.path[1:]):
            self.arc.append(self.arc[-1] + math.hypot(b[0] - a[0], b[1] - a[1]))

    @property
    def total_length(self) -> float:
        return self.arc[-1]

    def fraction_consumed(self) -> float:
        if self.total_length == 0.0:
            return 1.0
        return self.arc[self.idx] / self.total_length

    def _advance(self, position: tuple[float, float]) -> None:
        # nearest waypoint within a short forward window; never moves backward
        best_j, best_d = self.idx, math.dist(position, self.path[self.idx])
        for j in range(self.idx + 1, min(self.idx + 31, len(self.path))):
            d = math.dist(position, self.path[j])
            if d < best_d:
                best_j, best_d = j, d
        self.idx = best_j

    def _lookahead_point(self, lookahead: float) -> tuple[float, float]:
        target_s = self.arc[self.idx] + lookahead
        for j in range(self.idx, len(self.path)):
            if self.arc[j] >= target_s:
                return self.path[j]
        return self.path[-1]

    def command(self, state: RobotState, dt: float = DT) -> tuple[float, float]:
        hn = self.rng.standard_normal() * self.noise.heading_sd
        sn = self.rng.standard_normal() * self.noise.speed_sd
        u = self.rng.uniform(0.0, 1.0)
        self._advance(state.pose.position)
        # stall recovery: a blocked forward step collapses the lookahead so
        # the pilot steers back onto the path instead of grinding a corner
        if state.v == 0.0 and self._last_forward > 0.05:
            self._stall = RECOVERY_STEPS
        elif self._stall > 0:
            self._stall -= 1
        target = self._lookahead_point(
            RECOVERY_LOOKAHEAD if self._stall > 0 else LOOKAHEAD)
        if target == state.pose.position:
            err = 0.0
        else:
            err = wrap_angle(bearing(state.pose, target) - state.pose.yaw)
        omega_cmd = max(-state.omega_max, min(state.omega_max, HEADING_GAIN * err)) + hn
        v_cmd = state.v_max * max(0.0, math.cos(err)) * (1.0 + sn)
        if self._pause_left > 0:
            self._pause_left -= 1
            v_cmd = 0.0
        elif u < self.noise.pause_prob * dt:
            self._pause_left = int(round(self.rng.uniform(0.5, 1.5) / dt))
            v_cmd = 0.0
        self._last_forward = v_cmd
        return v_cmd, omega_cmd


@dataclass
class TrialRecord:
    trial_id: int
    scenario_id: int
    seed: int
    samples: list[TrajectorySample]
    outcome: str  # "completed" | "timeout"


def _resolve_directives(spec: ScenarioSpec, rng: np.random.Generator) -> list[Directive]:
    script = spec.script
    if script.random_goals is not None:
        ids = rng.choice(len(spec.goal_set), size=script.random_goals, replace=False)
        return [Directive(goto=int(g)) for g in ids]
    return list(script.directives)


def run_trial(
    spec: ScenarioSpec,
    trial_seed: int,
    planner: Optional[GridPlanner] = None,
    trial_id: int = 0,
    dt: float = DT,
    timeout: float = TIMEOUT_S,
    arrival_radius: float = ARRIVAL_RADIUS,
    v_max: float = 1.0,
    omega_max: float = 1.5,
) -> TrialRecord:
    """Execute the scenario script once and record the labeled sample stream."""
    if planner is None:
        planner = GridPlanner(spec.map)
    # paths are planned with extra clearance; collisions still use the base grid
    route_planner = GridPlanner(
        spec.map, inflation_radius=planner.inflation_radius + PILOT_PLAN_MARGIN)
    start = sample_start(spec, (trial_seed, 0), free_fn=lambda p: not planner.is_blocked(p))
    pilot_rng = np.random.default_rng((trial_seed, 1))
    script_rng = np.random.default_rng((trial_seed, 2))
    directives = _resolve_directives(spec, script_rng)
    if not directives:
        raise ScriptError("script resolved to an empty directive list")

    state = RobotState(pose=start, v_max=v_max, omega_max=omega_max)
    samples = [TrajectorySample(
        t=0.0, pose=state.pose, v=0.0, omega=0.0,
        active_goal=directives[0].goto, trial_id=trial_id, scenario_id=spec.id,
    )]
    max_steps = int(round(timeout / dt))
    step_i = 0
    finished_all = True

    for di, d in enumerate(directives):
        goal_pos = spec.goal_set[d.goto].position
        try:
            try:
                path = route_planner.plan_path(state.pose.position, goal_pos)
            except (UnreachableGoalError, InvalidEndpointError):
                # robot sits inside the planning margin or the margin closed a
                # passage; the base grid is authoritative for reachability
                path = planner.plan_path(state.pose.position, goal_pos)
        except (UnreachableGoalError, InvalidEndpointError) as e:
            raise ScriptError(f"directive {di} (goto goal {d.goto}): {e}") from e
        pilot = PurePursuitPilot(path, spec.script.noise, pilot_rng)
        dwell_left = 0
        dwelling = False
        done = False
        while not done:
            if step_i >= max_steps:
                finished_all = False
                break
            cmd = (0.0, 0.0) if dwelling else pilot.command(state, dt)
            state = step(state, cmd, planner, dt)
            step_i += 1
            samples.append(TrajectorySample(
                t=step_i * dt, pose=state.pose, v=state.v, omega=state.omega,
                active_goal=d.goto, trial_id=trial_id, scenario_id=spec.id,
            ))
            if dwelling:
                dwell_left -= 1
                done = dwell_left <= 0
                continue
            if d.switch_at is not None and pilot.fraction_consumed() >= d.switch_at:
                done = True
            elif math.dist(state.pose.position, goal_pos) <= arrival_radius:
                dwell_left = int(round(d.dwell / dt))
                if dwell_left > 0:
                    dwelling = True
                else:
                    done = True
        if not done:
            break

    return TrialRecord(
        trial_id=trial_id, scenario_id=spec.id, seed=trial_seed, samples=samples,
        outcome="completed" if finished_all else "timeout",
    )


def derive_trial_seed(campaign_seed: int, index: int) -> int:
    return int(np.random.SeedSequence((campaign_seed, index)).generate_state(1)[0])


def generate_campaign(spec: ScenarioSpec, n_trials: int, seed: int,
                      planner: Optional[GridPlanner] = None, **trial_kwargs) -> list[TrialRecord]:
    """Run n seeded trials; trial i's randomness derives from (seed, i)."""
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    if planner is None:
        planner = GridPlanner(spec.map)
    return [
        run_trial(spec, derive_trial_seed(seed, i), planner=planner, trial_id=i, **trial_kwargs)
        for i in range(n_trials)
    ]
