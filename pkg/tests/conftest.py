import math

import numpy as np
import pytest

from intentd.features import LabeledInstance, TrajectorySample
from intentd.world import (
    Directive,
    Goal,
    GoalSet,
    ObstacleMap,
    OperatorScript,
    Pose2D,
    ScenarioSpec,
    ScriptNoise,
    StartRegion,
)


@pytest.fixture
def two_goal_set():
    return GoalSet((Goal(0, "a", (10.0, 7.5)), Goal(1, "b", (10.0, 2.5))))


@pytest.fixture
def empty_map():
    return ObstacleMap(bounds=(12.0, 10.0), obstacles=(), resolution=0.1)


def make_scenario(
    bounds=(12.0, 10.0),
    obstacles=(),
    goals=((10.0, 7.5), (10.0, 2.5)),
    start=(1.0, 4.0, 1.0, 2.0),
    yaw=(0.0, 0.0),
    directives=((1, None, 0.0), (0, None, 0.0)),
    noise=ScriptNoise(heading_sd=0.0, speed_sd=0.0, pause_prob=0.0),
    scenario_id=99,
    resolution=0.1,
):
    labels = "abcdefgh"
    gs = GoalSet(tuple(Goal(i, labels[i], tuple(p)) for i, p in enumerate(goals)))
    script = OperatorScript(
        directives=tuple(Directive(g, s, d) for g, s, d in directives), noise=noise)
    return ScenarioSpec(
        id=scenario_id,
        map=ObstacleMap(bounds=bounds, obstacles=tuple(obstacles), resolution=resolution),
        goal_set=gs,
        start_region=StartRegion(*start, yaw_min=yaw[0], yaw_max=yaw[1]),
        script=script,
    )


def straight_trial(n=20, dt=0.1, speed=1.0, yaw=0.0, start=(0.0, 0.0), label=0,
                   trial_id=0, scenario_id=1):
    """Constant-speed straight-line sample stream along the yaw direction."""
    out = []
    for i in range(n):
        x = start[0] + speed * i * dt * math.cos(yaw)
        y = start[1] + speed * i * dt * math.sin(yaw)
        out.append(TrajectorySample(
            t=i * dt, pose=Pose2D(x, y, yaw), v=speed, omega=0.0,
            active_goal=label, trial_id=trial_id, scenario_id=scenario_id))
    return out


def random_instances(rng, n, n_goals=2, n_features=None):
    width = n_features if n_features is not None else 3 * n_goals
    if width % 3 != 0:
        raise ValueError("width must be a multiple of 3")
    n_goals = width // 3
    return [
        LabeledInstance(tuple(float(v) for v in rng.uniform(-5, 5, size=width)),
                        int(rng.integers(n_goals)))
        for _ in range(n)
    ]
