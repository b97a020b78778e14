"""2D world representation: goals, obstacles, occupancy grid, and scenario configs.

Everything here is immutable after construction and safe to share across
threads. Scenario files are the single source of truth for goal ordering;
the feature column order everywhere downstream follows it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

TAU = 2.0 * math.pi

BUILTIN_SCENARIO_IDS = (1, 2, 3, 4)


def wrap_angle(a: float) -> float:
    """Wrap an angle to the canonical interval (-pi, pi].

    Odd multiples of pi map to +pi, never -pi, so every angle class has a
    single representative. Idempotent at the bit level for inputs already
    in range.
    """
    if not math.isfinite(a):
        raise ValueError(f"angle must be finite, got {a!r}")
    w = math.remainder(a, TAU)
    if w == -math.pi:
        return math.pi
    return w


@dataclass(frozen=True)
class Pose2D:
    """Planar robot pose. yaw is wrapped to (-pi, pi] on construction."""

    x: float
    y: float
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


def bearing(from_pose: Pose2D, to: tuple[float, float]) -> float:
    """Absolute bearing from a pose's position to a point, in (-pi, pi]."""
    dx = to[0] - from_pose.x
    dy = to[1] - from_pose.y
    if dx == 0.0 and dy == 0.0:
        raise ValueError("bearing undefined for coincident points")
    b = math.atan2(dy, dx)
    return math.pi if b == -math.pi else b


@dataclass(frozen=True)
class Goal:
    id: int
    label: str
    position: tuple[float, float]


@dataclass(frozen=True)
class GoalSet:
    """Fixed, ordered collection of candidate navigational goals."""

    goals: tuple[Goal, ...]

    def __post_init__(self):
        object.__setattr__(self, "goals", tuple(self.goals))
        if len(self.goals) < 2:
            raise ValueError("a goal set needs at least 2 goals")
        ids = [g.id for g in self.goals]
        if ids != list(range(len(self.goals))):
            raise ValueError(f"goal ids must be contiguous 0..N-1 in order, got {ids}")

    def __len__(self) -> int:
        return len(self.goals)

    def __iter__(self):
        return iter(self.goals)

    def __getitem__(self, i: int) -> Goal:
        return self.goals[i]

    @property
    def positions(self) -> list[tuple[float, float]]:
        return [g.position for g in self.goals]

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.goals]


@dataclass(frozen=True)
class ObstacleMap:
    """Axis-aligned rectangle obstacles rasterized onto an occupancy grid.

    A cell is occupied iff its center lies inside any obstacle rectangle,
    with rectangles closed on their lower edges and open on their upper
    edges. Rasterization is therefore deterministic and resolution-stable
    away from rectangle boundaries.
    """

    bounds: tuple[float, float]
    obstacles: tuple[tuple[float, float, float, float], ...] = ()
    resolution: float = 0.1
    _grid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w, h = self.bounds
        if w <= 0 or h <= 0:
            raise ValueError(f"map bounds must be positive, got {self.bounds}")
        if self.resolution <= 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        object.__setattr__(self, "obstacles", tuple(tuple(o) for o in self.obstacles))
        for ox, oy, ow, oh in self.obstacles:
            if ow <= 0 or oh <= 0:
                raise ValueError(f"degenerate obstacle rectangle ({ox}, {oy}, {ow}, {oh})")
            if ox < 0 or oy < 0 or ox + ow > w or oy + oh > h:
                raise ValueError(f"obstacle ({ox}, {oy}, {ow}, {oh}) exceeds map bounds {self.bounds}")
        object.__setattr__(self, "_grid", rasterize(self.bounds, self.obstacles, self.resolution))

    @property
    def grid(self) -> np.ndarray:
        """Occupancy grid, shape (nx, ny), True = occupied. Do not mutate."""
        return self._grid

    @property
    def shape(self) -> tuple[int, int]:
        return self._grid.shape

    def in_bounds(self, p: tuple[float, float]) -> bool:
        return 0.0 <= p[0] <= self.bounds[0] and 0.0 <= p[1] <= self.bounds[1]

    def cell_of(self, p: tuple[float, float]) -> tuple[int, int]:
        """Grid cell containing a point; the upper map edge folds into the last cell."""
        if not self.in_bounds(p):
            raise ValueError(f"point {p} outside map bounds {self.bounds}")
        nx, ny = self._grid.shape
        ix = min(int(p[0] / self.resolution), nx - 1)
        iy = min(int(p[1] / self.resolution), ny - 1)
        return ix, iy

    def cell_center(self, cell: tuple[int, int]) -> tuple[float, float]:
        return ((cell[0] + 0.5) * self.resolution, (cell[1] + 0.5) * self.resolution)


def rasterize(bounds, obstacles, resolution) -> np.ndarray:
    nx = math.ceil(bounds[0] / resolution - 1e-9)
    ny = math.ceil(bounds[1] / resolution - 1e-9)
    cx = (np.arange(nx) + 0.5) * resolution
    cy = (np.arange(ny) + 0.5) * resolution
    grid = np.zeros((nx, ny), dtype=bool)
    for ox, oy, ow, oh in obstacles:
        xin = (cx >= ox) & (cx < ox + ow)
        yin = (cy >= oy) & (cy < oy + oh)
        grid |= xin[:, None] & yin[None, :]
    return grid


def is_free(omap: ObstacleMap, p: tuple[float, float]) -> bool:
    """True iff the grid cell containing p is unoccupied."""
    return not omap.grid[omap.cell_of(p)]


@dataclass(frozen=True)
class StartRegion:
    """Axis-aligned rectangle for start position sampling plus a yaw range."""

    x: float
    y: float
    w: float
    h: float
    yaw_min: float = -math.pi
    yaw_max: float = math.pi

    def __post_init__(self):
        if self.w < 0 or self.h < 0:
            raise ValueError("start region extents must be non-negative")
        if self.yaw_max < self.yaw_min:
            raise ValueError("yaw_max must be >= yaw_min")


@dataclass(frozen=True)
class Directive:
    """One operator instruction: drive to a goal, optionally aborting part-way.

    switch_at, when set, ends the directive once that fraction of the
    initially planned path has been consumed (the mid-trial goal switch).
    """

    goto: int
    switch_at: Optional[float] = None
    dwell: float = 0.0

    def __post_init__(self):
        if self.switch_at is not None and not (0.0 < self.switch_at < 1.0):
            raise ValueError(f"switch_at must be in (0, 1), got {self.switch_at}")
        if self.dwell < 0:
            raise ValueError("dwell must be non-negative")


@dataclass(frozen=True)
class ScriptNoise:
    heading_sd: float = 0.15
    speed_sd: float = 0.1
    pause_prob: float = 0.02


@dataclass(frozen=True)
class OperatorScript:
    """What the synthetic operator does in a trial.

    Either a fixed directive list, or random_goals=k to draw an itinerary of
    k distinct goals per trial (scenario 4's randomized two-goal runs).
    """

    directives: tuple[Directive, ...] = ()
    noise: ScriptNoise = ScriptNoise()
    random_goals: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "directives", tuple(self.directives))
        if self.random_goals is None and not self.directives:
            raise ValueError("script needs directives or random_goals")
        if self.random_goals is not None and self.random_goals < 1:
            raise ValueError("random_goals must be >= 1")


@dataclass(frozen=True)
class ScenarioSpec:
    """World geometry, goal set, start distribution, and operator script."""

    id: int
    map: ObstacleMap
    goal_set: GoalSet
    start_region: StartRegion
    script: OperatorScript

    def __post_init__(self):
        for g in self.goal_set:
            if not self.map.in_bounds(g.position) or not is_free(self.map, g.position):
                raise ValueError(f"goal {g.label!r} at {g.position} is not in free space")
        for d in self.script.directives:
            if not 0 <= d.goto < len(self.goal_set):
                raise ValueError(f"directive references unknown goal id {d.goto}")
        if self.script.random_goals is not None and self.script.random_goals > len(self.goal_set):
            raise ValueError("random_goals exceeds goal count")
        r = self.start_region
        corners = [(r.x, r.y), (r.x + r.w, r.y), (r.x, r.y + r.h), (r.x + r.w, r.y + r.h)]
        for c in corners + [(r.x + r.w / 2, r.y + r.h / 2)]:
            if not self.map.in_bounds(c) or not is_free(self.map, c):
                raise ValueError(f"start region point {c} is not in free space")

    @property
    def n_goals(self) -> int:
        return len(self.goal_set)


def sample_start(spec: ScenarioSpec, rng_seed, free_fn=None, max_attempts: int = 1000) -> Pose2D:
    """Draw a start pose uniformly from the start region and yaw range.

    Deterministic given the seed. Positions falling in occupied space are
    rejection-resampled; free_fn overrides the free-space test (e.g. to use
    an inflated occupancy grid).
    """
    if free_fn is None:
        free_fn = lambda p: is_free(spec.map, p)
    r = spec.start_region
    rng = np.random.default_rng(rng_seed)
    for _ in range(max_attempts):
        x = r.x + rng.uniform(0.0, 1.0) * r.w
        y = r.y + rng.uniform(0.0, 1.0) * r.h
        yaw = r.yaw_min + rng.uniform(0.0, 1.0) * (r.yaw_max - r.yaw_min)
        if free_fn((x, y)):
            return Pose2D(x, y, yaw)
    raise ValueError(f"no free start pose found in {max_attempts} attempts; start region infeasible")


# --- scenario file codec -------------------------------------------------

def scenario_to_dict(spec: ScenarioSpec) -> dict:
    r = spec.start_region
    script: dict = {
        "noise": {
            "heading_sd": spec.script.noise.heading_sd,
            "speed_sd": spec.script.noise.speed_sd,
            "pause_prob": spec.script.noise.pause_prob,
        }
    }
    if spec.script.random_goals is not None:
        script["random_goals"] = spec.script.random_goals
    if spec.script.directives:
        script["directives"] = [
            {k: v for k, v in (("goto", d.goto), ("switch_at", d.switch_at), ("dwell", d.dwell))
             if not (k == "switch_at" and v is None) and not (k == "dwell" and v == 0.0)}
            for d in spec.script.directives
        ]
    return {
        "id": spec.id,
        "bounds": {"width": spec.map.bounds[0], "height": spec.map.bounds[1]},
        "resolution": spec.map.resolution,
        "obstacles": [{"x": o[0], "y": o[1], "w": o[2], "h": o[3]} for o in spec.map.obstacles],
        "goals": [{"id": g.id, "label": g.label, "x": g.position[0], "y": g.position[1]}
                  for g in spec.goal_set],
        "start": {"x": r.x, "y": r.y, "w": r.w, "h": r.h,
                  "yaw_min": r.yaw_min, "yaw_max": r.yaw_max},
        "script": script,
    }


def scenario_from_dict(d: dict) -> ScenarioSpec:
    try:
        omap = ObstacleMap(
            bounds=(d["bounds"]["width"], d["bounds"]["height"]),
            obstacles=tuple((o["x"], o["y"], o["w"], o["h"]) for o in d.get("obstacles", [])),
            resolution=d.get("resolution", 0.1),
        )
        goals = GoalSet(tuple(Goal(g["id"], g["label"], (g["x"], g["y"])) for g in d["goals"]))
        s = d["start"]
        start = StartRegion(s["x"], s["y"], s["w"], s["h"],
                            s.get("yaw_min", -math.pi), s.get("yaw_max", math.pi))
        sc = d.get("script", {})
        noise_d = sc.get("noise", {})
        noise = ScriptNoise(
            heading_sd=noise_d.get("heading_sd", 0.15),
            speed_sd=noise_d.get("speed_sd", 0.1),
            pause_prob=noise_d.get("pause_prob", 0.02),
        )
        directives = tuple(
            Directive(dd["goto"], dd.get("switch_at"), dd.get("dwell", 0.0))
            for dd in sc.get("directives", [])
        )
        script = OperatorScript(directives=directives, noise=noise,
                                random_goals=sc.get("random_goals"))
        return ScenarioSpec(id=d["id"], map=omap, goal_set=goals, start_region=start, script=script)
    except KeyError as e:
        raise ValueError(f"scenario file missing field {e.args[0]!r}") from e


def load_scenario(path) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as f:
        return scenario_from_dict(json.load(f))


def save_scenario(spec: ScenarioSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(scenario_to_dict(spec), f, indent=2)
        f.write("\n")


def load_fixture(scenario_id: int) -> ScenarioSpec:
    """Load one of the shipped scenario fixtures (ids 1-4)."""
    if scenario_id not in BUILTIN_SCENARIO_IDS:
        raise ValueError(
            f"unknown scenario id {scenario_id}; valid ids: {list(BUILTIN_SCENARIO_IDS)}")
    ref = resources.files("intentd.scenarios").joinpath(f"scenario{scenario_id}.json")
    return scenario_from_dict(json.loads(ref.read_text(encoding="utf-8")))
