"""Feature extraction and dataset assembly from trajectory logs.

Each instant is summarized, per goal, by three values:
  nu    -- approach speed: windowed rate of decrease of distance-to-goal,
           positive when closing on the goal [m/s]
  d     -- Euclidean distance robot-to-goal [m]
  theta -- signed heading error between robot yaw and the bearing to the
           goal, wrapped to (-pi, pi] [rad]

Flattened feature vectors are ordered nu_0, d_0, theta_0, nu_1, ... and
that column order follows the scenario's goal ordering exactly.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .world import GoalSet, Pose2D, bearing, wrap_angle

DEFAULT_WINDOW = 5


@dataclass(frozen=True)
class TrajectorySample:
    """One timestamped robot state record from a trial log."""

    t: float
    pose: Pose2D
    v: float
    omega: float
    active_goal: Optional[int] = None
    trial_id: int = 0
    scenario_id: int = 0


@dataclass(frozen=True)
class FeatureFrame:
    """Per-goal (nu, d, theta) triples at one instant, in goal order."""

    t: float
    per_goal: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "per_goal", tuple(tuple(g) for g in self.per_goal))

    @property
    def n_goals(self) -> int:
        return len(self.per_goal)

    def flatten(self) -> list[float]:
        return [v for triple in self.per_goal for v in triple]

    @classmethod
    def unflatten(cls, values: Sequence[float], t: float = 0.0) -> "FeatureFrame":
        if len(values) % 3 != 0 or len(values) == 0:
            raise ValueError(f"flattened feature length must be a positive multiple of 3, got {len(values)}")
        triples = tuple(
            (values[i], values[i + 1], values[i + 2]) for i in range(0, len(values), 3)
        )
        return cls(t=t, per_goal=triples)


@dataclass(frozen=True)
class LabeledInstance:
    features: tuple[float, ...]
    label: int

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if len(self.features) % 3 != 0 or not self.features:
            raise ValueError("feature length must be a positive multiple of 3")
        if self.label < 0 or self.label >= len(self.features) // 3:
            raise ValueError(f"label {self.label} out of range for {len(self.features) // 3} goals")


@dataclass
class DatasetSplit:
    train: list[LabeledInstance]
    test: list[LabeledInstance]
    n_goals: int
    split_seed: int
    metadata: dict = field(default_factory=dict)


def extract_frame(window: Sequence[TrajectorySample], goals: GoalSet) -> FeatureFrame:
    """Compute one FeatureFrame from a time-ordered window of >= 2 samples.

    Distance and heading error come from the window's last sample; the
    approach speed is the finite difference of distance-to-goal across the
    whole window.
    """
    if len(window) < 2:
        raise ValueError(f"feature window needs at least 2 samples, got {len(window)}")
    times = [s.t for s in window]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("malformed window: timestamps must be strictly increasing")
    first, last = window[0], window[-1]
    dt = last.t - first.t
    triples = []
    for g in goals:
        gx, gy = g.position
        d_last = math.hypot(gx - last.pose.x, gy - last.pose.y)
        d_first = math.hypot(gx - first.pose.x, gy - first.pose.y)
        nu = (d_first - d_last) / dt
        if d_last == 0.0:
            theta = 0.0  # robot exactly on the goal: heading error is moot
        else:
            theta = wrap_angle(bearing(last.pose, g.position) - last.pose.yaw)
        triples.append((nu, d_last, theta))
    return FeatureFrame(t=last.t, per_goal=tuple(triples))


def label_and_flatten(
    trial: Sequence[TrajectorySample], goals: GoalSet, k: int = DEFAULT_WINDOW
) -> list[LabeledInstance]:
    """One labeled instance per sample index >= k-1, from the trailing window.

    Instance i is labeled by sample i's active_goal, so mid-trial goal
    switches are honored sample-by-sample.
    """
    if k < 2:
        raise ValueError(f"window size must be >= 2, got {k}")
    out = []
    for i in range(k - 1, len(trial)):
        s = trial[i]
        if s.active_goal is None:
            raise ValueError(f"sample at t={s.t} has no active_goal label")
        frame = extract_frame(trial[i - k + 1 : i + 1], goals)
        out.append(LabeledInstance(features=tuple(frame.flatten()), label=s.active_goal))
    return out


def balance(instances: Sequence[LabeledInstance], seed) -> list[LabeledInstance]:
    """Downsample every label to the minority label's count, then reshuffle.

    Sampling is uniform without replacement and fully determined by the seed.
    """
    by_label: dict[int, list[LabeledInstance]] = {}
    n_goals = len(instances[0].features) // 3 if instances else 0
    for inst in instances:
        by_label.setdefault(inst.label, []).append(inst)
    if instances:
        missing = [c for c in range(n_goals) if c not in by_label]
        if missing:
            raise ValueError(f"labels {missing} have no instances; cannot balance")
    if not by_label:
        raise ValueError("cannot balance an empty instance list")
    m = min(len(v) for v in by_label.values())
    rng = np.random.default_rng(seed)
    kept: list[LabeledInstance] = []
    for label in sorted(by_label):
        group = by_label[label]
        idx = rng.choice(len(group), size=m, replace=False)
        kept.extend(group[i] for i in sorted(idx))
    order = rng.permutation(len(kept))
    return [kept[i] for i in order]


def split_by_trial(
    trials: Sequence[Sequence[LabeledInstance]],
    ratio: float = 0.7,
    seed: int = 0,
) -> DatasetSplit:
    """Assign whole trials to train/test so instance counts approximate the ratio.

    No trial contributes to both sides. If no whole-trial assignment can put
    every label into the training side (e.g. a label confined to a single
    trial), falls back to a seeded instance-level stratified split and
    records that in the metadata.
    """
    trials = [list(t) for t in trials if t]
    if len(trials) < 2:
        raise ValueError(f"need at least 2 non-empty trials to split, got {len(trials)}")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    n_goals = len(trials[0][0].features) // 3
    all_labels = {inst.label for t in trials for inst in t}
    sizes = [len(t) for t in trials]
    total = sum(sizes)

    rng = np.random.default_rng(seed)
    order = list(rng.permutation(len(trials)))

    label_trials: dict[int, set[int]] = {}
    for ti, t in enumerate(trials):
        for inst in t:
            label_trials.setdefault(inst.label, set()).add(ti)
    lonely = sorted(l for l, ts in label_trials.items() if len(ts) < 2)
    if lonely:
        warnings.warn(
            f"labels {lonely} appear in a single trial; "
            "falling back to instance-level stratified split",
            stacklevel=2,
        )
    else:
        for offset in range(len(order)):
            rot = order[offset:] + order[:offset]
            best_m, best_dev = None, None
            cum = 0
            for m in range(1, len(rot)):
                cum += sizes[rot[m - 1]]
                dev = abs(cum / total - ratio)
                if best_dev is None or dev < best_dev:
                    best_m, best_dev = m, dev
            train_ids = set(rot[:best_m])
            train_labels = {inst.label for ti in train_ids for inst in trials[ti]}
            if train_labels == all_labels:
                train = [inst for ti in rot[:best_m] for inst in trials[ti]]
                test = [inst for ti in rot[best_m:] for inst in trials[ti]]
                return DatasetSplit(
                    train=train, test=test, n_goals=n_goals, split_seed=seed,
                    metadata={
                        "split_mode": "trial",
                        "train_trials": sorted(train_ids),
                        "test_trials": sorted(set(range(len(trials))) - train_ids),
                    },
                )
        warnings.warn(
            "no whole-trial assignment covers every label in train; "
            "falling back to instance-level stratified split",
            stacklevel=2,
        )

    split = split_instances_stratified(
        [inst for t in trials for inst in t], ratio=ratio, seed=seed, rng=rng)
    split.metadata["split_mode"] = "instance_stratified_fallback"
    return split


def split_instances_stratified(
    instances: Sequence[LabeledInstance],
    ratio: float = 0.7,
    seed: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> DatasetSplit:
    """Per-label seeded shuffle split, ignoring trial boundaries."""
    if not instances:
        raise ValueError("cannot split an empty instance list")
    if rng is None:
        rng = np.random.default_rng(seed)
    n_goals = len(instances[0].features) // 3
    by_label: dict[int, list[LabeledInstance]] = {}
    for inst in instances:
        by_label.setdefault(inst.label, []).append(inst)
    train, test = [], []
    for label in sorted(by_label):
        group = by_label[label]
        if len(group) < 2:
            raise ValueError(f"label {label} has fewer than 2 instances; cannot split")
        perm = rng.permutation(len(group))
        n_train = min(len(group) - 1, max(1, round(ratio * len(group))))
        train.extend(group[i] for i in perm[:n_train])
        test.extend(group[i] for i in perm[n_train:])
    return DatasetSplit(
        train=train, test=test, n_goals=n_goals, split_seed=seed,
        metadata={"split_mode": "instance"},
    )


# --- file formats ---------------------------------------------------------

def dataset_header(n_goals: int) -> list[str]:
    cols = []
    for g in range(n_goals):
        cols += [f"nu_{g}", f"d_{g}", f"theta_{g}"]
    return cols + ["label"]


def write_dataset_csv(path, instances: Sequence[LabeledInstance], n_goals: int) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(dataset_header(n_goals)) + "\n")
        for inst in instances:
            f.write(",".join(repr(float(v)) for v in inst.features) + f",{inst.label}\n")


def read_dataset_csv(path) -> tuple[list[LabeledInstance], int]:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
        if not header or header[-1] != "label" or (len(header) - 1) % 3 != 0:
            raise ValueError(f"{path}: not a dataset CSV (bad header)")
        n_goals = (len(header) - 1) // 3
        if header != dataset_header(n_goals):
            raise ValueError(f"{path}: unexpected column order {header}")
        out = []
        for line in f:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise ValueError(f"{path}: row has {len(parts)} fields, expected {len(header)}")
            out.append(LabeledInstance(
                features=tuple(float(x) for x in parts[:-1]), label=int(parts[-1])))
    return out, n_goals


def sample_to_json(s: TrajectorySample) -> str:
    return json.dumps({
        "t": s.t, "x": s.pose.x, "y": s.pose.y, "yaw": s.pose.yaw,
        "v": s.v, "omega": s.omega, "goal": s.active_goal,
        "trial": s.trial_id, "scenario": s.scenario_id,
    }, separators=(",", ":"))


def sample_from_json(line: str) -> TrajectorySample:
    d = json.loads(line)
    return TrajectorySample(
        t=d["t"], pose=Pose2D(d["x"], d["y"], d["yaw"]), v=d["v"], omega=d["omega"],
        active_goal=d.get("goal"), trial_id=d.get("trial", 0), scenario_id=d.get("scenario", 0),
    )


def write_trajectory_jsonl(path, samples: Iterable[TrajectorySample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in samples:
            f.write(sample_to_json(s) + "\n")


def read_trajectory_jsonl(path) -> list[TrajectorySample]:
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for ln, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(sample_from_json(line))
            except (json.JSONDecodeError, KeyError) as e:
                raise ValueError(f"{path}:{ln}: malformed trajectory record ({e})") from e
    return out
