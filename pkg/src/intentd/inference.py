"""Shared per-frame inference over a trajectory sample stream.

Replay, batch evaluation, and the live teleoperation service all route
through IntentStreamer, so estimates for a given sample stream are
identical wherever they are computed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .baseline import BaselineParams, BayesIntentFilter
from .features import DEFAULT_WINDOW, TrajectorySample, extract_frame
from .forest import ForestModel, IntentEstimate, predict_proba
from .metrics import PredictionRecord
from .planner import GridPlanner
from .world import GoalSet


@dataclass(frozen=True)
class FrameEstimates:
    frame: int
    t: float
    mloii: Optional[IntentEstimate]
    boir: Optional[IntentEstimate]


class IntentStreamer:
    """Feeds samples in order; emits estimates once the pose window is full."""

    def __init__(
        self,
        goals: GoalSet,
        model: Optional[ForestModel] = None,
        planner: Optional[GridPlanner] = None,
        baseline_params: Optional[BaselineParams] = None,
        window: int = DEFAULT_WINDOW,
    ):
        if model is None and planner is None:
            raise ValueError("need a forest model, a planner for the baseline, or both")
        if model is not None and model.n_goals != len(goals):
            raise ValueError(
                f"model expects {model.n_goals} goals, scenario has {len(goals)}")
        if window < 2:
            raise ValueError(f"window must be >= 2, got {window}")
        self.goals = goals
        self.model = model
        self.window = window
        self.bayes = (
            BayesIntentFilter(goals, planner, baseline_params or BaselineParams())
            if planner is not None else None
        )
        self._buf: deque[TrajectorySample] = deque(maxlen=window)
        self._index = -1

    def feed(self, sample: TrajectorySample) -> Optional[FrameEstimates]:
        """Returns estimates for this sample, or None while the window fills."""
        self._buf.append(sample)
        self._index += 1
        if len(self._buf) < self.window:
            return None
        frame = extract_frame(list(self._buf), self.goals)
        mloii = predict_proba(self.model, frame) if self.model is not None else None
        boir = (
            self.bayes.update(frame, sample.pose.position)
            if self.bayes is not None else None
        )
        return FrameEstimates(frame=self._index, t=sample.t, mloii=mloii, boir=boir)


def stream_trial(
    samples: Iterable[TrajectorySample],
    goals: GoalSet,
    model: Optional[ForestModel] = None,
    planner: Optional[GridPlanner] = None,
    baseline_params: Optional[BaselineParams] = None,
    window: int = DEFAULT_WINDOW,
) -> list[FrameEstimates]:
    """Run the streamer over a whole recorded trial."""
    streamer = IntentStreamer(goals, model, planner, baseline_params, window)
    out = []
    for s in samples:
        est = streamer.feed(s)
        if est is not None:
            out.append(est)
    return out


def prediction_records(
    samples: list[TrajectorySample],
    estimates: list[FrameEstimates],
    source: str,
    declared_goal: Optional[int] = None,
) -> list[PredictionRecord]:
    """Pair each emitted estimate with its ground-truth label.

    The label comes from the sample's active_goal, or from declared_goal
    for live sessions where no scripted label exists.
    """
    out = []
    for est in estimates:
        e = est.mloii if source == "mloii" else est.boir
        if e is None:
            raise ValueError(f"stream has no {source} estimates")
        label = samples[est.frame].active_goal
        if label is None:
            label = declared_goal
        if label is None:
            raise ValueError(
                f"sample {est.frame} has no active_goal and no declared goal was given")
        out.append(PredictionRecord(t=est.t, true_label=label, estimate=e))
    return out
