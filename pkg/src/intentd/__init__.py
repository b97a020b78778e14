"""intentd: online operator intent inference for teleoperated mobile robots.

Simulates teleoperated 2D navigation trials, trains a from-scratch random
forest on per-goal (approach speed, distance, heading error) features,
runs a reconstructed Bayesian baseline next to it, and compares both with
per-trial accuracy / log-loss statistics. A WebSocket service runs both
estimators live against a human-driven session.
"""

__version__ = "0.1.0"

from .baseline import BaselineParams, BayesIntentFilter, PosteriorState
from .estimator import ForestIntentClassifier
from .features import (
    DatasetSplit,
    FeatureFrame,
    LabeledInstance,
    TrajectorySample,
    balance,
    extract_frame,
    label_and_flatten,
    split_by_trial,
)
from .forest import (
    ForestHyperparams,
    ForestModel,
    IntentEstimate,
    load_model,
    predict_proba,
    save_model,
    train,
)
from .metrics import PredictionRecord, SummaryStats, TrialMetrics, accuracy, log_loss, summarize
from .planner import GridPlanner
from .sim import RobotState, TrialRecord, generate_campaign, run_trial, step
from .stats import TestResult, paired_t_test, wilcoxon_signed_rank
from .world import (
    Goal,
    GoalSet,
    ObstacleMap,
    Pose2D,
    ScenarioSpec,
    bearing,
    is_free,
    load_fixture,
    load_scenario,
    sample_start,
    wrap_angle,
)
