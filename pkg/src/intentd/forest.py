"""From-scratch random forest for goal classification.

Gini-greedy trees grown on bootstrap resamples with per-node feature
subsampling. Class probabilities are tree vote ratios: the fraction of
trees whose leaf majority is each class, so every probability is an exact
multiple of 1/n_trees.

Determinism contract: training is fully determined by (data order, seed).
Tree i draws its bootstrap sample and all of its per-node feature subsets
from one stream seeded by (seed, i), so results do not depend on scheduling
and models serialize byte-identically across runs and processes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .features import FeatureFrame, LabeledInstance

FORMAT_VERSION = 1


class CodecError(ValueError):
    """Raised when a serialized model is malformed or inconsistent."""


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (class counts).

    Routing: value <= threshold goes left, else right.
    """

    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    counts: Optional[tuple[int, ...]] = None

    @property
    def is_leaf(self) -> bool:
        return self.counts is not None


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 50
    max_depth: int = 16
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    features_per_split: Optional[int] = None  # None -> ceil(sqrt(n_features))
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be >= 1")

    def resolve_features_per_split(self, n_features: int) -> int:
        if self.features_per_split is None:
            return min(n_features, math.ceil(math.sqrt(n_features)))
        if self.features_per_split > n_features:
            raise ValueError(
                f"features_per_split={self.features_per_split} exceeds {n_features} features")
        return self.features_per_split


@dataclass
class ForestModel:
    hyperparams: ForestHyperparams
    n_goals: int
    feature_order: list[str]
    trees: list[TreeNode]
    format_version: int = FORMAT_VERSION
    scenario_id: Optional[int] = None

    @property
    def n_features(self) -> int:
        return 3 * self.n_goals


@dataclass(frozen=True)
class IntentEstimate:
    """Probability vector over goals at one instant, from either estimator."""

    t: float
    probabilities: tuple[float, ...]
    predicted: int
    source: str
    votes: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.source not in ("mloii", "boir"):
            raise ValueError(f"unknown estimate source {self.source!r}")
        object.__setattr__(self, "probabilities", tuple(self.probabilities))
        if abs(sum(self.probabilities) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")


def gini(class_counts: Sequence[int]) -> float:
    """Gini impurity 1 - sum((count/total)^2) of a count vector."""
    total = 0
    for c in class_counts:
        if c < 0:
            raise ValueError("class counts must be non-negative")
        total += c
    if total == 0:
        raise ValueError("gini undefined for an empty node")
    acc = 0.0
    for c in class_counts:
        frac = c / total
        acc += frac * frac
    return 1.0 - acc


def _gini_from_count_rows(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    # counts: (B, C) int64, totals: (B,) int64; same formula as gini(), vectorized
    frac = counts / totals[:, None]
    return 1.0 - np.sum(frac * frac, axis=1)


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidate_features: Sequence[int],
    n_classes: int,
    min_samples_leaf: int = 1,
) -> Optional[tuple[int, float, float]]:
    """Exhaustive best Gini-gain split over the candidate feature columns.

    Thresholds are midpoints between consecutive distinct sorted values.
    Returns (feature_index, threshold, gain) or None when no split has
    positive gain. Ties break to the lowest feature index, then the lowest
    threshold.
    """
    n = len(y)
    parent_counts = np.bincount(y, minlength=n_classes).astype(np.int64)
    parent_gini = gini(parent_counts)
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), y] = 1

    best: Optional[tuple[int, float, float]] = None
    for f in sorted(set(int(c) for c in candidate_features)):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        boundaries = np.nonzero(sv[1:] != sv[:-1])[0]
        if boundaries.size == 0:
            continue
        cum = np.cumsum(onehot[order], axis=0)
        left_counts = cum[boundaries]
        left_n = (boundaries + 1).astype(np.int64)
        right_counts = parent_counts[None, :] - left_counts
        right_n = n - left_n
        ok = (left_n >= min_samples_leaf) & (right_n >= min_samples_leaf)
        if not ok.any():
            continue
        gl = _gini_from_count_rows(left_counts, left_n)
        gr = _gini_from_count_rows(right_counts, right_n)
        gain = parent_gini - (left_n / n) * gl - (right_n / n) * gr
        gain[~ok] = -np.inf
        i = int(np.argmax(gain))  # thresholds ascend, so first max = lowest threshold
        g = float(gain[i])
        if g <= 0.0:
            continue
        thr = float((sv[boundaries[i]] + sv[boundaries[i] + 1]) / 2.0)
        if best is None or g > best[2]:
            best = (f, thr, g)
    return best


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    hp: ForestHyperparams,
    n_classes: int,
    n_features: int,
    fps: int,
    depth: int,
) -> TreeNode:
    counts = np.bincount(y, minlength=n_classes)
    if (
        depth >= hp.max_depth
        or len(y) < hp.min_samples_split
        or int(np.count_nonzero(counts)) <= 1
    ):
        return TreeNode(counts=tuple(int(c) for c in counts))
    cand = rng.choice(n_features, size=fps, replace=False)
    split = best_split(X, y, cand, n_classes, hp.min_samples_leaf)
    if split is None:
        return TreeNode(counts=tuple(int(c) for c in counts))
    f, thr, _ = split
    mask = X[:, f] <= thr
    left = _grow(X[mask], y[mask], rng, hp, n_classes, n_features, fps, depth + 1)
    right = _grow(X[~mask], y[~mask], rng, hp, n_classes, n_features, fps, depth + 1)
    return TreeNode(feature=f, threshold=thr, left=left, right=right)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    hp: ForestHyperparams,
    n_classes: int,
    rng: Optional[np.random.Generator] = None,
) -> TreeNode:
    """Grow a single tree on the given rows, without bootstrapping.

    With features_per_split equal to the full width, growth is a pure
    function of (X, y, hp); useful to compare against reference growers.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if rng is None:
        rng = np.random.default_rng(hp.seed)
    fps = hp.resolve_features_per_split(X.shape[1])
    return _grow(X, y, rng, hp, n_classes, X.shape[1], fps, depth=0)


def train(
    data: Sequence[LabeledInstance],
    hp: ForestHyperparams,
    scenario_id: Optional[int] = None,
) -> ForestModel:
    """Train a forest on labeled instances; deterministic in (data order, seed)."""
    if not data:
        raise ValueError("cannot train on an empty dataset")
    width = len(data[0].features)
    if any(len(inst.features) != width for inst in data):
        raise ValueError("inconsistent feature widths in training data")
    if width % 3 != 0:
        raise ValueError(f"feature width {width} is not a multiple of 3")
    n_goals = width // 3
    X = np.array([inst.features for inst in data], dtype=np.float64)
    y = np.array([inst.label for inst in data], dtype=np.int64)
    if y.min() < 0 or y.max() >= n_goals:
        raise ValueError(f"labels must lie in 0..{n_goals - 1}")
    fps = hp.resolve_features_per_split(width)
    n = len(data)
    trees = []
    for i in range(hp.n_trees):
        rng = np.random.default_rng((hp.seed, i))
        idx = rng.integers(0, n, size=n)
        trees.append(_grow(X[idx], y[idx], rng, hp, n_goals, width, fps, depth=0))
    return ForestModel(
        hyperparams=hp, n_goals=n_goals, feature_order=feature_order(n_goals),
        trees=trees, scenario_id=scenario_id,
    )


def feature_order(n_goals: int) -> list[str]:
    cols = []
    for g in range(n_goals):
        cols += [f"nu_{g}", f"d_{g}", f"theta_{g}"]
    return cols


def _majority(counts: Sequence[int]) -> int:
    best_c, best_n = 0, counts[0]
    for c, n in enumerate(counts):
        if n > best_n:
            best_c, best_n = c, n
    return best_c


def tree_vote(root: TreeNode, x: Sequence[float]) -> int:
    node = root
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return _majority(node.counts)


def predict_proba(model: ForestModel, frame) -> IntentEstimate:
    """Vote-ratio estimate for one frame (FeatureFrame or flat vector)."""
    if isinstance(frame, FeatureFrame):
        t, x = frame.t, frame.flatten()
    else:
        t, x = 0.0, list(frame)
    if len(x) != model.n_features:
        raise ValueError(
            f"frame has {len(x)} features, model expects {model.n_features}")
    votes = [0] * model.n_goals
    for root in model.trees:
        votes[tree_vote(root, x)] += 1
    n_trees = model.hyperparams.n_trees
    probs = tuple(v / n_trees for v in votes)
    return IntentEstimate(
        t=t, probabilities=probs, predicted=_majority(votes),
        source="mloii", votes=tuple(votes),
    )


# --- model codec -----------------------------------------------------------

def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"counts": list(node.counts)}
    return {
        "f": node.feature,
        "thr": node.threshold,
        "l": _node_to_dict(node.left),
        "r": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict, n_features: int, n_goals: int, where: str) -> TreeNode:
    if not isinstance(d, dict):
        raise CodecError(f"{where}: node must be an object")
    if "counts" in d:
        counts = d["counts"]
        if not isinstance(counts, list) or len(counts) != n_goals:
            raise CodecError(f"{where}.counts: expected {n_goals} class counts")
        if any((not isinstance(c, int)) or c < 0 for c in counts):
            raise CodecError(f"{where}.counts: counts must be non-negative integers")
        if sum(counts) < 1:
            raise CodecError(f"{where}.counts: leaf must hold at least one sample")
        return TreeNode(counts=tuple(counts))
    for key in ("f", "thr", "l", "r"):
        if key not in d:
            raise CodecError(f"{where}.{key}: missing field")
    f, thr = d["f"], d["thr"]
    if not isinstance(f, int) or not 0 <= f < n_features:
        raise CodecError(f"{where}.f: feature index {f!r} out of range 0..{n_features - 1}")
    if not isinstance(thr, (int, float)) or not math.isfinite(thr):
        raise CodecError(f"{where}.thr: threshold must be finite")
    return TreeNode(
        feature=f, threshold=float(thr),
        left=_node_from_dict(d["l"], n_features, n_goals, where + ".l"),
        right=_node_from_dict(d["r"], n_features, n_goals, where + ".r"),
    )


def model_to_dict(model: ForestModel) -> dict:
    hp = model.hyperparams
    return {
        "format_version": model.format_version,
        "hyperparams": {
            "n_trees": hp.n_trees,
            "max_depth": hp.max_depth,
            "min_samples_split": hp.min_samples_split,
            "min_samples_leaf": hp.min_samples_leaf,
            "features_per_split": hp.features_per_split,
            "seed": hp.seed,
        },
        "n_goals": model.n_goals,
        "scenario_id": model.scenario_id,
        "feature_order": list(model.feature_order),
        "trees": [_node_to_dict(t) for t in model.trees],
    }


def save_model(model: ForestModel) -> bytes:
    return (json.dumps(model_to_dict(model), indent=1) + "\n").encode("utf-8")


def load_model(raw) -> ForestModel:
    if isinstance(raw, (bytes, bytearray)):
        raw = raw.decode("utf-8")
    try:
        d = json.loads(raw)
    except json.JSONDecodeError as e:
        raise CodecError(f"model file is not valid JSON: {e}") from e
    if not isinstance(d, dict):
        raise CodecError("model file must hold a JSON object")
    version = d.get("format_version")
    if version != FORMAT_VERSION:
        raise CodecError(f"format_version: expected {FORMAT_VERSION}, got {version!r}")
    for key in ("hyperparams", "n_goals", "feature_order", "trees"):
        if key not in d:
            raise CodecError(f"{key}: missing field")
    try:
        hp = ForestHyperparams(**d["hyperparams"])
    except (TypeError, ValueError) as e:
        raise CodecError(f"hyperparams: {e}") from e
    n_goals = d["n_goals"]
    if not isinstance(n_goals, int) or n_goals < 2:
        raise CodecError(f"n_goals: expected an integer >= 2, got {n_goals!r}")
    if d["feature_order"] != feature_order(n_goals):
        raise CodecError("feature_order: does not match the nu/d/theta column convention")
    trees_raw = d["trees"]
    if not isinstance(trees_raw, list) or len(trees_raw) != hp.n_trees:
        raise CodecError(
            f"trees: expected {hp.n_trees} trees per hyperparams.n_trees, "
            f"got {len(trees_raw) if isinstance(trees_raw, list) else type(trees_raw).__name__}")
    trees = [
        _node_from_dict(t, 3 * n_goals, n_goals, f"trees[{i}]")
        for i, t in enumerate(trees_raw)
    ]
    return ForestModel(
        hyperparams=hp, n_goals=n_goals, feature_order=d["feature_order"],
        trees=trees, format_version=version, scenario_id=d.get("scenario_id"),
    )


def save_model_file(model: ForestModel, path) -> None:
    with open(path, "wb") as f:
        f.write(save_model(model))


def load_model_file(path) -> ForestModel:
    with open(path, "rb") as f:
        return load_model(f.read())
