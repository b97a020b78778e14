"""Per-trial accuracy and log-loss, descriptive statistics, and method comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .forest import IntentEstimate
from .stats import TestResult, paired_t_test, wilcoxon_signed_rank

PROB_CLIP = 1e-15


@dataclass(frozen=True)
class PredictionRecord:
    t: float
    true_label: int
    estimate: IntentEstimate


@dataclass(frozen=True)
class TrialMetrics:
    trial_id: int
    accuracy: float
    log_loss: float
    n_predictions: int
    source: str
    log_loss_unnormalized: Optional[float] = None


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    sd: Optional[float]  # sample sd (n-1); None when n < 2
    n: int


def accuracy(records: Sequence[PredictionRecord]) -> float:
    """Fraction of records whose argmax prediction equals the true label."""
    if not records:
        raise ValueError("accuracy undefined on an empty record list")
    hits = sum(1 for r in records if r.estimate.predicted == r.true_label)
    return hits / len(records)


def log_loss(records: Sequence[PredictionRecord], n_goals: int,
             normalized: bool = True) -> float:
    """Mean cross-entropy of the true goal's predicted probability, in nats.

    With one-hot truth the sum collapses to -ln(p_true), divided by the
    goal count N (the reported convention here); normalized=False skips the
    1/N factor. Probabilities are clipped to [1e-15, 1] so a unanimous
    wrong vote stays finite.
    """
    if not records:
        raise ValueError("log_loss undefined on an empty record list")
    total = 0.0
    for r in records:
        probs = r.estimate.probabilities
        if len(probs) != n_goals:
            raise ValueError(
                f"estimate has {len(probs)} probabilities, expected {n_goals}")
        p_true = min(1.0, max(PROB_CLIP, probs[r.true_label]))
        total += -math.log(p_true)
    mean = total / len(records)
    return mean / n_goals if normalized else mean


def summarize(values: Sequence[float]) -> SummaryStats:
    """Mean and sample standard deviation (n-1 denominator)."""
    n = len(values)
    if n < 1:
        raise ValueError("summarize needs at least one value")
    mean = sum(values) / n
    if n < 2:
        return SummaryStats(mean=mean, sd=None, n=n)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return SummaryStats(mean=mean, sd=math.sqrt(var), n=n)


def trial_metrics(
    trial_id: int,
    records: Sequence[PredictionRecord],
    n_goals: int,
    source: str,
    include_unnormalized: bool = False,
) -> TrialMetrics:
    return TrialMetrics(
        trial_id=trial_id,
        accuracy=accuracy(records),
        log_loss=log_loss(records, n_goals),
        n_predictions=len(records),
        source=source,
        log_loss_unnormalized=(
            log_loss(records, n_goals, normalized=False) if include_unnormalized else None),
    )


@dataclass(frozen=True)
class ComparisonRow:
    scenario: Optional[int]
    method: str
    metric: str
    stats: Optional[SummaryStats]
    test: Optional[TestResult]


def compare_methods(
    mloii_trials: Sequence[TrialMetrics],
    boir_trials: Sequence[TrialMetrics],
    test: str = "t",
    scenario: Optional[int] = None,
) -> list[ComparisonRow]:
    """Descriptive stats per method plus one paired test per metric.

    Trials are paired by trial_id; both lists must cover the same ids.
    """
    if test not in ("t", "wilcoxon"):
        raise ValueError(f"test must be 't' or 'wilcoxon', got {test!r}")
    a_by_id = {m.trial_id: m for m in mloii_trials}
    b_by_id = {m.trial_id: m for m in boir_trials}
    if len(a_by_id) != len(mloii_trials) or len(b_by_id) != len(boir_trials):
        raise ValueError("duplicate trial_id in metric list")
    if set(a_by_id) != set(b_by_id):
        odd = sorted(set(a_by_id) ^ set(b_by_id))
        raise ValueError(f"trial ids not paired across methods: {odd}")
    ids = sorted(a_by_id)

    rows: list[ComparisonRow] = []
    for metric in ("accuracy", "log_loss"):
        a = [getattr(a_by_id[i], metric) for i in ids]
        b = [getattr(b_by_id[i], metric) for i in ids]
        if test == "t":
            result = paired_t_test(a, b)
        else:
            result = wilcoxon_signed_rank(a, b)
        rows.append(ComparisonRow(scenario, "mloii", metric, summarize(a), None))
        rows.append(ComparisonRow(scenario, "boir", metric, summarize(b), None))
        rows.append(ComparisonRow(scenario, "mloii_vs_boir", metric, None, result))
    return rows


REPORT_HEADER = "scenario,method,metric,mean,sd,n,test,statistic,p_value"
TRIAL_CSV_HEADER = "trial_id,method,accuracy,log_loss,n_predictions"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_to_csv(rows: Sequence[ComparisonRow]) -> str:
    lines = [REPORT_HEADER]
    for r in rows:
        stats = r.stats
        test = r.test
        lines.append(",".join([
            _fmt(r.scenario), r.method, r.metric,
            _fmt(stats.mean if stats else None),
            _fmt(stats.sd if stats else None),
            _fmt(stats.n if stats else None),
            test.kind if test else "",
            _fmt(test.statistic if test else None),
            _fmt(test.p_value if test else None),
        ]))
    return "\n".join(lines) + "\n"


def trial_metrics_to_csv(metrics: Sequence[TrialMetrics]) -> str:
    include_un = any(m.log_loss_unnormalized is not None for m in metrics)
    header = TRIAL_CSV_HEADER + (",log_loss_unnormalized" if include_un else "")
    lines = [header]
    for m in metrics:
        row = [str(m.trial_id), m.source, repr(m.accuracy), repr(m.log_loss),
               str(m.n_predictions)]
        if include_un:
            row.append(_fmt(m.log_loss_unnormalized))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def trial_metrics_from_csv(text: str) -> list[TrialMetrics]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(TRIAL_CSV_HEADER):
        raise ValueError("not a per-trial metrics CSV")
    has_un = lines[0].strip() != TRIAL_CSV_HEADER
    out = []
    for ln in lines[1:]:
        parts = ln.split(",")
        out.append(TrialMetrics(
            trial_id=int(parts[0]), source=parts[1], accuracy=float(parts[2]),
            log_loss=float(parts[3]), n_predictions=int(parts[4]),
            log_loss_unnormalized=(
                float(parts[5]) if has_un and len(parts) > 5 and parts[5] else None),
        ))
    return out
