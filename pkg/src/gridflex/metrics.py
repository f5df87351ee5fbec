"""Load-shaping cost functions and baseline-normalized scoring.

All metrics operate on the non-negative district net electricity series:
inputs are clipped at zero before evaluation. Scores divide each metric by
the value obtained by the rule-based baseline on the same dataset, and the
headline number is the plain average over the challenge metric subset
(everything except the quadratic metric).
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

CHALLENGE_METRICS = [
    "ramping",
    "one_minus_load_factor",
    "average_daily_peak",
    "peak_demand",
    "net_consumption",
]

ALL_METRICS = CHALLENGE_METRICS + ["quadratic"]


def _clip(series: Sequence[float]) -> np.ndarray:
    return np.clip(np.asarray(series, dtype=float), 0.0, None)


def ramping(series: Sequence[float]) -> float:
    e = _clip(series)
    if len(e) < 2:
        raise ValueError("ramping needs at least 2 samples")
    return float(np.abs(np.diff(e)).sum())


def one_minus_load_factor(series: Sequence[float], months: Optional[Sequence[float]] = None) -> float:
    """1 - mean/max, per calendar month averaged, or whole-series when no months given."""
    e = _clip(series)
    if np.max(e) == 0.0:
        raise ValueError("load factor undefined on an all-zero series")
    if months is None:
        return float(1.0 - np.mean(e) / np.max(e))
    months_arr = np.asarray(months)
    values = []
    for m in np.unique(months_arr):
        block = e[months_arr == m]
        if np.max(block) == 0.0:
            continue
        values.append(1.0 - np.mean(block) / np.max(block))
    if not values:
        raise ValueError("load factor undefined on an all-zero series")
    return float(np.mean(values))


def average_daily_peak(series: Sequence[float]) -> float:
    """Mean of the daily maxima; a trailing partial day counts as its own day."""
    e = _clip(series)
    if len(e) == 0:
        raise ValueError("average_daily_peak needs a non-empty series")
    peaks = [np.max(e[i : i + 24]) for i in range(0, len(e), 24)]
    return float(np.mean(peaks))


def peak_demand(series: Sequence[float]) -> float:
    e = _clip(series)
    if len(e) == 0:
        raise ValueError("peak_demand needs a non-empty series")
    return float(np.max(e))


def net_consumption(series: Sequence[float]) -> float:
    e = _clip(series)
    if len(e) == 0:
        raise ValueError("net_consumption needs a non-empty series")
    return float(np.sum(e))


def quadratic(series: Sequence[float]) -> float:
    e = _clip(series)
    if len(e) == 0:
        raise ValueError("quadratic needs a non-empty series")
    return float(np.sum(e**2))


_METRIC_FUNCS = {
    "ramping": ramping,
    "one_minus_load_factor": one_minus_load_factor,
    "average_daily_peak": average_daily_peak,
    "peak_demand": peak_demand,
    "net_consumption": net_consumption,
    "quadratic": quadratic,
}


def evaluate_metric(name: str, series: Sequence[float], months: Optional[Sequence[float]] = None) -> float:
    if name not in _METRIC_FUNCS:
        raise ValueError(f"unknown metric {name!r}")
    if name == "one_minus_load_factor":
        return one_minus_load_factor(series, months)
    return _METRIC_FUNCS[name](series)


@dataclass
class MetricReport:
    raw: Dict[str, float]
    baseline: Dict[str, float]
    normalized: Dict[str, float]
    average_score: float

    def rows(self) -> List[List[str]]:
        header = ["metric", "raw", "baseline", "score"]
        body = [
            [name, repr(self.raw[name]), repr(self.baseline[name]), repr(self.normalized[name])]
            for name in self.raw
        ]
        body.append(["average_score", "", "", repr(self.average_score)])
        return [header] + body


def score(
    agent_series: Sequence[float],
    baseline_series: Sequence[float],
    metric_names: Optional[Sequence[str]] = None,
    months: Optional[Sequence[float]] = None,
) -> MetricReport:
    """Normalize each metric by the baseline controller's value and average."""
    if len(agent_series) != len(baseline_series):
        raise ValueError("agent and baseline series must have the same length")
    if metric_names is None:
        metric_names = CHALLENGE_METRICS
    raw = {}
    baseline = {}
    normalized = {}
    for name in metric_names:
        raw[name] = evaluate_metric(name, agent_series, months)
        baseline[name] = evaluate_metric(name, baseline_series, months)
        if baseline[name] == 0.0:
            raise ValueError(f"baseline value of metric {name!r} is zero; cannot normalize")
        normalized[name] = raw[name] / baseline[name]
    average = float(np.mean([normalized[name] for name in metric_names]))
    return MetricReport(raw=raw, baseline=baseline, normalized=normalized, average_score=average)
