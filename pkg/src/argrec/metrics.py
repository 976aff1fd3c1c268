"""Evaluation harness: case-parameter grids, label match rate, and NDCG.

Label intervals follow the closed-interval reading: "recommended" matches
scores in [0.5, 1.0], "maybe recommended" in [0.25, 0.75], "not recommended"
in [0.0, 0.5]. A score of exactly 0.5 therefore matches both recommended and
not-recommended labels; that overlap is deliberate and isolated in
label_match so it can be contested in one place.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Sequence


class Label(str, Enum):
    RECOMMENDED = "recommended"
    MAYBE_RECOMMENDED = "maybe_recommended"
    NOT_RECOMMENDED = "not_recommended"


def parse_label(text: str) -> Label:
    return Label(text.strip().lower().replace(" ", "_"))


DEFAULT_GAINS: dict[Label, float] = {
    Label.RECOMMENDED: 2.0,
    Label.MAYBE_RECOMMENDED: 1.0,
    Label.NOT_RECOMMENDED: 0.0,
}

_INTERVALS: dict[Label, tuple[float, float]] = {
    Label.RECOMMENDED: (0.5, 1.0),
    Label.MAYBE_RECOMMENDED: (0.25, 0.75),
    Label.NOT_RECOMMENDED: (0.0, 0.5),
}


def check_gains(gains: Mapping[Label, float]) -> None:
    for label in Label:
        if label not in gains:
            raise ValueError(f"gains missing label {label.value}")
        if gains[label] < 0:
            raise ValueError("gains must be non-negative")
    if not (
        gains[Label.RECOMMENDED] >= gains[Label.MAYBE_RECOMMENDED] >= gains[Label.NOT_RECOMMENDED]
    ):
        raise ValueError("gains must be monotone in label order")


def generate_grid(values: Mapping[str, Sequence[Any]]) -> list[dict[str, Any]]:
    """Cartesian product of per-parameter value lists, in lexicographic order
    of the lists as given (last parameter varies fastest)."""
    if not values:
        raise ValueError("no parameters given")
    for name, options in values.items():
        if not options:
            raise ValueError(f"empty value list for parameter {name!r}")
        if len(set(map(repr, options))) != len(options):
            raise ValueError(f"duplicate values for parameter {name!r}")
    names = list(values)
    return [
        dict(zip(names, combo))
        for combo in itertools.product(*(values[name] for name in names))
    ]


def label_match(score: float, label: Label) -> bool:
    """Inclusive-interval match between an absolute score and its label."""
    if not 0.0 <= score <= 1.0:
        raise ValueError(f"score {score} outside [0, 1]")
    low, high = _INTERVALS[label]
    return low <= score <= high


@dataclass(frozen=True)
class Case:
    case_id: str
    params: Mapping[str, Any]
    vignette: str = ""


@dataclass(frozen=True)
class LabelledDataset:
    cases: tuple[Case, ...]
    options: tuple[str, ...]
    labels: Mapping[tuple[str, str], Label]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", dict(self.labels))
        expected = {(c.case_id, o) for c in self.cases for o in self.options}
        missing = expected - set(self.labels)
        extra = set(self.labels) - expected
        if missing:
            raise ValueError(f"label map is not total: {len(missing)} pairs missing")
        if extra:
            raise ValueError(f"label map has {len(extra)} pairs outside cases x options")

    @property
    def pair_count(self) -> int:
        return len(self.labels)


def load_dataset(cases_path: str | Path, labels_path: str | Path) -> LabelledDataset:
    """Cases: JSONL {"case_id","params","vignette"}; labels: JSONL
    {"case_id","option_id","label"}."""
    cases = []
    with open(cases_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            cases.append(
                Case(
                    case_id=str(record["case_id"]),
                    params=record.get("params", {}),
                    vignette=record.get("vignette", ""),
                )
            )
    labels: dict[tuple[str, str], Label] = {}
    options: list[str] = []
    with open(labels_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            option = str(record["option_id"])
            if option not in options:
                options.append(option)
            labels[(str(record["case_id"]), option)] = parse_label(record["label"])
    return LabelledDataset(cases=tuple(cases), options=tuple(sorted(options)), labels=labels)


def lmr(
    predictions: Mapping[tuple[str, str], float],
    dataset: LabelledDataset,
) -> float:
    """Fraction of (case, option) pairs whose score falls inside the interval
    prescribed by the pair's label."""
    missing = [pair for pair in dataset.labels if pair not in predictions]
    if missing:
        raise ValueError(f"predictions missing for {len(missing)} pairs, e.g. {missing[:3]}")
    matches = sum(
        1 for pair, label in dataset.labels.items() if label_match(predictions[pair], label)
    )
    return matches / dataset.pair_count


def ndcg_case(
    scores: Mapping[str, float],
    labels: Mapping[str, Label],
    gains: Mapping[Label, float] = DEFAULT_GAINS,
) -> float:
    """NDCG with log2(rank+1) discount over options ranked by descending
    score (ties broken by option id); 1.0 when the ideal DCG is zero."""
    if not scores or set(scores) != set(labels):
        raise ValueError("scores and labels must cover the same non-empty option set")
    check_gains(gains)
    ranked = sorted(scores, key=lambda o: (-scores[o], o))
    dcg = math.fsum(
        gains[labels[option]] / math.log2(rank + 1)
        for rank, option in enumerate(ranked, start=1)
    )
    ideal_gains = sorted((gains[labels[o]] for o in labels), reverse=True)
    ideal = math.fsum(g / math.log2(rank + 1) for rank, g in enumerate(ideal_gains, start=1))
    if ideal == 0.0:
        return 1.0
    return dcg / ideal


@dataclass(frozen=True)
class MetricsReport:
    lmr: float
    mean_ndcg: float
    per_case_ndcg: Mapping[str, float]
    token_usage: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_case_ndcg", dict(self.per_case_ndcg))

    def to_dict(self) -> dict:
        return {
            "lmr": self.lmr,
            "ndcg": self.mean_ndcg,
            "per_case_ndcg": dict(self.per_case_ndcg),
            "cases": len(self.per_case_ndcg),
            "token_usage": dict(self.token_usage),
        }

    def format_table(self) -> str:
        usage = self.token_usage.get("total", {})
        prompt_m = usage.get("prompt_tokens", 0) / 1e6
        completion_m = usage.get("completion_tokens", 0) / 1e6
        header = f"{'Cases':>8}  {'LMR':>8}  {'NDCG':>8}  {'I/O Tokens (M)':>16}"
        row = (
            f"{len(self.per_case_ndcg):>8}  {self.lmr:>8.4f}  {self.mean_ndcg:>8.4f}  "
            f"{prompt_m:>7.2f} / {completion_m:>5.2f}"
        )
        return header + "\n" + row


def evaluate_run(
    results: Mapping[str, Mapping[str, float]],
    dataset: LabelledDataset,
    gains: Mapping[Label, float] = DEFAULT_GAINS,
    token_usage: Mapping[str, Any] | None = None,
) -> MetricsReport:
    """LMR over all pairs plus mean per-case NDCG for a full run. ``results``
    maps case id to per-option scores and must cover the whole dataset."""
    check_gains(gains)
    missing_cases = [c.case_id for c in dataset.cases if c.case_id not in results]
    if missing_cases:
        raise ValueError(f"results missing for cases: {missing_cases[:5]} "
                         f"({len(missing_cases)} total)")
    predictions: dict[tuple[str, str], float] = {}
    for case in dataset.cases:
        case_scores = results[case.case_id]
        missing_options = [o for o in dataset.options if o not in case_scores]
        if missing_options:
            raise ValueError(
                f"case {case.case_id!r} missing scores for options {missing_options}"
            )
        for option in dataset.options:
            predictions[(case.case_id, option)] = case_scores[option]

    per_case = {
        case.case_id: ndcg_case(
            {o: predictions[(case.case_id, o)] for o in dataset.options},
            {o: dataset.labels[(case.case_id, o)] for o in dataset.options},
            gains,
        )
        for case in dataset.cases
    }
    mean_ndcg = math.fsum(per_case.values()) / len(per_case) if per_case else 0.0
    return MetricsReport(
        lmr=lmr(predictions, dataset),
        mean_ndcg=mean_ndcg,
        per_case_ndcg=per_case,
        token_usage=dict(token_usage or {}),
    )
