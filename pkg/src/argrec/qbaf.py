"""Tree-shaped quantitative bipolar argumentation frameworks and their gradual evaluation.

A framework is a set of arguments with base scores in [0, 1], connected by
attack and support relations that form a tree oriented toward a single root.
Evaluation assigns every argument a final strength: leaves keep their base
score, internal nodes combine their base score with the aggregated strengths
of their attackers and supporters. All operations here are pure functions
over immutable inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence


class Polarity(str, Enum):
    ATTACK = "attack"
    SUPPORT = "support"


@dataclass(frozen=True)
class Argument:
    id: str
    text: str
    base_score: float

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("argument id must be non-empty")
        if not self.text:
            raise ValueError(f"argument {self.id!r} has empty text")
        if not 0.0 <= self.base_score <= 1.0:
            raise ValueError(
                f"argument {self.id!r} base score {self.base_score} outside [0, 1]"
            )


@dataclass(frozen=True)
class Relation:
    source: str
    target: str
    polarity: Polarity

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValueError(f"self-relation on argument {self.source!r}")


@dataclass(frozen=True)
class Qbaf:
    """Immutable framework. Relations are normalised to attacks-then-supports
    order (stable within each polarity) so that equal content compares equal
    and serialisation is canonical."""

    arguments: tuple[Argument, ...]
    relations: tuple[Relation, ...]
    root: str

    def __post_init__(self) -> None:
        ordered = tuple(
            sorted(self.relations, key=lambda r: 0 if r.polarity is Polarity.ATTACK else 1)
        )
        object.__setattr__(self, "relations", ordered)

    def argument(self, arg_id: str) -> Argument:
        for arg in self.arguments:
            if arg.id == arg_id:
                return arg
        raise KeyError(arg_id)

    def argument_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.arguments)

    def children_of(self, arg_id: str, polarity: Polarity) -> tuple[str, ...]:
        """Sources of relations pointing at arg_id, in relation order."""
        return tuple(
            r.source for r in self.relations if r.target == arg_id and r.polarity is polarity
        )

    def parent_of(self, arg_id: str) -> str | None:
        for r in self.relations:
            if r.source == arg_id:
                return r.target
        return None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


class InvalidFrameworkError(Exception):
    """Raised when evaluation is attempted on a framework failing validation."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("; ".join(report.violations))


def validate(qbaf: Qbaf) -> ValidationReport:
    """Check the tree invariants. Violations are data, not faults."""
    violations: list[str] = []
    ids = [a.id for a in qbaf.arguments]
    id_set = set(ids)
    if len(ids) != len(id_set):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        violations.append(f"duplicate argument ids: {', '.join(dupes)}")
    if qbaf.root not in id_set:
        violations.append(f"root {qbaf.root!r} is not among the arguments")

    seen_pairs: dict[tuple[str, str], Polarity] = {}
    outgoing: dict[str, int] = {i: 0 for i in id_set}
    for rel in qbaf.relations:
        if rel.source not in id_set:
            violations.append(f"relation source {rel.source!r} is not an argument")
            continue
        if rel.target not in id_set:
            violations.append(f"relation target {rel.target!r} is not an argument")
            continue
        pair = (rel.source, rel.target)
        prior = seen_pairs.get(pair)
        if prior is not None and prior is not rel.polarity:
            violations.append(
                f"conflicting polarity: ({rel.source!r}, {rel.target!r}) is both attack and support"
            )
        elif prior is not None:
            violations.append(f"duplicate relation ({rel.source!r}, {rel.target!r})")
        else:
            seen_pairs[pair] = rel.polarity
        outgoing[rel.source] += 1

    for arg_id in id_set:
        count = outgoing.get(arg_id, 0)
        if arg_id == qbaf.root:
            if count != 0:
                violations.append(f"root {arg_id!r} has an outgoing relation")
        elif count == 0:
            violations.append(f"argument {arg_id!r} is disconnected from the root")
        elif count > 1:
            violations.append(f"argument {arg_id!r} has {count} outgoing relations")

    if not violations:
        # With unique outgoing edges, a cycle is any walk that never reaches the root.
        parent = {r.source: r.target for r in qbaf.relations}
        for arg_id in id_set:
            current, hops = arg_id, 0
            while current != qbaf.root and hops <= len(id_set):
                current = parent[current]
                hops += 1
            if current != qbaf.root:
                violations.append(f"argument {arg_id!r} lies on a cycle")
                break
    return ValidationReport(tuple(violations))


def _check_unit(value: float, what: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{what} {value} outside [0, 1]")


def df_quad_aggregate(strengths: Sequence[float]) -> float:
    """Aggregate child strengths: 0 for no children, else 1 - prod(1 - v)."""
    for v in strengths:
        _check_unit(v, "strength")
    if not strengths:
        return 0.0
    return 1.0 - math.prod(1.0 - v for v in strengths)


def df_quad_combine(v0: float, va: float, vs: float) -> float:
    """Combine a base score with aggregated attack va and support vs."""
    _check_unit(v0, "base score")
    _check_unit(va, "aggregated attack")
    _check_unit(vs, "aggregated support")
    if va == vs:
        return v0
    if va > vs:
        return v0 - v0 * (va - vs)
    return v0 + (1.0 - v0) * (vs - va)


@dataclass(frozen=True)
class Semantics:
    """Gradual semantics descriptor: how children aggregate and how the
    aggregate meets the base score."""

    name: str
    aggregate: Callable[[Sequence[float]], float]
    combine: Callable[[float, float, float], float]


DF_QUAD = Semantics("df-quad", df_quad_aggregate, df_quad_combine)

SEMANTICS = {DF_QUAD.name: DF_QUAD}


def evaluate(qbaf: Qbaf, semantics: Semantics = DF_QUAD) -> dict[str, float]:
    """Final strength of every argument, computed bottom-up (children first)."""
    report = validate(qbaf)
    if not report.ok:
        raise InvalidFrameworkError(report)

    base = {a.id: a.base_score for a in qbaf.arguments}
    attackers: dict[str, list[str]] = {a.id: [] for a in qbaf.arguments}
    supporters: dict[str, list[str]] = {a.id: [] for a in qbaf.arguments}
    for rel in qbaf.relations:
        bucket = attackers if rel.polarity is Polarity.ATTACK else supporters
        bucket[rel.target].append(rel.source)

    strengths: dict[str, float] = {}
    # Iterative post-order from the root; children pushed in relation order.
    stack: list[tuple[str, bool]] = [(qbaf.root, False)]
    while stack:
        arg_id, expanded = stack.pop()
        if not expanded:
            stack.append((arg_id, True))
            for child in attackers[arg_id] + supporters[arg_id]:
                stack.append((child, False))
        else:
            va = semantics.aggregate([strengths[c] for c in attackers[arg_id]])
            vs = semantics.aggregate([strengths[c] for c in supporters[arg_id]])
            strengths[arg_id] = semantics.combine(base[arg_id], va, vs)
    return strengths


def root_strength(qbaf: Qbaf, semantics: Semantics = DF_QUAD) -> float:
    return evaluate(qbaf, semantics)[qbaf.root]


def to_dict(qbaf: Qbaf) -> dict:
    return {
        "root": qbaf.root,
        "arguments": [
            {"id": a.id, "text": a.text, "base_score": a.base_score} for a in qbaf.arguments
        ],
        "attacks": [
            [r.source, r.target] for r in qbaf.relations if r.polarity is Polarity.ATTACK
        ],
        "supports": [
            [r.source, r.target] for r in qbaf.relations if r.polarity is Polarity.SUPPORT
        ],
    }


def from_dict(data: Mapping) -> Qbaf:
    arguments = tuple(
        Argument(id=a["id"], text=a["text"], base_score=float(a["base_score"]))
        for a in data["arguments"]
    )
    relations = tuple(
        Relation(source=s, target=t, polarity=Polarity.ATTACK) for s, t in data["attacks"]
    ) + tuple(
        Relation(source=s, target=t, polarity=Polarity.SUPPORT) for s, t in data["supports"]
    )
    return Qbaf(arguments=arguments, relations=relations, root=data["root"])


def to_json(qbaf: Qbaf) -> str:
    return json.dumps(to_dict(qbaf))


def from_json(text: str) -> Qbaf:
    return from_dict(json.loads(text))
