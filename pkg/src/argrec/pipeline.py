"""General framework construction and case-specific inference.

For each decision option this module mines a tree of attacking/supporting
arguments with natural-language applicability conditions, estimates base
scores, formalises the conditions against the shared parameter schema, and
at inference time prunes arguments whose conditions a case does not satisfy
before scoring the option by the root's final strength. Contestation edits
over the shared artifacts live here too, as pure functions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

from . import llm, prompts
from .conditions import (
    CaseParameters,
    Condition,
    ConditionEvalError,
    ConditionParseError,
    ParameterSchema,
    SchemaConflictError,
    TrueCondition,
    eval_condition,
    merge_schema,
    parse_condition,
    referenced_params,
    serialise_condition,
    validate_params,
)
from .llm import Backend, GenerationRequest, UsageAccumulator
from .ontology import Chunk, Entity, Ontology, canonical_name, chunks_for, entity_id_for
from .qbaf import (
    DF_QUAD,
    Argument,
    Polarity,
    Qbaf,
    Relation,
    Semantics,
    root_strength,
    validate,
)

logger = logging.getLogger(__name__)

ROOT_ID = "root"


class MiningProtocolError(Exception):
    pass


class FormalisationError(Exception):
    pass


class ExtractionError(Exception):
    def __init__(self, message: str, last_output: Any = None):
        self.last_output = last_output
        super().__init__(message)


class InstantiationError(Exception):
    def __init__(self, argument_id: str, param: str, message: str):
        self.argument_id = argument_id
        self.param = param
        super().__init__(message)


class BuildError(Exception):
    def __init__(self, message: str, failures: Sequence[tuple[str, str]]):
        self.failures = list(failures)
        super().__init__(message)


class EditRejectedError(Exception):
    pass


class NotFoundError(KeyError):
    pass


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class ArgumentScheme:
    major_premise: str
    minor_premises: tuple[str, ...] = ()
    critical_questions: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.critical_questions:
            raise ValueError("an argument scheme needs at least one critical question")

    def to_dict(self) -> dict:
        return {
            "major_premise": self.major_premise,
            "minor_premises": list(self.minor_premises),
            "critical_questions": list(self.critical_questions),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ArgumentScheme":
        return cls(
            major_premise=data["major_premise"],
            minor_premises=tuple(data.get("minor_premises", ())),
            critical_questions=tuple(data.get("critical_questions", ())),
        )


@dataclass(frozen=True)
class MiningConfig:
    depth: int = 1
    score_root: bool = False
    scheme: ArgumentScheme | None = None
    max_breadth: int | None = None
    retries: int = llm.DEFAULT_RETRIES
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError("mining depth must be >= 1")
        if self.max_breadth is not None and self.max_breadth < 1:
            raise ValueError("max_breadth must be positive")
        if self.retries < 1:
            raise ValueError("retry budget must be positive")


@dataclass(frozen=True)
class GeneralQbaf:
    """A framework whose non-root arguments carry natural-language and formal
    applicability conditions; the root's condition is implicitly vacuous."""

    entity: Entity
    qbaf: Qbaf
    nl_conditions: Mapping[str, str]
    formal_conditions: Mapping[str, Condition]

    def __post_init__(self) -> None:
        object.__setattr__(self, "nl_conditions", dict(self.nl_conditions))
        object.__setattr__(self, "formal_conditions", dict(self.formal_conditions))
        report = validate(self.qbaf)
        if not report.ok:
            raise ValueError(f"invalid framework for {self.entity.id}: {'; '.join(report.violations)}")
        non_root = {a.id for a in self.qbaf.arguments if a.id != self.qbaf.root}
        for label, mapping in (("nl", self.nl_conditions), ("formal", self.formal_conditions)):
            missing = non_root - set(mapping)
            if missing:
                raise ValueError(f"missing {label} conditions for: {sorted(missing)}")
            if self.qbaf.root in mapping:
                raise ValueError("the root argument cannot carry a condition")
            extra = set(mapping) - non_root
            if extra:
                raise ValueError(f"{label} conditions for unknown arguments: {sorted(extra)}")

    def condition_for(self, argument_id: str) -> Condition:
        if argument_id == self.qbaf.root:
            return TrueCondition()
        return self.formal_conditions[argument_id]

    def to_dict(self) -> dict:
        base = {
            "option": {
                "id": self.entity.id,
                "name": self.entity.name,
                "description": self.entity.description,
            },
            "root": self.qbaf.root,
            "arguments": [],
            "attacks": [[r.source, r.target] for r in self.qbaf.relations if r.polarity is Polarity.ATTACK],
            "supports": [[r.source, r.target] for r in self.qbaf.relations if r.polarity is Polarity.SUPPORT],
        }
        for arg in self.qbaf.arguments:
            entry: dict[str, Any] = {"id": arg.id, "text": arg.text, "base_score": arg.base_score}
            if arg.id != self.qbaf.root:
                entry["nl_condition"] = self.nl_conditions[arg.id]
                entry["condition"] = serialise_condition(self.formal_conditions[arg.id])
            base["arguments"].append(entry)
        return base

    @classmethod
    def from_dict(cls, data: Mapping) -> "GeneralQbaf":
        arguments = tuple(
            Argument(a["id"], a["text"], float(a["base_score"])) for a in data["arguments"]
        )
        relations = tuple(
            Relation(s, t, Polarity.ATTACK) for s, t in data["attacks"]
        ) + tuple(Relation(s, t, Polarity.SUPPORT) for s, t in data["supports"])
        qbaf = Qbaf(arguments=arguments, relations=relations, root=data["root"])
        nl = {a["id"]: a["nl_condition"] for a in data["arguments"] if a["id"] != data["root"]}
        formal = {
            a["id"]: parse_condition(a["condition"])
            for a in data["arguments"]
            if a["id"] != data["root"]
        }
        option = data["option"]
        return cls(
            entity=Entity(option["id"], option["name"], option.get("description", "")),
            qbaf=qbaf,
            nl_conditions=nl,
            formal_conditions=formal,
        )


# ---------------------------------------------------------------------------
# Framework mining (step 1)


MINE_RESPONSE_SCHEMA = {
    "type": "object",
    "properties": {
        "attackers": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "condition": {"type": "string", "minLength": 1},
                },
                "required": ["text", "condition"],
            },
        },
        "supporters": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "text": {"type": "string", "minLength": 1},
                    "condition": {"type": "string", "minLength": 1},
                },
                "required": ["text", "condition"],
            },
        },
    },
    "required": ["attackers", "supporters"],
}


@dataclass(frozen=True)
class MinedBaf:
    """Framework skeleton before scoring: argument texts in discovery order,
    relations, and the natural-language condition of every non-root argument."""

    root_id: str
    arguments: tuple[tuple[str, str], ...]  # (id, text) in discovery order
    relations: tuple[Relation, ...]
    nl_conditions: Mapping[str, str]


def root_argument_text(entity: Entity) -> str:
    return f"{entity.name} is an appropriate option in the present case."


def mine_baf(
    entity: Entity,
    chunks: Sequence[Chunk],
    config: MiningConfig,
    backend: Backend,
    usage: UsageAccumulator,
    stage: str = llm.STAGE_QBAF,
) -> MinedBaf:
    """Recursively mine attackers/supporters to the configured depth, breadth
    uncapped unless config.max_breadth truncates each list."""
    if not chunks:
        raise ValueError(f"no source chunks for option {entity.id!r}")

    arguments: list[tuple[str, str]] = [(ROOT_ID, root_argument_text(entity))]
    relations: list[Relation] = []
    nl_conditions: dict[str, str] = {}

    frontier: list[tuple[str, str, int]] = [(ROOT_ID, arguments[0][1], 0)]
    while frontier:
        parent_id, parent_text, level = frontier.pop(0)
        if level >= config.depth:
            continue
        reply = _mine_children(entity, parent_id, parent_text, chunks, config, backend, usage, stage)
        prefix = "" if parent_id == ROOT_ID else f"{parent_id}."
        attackers = reply["attackers"]
        supporters = reply["supporters"]
        if config.max_breadth is not None:
            attackers = attackers[: config.max_breadth]
            supporters = supporters[: config.max_breadth]
        for index, item in enumerate(attackers, start=1):
            child_id = f"{prefix}a{index}"
            arguments.append((child_id, item["text"]))
            relations.append(Relation(child_id, parent_id, Polarity.ATTACK))
            nl_conditions[child_id] = item["condition"]
            frontier.append((child_id, item["text"], level + 1))
        for index, item in enumerate(supporters, start=1):
            child_id = f"{prefix}s{index}"
            arguments.append((child_id, item["text"]))
            relations.append(Relation(child_id, parent_id, Polarity.SUPPORT))
            nl_conditions[child_id] = item["condition"]
            frontier.append((child_id, item["text"], level + 1))

    return MinedBaf(
        root_id=ROOT_ID,
        arguments=tuple(arguments),
        relations=tuple(relations),
        nl_conditions=nl_conditions,
    )


def _mine_children(
    entity: Entity,
    parent_id: str,
    parent_text: str,
    chunks: Sequence[Chunk],
    config: MiningConfig,
    backend: Backend,
    usage: UsageAccumulator,
    stage: str,
) -> dict:
    user = prompts.build_mining_prompt(
        option_name=entity.name,
        target_text=parent_text,
        target_is_root=parent_id == ROOT_ID,
        chunks=chunks,
        scheme=config.scheme,
    )
    last_problem = ""
    for attempt in range(config.retries):
        request = GenerationRequest(
            system=prompts.MINING_SYSTEM,
            user=user if not last_problem else f"{user}\n\nYour previous reply was rejected: {last_problem}",
            response_schema=MINE_RESPONSE_SCHEMA,
            temperature=config.temperature,
        )
        reply = llm.generate(backend, request, usage, stage, retries=config.retries)
        attacker_texts = {item["text"] for item in reply["attackers"]}
        dual = [item["text"] for item in reply["supporters"] if item["text"] in attacker_texts]
        if dual:
            last_problem = (
                "the same argument appears as both an attacker and a supporter "
                f"of the target: {dual[0]!r}; attack and support are mutually exclusive"
            )
            logger.info("mining reply for %s rejected: %s", parent_id, last_problem)
            continue
        return reply
    raise MiningProtocolError(
        f"mining {entity.id!r} argument {parent_id!r}: {last_problem or 'no valid reply'}"
    )


# ---------------------------------------------------------------------------
# Base score estimation (step 2)


def estimate_base_score(
    argument_text: str,
    chunks: Sequence[Chunk],
    parent_text: str | None = None,
    is_support: bool | None = None,
    nl_condition: str | None = None,
    *,
    backend: Backend,
    usage: UsageAccumulator,
    retries: int = llm.DEFAULT_RETRIES,
    temperature: float = 1.0,
    stage: str = llm.STAGE_QBAF,
) -> float:
    """Score one argument in [0, 1]. Out-of-range or unparseable replies are
    retried with the problem appended, then defaulted to the 0.5 midpoint."""
    if parent_text is not None and (is_support is None or nl_condition is None):
        raise ValueError("non-root scoring needs parent text, polarity, and condition")
    user = prompts.build_scoring_prompt(argument_text, chunks, parent_text, is_support, nl_condition)
    problem = ""
    for attempt in range(max(1, retries)):
        request = GenerationRequest(
            system=prompts.SCORING_SYSTEM,
            user=user if not problem else f"{user}\n\nYour previous reply was rejected: {problem}",
            temperature=temperature,
        )
        text = llm.generate(backend, request, usage, stage)
        try:
            value = float(str(text).strip())
        except ValueError:
            problem = f"reply {text!r} is not a number"
            continue
        if 0.0 <= value <= 1.0:
            return value
        problem = f"value {value} is outside [0, 1]"
    logger.warning(
        "base score for %r defaulted to 0.5 after %d attempts (%s)",
        argument_text[:60],
        retries,
        problem,
    )
    return 0.5


# ---------------------------------------------------------------------------
# Condition formalisation (step 3)


FORMALISE_RESPONSE_SCHEMA = {
    "type": "object",
    "properties": {
        "condition": {"type": "object"},
        "parameters": {"type": "object"},
    },
    "required": ["condition", "parameters"],
}


def formalise_condition(
    argument_text: str,
    nl_condition: str,
    schema: ParameterSchema,
    *,
    backend: Backend,
    usage: UsageAccumulator,
    retries: int = llm.DEFAULT_RETRIES,
    temperature: float = 1.0,
    stage: str = llm.STAGE_QBAF,
) -> tuple[Condition, ParameterSchema]:
    """Translate a natural-language condition into the formal subset,
    returning the condition and the schema extended with any new parameters
    it references."""
    if not nl_condition:
        raise ValueError("natural-language condition must be non-empty")
    user = prompts.build_formalise_prompt(argument_text, nl_condition, schema)
    problem = ""
    for attempt in range(max(1, retries)):
        request = GenerationRequest(
            system=prompts.FORMALISE_SYSTEM,
            user=user if not problem else f"{user}\n\nYour previous reply was rejected: {problem}",
            response_schema=FORMALISE_RESPONSE_SCHEMA,
            temperature=temperature,
        )
        reply = llm.generate(backend, request, usage, stage, retries=retries)
        try:
            condition = parse_condition(reply["condition"])
            additions = ParameterSchema.from_dict(reply["parameters"])
        except SchemaConflictError:
            raise
        except (ConditionParseError, ValueError) as exc:
            problem = str(exc)
            logger.info("formalisation reply rejected: %s", problem)
            continue
        merged = merge_schema(schema, additions)
        missing = referenced_params(condition) - set(merged.names())
        if missing:
            problem = f"condition references undefined parameters: {sorted(missing)}"
            logger.info("formalisation reply rejected: %s", problem)
            continue
        return condition, merged
    raise FormalisationError(f"could not formalise condition {nl_condition!r}: {problem}")


# ---------------------------------------------------------------------------
# General framework construction (the full per-option loop)


@dataclass
class BuildResult:
    frameworks: list[GeneralQbaf]
    schema: ParameterSchema
    failures: list[tuple[str, str]] = field(default_factory=list)


def build_general_qbafs(
    ontology: Ontology,
    options: Sequence[Entity],
    config: MiningConfig,
    backend: Backend,
    usage: UsageAccumulator,
) -> BuildResult:
    """Mine, score, and formalise a general framework per option, threading
    the parameter schema through sequentially. Per-option failures are
    collected; the build succeeds if at least one framework was built."""
    schema = ParameterSchema()
    frameworks: list[GeneralQbaf] = []
    failures: list[tuple[str, str]] = []

    for entity in options:
        if entity.id not in ontology.entities:
            failures.append((entity.id, "option is not an ontology entity"))
            continue
        chunks = chunks_for(ontology, entity)
        working_schema = schema
        try:
            mined = mine_baf(entity, chunks, config, backend, usage)
            scored: list[Argument] = []
            nl_conditions: dict[str, str] = {}
            formal_conditions: dict[str, Condition] = {}
            parent_of = {r.source: (r.target, r.polarity) for r in mined.relations}
            texts = dict(mined.arguments)
            for arg_id, text in mined.arguments:
                if arg_id == mined.root_id and not config.score_root:
                    score = 0.5
                elif arg_id == mined.root_id:
                    score = estimate_base_score(
                        text,
                        chunks,
                        backend=backend,
                        usage=usage,
                        retries=config.retries,
                        temperature=config.temperature,
                    )
                else:
                    parent_id, polarity = parent_of[arg_id]
                    nl = mined.nl_conditions[arg_id]
                    score = estimate_base_score(
                        text,
                        chunks,
                        parent_text=texts[parent_id],
                        is_support=polarity is Polarity.SUPPORT,
                        nl_condition=nl,
                        backend=backend,
                        usage=usage,
                        retries=config.retries,
                        temperature=config.temperature,
                    )
                    condition, working_schema = formalise_condition(
                        text,
                        nl,
                        working_schema,
                        backend=backend,
                        usage=usage,
                        retries=config.retries,
                        temperature=config.temperature,
                    )
                    nl_conditions[arg_id] = nl
                    formal_conditions[arg_id] = condition
                scored.append(Argument(arg_id, text, score))
            framework = GeneralQbaf(
                entity=entity,
                qbaf=Qbaf(tuple(scored), mined.relations, mined.root_id),
                nl_conditions=nl_conditions,
                formal_conditions=formal_conditions,
            )
        except (
            MiningProtocolError,
            FormalisationError,
            SchemaConflictError,
            llm.GenerationError,
            llm.TransportError,
            ValueError,
        ) as exc:
            logger.warning("building framework for %s failed: %s", entity.id, exc)
            failures.append((entity.id, str(exc)))
            continue  # schema additions from the failed option are rolled back
        frameworks.append(framework)
        schema = working_schema

    if options and not frameworks:
        raise BuildError("no framework could be built", failures)
    return BuildResult(frameworks=frameworks, schema=schema, failures=failures)


# ---------------------------------------------------------------------------
# Case-specific inference


def extract_params(
    case_text: str,
    schema: ParameterSchema,
    *,
    backend: Backend,
    usage: UsageAccumulator,
    retries: int = llm.DEFAULT_RETRIES,
    temperature: float = 1.0,
    stage: str = llm.STAGE_INFERENCE,
) -> CaseParameters:
    """Extract schema-conformant parameters from a case description.
    Undeterminable parameters are omitted or reported as null (unknown)."""
    if len(schema) == 0:
        raise ValueError("cannot extract against an empty parameter schema")
    user = prompts.build_extraction_prompt(case_text, schema)
    problem = ""
    last_output: Any = None
    for attempt in range(max(1, retries)):
        request = GenerationRequest(
            system=prompts.EXTRACTION_SYSTEM,
            user=user if not problem else f"{user}\n\nYour previous reply was rejected: {problem}",
            response_schema={"type": "object"},
            temperature=temperature,
        )
        reply = llm.generate(backend, request, usage, stage, retries=retries)
        last_output = reply
        try:
            params = CaseParameters.from_flat(reply)
        except ValueError as exc:
            problem = str(exc)
            continue
        report = validate_params(params, schema)
        if report.ok:
            return params
        problem = "; ".join(report.violations)
        logger.info("extraction attempt %d rejected: %s", attempt + 1, problem)
    raise ExtractionError(f"parameter extraction failed: {problem}", last_output=last_output)


@dataclass(frozen=True)
class RemovedArgument:
    """Provenance for one pruned argument: either its own condition failed,
    or an ancestor was removed and took the subtree with it."""

    argument: Argument
    reason: str  # "condition-unsatisfied" | "ancestor-removed"
    condition: dict | None = None
    ancestor: str | None = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "id": self.argument.id,
            "text": self.argument.text,
            "base_score": self.argument.base_score,
            "reason": self.reason,
        }
        if self.condition is not None:
            out["condition"] = self.condition
        if self.ancestor is not None:
            out["ancestor"] = self.ancestor
        return out


@dataclass(frozen=True)
class InstantiationResult:
    qbaf: Qbaf
    removed: tuple[RemovedArgument, ...]


def _descendants(relations: Sequence[Relation], arg_id: str) -> list[str]:
    """Transitive sources pointing (directly or not) at arg_id, discovery order."""
    children: dict[str, list[str]] = {}
    for rel in relations:
        children.setdefault(rel.target, []).append(rel.source)
    out: list[str] = []
    stack = list(children.get(arg_id, ()))
    while stack:
        node = stack.pop(0)
        out.append(node)
        stack.extend(children.get(node, ()))
    return out


def instantiate(general: GeneralQbaf, params: CaseParameters) -> InstantiationResult:
    """Prune every argument whose condition the case does not satisfy,
    together with its descendants and incident relations. The root always
    survives (its condition is vacuous)."""
    qbaf = general.qbaf
    alive = {a.id for a in qbaf.arguments}
    removed: list[RemovedArgument] = []
    by_id = {a.id: a for a in qbaf.arguments}

    for arg in qbaf.arguments:
        if arg.id == qbaf.root or arg.id not in alive:
            continue
        condition = general.formal_conditions[arg.id]
        try:
            satisfied = eval_condition(condition, params)
        except ConditionEvalError as exc:
            raise InstantiationError(
                arg.id,
                exc.param,
                f"condition for argument {arg.id!r} failed on parameter {exc.param!r}: {exc}",
            ) from exc
        if satisfied:
            continue
        removed.append(
            RemovedArgument(
                argument=arg,
                reason="condition-unsatisfied",
                condition=serialise_condition(condition),
            )
        )
        alive.discard(arg.id)
        for victim_id in _descendants(qbaf.relations, arg.id):
            if victim_id in alive:
                removed.append(
                    RemovedArgument(argument=by_id[victim_id], reason="ancestor-removed", ancestor=arg.id)
                )
                alive.discard(victim_id)

    pruned = Qbaf(
        arguments=tuple(a for a in qbaf.arguments if a.id in alive),
        relations=tuple(r for r in qbaf.relations if r.source in alive and r.target in alive),
        root=qbaf.root,
    )
    report = validate(pruned)
    if not report.ok:  # structurally impossible: pruning is descendant-closed
        raise InstantiationError(qbaf.root, "", "; ".join(report.violations))
    return InstantiationResult(qbaf=pruned, removed=tuple(removed))


@dataclass(frozen=True)
class RecommendationResult:
    option: Entity
    qbaf: Qbaf
    score: float
    removed: tuple[RemovedArgument, ...]
    params: CaseParameters

    def to_dict(self) -> dict:
        from . import qbaf as qbaf_mod

        return {
            "option": {"id": self.option.id, "name": self.option.name},
            "score": self.score,
            "qbaf": qbaf_mod.to_dict(self.qbaf),
            "strengths": qbaf_mod.evaluate(self.qbaf),
            "removed": [r.to_dict() for r in self.removed],
            "params": self.params.to_dict(),
        }


@dataclass(frozen=True)
class InferenceOutcome:
    params: CaseParameters
    results: tuple[RecommendationResult, ...]
    errors: tuple[tuple[str, str], ...] = ()

    def scores(self) -> dict[str, float]:
        return {r.option.id: r.score for r in self.results}

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "results": [r.to_dict() for r in self.results],
            "errors": [list(e) for e in self.errors],
        }


def infer_with_params(
    generals: Sequence[GeneralQbaf],
    params: CaseParameters,
    semantics: Semantics = DF_QUAD,
) -> InferenceOutcome:
    results: list[RecommendationResult] = []
    errors: list[tuple[str, str]] = []
    for general in generals:
        try:
            inst = instantiate(general, params)
        except InstantiationError as exc:
            errors.append((general.entity.id, str(exc)))
            continue
        score = root_strength(inst.qbaf, semantics)
        results.append(
            RecommendationResult(
                option=general.entity,
                qbaf=inst.qbaf,
                score=score,
                removed=inst.removed,
                params=params,
            )
        )
    return InferenceOutcome(params=params, results=tuple(results), errors=tuple(errors))


def infer_case(
    generals: Sequence[GeneralQbaf],
    schema: ParameterSchema,
    case_text: str,
    backend: Backend,
    usage: UsageAccumulator,
    semantics: Semantics = DF_QUAD,
    retries: int = llm.DEFAULT_RETRIES,
) -> InferenceOutcome:
    """Extract parameters once, then instantiate and score every option."""
    if not generals:
        raise ValueError("no general frameworks to infer over")
    params = extract_params(case_text, schema, backend=backend, usage=usage, retries=retries)
    return infer_with_params(generals, params, semantics)


# ---------------------------------------------------------------------------
# Contestation: edits over the shared artifacts


@dataclass(frozen=True)
class Artifacts:
    """Everything inference depends on, as one immutable bundle. ``options``
    records the entity ids selected for framework construction."""

    ontology: Ontology
    qbafs: Mapping[str, GeneralQbaf] = field(default_factory=dict)
    schema: ParameterSchema = field(default_factory=ParameterSchema)
    options: tuple[str, ...] = ()
    case_overrides: Mapping[str, CaseParameters] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "qbafs", dict(self.qbafs))
        object.__setattr__(self, "options", tuple(self.options))
        object.__setattr__(self, "case_overrides", dict(self.case_overrides))

    def frameworks(self) -> list[GeneralQbaf]:
        return list(self.qbafs.values())


EDIT_KINDS = (
    "set_base_score",
    "add_argument",
    "remove_argument",
    "replace_condition",
    "edit_param_description",
    "add_entity",
    "remove_entity",
    "override_case_params",
)


def _require(edit: Mapping, *keys: str) -> None:
    missing = [k for k in keys if k not in edit]
    if missing:
        raise EditRejectedError(f"edit is missing fields: {missing}")


def _get_framework(artifacts: Artifacts, option: str) -> GeneralQbaf:
    framework = artifacts.qbafs.get(option)
    if framework is None:
        raise NotFoundError(f"unknown option: {option!r}")
    return framework


def _replace_framework(artifacts: Artifacts, option: str, framework: GeneralQbaf) -> Artifacts:
    qbafs = dict(artifacts.qbafs)
    qbafs[option] = framework
    return replace(artifacts, qbafs=qbafs)


def apply_edit(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    """Apply one contestation edit, validating every module invariant. Raises
    EditRejectedError on invariant violations and NotFoundError for unknown
    identifiers; never mutates the input."""
    kind = edit.get("kind")
    if kind not in EDIT_KINDS:
        raise EditRejectedError(f"unknown edit kind: {kind!r}")
    handler = {
        "set_base_score": _edit_set_base_score,
        "add_argument": _edit_add_argument,
        "remove_argument": _edit_remove_argument,
        "replace_condition": _edit_replace_condition,
        "edit_param_description": _edit_param_description,
        "add_entity": _edit_add_entity,
        "remove_entity": _edit_remove_entity,
        "override_case_params": _edit_override_case_params,
    }[kind]
    return handler(artifacts, edit)


def _edit_set_base_score(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    _require(edit, "option", "argument", "value")
    framework = _get_framework(artifacts, edit["option"])
    value = edit["value"]
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not 0.0 <= value <= 1.0:
        raise EditRejectedError(f"base score {value!r} outside [0, 1]")
    ids = {a.id for a in framework.qbaf.arguments}
    if edit["argument"] not in ids:
        raise NotFoundError(f"unknown argument: {edit['argument']!r}")
    arguments = tuple(
        Argument(a.id, a.text, float(value)) if a.id == edit["argument"] else a
        for a in framework.qbaf.arguments
    )
    qbaf = Qbaf(arguments, framework.qbaf.relations, framework.qbaf.root)
    return _replace_framework(artifacts, edit["option"], replace(framework, qbaf=qbaf))


def _next_child_id(framework: GeneralQbaf, parent: str, polarity: Polarity) -> str:
    prefix = "" if parent == framework.qbaf.root else f"{parent}."
    letter = "a" if polarity is Polarity.ATTACK else "s"
    existing = {a.id for a in framework.qbaf.arguments}
    index = 1
    while f"{prefix}{letter}{index}" in existing:
        index += 1
    return f"{prefix}{letter}{index}"


def _edit_add_argument(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    _require(edit, "option", "parent", "polarity", "text", "base_score", "nl_condition", "condition")
    framework = _get_framework(artifacts, edit["option"])
    ids = {a.id for a in framework.qbaf.arguments}
    if edit["parent"] not in ids:
        raise NotFoundError(f"unknown parent argument: {edit['parent']!r}")
    try:
        polarity = Polarity(edit["polarity"])
    except ValueError:
        raise EditRejectedError(f"unknown polarity: {edit['polarity']!r}") from None
    if not edit["nl_condition"]:
        raise EditRejectedError("natural-language condition must be non-empty")
    try:
        condition = parse_condition(edit["condition"])
    except ConditionParseError as exc:
        raise EditRejectedError(f"condition does not parse: {exc}") from exc
    undefined = referenced_params(condition) - set(artifacts.schema.names())
    if undefined:
        raise EditRejectedError(f"condition references undefined parameters: {sorted(undefined)}")
    value = edit["base_score"]
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not 0.0 <= value <= 1.0:
        raise EditRejectedError(f"base score {value!r} outside [0, 1]")
    if not edit["text"]:
        raise EditRejectedError("argument text must be non-empty")

    new_id = _next_child_id(framework, edit["parent"], polarity)
    qbaf = Qbaf(
        framework.qbaf.arguments + (Argument(new_id, edit["text"], float(value)),),
        framework.qbaf.relations + (Relation(new_id, edit["parent"], polarity),),
        framework.qbaf.root,
    )
    nl = dict(framework.nl_conditions)
    nl[new_id] = edit["nl_condition"]
    formal = dict(framework.formal_conditions)
    formal[new_id] = condition
    updated = GeneralQbaf(framework.entity, qbaf, nl, formal)
    return _replace_framework(artifacts, edit["option"], updated)


def _edit_remove_argument(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    _require(edit, "option", "argument")
    framework = _get_framework(artifacts, edit["option"])
    target = edit["argument"]
    if target == framework.qbaf.root:
        raise EditRejectedError("the root argument cannot be removed")
    ids = {a.id for a in framework.qbaf.arguments}
    if target not in ids:
        raise NotFoundError(f"unknown argument: {target!r}")
    doomed = {target, *_descendants(framework.qbaf.relations, target)}
    qbaf = Qbaf(
        tuple(a for a in framework.qbaf.arguments if a.id not in doomed),
        tuple(r for r in framework.qbaf.relations if r.source not in doomed and r.target not in doomed),
        framework.qbaf.root,
    )
    nl = {k: v for k, v in framework.nl_conditions.items() if k not in doomed}
    formal = {k: v for k, v in framework.formal_conditions.items() if k not in doomed}
    updated = GeneralQbaf(framework.entity, qbaf, nl, formal)
    return _replace_framework(artifacts, edit["option"], updated)


def _edit_replace_condition(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    _require(edit, "option", "argument", "condition")
    framework = _get_framework(artifacts, edit["option"])
    target = edit["argument"]
    if target == framework.qbaf.root:
        raise EditRejectedError("the root argument carries no condition")
    if target not in framework.formal_conditions:
        raise NotFoundError(f"unknown argument: {target!r}")
    try:
        condition = parse_condition(edit["condition"])
    except ConditionParseError as exc:
        raise EditRejectedError(f"condition does not parse: {exc}") from exc
    undefined = referenced_params(condition) - set(artifacts.schema.names())
    if undefined:
        raise EditRejectedError(f"condition references undefined parameters: {sorted(undefined)}")
    formal = dict(framework.formal_conditions)
    formal[target] = condition
    nl = dict(framework.nl_conditions)
    if "nl_condition" in edit:
        if not edit["nl_condition"]:
            raise EditRejectedError("natural-language condition must be non-empty")
        nl[target] = edit["nl_condition"]
    updated = GeneralQbaf(framework.entity, framework.qbaf, nl, formal)
    return _replace_framework(artifacts, edit["option"], updated)


def _edit_param_description(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    _require(edit, "name", "description")
    if edit["name"] not in artifacts.schema:
        raise NotFoundError(f"unknown parameter: {edit['name']!r}")
    schema = artifacts.schema.with_description(edit["name"], edit["description"])
    return replace(artifacts, schema=schema)


def _edit_add_entity(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    _require(edit, "name")
    name = canonical_name(edit.get("name", ""))
    if not name:
        raise EditRejectedError("entity name must be non-empty")
    if artifacts.ontology.entity_by_name(name) is not None:
        raise EditRejectedError(f"entity named {name!r} already exists")
    parent = edit.get("parent")
    if parent is not None and parent not in artifacts.ontology.entities:
        raise NotFoundError(f"unknown parent entity: {parent!r}")
    entity_id = entity_id_for(name)
    entities = dict(artifacts.ontology.entities)
    suffix = 2
    while entity_id in entities:
        entity_id = f"{entity_id_for(name)}-{suffix}"
        suffix += 1
    entities[entity_id] = Entity(entity_id, name, edit.get("description", ""))
    hierarchy = set(artifacts.ontology.hierarchy)
    if parent is not None:
        hierarchy.add((parent, entity_id))
    ontology = Ontology(
        entities=entities,
        chunks=artifacts.ontology.chunks,
        hierarchy=frozenset(hierarchy),
        provenance=artifacts.ontology.provenance,
    )
    return replace(artifacts, ontology=ontology)


def _edit_remove_entity(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    _require(edit, "entity")
    entity_id = edit["entity"]
    if entity_id not in artifacts.ontology.entities:
        raise NotFoundError(f"unknown entity: {entity_id!r}")
    entities = {k: v for k, v in artifacts.ontology.entities.items() if k != entity_id}
    hierarchy = frozenset(
        (p, c) for p, c in artifacts.ontology.hierarchy if entity_id not in (p, c)
    )
    provenance = frozenset(
        (e, c) for e, c in artifacts.ontology.provenance if e != entity_id
    )
    ontology = Ontology(
        entities=entities,
        chunks=artifacts.ontology.chunks,
        hierarchy=hierarchy,
        provenance=provenance,
    )
    qbafs = {k: v for k, v in artifacts.qbafs.items() if k != entity_id}
    options = tuple(o for o in artifacts.options if o != entity_id)
    return replace(artifacts, ontology=ontology, qbafs=qbafs, options=options)


def _edit_override_case_params(artifacts: Artifacts, edit: Mapping) -> Artifacts:
    _require(edit, "case_id", "params")
    try:
        params = CaseParameters.from_flat(edit["params"])
    except ValueError as exc:
        raise EditRejectedError(f"invalid parameters: {exc}") from exc
    report = validate_params(params, artifacts.schema)
    if not report.ok:
        raise EditRejectedError("; ".join(report.violations))
    overrides = dict(artifacts.case_overrides)
    overrides[str(edit["case_id"])] = params
    return replace(artifacts, case_overrides=overrides)
