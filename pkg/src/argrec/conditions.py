"""Argument applicability conditions and the global parameter schema.

Conditions are a closed subset of JSON Schema draft 2020-12, covering exactly
the keywords {properties, const, enum, type, minimum, maximum,
exclusiveMinimum, exclusiveMaximum, required, anyOf, allOf, not}. They are
parsed into a small AST and evaluated against extracted case parameters.

Semantics follow JSON Schema with one deliberate exception: a numeric
keyword meeting a present non-numeric value raises an evaluation error
instead of passing vacuously, because in this engine parameters are typed by
the global schema and such a mismatch signals corrupted extraction.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Union

ParamValue = Union[bool, int, float, str]

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

VALUE_TYPES = ("boolean", "integer", "number", "string")

SCHEMA_URI = "https://json-schema.org/draft/2020-12/schema"

_CONSTRAINT_KEYWORDS = (
    "type",
    "const",
    "enum",
    "minimum",
    "maximum",
    "exclusiveMinimum",
    "exclusiveMaximum",
)
_NUMERIC_KEYWORDS = ("minimum", "maximum", "exclusiveMinimum", "exclusiveMaximum")

_UNSET: Any = object()


class ConditionParseError(ValueError):
    pass


class UnsupportedKeywordError(ConditionParseError):
    def __init__(self, keyword: str):
        self.keyword = keyword
        super().__init__(f"unsupported keyword: {keyword!r}")


class ConditionEvalError(ValueError):
    def __init__(self, param: str, message: str):
        self.param = param
        super().__init__(message)


class SchemaConflictError(ValueError):
    def __init__(self, name: str, current: "ParamDef", addition: "ParamDef"):
        self.name = name
        self.current = current
        self.addition = addition
        super().__init__(
            f"conflicting redefinition of parameter {name!r}: "
            f"existing {current!r} vs new {addition!r}"
        )


# ---------------------------------------------------------------------------
# Condition AST


class Condition:
    """Base class; concrete nodes below."""


@dataclass(frozen=True)
class TrueCondition(Condition):
    """Vacuous condition (the empty schema)."""


@dataclass(frozen=True)
class PropertyConstraint(Condition):
    param: str
    value_type: str | None = None
    const: Any = _UNSET
    enum: tuple[ParamValue, ...] | None = None
    minimum: float | int | None = None
    maximum: float | int | None = None
    exclusive_minimum: float | int | None = None
    exclusive_maximum: float | int | None = None

    def __post_init__(self) -> None:
        if not _IDENTIFIER.match(self.param):
            raise ConditionParseError(f"invalid parameter name: {self.param!r}")
        if self.value_type is not None and self.value_type not in VALUE_TYPES:
            raise ConditionParseError(
                f"parameter {self.param!r}: unsupported type {self.value_type!r}"
            )
        has_numeric = any(
            getattr(self, f) is not None
            for f in ("minimum", "maximum", "exclusive_minimum", "exclusive_maximum")
        )
        if has_numeric and self.value_type in ("boolean", "string"):
            raise ConditionParseError(
                f"parameter {self.param!r}: numeric keywords on {self.value_type} constraint"
            )

    @property
    def has_const(self) -> bool:
        return self.const is not _UNSET


@dataclass(frozen=True)
class Required(Condition):
    params: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.params:
            raise ConditionParseError("required list must be non-empty")
        for name in self.params:
            if not _IDENTIFIER.match(name):
                raise ConditionParseError(f"invalid parameter name: {name!r}")


@dataclass(frozen=True)
class AnyOf(Condition):
    children: tuple[Condition, ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ConditionParseError("anyOf must have at least one child")


@dataclass(frozen=True)
class AllOf(Condition):
    children: tuple[Condition, ...]

    def __post_init__(self) -> None:
        if not self.children:
            raise ConditionParseError("allOf must have at least one child")


@dataclass(frozen=True)
class Not(Condition):
    child: Condition


# ---------------------------------------------------------------------------
# Parsing / serialisation (Listing-1 style JSON Schema dialect)


def parse_condition(document: str | Mapping) -> Condition:
    """Parse a condition schema into its AST.

    Accepts a JSON string or an already-decoded object. The top-level
    ``$schema`` / ``type: object`` wrapper is accepted and ignored; keywords
    outside the supported subset are rejected.
    """
    if isinstance(document, str):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConditionParseError(f"malformed JSON: {exc}") from exc
    else:
        data = document
    if not isinstance(data, Mapping):
        raise ConditionParseError("condition schema must be a JSON object")
    return _parse_schema_object(data)


def _parse_schema_object(data: Mapping) -> Condition:
    parts: list[Condition] = []
    for keyword in data:
        if keyword == "$schema":
            continue
        if keyword == "type":
            if data[keyword] != "object":
                raise ConditionParseError(
                    f"schema-level type must be 'object', got {data[keyword]!r}"
                )
            continue
        if keyword not in ("properties", "required", "anyOf", "allOf", "not"):
            raise UnsupportedKeywordError(keyword)

    if "properties" in data:
        props = data["properties"]
        if not isinstance(props, Mapping):
            raise ConditionParseError("properties must be an object")
        for name, spec in props.items():
            parts.append(_parse_property(name, spec))
    if "required" in data:
        names = data["required"]
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            raise ConditionParseError("required must be a list of names")
        parts.append(Required(tuple(names)))
    if "anyOf" in data:
        parts.append(AnyOf(tuple(_parse_schema_object(c) for c in _as_list(data["anyOf"], "anyOf"))))
    if "allOf" in data:
        parts.append(AllOf(tuple(_parse_schema_object(c) for c in _as_list(data["allOf"], "allOf"))))
    if "not" in data:
        if not isinstance(data["not"], Mapping):
            raise ConditionParseError("not must wrap a schema object")
        parts.append(Not(_parse_schema_object(data["not"])))

    if not parts:
        return TrueCondition()
    if len(parts) == 1:
        return parts[0]
    return AllOf(tuple(parts))


def _as_list(value: Any, keyword: str) -> list:
    if not isinstance(value, list) or not value:
        raise ConditionParseError(f"{keyword} must be a non-empty list")
    for item in value:
        if not isinstance(item, Mapping):
            raise ConditionParseError(f"{keyword} children must be schema objects")
    return value


def _parse_property(name: str, spec: Any) -> PropertyConstraint:
    if not isinstance(spec, Mapping):
        raise ConditionParseError(f"constraint for {name!r} must be an object")
    for keyword in spec:
        if keyword not in _CONSTRAINT_KEYWORDS:
            raise UnsupportedKeywordError(keyword)
    for keyword in _NUMERIC_KEYWORDS:
        if keyword in spec and not _is_number(spec[keyword]):
            raise ConditionParseError(f"{keyword} for {name!r} must be a number")
    enum = spec.get("enum")
    if enum is not None:
        if not isinstance(enum, list) or not enum:
            raise ConditionParseError(f"enum for {name!r} must be a non-empty list")
        for item in enum:
            if not isinstance(item, (bool, int, float, str)):
                raise ConditionParseError(f"enum for {name!r} holds an unsupported value")
    const = spec["const"] if "const" in spec else _UNSET
    if const is not _UNSET and not isinstance(const, (bool, int, float, str)):
        raise ConditionParseError(f"const for {name!r} holds an unsupported value")
    return PropertyConstraint(
        param=name,
        value_type=spec.get("type"),
        const=const,
        enum=tuple(enum) if enum is not None else None,
        minimum=spec.get("minimum"),
        maximum=spec.get("maximum"),
        exclusive_minimum=spec.get("exclusiveMinimum"),
        exclusive_maximum=spec.get("exclusiveMaximum"),
    )


def serialise_condition(cond: Condition, top_level: bool = True) -> dict:
    """Emit the Listing-1 dialect; parse(serialise(ast)) is the identity."""
    body = _serialise_node(cond)
    if top_level:
        wrapped = {"$schema": SCHEMA_URI, "type": "object"}
        wrapped.update(body)
        return wrapped
    return body


def _serialise_node(cond: Condition) -> dict:
    if isinstance(cond, TrueCondition):
        return {}
    if isinstance(cond, PropertyConstraint):
        spec: dict[str, Any] = {}
        if cond.value_type is not None:
            spec["type"] = cond.value_type
        if cond.has_const:
            spec["const"] = cond.const
        if cond.enum is not None:
            spec["enum"] = list(cond.enum)
        if cond.minimum is not None:
            spec["minimum"] = cond.minimum
        if cond.maximum is not None:
            spec["maximum"] = cond.maximum
        if cond.exclusive_minimum is not None:
            spec["exclusiveMinimum"] = cond.exclusive_minimum
        if cond.exclusive_maximum is not None:
            spec["exclusiveMaximum"] = cond.exclusive_maximum
        return {"properties": {cond.param: spec}}
    if isinstance(cond, Required):
        return {"required": list(cond.params)}
    if isinstance(cond, AnyOf):
        return {"anyOf": [_serialise_node(c) for c in cond.children]}
    if isinstance(cond, AllOf):
        return {"allOf": [_serialise_node(c) for c in cond.children]}
    if isinstance(cond, Not):
        return {"not": _serialise_node(cond.child)}
    raise TypeError(f"unknown condition node: {cond!r}")


def referenced_params(cond: Condition) -> set[str]:
    return set(_iter_params(cond))


def _iter_params(cond: Condition) -> Iterator[str]:
    if isinstance(cond, PropertyConstraint):
        yield cond.param
    elif isinstance(cond, Required):
        yield from cond.params
    elif isinstance(cond, (AnyOf, AllOf)):
        for child in cond.children:
            yield from _iter_params(child)
    elif isinstance(cond, Not):
        yield from _iter_params(cond.child)


# ---------------------------------------------------------------------------
# Case parameters


@dataclass(frozen=True)
class CaseParameters:
    """Extracted values for one case. A name is either bound to a typed value
    or listed in ``unknown`` (the extractor saw it but could not determine it);
    never both. The literal string "unknown" is an ordinary string value."""

    values: Mapping[str, ParamValue] = field(default_factory=dict)
    unknown: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", dict(self.values))
        object.__setattr__(self, "unknown", frozenset(self.unknown))
        overlap = set(self.values) & self.unknown
        if overlap:
            raise ValueError(f"parameters both valued and unknown: {sorted(overlap)}")

    def present(self, name: str) -> bool:
        return name in self.values

    def names(self) -> set[str]:
        return set(self.values) | set(self.unknown)

    def to_dict(self) -> dict:
        return {"values": dict(self.values), "unknown": sorted(self.unknown)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "CaseParameters":
        return cls(values=dict(data.get("values", {})), unknown=frozenset(data.get("unknown", ())))

    @classmethod
    def from_flat(cls, data: Mapping[str, Any]) -> "CaseParameters":
        """Accept an extraction-style flat object; null marks a parameter unknown."""
        values: dict[str, ParamValue] = {}
        unknown: set[str] = set()
        for name, value in data.items():
            if value is None:
                unknown.add(name)
            else:
                values[name] = value
        return cls(values=values, unknown=frozenset(unknown))


# ---------------------------------------------------------------------------
# Evaluation


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _json_type_matches(value: ParamValue, type_name: str) -> bool:
    if type_name == "boolean":
        return isinstance(value, bool)
    if type_name == "integer":
        # draft 2020-12: any number with zero fractional part is an integer
        if isinstance(value, bool):
            return False
        return isinstance(value, int) or (isinstance(value, float) and value.is_integer())
    if type_name == "number":
        return _is_number(value)
    if type_name == "string":
        return isinstance(value, str)
    raise ConditionParseError(f"unsupported type {type_name!r}")


def _json_equal(a: Any, b: Any) -> bool:
    """JSON value equality: booleans only equal booleans, numbers compare
    numerically across int/float."""
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if _is_number(a) and _is_number(b):
        return a == b
    return type(a) is type(b) and a == b


def eval_condition(cond: Condition, params: CaseParameters) -> bool:
    """Evaluate a condition against case parameters.

    A constraint on an absent (or unknown-marked) parameter is vacuously
    satisfied; ``required`` fails for such parameters. All children are
    evaluated (no short-circuiting) so evaluation errors always surface.
    """
    if isinstance(cond, TrueCondition):
        return True
    if isinstance(cond, PropertyConstraint):
        return _eval_constraint(cond, params)
    if isinstance(cond, Required):
        return all(params.present(name) for name in cond.params)
    if isinstance(cond, AnyOf):
        results = [eval_condition(c, params) for c in cond.children]
        return any(results)
    if isinstance(cond, AllOf):
        results = [eval_condition(c, params) for c in cond.children]
        return all(results)
    if isinstance(cond, Not):
        return not eval_condition(cond.child, params)
    raise TypeError(f"unknown condition node: {cond!r}")


def _eval_constraint(cond: PropertyConstraint, params: CaseParameters) -> bool:
    if not params.present(cond.param):
        return True
    value = params.values[cond.param]

    if cond.value_type is not None and not _json_type_matches(value, cond.value_type):
        return False
    if cond.has_const and not _json_equal(value, cond.const):
        return False
    if cond.enum is not None and not any(_json_equal(value, e) for e in cond.enum):
        return False

    numeric_checks = (
        ("minimum", cond.minimum, lambda v, b: v >= b),
        ("maximum", cond.maximum, lambda v, b: v <= b),
        ("exclusiveMinimum", cond.exclusive_minimum, lambda v, b: v > b),
        ("exclusiveMaximum", cond.exclusive_maximum, lambda v, b: v < b),
    )
    for keyword, bound, check in numeric_checks:
        if bound is None:
            continue
        if not _is_number(value):
            raise ConditionEvalError(
                cond.param,
                f"numeric {keyword} constraint on parameter {cond.param!r} "
                f"met non-numeric value {value!r}",
            )
        if not check(value, bound):
            return False
    return True


# ---------------------------------------------------------------------------
# Parameter schema (the global catalogue of extractable case parameters)


@dataclass(frozen=True)
class ParamDef:
    name: str
    value_type: str
    description: str = ""
    allowed: tuple[ParamValue, ...] | None = None
    minimum: float | int | None = None
    maximum: float | int | None = None

    def __post_init__(self) -> None:
        if not _IDENTIFIER.match(self.name):
            raise ValueError(f"invalid parameter name: {self.name!r}")
        if self.value_type not in VALUE_TYPES:
            raise ValueError(f"parameter {self.name!r}: unsupported type {self.value_type!r}")
        if self.allowed is not None:
            if not self.allowed:
                raise ValueError(f"parameter {self.name!r}: empty allowed list")
            for value in self.allowed:
                if not _json_type_matches(value, self.value_type):
                    raise ValueError(
                        f"parameter {self.name!r}: allowed value {value!r} "
                        f"does not conform to type {self.value_type}"
                    )
        if (self.minimum is not None or self.maximum is not None) and self.value_type not in (
            "integer",
            "number",
        ):
            raise ValueError(f"parameter {self.name!r}: range on non-numeric type")
        if self.minimum is not None and self.maximum is not None and self.minimum > self.maximum:
            raise ValueError(f"parameter {self.name!r}: minimum exceeds maximum")

    def same_definition(self, other: "ParamDef") -> bool:
        return self == other

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"type": self.value_type, "description": self.description}
        if self.allowed is not None:
            out["enum"] = list(self.allowed)
        if self.minimum is not None:
            out["minimum"] = self.minimum
        if self.maximum is not None:
            out["maximum"] = self.maximum
        return out

    @classmethod
    def from_dict(cls, name: str, data: Mapping) -> "ParamDef":
        allowed = data.get("enum")
        return cls(
            name=name,
            value_type=data.get("type", ""),
            description=data.get("description", ""),
            allowed=tuple(allowed) if allowed is not None else None,
            minimum=data.get("minimum"),
            maximum=data.get("maximum"),
        )


@dataclass(frozen=True)
class ParameterSchema:
    """Ordered, immutable catalogue of parameter definitions."""

    definitions: Mapping[str, ParamDef] = field(default_factory=dict)

    def __post_init__(self) -> None:
        defs = dict(self.definitions)
        for name, definition in defs.items():
            if name != definition.name:
                raise ValueError(f"schema key {name!r} does not match definition {definition.name!r}")
        object.__setattr__(self, "definitions", defs)

    def __contains__(self, name: str) -> bool:
        return name in self.definitions

    def __len__(self) -> int:
        return len(self.definitions)

    def names(self) -> tuple[str, ...]:
        return tuple(self.definitions)

    def get(self, name: str) -> ParamDef | None:
        return self.definitions.get(name)

    def with_description(self, name: str, description: str) -> "ParameterSchema":
        if name not in self.definitions:
            raise KeyError(name)
        defs = dict(self.definitions)
        current = defs[name]
        defs[name] = ParamDef(
            name=current.name,
            value_type=current.value_type,
            description=description,
            allowed=current.allowed,
            minimum=current.minimum,
            maximum=current.maximum,
        )
        return ParameterSchema(defs)

    def to_dict(self) -> dict:
        return {name: d.to_dict() for name, d in self.definitions.items()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ParameterSchema":
        return cls({name: ParamDef.from_dict(name, spec) for name, spec in data.items()})


def merge_schema(current: ParameterSchema, additions: ParameterSchema) -> ParameterSchema:
    """Union of definitions; an identical redefinition is a no-op, a differing
    one is a conflict."""
    merged = dict(current.definitions)
    for name, definition in additions.definitions.items():
        existing = merged.get(name)
        if existing is None:
            merged[name] = definition
        elif not existing.same_definition(definition):
            raise SchemaConflictError(name, existing, definition)
    return ParameterSchema(merged)


@dataclass(frozen=True)
class ParamsReport:
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_params(params: CaseParameters, schema: ParameterSchema) -> ParamsReport:
    """Report type mismatches, out-of-range values, and names absent from the schema."""
    violations: list[str] = []
    for name in sorted(params.names()):
        definition = schema.get(name)
        if definition is None:
            violations.append(f"unknown parameter: {name!r} is not in the schema")
            continue
        if not params.present(name):
            continue  # unknown-marked: no value to check
        value = params.values[name]
        if not _json_type_matches(value, definition.value_type):
            violations.append(
                f"type mismatch: {name!r} expects {definition.value_type}, got {value!r}"
            )
            continue
        if definition.allowed is not None and not any(
            _json_equal(value, a) for a in definition.allowed
        ):
            violations.append(f"value not allowed: {name!r} = {value!r}")
        if definition.minimum is not None and value < definition.minimum:
            violations.append(f"out of range: {name!r} = {value!r} below {definition.minimum}")
        if definition.maximum is not None and value > definition.maximum:
            violations.append(f"out of range: {name!r} = {value!r} above {definition.maximum}")
    return ParamsReport(tuple(violations))
