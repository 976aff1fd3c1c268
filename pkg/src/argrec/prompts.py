"""Prompt templates for the mining, scoring, formalisation, and extraction
calls. These are configuration, not contracts: tests address the mock backend
by stage sequence or by hashing the exact prompt strings built here."""

from __future__ import annotations

import json
from typing import Iterable, Mapping

from .conditions import ParameterSchema


ONTOLOGY_SYSTEM = (
    "You maintain an ontology of decision options mined from policy documents. "
    "Given the options known so far and one text chunk, list every decision "
    "option the chunk mentions (reusing known names exactly when the chunk "
    "refers to them) and any hierarchy links from a more general option to a "
    "more specific variant. Reply with JSON only."
)

MINING_SYSTEM = (
    "You analyse policy text and produce arguments for and against applying a "
    "decision option. Every argument must state one self-contained claim and "
    "come with a natural-language condition describing the circumstances in "
    "which the argument applies. Reply with JSON only."
)

SCORING_SYSTEM = (
    "You estimate the intrinsic strength of an argument on a scale from 0 to 1, "
    "judging how convincing the argument is on its own given the policy "
    "excerpts. Reply with a single number between 0 and 1 and nothing else."
)

FORMALISE_SYSTEM = (
    "You translate a natural-language applicability condition into a formal "
    "JSON Schema over named case parameters, reusing parameters from the "
    "catalogue when they fit and defining new ones when needed. The schema may "
    'only use the keywords: properties, const, enum, type, minimum, maximum, '
    "exclusiveMinimum, exclusiveMaximum, required, anyOf, allOf, not. "
    "Reply with JSON only."
)

EXTRACTION_SYSTEM = (
    "You extract structured case parameters from a case description. For each "
    "catalogued parameter, report its value if the description determines it; "
    "use null when the description mentions it but leaves it undetermined, and "
    "omit parameters the description does not address. Reply with JSON only."
)


def _render_chunks(chunks: Iterable) -> str:
    blocks = []
    for chunk in chunks:
        blocks.append(f"[{chunk.doc_id} / {chunk.id}]\n{chunk.text}")
    return "\n\n".join(blocks) if blocks else "(no excerpts)"


def _render_schema(schema: ParameterSchema) -> str:
    if len(schema) == 0:
        return "(no parameters defined yet)"
    # sorted keys keep prompt bytes stable across schema insertion orders
    return json.dumps(schema.to_dict(), indent=2, ensure_ascii=False, sort_keys=True)


def build_ontology_prompt(entities: Mapping, hierarchy: frozenset, chunk) -> str:
    known = sorted(e.name for e in entities.values())
    edges = sorted(f"{p} -> {c}" for p, c in hierarchy)
    return (
        "Known decision options:\n"
        + ("\n".join(f"- {name}" for name in known) if known else "(none yet)")
        + "\n\nKnown hierarchy links:\n"
        + ("\n".join(f"- {e}" for e in edges) if edges else "(none yet)")
        + "\n\nText chunk:\n"
        + chunk.text
        + "\n\nReturn JSON with keys \"entities\" (objects with \"name\" and optional "
        '"description") and "hierarchy" (objects with "parent" and "child").'
    )


def build_mining_prompt(
    option_name: str,
    target_text: str,
    target_is_root: bool,
    chunks: Iterable,
    scheme=None,
) -> str:
    parts = [
        f"Decision option under consideration: {option_name}",
        "Relevant policy excerpts:\n" + _render_chunks(chunks),
    ]
    if scheme is not None:
        parts.append(
            "Use this argument scheme as the generation criteria.\n"
            f"Major premise: {scheme.major_premise}\n"
            + "\n".join(f"Minor premise: {m}" for m in scheme.minor_premises)
            + "\n"
            + "\n".join(f"Critical question: {q}" for q in scheme.critical_questions)
        )
    if target_is_root:
        parts.append(f"Target claim (the decision option itself): {target_text}")
    else:
        parts.append(f"Target claim (an argument in the ongoing debate): {target_text}")
    parts.append(
        "List the arguments that attack the target claim and the arguments that "
        "support it, each with a natural-language applicability condition. "
        'Return JSON with keys "attackers" and "supporters", each an array of '
        'objects with "text" and "condition". Use empty arrays when there is '
        "nothing to add."
    )
    return "\n\n".join(parts)


def build_scoring_prompt(
    argument_text: str,
    chunks: Iterable,
    parent_text: str | None = None,
    is_support: bool | None = None,
    nl_condition: str | None = None,
) -> str:
    parts = [
        "Relevant policy excerpts:\n" + _render_chunks(chunks),
        f"Argument to score: {argument_text}",
    ]
    if parent_text is not None:
        relation = "supports" if is_support else "attacks"
        parts.append(f"This argument {relation} the claim: {parent_text}")
    if nl_condition:
        parts.append(f"It applies only when: {nl_condition}")
    parts.append("Output a single number between 0 and 1.")
    return "\n\n".join(parts)


def build_formalise_prompt(argument_text: str, nl_condition: str, schema: ParameterSchema) -> str:
    return (
        f"Argument: {argument_text}\n\n"
        f"Natural-language applicability condition: {nl_condition}\n\n"
        "Current parameter catalogue:\n"
        + _render_schema(schema)
        + "\n\nReturn JSON with two keys: \"condition\" (the formal JSON Schema for "
        'the condition) and "parameters" (an object defining every parameter the '
        "condition references that is missing from the catalogue, mapping the "
        'parameter name to {"type", "description"} plus optional "enum", '
        '"minimum", "maximum"). Reuse catalogued parameters unchanged.'
    )


def build_extraction_prompt(case_text: str, schema: ParameterSchema) -> str:
    return (
        "Parameter catalogue:\n"
        + _render_schema(schema)
        + "\n\nCase description:\n"
        + case_text
        + "\n\nReturn a JSON object mapping parameter names to extracted values "
        "(null for mentioned-but-undetermined parameters)."
    )
