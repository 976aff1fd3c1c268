"""Shared fixture builders: the two-attacker condition document, hand-built
artifact bundles, and the paired contestation scenario used by the service,
CLI, and acceptance suites."""

from __future__ import annotations

import json
from typing import Any

from argrec import prompts
from argrec.conditions import ParamDef, ParameterSchema, parse_condition
from argrec.llm import MockBackend, prompt_key
from argrec.ontology import Chunk, Entity, Ontology
from argrec.pipeline import Artifacts, GeneralQbaf
from argrec.qbaf import Argument, Polarity, Qbaf, Relation

# The worked two-branch condition: applies when eloquent structures are
# involved or performance status is at most 49.
LISTING_CONDITION = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "anyOf": [
        {
            "properties": {
                "eloquent_structure_involvement": {
                    "type": "boolean",
                    "const": True,
                }
            }
        },
        {
            "properties": {
                "kps": {
                    "type": "integer",
                    "maximum": 49,
                }
            }
        },
    ],
}


def make_qbaf(
    root_score: float,
    attackers: list[float] = (),
    supporters: list[float] = (),
) -> Qbaf:
    """Depth-1 framework with the given base scores."""
    arguments = [Argument("root", "the option is appropriate", root_score)]
    relations = []
    for i, score in enumerate(attackers, start=1):
        arguments.append(Argument(f"a{i}", f"attacker {i}", score))
        relations.append(Relation(f"a{i}", "root", Polarity.ATTACK))
    for i, score in enumerate(supporters, start=1):
        arguments.append(Argument(f"s{i}", f"supporter {i}", score))
        relations.append(Relation(f"s{i}", "root", Polarity.SUPPORT))
    return Qbaf(tuple(arguments), tuple(relations), "root")


def _present_and(fragment: dict, param: str) -> dict:
    return {"allOf": [{"required": [param]}, {"properties": {param: fragment}}]}


def scenario_schema(refined_description: bool = False) -> ParameterSchema:
    eloquent_desc = "Whether the tumour involves eloquent brain structures"
    if refined_description:
        eloquent_desc += "; thalamic or brainstem location counts as involvement"
    return ParameterSchema(
        {
            "age": ParamDef("age", "integer", "Patient age in years"),
            "kps": ParamDef("kps", "integer", "Karnofsky performance status score"),
            "eloquent_structure_involvement": ParamDef(
                "eloquent_structure_involvement", "boolean", eloquent_desc
            ),
        }
    )


def scenario_artifacts() -> Artifacts:
    """Two treatment options whose recommendations the contestation scenario
    corrects: a radiotherapy regime that scores too high for elderly
    patients, and surgery whose contraindication hinges on a parameter the
    initial description fails to surface."""
    chunk1 = Chunk("c1", "guideline-a", 0, "Radiotherapy dosing depends on age and fitness.")
    chunk2 = Chunk("c2", "guideline-b", 0, "Surgery is contraindicated in eloquent regions.")
    rt_cat = Entity("radiotherapy", "Radiotherapy")
    rt60 = Entity("radiotherapy-60-gy", "Radiotherapy 60 Gy")
    resection = Entity("surgical-resection", "Surgical Resection")
    ontology = Ontology(
        entities={e.id: e for e in (rt_cat, rt60, resection)},
        chunks={"c1": chunk1, "c2": chunk2},
        hierarchy=frozenset({("radiotherapy", "radiotherapy-60-gy")}),
        provenance=frozenset(
            {("radiotherapy-60-gy", "c1"), ("surgical-resection", "c2")}
        ),
    )

    rt60_qbaf = Qbaf(
        (
            Argument("root", "Radiotherapy 60 Gy is an appropriate option.", 0.5),
            Argument("a1", "A shorter hypofractionated course suits elderly patients better.", 0.85),
            Argument("s1", "Patients with good performance status tolerate the full course.", 0.8),
            Argument("s2", "Standard dosing has the strongest evidence base.", 0.6),
        ),
        (
            Relation("a1", "root", Polarity.ATTACK),
            Relation("s1", "root", Polarity.SUPPORT),
            Relation("s2", "root", Polarity.SUPPORT),
        ),
        "root",
    )
    rt60_general = GeneralQbaf(
        entity=rt60,
        qbaf=rt60_qbaf,
        nl_conditions={
            "a1": "the patient is 65 or older",
            "s1": "performance status is at least 70",
            "s2": "performance status is at least 50",
        },
        formal_conditions={
            "a1": parse_condition(_present_and({"type": "integer", "minimum": 65}, "age")),
            "s1": parse_condition(_present_and({"type": "integer", "minimum": 70}, "kps")),
            "s2": parse_condition(_present_and({"type": "integer", "minimum": 50}, "kps")),
        },
    )

    resection_qbaf = Qbaf(
        (
            Argument("root", "Surgical Resection is an appropriate option.", 0.5),
            Argument("a1", "Resection risks unacceptable deficits in eloquent regions.", 0.9),
            Argument("s1", "Maximal safe resection improves outcomes for fit patients.", 0.7),
        ),
        (
            Relation("a1", "root", Polarity.ATTACK),
            Relation("s1", "root", Polarity.SUPPORT),
        ),
        "root",
    )
    resection_general = GeneralQbaf(
        entity=resection,
        qbaf=resection_qbaf,
        nl_conditions={
            "a1": "the tumour involves eloquent structures",
            "s1": "performance status is at least 50",
        },
        formal_conditions={
            "a1": parse_condition(
                _present_and({"type": "boolean", "const": True}, "eloquent_structure_involvement")
            ),
            "s1": parse_condition(_present_and({"type": "integer", "minimum": 50}, "kps")),
        },
    )

    return Artifacts(
        ontology=ontology,
        qbafs={rt60.id: rt60_general, resection.id: resection_general},
        schema=scenario_schema(refined_description=False),
        options=(rt60.id, resection.id),
    )


TRIGGER_VIGNETTE = "A 75-year-old patient with KPS 90 and a thalamic glioblastoma."
OTHER_VIGNETTE = "A 70-year-old patient with KPS 50 and a frontal lobe glioblastoma."

SCENARIO_EDITS: list[dict[str, Any]] = [
    {"kind": "set_base_score", "option": "radiotherapy-60-gy", "argument": "a1", "value": 0.9},
    {"kind": "set_base_score", "option": "radiotherapy-60-gy", "argument": "s1", "value": 0.75},
    {"kind": "set_base_score", "option": "radiotherapy-60-gy", "argument": "s2", "value": 0.55},
    {
        "kind": "edit_param_description",
        "name": "eloquent_structure_involvement",
        "description": (
            "Whether the tumour involves eloquent brain structures; "
            "thalamic or brainstem location counts as involvement"
        ),
    },
]

SCENARIO_JUSTIFICATION = "align the radiotherapy debate and surgery extraction with practice"


def scenario_extractions() -> dict[str, Any]:
    """Hash-mode mock entries for both vignettes under both descriptions."""
    schema_v1 = scenario_schema(refined_description=False)
    schema_v2 = ParameterSchema(
        {
            name: (
                definition
                if name != "eloquent_structure_involvement"
                else ParamDef(
                    name,
                    "boolean",
                    SCENARIO_EDITS[3]["description"],
                )
            )
            for name, definition in schema_v1.definitions.items()
        }
    )

    def entry(schema: ParameterSchema, vignette: str, reply: dict) -> tuple[str, dict]:
        key = prompt_key(prompts.EXTRACTION_SYSTEM, prompts.build_extraction_prompt(vignette, schema))
        return key, {"json": reply, "prompt_tokens": 120, "completion_tokens": 30}

    by_hash = dict(
        [
            entry(schema_v1, TRIGGER_VIGNETTE, {"age": 75, "kps": 90}),
            entry(schema_v1, OTHER_VIGNETTE, {"age": 70, "kps": 50}),
            entry(
                schema_v2,
                TRIGGER_VIGNETTE,
                {"age": 75, "kps": 90, "eloquent_structure_involvement": True},
            ),
            entry(
                schema_v2,
                OTHER_VIGNETTE,
                {"age": 70, "kps": 50, "eloquent_structure_involvement": False},
            ),
        ]
    )
    return by_hash


def scenario_backend() -> MockBackend:
    return MockBackend(by_hash=scenario_extractions())


def write_scenario_fixture(path) -> None:
    """Persist the scenario for consumers outside this test suite."""
    payload = {
        "edits": SCENARIO_EDITS,
        "justification": SCENARIO_JUSTIFICATION,
        "trigger_vignette": TRIGGER_VIGNETTE,
        "other_vignette": OTHER_VIGNETTE,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
