from __future__ import annotations

import json

import pytest

from argrec import pipeline
from argrec.conditions import (
    CaseParameters,
    ParamDef,
    ParameterSchema,
    SchemaConflictError,
    TrueCondition,
    parse_condition,
)
from argrec.jsonutil import dumps_canonical
from argrec.llm import MockBackend, UsageAccumulator
from argrec.ontology import Chunk, Entity, Ontology
from argrec.pipeline import (
    BuildError,
    EditRejectedError,
    ExtractionError,
    GeneralQbaf,
    MiningConfig,
    MiningProtocolError,
    NotFoundError,
    apply_edit,
    build_general_qbafs,
    estimate_base_score,
    extract_params,
    formalise_condition,
    infer_case,
    infer_with_params,
    instantiate,
    mine_baf,
    root_argument_text,
)
from argrec.qbaf import Argument, Polarity, Qbaf, Relation, from_dict, root_strength, to_dict
from helpers import scenario_artifacts

TMZ = Entity("temozolomide", "Temozolomide Chemotherapy")
CHUNKS = (
    Chunk("c1", "guideline-a", 0, "Alkylating agents help methylated tumours."),
    Chunk("c2", "guideline-b", 0, "Poor performance status limits chemotherapy."),
)

A1_TEXT = "Low performance status contraindicates the regimen."
A1_COND_NL = "performance status is below 50"
S1_TEXT = "Methylation of the MGMT promoter predicts benefit."
S1_COND_NL = "the MGMT promoter is methylated"

A1_CONDITION = {"properties": {"kps": {"type": "integer", "maximum": 49}}}
S1_CONDITION = {
    "properties": {"mgmt_methylation_status": {"type": "string", "const": "methylated"}}
}
KPS_DEF = {"type": "integer", "description": "Karnofsky performance status"}
MGMT_DEF = {"type": "string", "description": "MGMT promoter methylation status"}

MINE_REPLY = {
    "attackers": [{"text": A1_TEXT, "condition": A1_COND_NL}],
    "supporters": [{"text": S1_TEXT, "condition": S1_COND_NL}],
}


def _qbaf_stage(entries):
    return MockBackend(stages={"qbaf-construction": entries})


def standard_build_script():
    return [
        {"json": MINE_REPLY, "prompt_tokens": 200, "completion_tokens": 80},
        {"text": "0.8", "prompt_tokens": 50, "completion_tokens": 5},
        {
            "json": {"condition": A1_CONDITION, "parameters": {"kps": KPS_DEF}},
            "prompt_tokens": 90,
            "completion_tokens": 40,
        },
        {"text": "0.7", "prompt_tokens": 50, "completion_tokens": 5},
        {
            "json": {
                "condition": S1_CONDITION,
                "parameters": {"mgmt_methylation_status": MGMT_DEF},
            },
            "prompt_tokens": 90,
            "completion_tokens": 40,
        },
    ]


def expected_general() -> GeneralQbaf:
    return GeneralQbaf(
        entity=TMZ,
        qbaf=Qbaf(
            (
                Argument("root", root_argument_text(TMZ), 0.5),
                Argument("a1", A1_TEXT, 0.8),
                Argument("s1", S1_TEXT, 0.7),
            ),
            (
                Relation("a1", "root", Polarity.ATTACK),
                Relation("s1", "root", Polarity.SUPPORT),
            ),
            "root",
        ),
        nl_conditions={"a1": A1_COND_NL, "s1": S1_COND_NL},
        formal_conditions={
            "a1": parse_condition(A1_CONDITION),
            "s1": parse_condition(S1_CONDITION),
        },
    )


def tmz_ontology() -> Ontology:
    return Ontology(
        entities={TMZ.id: TMZ},
        chunks={c.id: c for c in CHUNKS},
        provenance=frozenset({(TMZ.id, "c1"), (TMZ.id, "c2")}),
    )


# -- mining ---------------------------------------------------------------------


def test_mine_baf_scripted_framework():
    backend = _qbaf_stage([{"json": MINE_REPLY}])
    mined = mine_baf(TMZ, CHUNKS, MiningConfig(depth=1), backend, UsageAccumulator())
    assert mined.arguments == (
        ("root", root_argument_text(TMZ)),
        ("a1", A1_TEXT),
        ("s1", S1_TEXT),
    )
    assert mined.relations == (
        Relation("a1", "root", Polarity.ATTACK),
        Relation("s1", "root", Polarity.SUPPORT),
    )
    assert mined.nl_conditions == {"a1": A1_COND_NL, "s1": S1_COND_NL}


def test_mine_baf_depth_one_attaches_everything_to_root():
    backend = _qbaf_stage([{"json": MINE_REPLY}])
    mined = mine_baf(TMZ, CHUNKS, MiningConfig(depth=1), backend, UsageAccumulator())
    assert all(rel.target == "root" for rel in mined.relations)
    assert len(backend.calls) == 1


def test_mine_baf_depth_two_recurses_breadth_first():
    child_reply = {
        "attackers": [],
        "supporters": [{"text": "Supportive care mitigates toxicity.", "condition": "always"}],
    }
    empty = {"attackers": [], "supporters": []}
    backend = _qbaf_stage([{"json": MINE_REPLY}, {"json": child_reply}, {"json": empty}])
    mined = mine_baf(TMZ, CHUNKS, MiningConfig(depth=2), backend, UsageAccumulator())
    assert [a[0] for a in mined.arguments] == ["root", "a1", "s1", "a1.s1"]
    assert Relation("a1.s1", "a1", Polarity.SUPPORT) in mined.relations
    assert len(backend.calls) == 3  # root plus one call per depth-1 argument


def test_mine_baf_max_breadth_truncates():
    wide = {
        "attackers": [{"text": f"attacker {i}", "condition": "c"} for i in range(4)],
        "supporters": [],
    }
    backend = _qbaf_stage([{"json": wide}])
    mined = mine_baf(
        TMZ, CHUNKS, MiningConfig(depth=1, max_breadth=2), backend, UsageAccumulator()
    )
    assert [a[0] for a in mined.arguments] == ["root", "a1", "a2"]


def test_mine_baf_dual_polarity_retried_then_protocol_error():
    dup = {
        "attackers": [{"text": "same claim", "condition": "c"}],
        "supporters": [{"text": "same claim", "condition": "c"}],
    }
    backend = _qbaf_stage([{"json": dup}, {"json": dup}])
    with pytest.raises(MiningProtocolError):
        mine_baf(TMZ, CHUNKS, MiningConfig(depth=1, retries=2), backend, UsageAccumulator())

    recovered = _qbaf_stage([{"json": dup}, {"json": MINE_REPLY}])
    mined = mine_baf(TMZ, CHUNKS, MiningConfig(depth=1, retries=2), recovered, UsageAccumulator())
    assert [a[0] for a in mined.arguments] == ["root", "a1", "s1"]


def test_mine_baf_requires_chunks():
    with pytest.raises(ValueError):
        mine_baf(TMZ, (), MiningConfig(), _qbaf_stage([]), UsageAccumulator())


def test_mine_baf_embeds_argument_scheme_in_prompt():
    scheme = pipeline.ArgumentScheme(
        major_premise="An intervention with net benefit is recommended.",
        minor_premises=("The intervention benefits this patient.",),
        critical_questions=("Are there contraindications for this patient?",),
    )
    backend = _qbaf_stage([{"json": MINE_REPLY}])
    mine_baf(TMZ, CHUNKS, MiningConfig(depth=1, scheme=scheme), backend, UsageAccumulator())
    prompt = backend.calls[0][1].user
    assert scheme.major_premise in prompt
    assert scheme.critical_questions[0] in prompt


# -- scoring ----------------------------------------------------------------------


def test_estimate_base_score_passthrough():
    backend = _qbaf_stage([{"text": "0.85"}])
    value = estimate_base_score(
        "some argument", CHUNKS, backend=backend, usage=UsageAccumulator()
    )
    assert value == 0.85


def test_estimate_base_score_retries_out_of_range():
    backend = _qbaf_stage([{"text": "1.7"}, {"text": "0.9"}])
    value = estimate_base_score(
        "some argument", CHUNKS, backend=backend, usage=UsageAccumulator()
    )
    assert value == 0.9
    # the retry prompt names the problem
    assert "1.7" in backend.calls[-1][1].user


def test_estimate_base_score_defaults_to_midpoint(caplog):
    backend = _qbaf_stage([{"text": "nonsense"}] * 3)
    with caplog.at_level("WARNING"):
        value = estimate_base_score(
            "some argument", CHUNKS, backend=backend, usage=UsageAccumulator(), retries=3
        )
    assert value == 0.5
    assert any("defaulted" in r.message for r in caplog.records)


def test_estimate_base_score_needs_full_parent_context():
    with pytest.raises(ValueError):
        estimate_base_score(
            "a",
            CHUNKS,
            parent_text="p",
            backend=_qbaf_stage([]),
            usage=UsageAccumulator(),
        )


# -- formalisation -------------------------------------------------------------------


def test_formalise_condition_extends_schema():
    backend = _qbaf_stage(
        [{"json": {"condition": A1_CONDITION, "parameters": {"kps": KPS_DEF}}}]
    )
    condition, schema = formalise_condition(
        A1_TEXT, A1_COND_NL, ParameterSchema(), backend=backend, usage=UsageAccumulator()
    )
    assert condition == parse_condition(A1_CONDITION)
    assert schema.names() == ("kps",)


def test_formalise_empty_condition_is_vacuous():
    backend = _qbaf_stage([{"json": {"condition": {}, "parameters": {}}}])
    condition, schema = formalise_condition(
        "arg", "never mind", ParameterSchema(), backend=backend, usage=UsageAccumulator()
    )
    assert condition == TrueCondition()
    assert len(schema) == 0


def test_formalise_undefined_parameter_retried_then_fails():
    bad = {"json": {"condition": A1_CONDITION, "parameters": {}}}
    backend = _qbaf_stage([bad, bad, bad])
    with pytest.raises(pipeline.FormalisationError):
        formalise_condition(
            "arg", A1_COND_NL, ParameterSchema(), backend=backend, usage=UsageAccumulator()
        )


def test_formalise_reuses_catalogued_parameters():
    existing = ParameterSchema({"kps": ParamDef.from_dict("kps", KPS_DEF)})
    backend = _qbaf_stage([{"json": {"condition": A1_CONDITION, "parameters": {}}}])
    condition, schema = formalise_condition(
        A1_TEXT, A1_COND_NL, existing, backend=backend, usage=UsageAccumulator()
    )
    assert schema == existing


def test_formalise_conflicting_redefinition_is_not_retried():
    clash = {"kps": {"type": "string", "description": "contradicts the catalogue"}}
    existing = ParameterSchema({"kps": ParamDef.from_dict("kps", KPS_DEF)})
    backend = _qbaf_stage([{"json": {"condition": A1_CONDITION, "parameters": clash}}])
    with pytest.raises(SchemaConflictError):
        formalise_condition(
            A1_TEXT, A1_COND_NL, existing, backend=backend, usage=UsageAccumulator()
        )
    assert len(backend.calls) == 1


# -- the full construction loop ---------------------------------------------------------


def test_build_general_qbafs_hand_trace():
    backend = _qbaf_stage(standard_build_script())
    result = build_general_qbafs(
        tmz_ontology(), [TMZ], MiningConfig(depth=1), backend, UsageAccumulator()
    )
    assert not result.failures
    assert len(result.frameworks) == 1
    assert result.frameworks[0].to_dict() == expected_general().to_dict()
    assert result.schema.names() == ("kps", "mgmt_methylation_status")


def test_build_general_qbafs_deterministic_bytes():
    runs = []
    for _ in range(2):
        backend = _qbaf_stage(standard_build_script())
        result = build_general_qbafs(
            tmz_ontology(), [TMZ], MiningConfig(depth=1), backend, UsageAccumulator()
        )
        runs.append(
            dumps_canonical(
                {
                    "frameworks": [f.to_dict() for f in result.frameworks],
                    "schema": result.schema.to_dict(),
                }
            )
        )
    assert runs[0] == runs[1]


def test_build_general_qbafs_score_root_flag():
    script = [{"json": MINE_REPLY}, {"text": "0.8"}] + standard_build_script()[1:]
    backend = _qbaf_stage(script)
    result = build_general_qbafs(
        tmz_ontology(), [TMZ], MiningConfig(depth=1, score_root=True), backend, UsageAccumulator()
    )
    root = result.frameworks[0].qbaf.argument("root")
    assert root.base_score == 0.8


def test_build_general_qbafs_no_options():
    result = build_general_qbafs(
        tmz_ontology(), [], MiningConfig(), _qbaf_stage([]), UsageAccumulator()
    )
    assert result.frameworks == [] and len(result.schema) == 0


def test_build_collects_per_entity_failures_and_rolls_back_schema():
    other = Entity("lomustine", "Lomustine Chemotherapy")
    ontology = Ontology(
        entities={TMZ.id: TMZ, other.id: other},
        chunks={c.id: c for c in CHUNKS},
        provenance=frozenset({(TMZ.id, "c1"), (other.id, "c2")}),
    )
    # lomustine first (alphabetical input order here): its formalisation never
    # yields a defined parameter, so it fails after consuming its script
    bad_form = {"json": {"condition": A1_CONDITION, "parameters": {}}}
    script = (
        [{"json": MINE_REPLY}, {"text": "0.8"}, bad_form, bad_form, bad_form]
        + standard_build_script()
    )
    backend = _qbaf_stage(script)
    result = build_general_qbafs(
        ontology, [other, TMZ], MiningConfig(depth=1), backend, UsageAccumulator()
    )
    assert [f.entity.id for f in result.frameworks] == [TMZ.id]
    assert result.failures and result.failures[0][0] == other.id
    # no leakage from the failed option's partial schema additions
    assert result.schema.names() == ("kps", "mgmt_methylation_status")


def test_build_fails_when_nothing_builds():
    backend = _qbaf_stage([])  # script exhausted immediately
    with pytest.raises(BuildError):
        build_general_qbafs(
            tmz_ontology(), [TMZ], MiningConfig(depth=1), backend, UsageAccumulator()
        )


# -- extraction ------------------------------------------------------------------------


def _extraction_schema() -> ParameterSchema:
    return ParameterSchema(
        {
            "kps": ParamDef.from_dict("kps", KPS_DEF),
            "mgmt_methylation_status": ParamDef.from_dict("mgmt_methylation_status", MGMT_DEF),
        }
    )


def _inference_backend(entries):
    return MockBackend(stages={"inference": entries})


def test_extract_params_happy_path():
    backend = _inference_backend(
        [{"json": {"kps": 70, "mgmt_methylation_status": "methylated"}}]
    )
    params = extract_params(
        "a fit patient with methylated tumour",
        _extraction_schema(),
        backend=backend,
        usage=UsageAccumulator(),
    )
    assert params.values == {"kps": 70, "mgmt_methylation_status": "methylated"}


def test_extract_params_null_marks_unknown():
    backend = _inference_backend([{"json": {"kps": 70, "mgmt_methylation_status": None}}])
    params = extract_params(
        "case", _extraction_schema(), backend=backend, usage=UsageAccumulator()
    )
    assert params.unknown == frozenset({"mgmt_methylation_status"})


def test_extract_params_retry_on_validation_failure():
    backend = _inference_backend([{"json": {"kps": "high"}}, {"json": {"kps": 70}}])
    params = extract_params(
        "case", _extraction_schema(), backend=backend, usage=UsageAccumulator()
    )
    assert params.values == {"kps": 70}


def test_extract_params_persistent_failure():
    backend = _inference_backend([{"json": {"kps": "high"}}] * 3)
    with pytest.raises(ExtractionError) as err:
        extract_params("case", _extraction_schema(), backend=backend, usage=UsageAccumulator())
    assert err.value.last_output == {"kps": "high"}


def test_extract_params_requires_schema():
    with pytest.raises(ValueError):
        extract_params("case", ParameterSchema(), backend=_inference_backend([]), usage=UsageAccumulator())


# -- instantiation ------------------------------------------------------------------------


def test_instantiate_identity_when_all_conditions_hold():
    general = expected_general()
    params = CaseParameters(values={"kps": 40, "mgmt_methylation_status": "methylated"})
    result = instantiate(general, params)
    assert result.removed == ()
    assert result.qbaf == general.qbaf


def test_instantiate_prunes_unsatisfied_argument():
    general = expected_general()
    params = CaseParameters(values={"kps": 70, "mgmt_methylation_status": "methylated"})
    result = instantiate(general, params)
    assert [r.argument.id for r in result.removed] == ["a1"]
    assert result.removed[0].reason == "condition-unsatisfied"
    assert result.removed[0].condition["properties"]["kps"]["maximum"] == 49
    assert {a.id for a in result.qbaf.arguments} == {"root", "s1"}


def test_instantiate_removes_descendants_of_failed_parent():
    qbaf = Qbaf(
        (
            Argument("root", "claim", 0.5),
            Argument("a1", "parent attacker", 0.8),
            Argument("a1.s1", "child with satisfied condition", 0.9),
        ),
        (
            Relation("a1", "root", Polarity.ATTACK),
            Relation("a1.s1", "a1", Polarity.SUPPORT),
        ),
        "root",
    )
    general = GeneralQbaf(
        entity=TMZ,
        qbaf=qbaf,
        nl_conditions={"a1": "kps below 50", "a1.s1": "always"},
        formal_conditions={
            "a1": parse_condition(A1_CONDITION),
            "a1.s1": TrueCondition(),
        },
    )
    result = instantiate(general, CaseParameters(values={"kps": 90}))
    assert [(r.argument.id, r.reason) for r in result.removed] == [
        ("a1", "condition-unsatisfied"),
        ("a1.s1", "ancestor-removed"),
    ]
    assert result.removed[1].ancestor == "a1"
    assert [a.id for a in result.qbaf.arguments] == ["root"]
    assert result.qbaf.relations == ()


def bare_numeric_general() -> GeneralQbaf:
    """Condition without a type keyword: a non-numeric value is an error,
    not a failed constraint."""
    general = expected_general()
    return GeneralQbaf(
        entity=general.entity,
        qbaf=general.qbaf,
        nl_conditions=general.nl_conditions,
        formal_conditions={
            "a1": parse_condition({"properties": {"kps": {"maximum": 49}}}),
            "s1": general.formal_conditions["s1"],
        },
    )


def test_instantiate_error_names_argument_and_parameter():
    params = CaseParameters(values={"kps": "high"})
    with pytest.raises(pipeline.InstantiationError) as err:
        instantiate(bare_numeric_general(), params)
    assert err.value.argument_id == "a1"
    assert err.value.param == "kps"


def test_instantiate_faithfulness_through_serialisation():
    general = expected_general()
    params = CaseParameters(values={"kps": 70, "mgmt_methylation_status": "methylated"})
    result = instantiate(general, params)
    reported = root_strength(result.qbaf)
    reloaded = from_dict(json.loads(json.dumps(to_dict(result.qbaf))))
    assert root_strength(reloaded) == reported  # bit-exact


# -- inference --------------------------------------------------------------------------


def test_infer_with_params_root_only_framework():
    solo = GeneralQbaf(
        entity=TMZ,
        qbaf=Qbaf((Argument("root", "claim", 0.5),), (), "root"),
        nl_conditions={},
        formal_conditions={},
    )
    outcome = infer_with_params([solo], CaseParameters())
    assert outcome.scores() == {TMZ.id: 0.5}


def test_infer_case_extracts_once_for_all_options():
    other = Entity("lomustine", "Lomustine Chemotherapy")
    general_a = expected_general()
    general_b = GeneralQbaf(
        entity=other,
        qbaf=Qbaf((Argument("root", "claim", 0.4),), (), "root"),
        nl_conditions={},
        formal_conditions={},
    )
    backend = _inference_backend(
        [{"json": {"kps": 70, "mgmt_methylation_status": "methylated"}}]
    )
    usage = UsageAccumulator()
    outcome = infer_case([general_a, general_b], _extraction_schema(), "case", backend, usage)
    assert len(backend.calls) == 1
    assert usage.calls("inference") == 1
    assert set(outcome.scores()) == {TMZ.id, other.id}
    # s1 (0.7) supports the surviving root: 0.5 + 0.5 * 0.7
    assert outcome.scores()[TMZ.id] == pytest.approx(0.85, abs=1e-12)


def test_infer_case_score_provenance():
    outcome = infer_with_params(
        [expected_general()],
        CaseParameters(values={"kps": 70, "mgmt_methylation_status": "methylated"}),
    )
    result = outcome.results[0]
    assert root_strength(result.qbaf) == result.score
    removed_ids = {r.argument.id for r in result.removed}
    retained_ids = {a.id for a in result.qbaf.arguments}
    assert removed_ids | retained_ids == {"root", "a1", "s1"}
    assert not removed_ids & retained_ids


def test_infer_collects_instantiation_errors():
    outcome = infer_with_params(
        [bare_numeric_general()], CaseParameters(values={"kps": "high"})
    )
    assert outcome.results == ()
    assert outcome.errors and outcome.errors[0][0] == TMZ.id


# -- contestation edits -------------------------------------------------------------------


def test_set_base_score_edit():
    artifacts = scenario_artifacts()
    updated = apply_edit(
        artifacts,
        {"kind": "set_base_score", "option": "radiotherapy-60-gy", "argument": "a1", "value": 0.9},
    )
    assert updated.qbafs["radiotherapy-60-gy"].qbaf.argument("a1").base_score == 0.9
    # original untouched
    assert artifacts.qbafs["radiotherapy-60-gy"].qbaf.argument("a1").base_score == 0.85


def test_set_base_score_rejects_out_of_range():
    with pytest.raises(EditRejectedError):
        apply_edit(
            scenario_artifacts(),
            {"kind": "set_base_score", "option": "radiotherapy-60-gy", "argument": "a1", "value": 1.2},
        )


def test_edit_unknown_ids_are_not_found():
    artifacts = scenario_artifacts()
    with pytest.raises(NotFoundError):
        apply_edit(artifacts, {"kind": "set_base_score", "option": "nope", "argument": "a1", "value": 0.5})
    with pytest.raises(NotFoundError):
        apply_edit(
            artifacts,
            {"kind": "set_base_score", "option": "radiotherapy-60-gy", "argument": "zz", "value": 0.5},
        )


def test_remove_root_rejected():
    with pytest.raises(EditRejectedError):
        apply_edit(
            scenario_artifacts(),
            {"kind": "remove_argument", "option": "radiotherapy-60-gy", "argument": "root"},
        )


def test_remove_argument_cascades():
    artifacts = scenario_artifacts()
    updated = apply_edit(
        artifacts,
        {"kind": "remove_argument", "option": "radiotherapy-60-gy", "argument": "a1"},
    )
    framework = updated.qbafs["radiotherapy-60-gy"]
    assert "a1" not in {a.id for a in framework.qbaf.arguments}
    assert "a1" not in framework.nl_conditions


def test_add_argument_edit():
    artifacts = scenario_artifacts()
    updated = apply_edit(
        artifacts,
        {
            "kind": "add_argument",
            "option": "surgical-resection",
            "parent": "root",
            "polarity": "attack",
            "text": "Advanced age raises perioperative risk.",
            "base_score": 0.6,
            "nl_condition": "the patient is 80 or older",
            "condition": {"properties": {"age": {"type": "integer", "minimum": 80}}},
        },
    )
    framework = updated.qbafs["surgical-resection"]
    new_ids = {a.id for a in framework.qbaf.arguments} - {"root", "a1", "s1"}
    assert new_ids == {"a2"}
    assert framework.nl_conditions["a2"] == "the patient is 80 or older"


def test_add_argument_rejects_undefined_parameter():
    with pytest.raises(EditRejectedError):
        apply_edit(
            scenario_artifacts(),
            {
                "kind": "add_argument",
                "option": "surgical-resection",
                "parent": "root",
                "polarity": "attack",
                "text": "text",
                "base_score": 0.5,
                "nl_condition": "nl",
                "condition": {"properties": {"not_in_schema": {"const": 1}}},
            },
        )


def test_replace_condition_edit():
    artifacts = scenario_artifacts()
    new_condition = {"properties": {"age": {"type": "integer", "minimum": 70}}}
    updated = apply_edit(
        artifacts,
        {
            "kind": "replace_condition",
            "option": "radiotherapy-60-gy",
            "argument": "a1",
            "condition": new_condition,
        },
    )
    assert updated.qbafs["radiotherapy-60-gy"].formal_conditions["a1"] == parse_condition(
        new_condition
    )


def test_edit_param_description():
    artifacts = scenario_artifacts()
    updated = apply_edit(
        artifacts,
        {"kind": "edit_param_description", "name": "kps", "description": "clarified"},
    )
    assert updated.schema.get("kps").description == "clarified"
    assert updated.schema.get("kps").value_type == "integer"


def test_entity_add_and_remove_edits():
    artifacts = scenario_artifacts()
    grown = apply_edit(
        artifacts,
        {"kind": "add_entity", "name": "Bevacizumab", "parent": "radiotherapy"},
    )
    assert "bevacizumab" in grown.ontology.entities
    assert ("radiotherapy", "bevacizumab") in grown.ontology.hierarchy
    with pytest.raises(EditRejectedError):
        apply_edit(grown, {"kind": "add_entity", "name": "bevacizumab"})

    shrunk = apply_edit(grown, {"kind": "remove_entity", "entity": "radiotherapy-60-gy"})
    assert "radiotherapy-60-gy" not in shrunk.ontology.entities
    assert "radiotherapy-60-gy" not in shrunk.qbafs
    assert "radiotherapy-60-gy" not in shrunk.options


def test_override_case_params_edit():
    artifacts = scenario_artifacts()
    updated = apply_edit(
        artifacts,
        {"kind": "override_case_params", "case_id": "case-7", "params": {"age": 75, "kps": 90}},
    )
    assert updated.case_overrides["case-7"].values == {"age": 75, "kps": 90}
    with pytest.raises(EditRejectedError):
        apply_edit(
            artifacts,
            {"kind": "override_case_params", "case_id": "x", "params": {"kps": "high"}},
        )


def test_unknown_edit_kind_rejected():
    with pytest.raises(EditRejectedError):
        apply_edit(scenario_artifacts(), {"kind": "mystery"})


def test_base_score_edit_has_global_but_conditional_effect():
    """A contested score flows into every case that retains the argument and
    leaves cases whose conditions exclude it untouched."""
    artifacts = scenario_artifacts()
    edited = apply_edit(
        artifacts,
        {"kind": "set_base_score", "option": "radiotherapy-60-gy", "argument": "a1", "value": 0.95},
    )
    retaining = CaseParameters(values={"age": 75, "kps": 90})
    excluding = CaseParameters(values={"age": 50, "kps": 90})

    def score(arts, params):
        return infer_with_params([arts.qbafs["radiotherapy-60-gy"]], params).scores()[
            "radiotherapy-60-gy"
        ]

    assert score(edited, retaining) != score(artifacts, retaining)
    assert score(edited, excluding) == score(artifacts, excluding)
