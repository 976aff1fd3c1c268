"""HTTP API over a persistent artifact store: inspect artifacts, run
inference, contest the shared artifacts, and evaluate datasets.

Every mutation returns the new revision. Inference runs against the
revision snapshot taken when the request started, so contestations landing
mid-flight never bleed into an ongoing computation.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Mapping

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import llm, metrics, pipeline
from .conditions import CaseParameters
from .llm import Backend, UsageAccumulator
from .pipeline import EditRejectedError, ExtractionError, NotFoundError
from .store import ArtifactStore, state_bytes, write_state

logger = logging.getLogger(__name__)


class InferBody(BaseModel):
    case_text: str | None = None
    params: dict[str, Any] | None = None
    case_id: str | None = None


class ContestBody(BaseModel):
    edit: dict[str, Any]
    justification: str


class ReplayBody(BaseModel):
    to_revision: int


class EvaluateBody(BaseModel):
    cases_path: str
    labels_path: str
    gains: dict[str, float] | None = None
    use_params: bool = False


def _parse_gains(raw: Mapping[str, float] | None) -> dict[metrics.Label, float]:
    if not raw:
        return dict(metrics.DEFAULT_GAINS)
    gains = dict(metrics.DEFAULT_GAINS)
    for key, value in raw.items():
        gains[metrics.parse_label(key)] = float(value)
    return gains


def run_dataset(
    artifacts: pipeline.Artifacts,
    dataset: metrics.LabelledDataset,
    backend: Backend | None,
    usage: UsageAccumulator,
    use_params: bool,
    retries: int = llm.DEFAULT_RETRIES,
) -> dict[str, dict[str, float]]:
    """Score every dataset case against the stored frameworks."""
    generals = artifacts.frameworks()
    results: dict[str, dict[str, float]] = {}
    for case in dataset.cases:
        override = artifacts.case_overrides.get(case.case_id)
        if override is not None:
            params = override
        elif use_params:
            params = CaseParameters.from_flat(dict(case.params))
        else:
            if backend is None:
                raise ValueError("no backend configured for parameter extraction")
            params = pipeline.extract_params(
                case.vignette, artifacts.schema, backend=backend, usage=usage, retries=retries
            )
        outcome = pipeline.infer_with_params(generals, params)
        if outcome.errors:
            raise ValueError(f"inference errors for case {case.case_id!r}: {outcome.errors}")
        results[case.case_id] = outcome.scores()
    return results


def create_app(
    store: ArtifactStore,
    backend: Backend | None = None,
    usage: UsageAccumulator | None = None,
    retries: int = llm.DEFAULT_RETRIES,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="argrec", version="0.1.0")
    usage = usage or UsageAccumulator()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.get("/artifacts/revision")
    def get_revision() -> dict:
        revision, _ = store.snapshot()
        return {"revision": revision, "state_hash": store.state_hash()}

    @app.get("/ontology")
    def get_ontology() -> dict:
        _, artifacts = store.snapshot()
        return artifacts.ontology.to_dict()

    @app.get("/qbafs")
    def get_qbafs() -> list[dict]:
        _, artifacts = store.snapshot()
        return [artifacts.qbafs[key].to_dict() for key in sorted(artifacts.qbafs)]

    @app.get("/qbafs/{option}")
    def get_qbaf(option: str) -> dict:
        _, artifacts = store.snapshot()
        framework = artifacts.qbafs.get(option)
        if framework is None:
            raise HTTPException(status_code=404, detail=f"unknown option: {option!r}")
        return framework.to_dict()

    @app.get("/schema")
    def get_schema() -> dict:
        _, artifacts = store.snapshot()
        return artifacts.schema.to_dict()

    @app.post("/infer")
    def post_infer(body: InferBody) -> dict:
        revision, artifacts = store.snapshot()
        generals = artifacts.frameworks()
        if not generals:
            raise HTTPException(status_code=409, detail="no frameworks built yet")
        override = artifacts.case_overrides.get(body.case_id) if body.case_id else None
        try:
            if override is not None:
                params = override
            elif body.params is not None:
                params = CaseParameters.from_flat(body.params)
            elif body.case_text:
                if backend is None:
                    raise HTTPException(status_code=409, detail="no backend configured")
                params = pipeline.extract_params(
                    body.case_text, artifacts.schema, backend=backend, usage=usage, retries=retries
                )
            else:
                raise HTTPException(status_code=422, detail="case_text or params required")
        except ExtractionError as exc:
            raise HTTPException(
                status_code=422,
                detail={"message": str(exc), "raw_output": exc.last_output},
            ) from exc
        outcome = pipeline.infer_with_params(generals, params)
        payload = outcome.to_dict()
        payload["revision"] = revision
        return payload

    @app.post("/contest")
    def post_contest(body: ContestBody) -> dict:
        try:
            revision = store.contest(body.edit, body.justification)
        except EditRejectedError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0])) from exc
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"revision": revision}

    @app.get("/contest/log")
    def get_log() -> list[dict]:
        return store.log_entries()

    @app.post("/contest/replay")
    def post_replay(body: ReplayBody) -> dict:
        import tempfile

        current_revision, _ = store.snapshot()
        if not 0 <= body.to_revision <= current_revision:
            raise HTTPException(
                status_code=404,
                detail=f"revision {body.to_revision} out of range 0..{current_revision}",
            )
        replayed = store.replay(body.to_revision)
        verified = None
        if body.to_revision == current_revision:
            with tempfile.TemporaryDirectory() as tmp:
                write_state(Path(tmp), replayed)
                verified = state_bytes(Path(tmp)) == state_bytes(store.root / "current")
        return {
            "revision": body.to_revision,
            "verified": verified,
            "artifacts": {
                "ontology": replayed.ontology.to_dict(),
                "schema": replayed.schema.to_dict(),
                "qbafs": {key: replayed.qbafs[key].to_dict() for key in sorted(replayed.qbafs)},
            },
        }

    @app.post("/evaluate")
    def post_evaluate(body: EvaluateBody) -> dict:
        _, artifacts = store.snapshot()
        try:
            dataset = metrics.load_dataset(body.cases_path, body.labels_path)
            results = run_dataset(
                artifacts, dataset, backend, usage, use_params=body.use_params, retries=retries
            )
            report = metrics.evaluate_run(
                results, dataset, gains=_parse_gains(body.gains), token_usage=usage.report()
            )
        except FileNotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except (ValueError, ExtractionError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return report.to_dict()

    return app
