"""Command-line entry points for the build / infer / evaluate / contest
workflow over a persistent artifact store.

Backend selection comes from the environment (ARGREC_BACKEND=mock with
ARGREC_MOCK_SCRIPT, or ARGREC_API_BASE et al. for an OpenAI-compatible
endpoint) unless overridden with --mock-script.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import llm, metrics, pipeline, service
from .conditions import CaseParameters
from .jsonutil import dumps_canonical, write_atomic
from .llm import MockBackend, UsageAccumulator, backend_from_env
from .ontology import construct_ontology, llm_miner, load_corpus, select_options
from .pipeline import Artifacts, ArgumentScheme, MiningConfig
from .store import ArtifactStore


def _build_backend(args: argparse.Namespace):
    if getattr(args, "mock_script", None):
        return MockBackend.from_file(args.mock_script)
    return backend_from_env()


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_build_ontology(args: argparse.Namespace) -> int:
    corpus_path = Path(args.corpus)
    if not corpus_path.exists():
        return _fail(f"corpus not found: {corpus_path}")
    usage = UsageAccumulator()
    try:
        backend = _build_backend(args)
        documents = load_corpus(corpus_path)
        miner = llm_miner(backend, usage, retries=args.retries)
        ontology = construct_ontology(documents, miner)
        options = select_options(
            ontology,
            min_documents=args.min_docs,
            leaf_only=not args.all_entities,
            single_root_ancestor=not args.allow_combinations,
        )
    except Exception as exc:
        return _fail(str(exc))
    artifacts = Artifacts(ontology=ontology, options=tuple(e.id for e in options))
    ArtifactStore.initialise(args.store, artifacts)
    print(f"ontology: {len(ontology.entities)} entities, {len(ontology.chunks)} chunks")
    print(f"selected {len(options)} decision options:")
    for entity in options:
        print(f"  - {entity.name} ({entity.id})")
    print(f"store initialised at {args.store}")
    return 0


def cmd_build_qbafs(args: argparse.Namespace) -> int:
    if not ArtifactStore.exists(args.store):
        return _fail(f"no artifact store at {args.store} (run build-ontology first)")
    store = ArtifactStore.open(args.store)
    _, artifacts = store.snapshot()
    if not artifacts.options:
        return _fail("the stored ontology has no selected options")
    scheme = None
    if args.scheme:
        scheme_path = Path(args.scheme)
        if not scheme_path.exists():
            return _fail(f"scheme file not found: {scheme_path}")
        scheme = ArgumentScheme.from_dict(json.loads(scheme_path.read_text(encoding="utf-8")))
    config = MiningConfig(
        depth=args.depth,
        score_root=args.score_root,
        scheme=scheme,
        max_breadth=args.max_breadth,
        retries=args.retries,
    )
    usage = UsageAccumulator()
    options = [artifacts.ontology.entities[oid] for oid in artifacts.options]
    try:
        backend = _build_backend(args)
        result = pipeline.build_general_qbafs(
            artifacts.ontology, options, config, backend, usage
        )
    except pipeline.BuildError as exc:
        for entity_id, message in exc.failures:
            print(f"failed: {entity_id}: {message}", file=sys.stderr)
        return _fail(str(exc))
    except Exception as exc:
        return _fail(str(exc))

    updated = Artifacts(
        ontology=artifacts.ontology,
        qbafs={fw.entity.id: fw for fw in result.frameworks},
        schema=result.schema,
        options=artifacts.options,
        case_overrides=artifacts.case_overrides,
    )
    ArtifactStore.initialise(args.store, updated)
    print(f"built {len(result.frameworks)} general frameworks; "
          f"schema has {len(result.schema)} parameters")
    usage_report = usage.report()
    print(f"tokens: {usage_report['total']['prompt_tokens']} prompt / "
          f"{usage_report['total']['completion_tokens']} completion")
    for entity_id, message in result.failures:
        print(f"failed: {entity_id}: {message}", file=sys.stderr)
    return 0 if not result.failures else 1


def cmd_infer(args: argparse.Namespace) -> int:
    if not ArtifactStore.exists(args.store):
        return _fail(f"no artifact store at {args.store}")
    store = ArtifactStore.open(args.store)
    revision, artifacts = store.snapshot()
    generals = artifacts.frameworks()
    if not generals:
        return _fail("no frameworks in the store (run build-qbafs first)")

    usage = UsageAccumulator()
    try:
        if args.params:
            params = CaseParameters.from_flat(json.loads(args.params))
        elif args.case_id and args.case_id in artifacts.case_overrides:
            params = artifacts.case_overrides[args.case_id]
        else:
            if args.case_file:
                case_path = Path(args.case_file)
                if not case_path.exists():
                    return _fail(f"case file not found: {case_path}")
                case_text = case_path.read_text(encoding="utf-8")
            elif args.case_text:
                case_text = args.case_text
            else:
                return _fail("provide --case-file, --case-text, --params, or a stored --case-id")
            backend = _build_backend(args)
            params = pipeline.extract_params(
                case_text, artifacts.schema, backend=backend, usage=usage, retries=args.retries
            )
    except pipeline.ExtractionError as exc:
        print(f"raw model output: {exc.last_output!r}", file=sys.stderr)
        return _fail(str(exc))
    except Exception as exc:
        return _fail(str(exc))

    outcome = pipeline.infer_with_params(generals, params)
    payload = outcome.to_dict()
    payload["revision"] = revision
    if args.out:
        write_atomic(Path(args.out), dumps_canonical(payload))
    print(f"revision {revision}; extracted parameters: "
          + json.dumps(params.to_dict()["values"], sort_keys=True))
    for result in sorted(outcome.results, key=lambda r: (-r.score, r.option.id)):
        print(f"  {result.score:.4f}  {result.option.name} "
              f"({len(result.removed)} arguments pruned)")
    for entity_id, message in outcome.errors:
        print(f"failed: {entity_id}: {message}", file=sys.stderr)
    return 0 if not outcome.errors else 1


def cmd_evaluate(args: argparse.Namespace) -> int:
    if not ArtifactStore.exists(args.store):
        return _fail(f"no artifact store at {args.store}")
    store = ArtifactStore.open(args.store)
    _, artifacts = store.snapshot()
    for path in (args.cases, args.labels):
        if not Path(path).exists():
            return _fail(f"dataset file not found: {path}")
    gains = dict(metrics.DEFAULT_GAINS)
    if args.gains:
        try:
            rec, maybe, not_rec = (float(g) for g in args.gains.split(","))
        except ValueError:
            return _fail("--gains expects three comma-separated numbers")
        gains = {
            metrics.Label.RECOMMENDED: rec,
            metrics.Label.MAYBE_RECOMMENDED: maybe,
            metrics.Label.NOT_RECOMMENDED: not_rec,
        }
    usage = UsageAccumulator()
    try:
        backend = None if args.use_params else _build_backend(args)
        dataset = metrics.load_dataset(args.cases, args.labels)
        results = service.run_dataset(
            artifacts, dataset, backend, usage, use_params=args.use_params, retries=args.retries
        )
        report = metrics.evaluate_run(results, dataset, gains=gains, token_usage=usage.report())
    except Exception as exc:
        return _fail(str(exc))
    print(f"cases: {len(dataset.cases)}; pairs: {dataset.pair_count}")
    print(report.format_table())
    saved = store.save_report(report.to_dict())
    print(f"report stored at {saved}")
    if args.out:
        write_atomic(Path(args.out), dumps_canonical(report.to_dict()))
        print(f"report written to {args.out}")
    return 0


def cmd_contest(args: argparse.Namespace) -> int:
    if not ArtifactStore.exists(args.store):
        return _fail(f"no artifact store at {args.store}")
    store = ArtifactStore.open(args.store)
    edit_path = Path(args.edit)
    try:
        edit = json.loads(
            edit_path.read_text(encoding="utf-8") if edit_path.exists() else args.edit
        )
    except json.JSONDecodeError as exc:
        return _fail(f"edit is not valid JSON: {exc}")
    try:
        revision = store.contest(edit, args.justification)
    except Exception as exc:
        return _fail(str(exc))
    print(f"edit applied; store now at revision {revision}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    if not ArtifactStore.exists(args.store):
        return _fail(f"no artifact store at {args.store}")
    if args.ui and not Path(args.ui).is_dir():
        return _fail(f"UI directory not found: {args.ui}")
    store = ArtifactStore.open(args.store)
    try:
        backend = _build_backend(args)
    except ValueError:
        backend = None  # artifact browsing and params-only inference still work
    app = service.create_app(store, backend=backend, retries=args.retries, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--store", required=True, help="artifact store directory")
    parser.add_argument("--mock-script", help="use a scripted mock backend from this JSON file")
    parser.add_argument("--retries", type=int, default=llm.DEFAULT_RETRIES,
                        help="retry budget per model call")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="argrec",
        description="Contestable argumentation-based decision recommendations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-ontology", help="mine the decision ontology from a chunked corpus")
    p.add_argument("corpus", help="JSON-Lines corpus: {doc_id, chunk_id, ordinal, text}")
    p.add_argument("--min-docs", type=int, default=1,
                   help="options must be mentioned in at least this many documents")
    p.add_argument("--all-entities", action="store_true",
                   help="select non-leaf entities as options too")
    p.add_argument("--allow-combinations", action="store_true",
                   help="keep options with multiple root ancestors")
    _add_common(p)
    p.set_defaults(func=cmd_build_ontology)

    p = sub.add_parser("build-qbafs", help="build one general framework per selected option")
    p.add_argument("--depth", type=int, default=1, help="mining depth")
    p.add_argument("--score-root", action="store_true",
                   help="estimate the root base score instead of fixing it at 0.5")
    p.add_argument("--scheme", help="JSON file with an argument scheme to guide mining")
    p.add_argument("--max-breadth", type=int, default=None,
                   help="cap attackers/supporters per argument")
    _add_common(p)
    p.set_defaults(func=cmd_build_qbafs)

    p = sub.add_parser("infer", help="score every option for one case")
    p.add_argument("--case-file", help="file holding the case description")
    p.add_argument("--case-text", help="case description given inline")
    p.add_argument("--params", help="skip extraction: JSON object of case parameters")
    p.add_argument("--case-id", help="use stored per-case parameter overrides")
    p.add_argument("--out", help="write the full result JSON here")
    _add_common(p)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="run a labelled dataset and report LMR / NDCG")
    p.add_argument("--cases", required=True, help="JSONL: {case_id, params, vignette}")
    p.add_argument("--labels", required=True, help="JSONL: {case_id, option_id, label}")
    p.add_argument("--gains", help="NDCG gains as 'recommended,maybe,not' (default 2,1,0)")
    p.add_argument("--use-params", action="store_true",
                   help="use the dataset's structured params instead of extracting")
    p.add_argument("--out", help="write the report JSON here")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("contest", help="apply one contestation edit")
    p.add_argument("--edit", required=True, help="edit JSON (inline or a file path)")
    p.add_argument("--justification", required=True, help="why this edit is being made")
    _add_common(p)
    p.set_defaults(func=cmd_contest)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", help="serve a built frontend from this directory under /ui")
    _add_common(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
