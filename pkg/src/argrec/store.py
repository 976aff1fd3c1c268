"""Versioned, file-backed artifact store with an append-only contestation log.

Layout under the store root:

    revision.json        current revision number
    base/                artifacts as of revision 0
    current/             artifacts as of the current revision
    contest.log.jsonl    one contestation edit per line

Artifacts are canonical JSON (sorted keys, two-space indent, LF), so
replaying the log onto the base artifacts reproduces the current directory
byte-for-byte. A single writer lock serialises contestation; readers take
immutable in-memory snapshots and are unaffected by concurrent edits.
"""

from __future__ import annotations

import hashlib
import json
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping

from .conditions import CaseParameters, ParameterSchema
from .jsonutil import append_line, dumps_canonical, dumps_line, write_atomic
from .ontology import Ontology
from .pipeline import Artifacts, GeneralQbaf, apply_edit


class StoreError(Exception):
    pass


def _artifact_files(artifacts: Artifacts) -> dict[str, str]:
    """Relative path -> canonical file content for one artifact bundle."""
    files = {
        "ontology.json": dumps_canonical(artifacts.ontology.to_dict()),
        "schema.json": dumps_canonical(artifacts.schema.to_dict()),
        "options.json": dumps_canonical(list(artifacts.options)),
        "case_overrides.json": dumps_canonical(
            {case_id: params.to_dict() for case_id, params in artifacts.case_overrides.items()}
        ),
    }
    for option_id, framework in artifacts.qbafs.items():
        files[f"qbafs/{option_id}.json"] = dumps_canonical(framework.to_dict())
    return files


def write_state(directory: Path, artifacts: Artifacts) -> None:
    """Write the bundle, removing stale framework files."""
    files = _artifact_files(artifacts)
    for rel_path, content in files.items():
        write_atomic(directory / rel_path, content)
    qbaf_dir = directory / "qbafs"
    if qbaf_dir.is_dir():
        keep = {f"qbafs/{option_id}.json" for option_id in artifacts.qbafs}
        for path in qbaf_dir.glob("*.json"):
            if f"qbafs/{path.name}" not in keep:
                path.unlink()


def read_state(directory: Path) -> Artifacts:
    ontology = Ontology.from_dict(json.loads((directory / "ontology.json").read_text(encoding="utf-8")))
    schema = ParameterSchema.from_dict(
        json.loads((directory / "schema.json").read_text(encoding="utf-8"))
    )
    options_path = directory / "options.json"
    options = tuple(json.loads(options_path.read_text(encoding="utf-8"))) if options_path.exists() else ()
    overrides_path = directory / "case_overrides.json"
    case_overrides = {}
    if overrides_path.exists():
        case_overrides = {
            case_id: CaseParameters.from_dict(payload)
            for case_id, payload in json.loads(overrides_path.read_text(encoding="utf-8")).items()
        }
    qbafs: dict[str, GeneralQbaf] = {}
    qbaf_dir = directory / "qbafs"
    if qbaf_dir.is_dir():
        for path in sorted(qbaf_dir.glob("*.json")):
            framework = GeneralQbaf.from_dict(json.loads(path.read_text(encoding="utf-8")))
            qbafs[framework.entity.id] = framework
    return Artifacts(
        ontology=ontology,
        qbafs=qbafs,
        schema=schema,
        options=options,
        case_overrides=case_overrides,
    )


def state_bytes(directory: Path) -> dict[str, bytes]:
    out: dict[str, bytes] = {}
    for path in sorted(directory.rglob("*.json")):
        out[str(path.relative_to(directory))] = path.read_bytes()
    return out


class ArtifactStore:
    """Single-directory store; one instance per process is expected, with
    contestation serialised by an internal lock."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._lock = threading.RLock()
        self._revision: int = 0
        self._artifacts: Artifacts | None = None

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def initialise(cls, root: str | Path, artifacts: Artifacts) -> "ArtifactStore":
        """Create (or reset) a store: artifacts become revision 0, the log is
        emptied."""
        store = cls(root)
        store.root.mkdir(parents=True, exist_ok=True)
        write_state(store.root / "base", artifacts)
        write_state(store.root / "current", artifacts)
        write_atomic(store.root / "revision.json", dumps_canonical({"revision": 0}))
        write_atomic(store.root / "contest.log.jsonl", "")
        store._revision = 0
        store._artifacts = artifacts
        return store

    @classmethod
    def open(cls, root: str | Path) -> "ArtifactStore":
        store = cls(root)
        revision_path = store.root / "revision.json"
        if not revision_path.exists():
            raise StoreError(f"no artifact store at {store.root}")
        store._revision = int(json.loads(revision_path.read_text(encoding="utf-8"))["revision"])
        store._artifacts = read_state(store.root / "current")
        return store

    @classmethod
    def exists(cls, root: str | Path) -> bool:
        return (Path(root) / "revision.json").exists()

    # -- reads -------------------------------------------------------------

    def snapshot(self) -> tuple[int, Artifacts]:
        """Immutable view of the current revision; safe to use while later
        contestations land."""
        with self._lock:
            if self._artifacts is None:
                raise StoreError("store not loaded")
            return self._revision, self._artifacts

    @property
    def revision(self) -> int:
        return self.snapshot()[0]

    def log_entries(self) -> list[dict]:
        log_path = self.root / "contest.log.jsonl"
        if not log_path.exists():
            return []
        entries = []
        with open(log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entries.append(json.loads(line))
        return entries

    def state_hash(self) -> str:
        """Hash of the current artifact bytes; two stores agree iff their
        replayable state agrees."""
        digest = hashlib.sha256()
        for rel_path, content in state_bytes(self.root / "current").items():
            digest.update(rel_path.encode("utf-8"))
            digest.update(b"\x00")
            digest.update(content)
            digest.update(b"\x00")
        return digest.hexdigest()

    # -- writes ------------------------------------------------------------

    def contest(self, edit: Mapping, justification: str) -> int:
        """Validate and apply one edit atomically; returns the new revision."""
        if not justification:
            raise ValueError("a contestation needs a justification")
        with self._lock:
            revision, artifacts = self.snapshot()
            updated = apply_edit(artifacts, edit)  # raises on invalid edits
            new_revision = revision + 1
            entry = {
                "revision": new_revision,
                "timestamp": datetime.now(timezone.utc).isoformat(),
                "justification": justification,
                "edit": dict(edit),
            }
            append_line(self.root / "contest.log.jsonl", dumps_line(entry))
            write_state(self.root / "current", updated)
            write_atomic(self.root / "revision.json", dumps_canonical({"revision": new_revision}))
            self._revision = new_revision
            self._artifacts = updated
            return new_revision

    # -- replay ------------------------------------------------------------

    def replay(self, to_revision: int | None = None) -> Artifacts:
        """Materialise the artifacts at a revision by replaying the log onto
        the base bundle."""
        with self._lock:
            target = self._revision if to_revision is None else to_revision
        if target < 0 or target > self.revision:
            raise StoreError(f"revision {target} out of range 0..{self.revision}")
        artifacts = read_state(self.root / "base")
        for entry in self.log_entries():
            if entry["revision"] > target:
                break
            artifacts = apply_edit(artifacts, entry["edit"])
        return artifacts

    def replay_matches_current(self) -> bool:
        """Replay the full log and compare against the current directory
        byte-for-byte."""
        import tempfile

        replayed = self.replay()
        with tempfile.TemporaryDirectory() as tmp:
            write_state(Path(tmp), replayed)
            return state_bytes(Path(tmp)) == state_bytes(self.root / "current")

    # -- run reports ---------------------------------------------------------

    def save_report(self, payload: Mapping) -> Path:
        """Persist an evaluation report under reports/ with a sequential name."""
        reports_dir = self.root / "reports"
        reports_dir.mkdir(parents=True, exist_ok=True)
        index = sum(1 for _ in reports_dir.glob("report-*.json")) + 1
        path = reports_dir / f"report-{index:04d}.json"
        write_atomic(path, dumps_canonical(dict(payload)))
        return path
