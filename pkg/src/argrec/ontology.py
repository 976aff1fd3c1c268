"""Decision-space ontology: entities mined from policy chunks, their
hierarchy, and provenance links back to the source text.

Construction iterates documents then chunks, feeding each chunk to a
pluggable miner together with the entities and hierarchy accumulated so far.
The hierarchy is a DAG (combination options may have several parents);
cycle-inducing edges are dropped and logged. Queries on a finished ontology
are read-only.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from . import llm
from .llm import Backend, GenerationRequest, UsageAccumulator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Chunk:
    id: str
    doc_id: str
    ordinal: int
    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError(f"chunk {self.id!r} has empty text")


@dataclass(frozen=True)
class Entity:
    id: str
    name: str
    description: str = ""


def canonical_name(name: str) -> str:
    """Collapse whitespace; identity comparison is case-insensitive on this."""
    return re.sub(r"\s+", " ", name).strip()


def entity_id_for(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", canonical_name(name).lower()).strip("-")
    if not slug:
        raise ValueError(f"entity name {name!r} yields an empty identifier")
    return slug


@dataclass(frozen=True)
class Ontology:
    """Entities, source chunks, hierarchy edges (parent id, child id) and
    provenance pairs (entity id, chunk id)."""

    entities: Mapping[str, Entity] = field(default_factory=dict)
    chunks: Mapping[str, Chunk] = field(default_factory=dict)
    hierarchy: frozenset[tuple[str, str]] = frozenset()
    provenance: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entities", dict(self.entities))
        object.__setattr__(self, "chunks", dict(self.chunks))
        object.__setattr__(self, "hierarchy", frozenset(self.hierarchy))
        object.__setattr__(self, "provenance", frozenset(self.provenance))
        for parent, child in self.hierarchy:
            if parent not in self.entities or child not in self.entities:
                raise ValueError(f"hierarchy edge ({parent!r}, {child!r}) references a missing entity")
        for entity_id, chunk_id in self.provenance:
            if entity_id not in self.entities:
                raise ValueError(f"provenance references missing entity {entity_id!r}")
            if chunk_id not in self.chunks:
                raise ValueError(f"provenance references missing chunk {chunk_id!r}")
        positions: dict[tuple[str, int], str] = {}
        for chunk in self.chunks.values():
            key = (chunk.doc_id, chunk.ordinal)
            if key in positions:
                raise ValueError(
                    f"chunks {positions[key]!r} and {chunk.id!r} share position {key}"
                )
            positions[key] = chunk.id
        if _find_cycle(self.hierarchy):
            raise ValueError("hierarchy contains a cycle")

    def entity_by_name(self, name: str) -> Entity | None:
        wanted = canonical_name(name).casefold()
        for entity in self.entities.values():
            if entity.name.casefold() == wanted:
                return entity
        return None

    def parents_of(self, entity_id: str) -> set[str]:
        return {p for p, c in self.hierarchy if c == entity_id}

    def children_of(self, entity_id: str) -> set[str]:
        return {c for p, c in self.hierarchy if p == entity_id}

    def to_dict(self) -> dict:
        return {
            "entities": [
                {"id": e.id, "name": e.name, "description": e.description}
                for e in sorted(self.entities.values(), key=lambda e: e.id)
            ],
            "chunks": [
                {"id": c.id, "doc_id": c.doc_id, "ordinal": c.ordinal, "text": c.text}
                for c in sorted(self.chunks.values(), key=lambda c: (c.doc_id, c.ordinal, c.id))
            ],
            "hierarchy": sorted([list(edge) for edge in self.hierarchy]),
            "provenance": sorted([list(pair) for pair in self.provenance]),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Ontology":
        return cls(
            entities={e["id"]: Entity(e["id"], e["name"], e.get("description", "")) for e in data["entities"]},
            chunks={
                c["id"]: Chunk(c["id"], c["doc_id"], int(c["ordinal"]), c["text"])
                for c in data["chunks"]
            },
            hierarchy=frozenset((p, c) for p, c in data["hierarchy"]),
            provenance=frozenset((e, c) for e, c in data["provenance"]),
        )


def _find_cycle(edges: Iterable[tuple[str, str]]) -> bool:
    children: dict[str, set[str]] = {}
    for parent, child in edges:
        children.setdefault(parent, set()).add(child)
    visiting: set[str] = set()
    done: set[str] = set()

    def visit(node: str) -> bool:
        if node in done:
            return False
        if node in visiting:
            return True
        visiting.add(node)
        for child in children.get(node, ()):
            if visit(child):
                return True
        visiting.discard(node)
        done.add(node)
        return False

    return any(visit(node) for node in list(children))


def _creates_cycle(edges: set[tuple[str, str]], parent: str, child: str) -> bool:
    """Would parent→child close a loop? True iff parent is reachable from child."""
    if parent == child:
        return True
    children: dict[str, set[str]] = {}
    for p, c in edges:
        children.setdefault(p, set()).add(c)
    stack, seen = [child], set()
    while stack:
        node = stack.pop()
        if node == parent:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(children.get(node, ()))
    return False


# ---------------------------------------------------------------------------
# Construction


@dataclass(frozen=True)
class MinedEntity:
    name: str
    description: str = ""


@dataclass(frozen=True)
class MinedChunk:
    """Miner output for one chunk: all decision entities mentioned in it
    (new or already known) and any hierarchy edges, by entity name."""

    entities: tuple[MinedEntity, ...] = ()
    hierarchy: tuple[tuple[str, str], ...] = ()


Miner = Callable[[Mapping[str, Entity], frozenset[tuple[str, str]], Chunk], MinedChunk]


class OntologyConstructionError(Exception):
    """Miner failure; carries the partial ontology built so far."""

    def __init__(self, message: str, partial: Ontology, chunk: Chunk):
        self.partial = partial
        self.chunk = chunk
        super().__init__(message)


def construct_ontology(
    documents: Sequence[tuple[str, Sequence[Chunk]]],
    miner: Miner,
    relevance_filter: Callable[[Chunk], bool] | None = None,
) -> Ontology:
    """Iterate documents then chunks in input order, extending entities,
    chunk set, hierarchy, and provenance after each miner call."""
    entities: dict[str, Entity] = {}
    chunks: dict[str, Chunk] = {}
    hierarchy: set[tuple[str, str]] = set()
    provenance: set[tuple[str, str]] = set()

    def resolve(name: str, description: str = "") -> str:
        canon = canonical_name(name)
        if not canon:
            raise ValueError("miner emitted an empty entity name")
        for existing in entities.values():
            if existing.name.casefold() == canon.casefold():
                return existing.id
        entity_id = entity_id_for(canon)
        if entity_id in entities:
            # distinct canonical names colliding on slug: disambiguate
            suffix = 2
            while f"{entity_id}-{suffix}" in entities:
                suffix += 1
            entity_id = f"{entity_id}-{suffix}"
        entities[entity_id] = Entity(entity_id, canon, description)
        return entity_id

    def snapshot() -> Ontology:
        return Ontology(
            entities=dict(entities),
            chunks=dict(chunks),
            hierarchy=frozenset(hierarchy),
            provenance=frozenset(provenance),
        )

    for doc_id, doc_chunks in documents:
        for chunk in doc_chunks:
            if relevance_filter is not None and not relevance_filter(chunk):
                continue
            try:
                mined = miner(dict(entities), frozenset(hierarchy), chunk)
            except Exception as exc:
                raise OntologyConstructionError(
                    f"miner failed on chunk {chunk.id!r} of document {doc_id!r}: {exc}",
                    partial=snapshot(),
                    chunk=chunk,
                ) from exc
            chunk_entity_ids = [resolve(m.name, m.description) for m in mined.entities]
            chunks[chunk.id] = chunk
            for parent_name, child_name in mined.hierarchy:
                parent_id = resolve(parent_name)
                child_id = resolve(child_name)
                if _creates_cycle(hierarchy, parent_id, child_id):
                    logger.warning(
                        "rejected hierarchy edge (%s -> %s) from chunk %s: would create a cycle",
                        parent_id,
                        child_id,
                        chunk.id,
                    )
                    continue
                hierarchy.add((parent_id, child_id))
            for entity_id in chunk_entity_ids:
                provenance.add((entity_id, chunk.id))
    return snapshot()


def select_options(
    ontology: Ontology,
    min_documents: int = 1,
    leaf_only: bool = True,
    single_root_ancestor: bool = True,
) -> list[Entity]:
    """Decision options for framework construction: optionally leaves only,
    mentioned in at least ``min_documents`` distinct documents, and (to drop
    combination options) with exactly one root ancestor. Ordered by name."""
    if min_documents < 1:
        raise ValueError("min_documents must be >= 1")
    selected = []
    for entity in ontology.entities.values():
        if leaf_only and ontology.children_of(entity.id):
            continue
        docs = {
            ontology.chunks[chunk_id].doc_id
            for ent_id, chunk_id in ontology.provenance
            if ent_id == entity.id
        }
        if len(docs) < min_documents:
            continue
        if single_root_ancestor and len(_root_ancestors(ontology, entity.id)) != 1:
            continue
        selected.append(entity)
    return sorted(selected, key=lambda e: (e.name.casefold(), e.id))


def _root_ancestors(ontology: Ontology, entity_id: str) -> set[str]:
    """Ancestors (including the entity itself) that have no parent."""
    roots: set[str] = set()
    stack, seen = [entity_id], set()
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        parents = ontology.parents_of(node)
        if not parents:
            roots.add(node)
        else:
            stack.extend(parents)
    return roots


def chunks_for(ontology: Ontology, entity: Entity | str) -> list[Chunk]:
    """All chunks mentioning the entity, ordered by (doc, ordinal)."""
    entity_id = entity.id if isinstance(entity, Entity) else entity
    if entity_id not in ontology.entities:
        raise KeyError(f"unknown entity: {entity_id!r}")
    found = [
        ontology.chunks[chunk_id]
        for ent_id, chunk_id in ontology.provenance
        if ent_id == entity_id
    ]
    return sorted(found, key=lambda c: (c.doc_id, c.ordinal, c.id))


# ---------------------------------------------------------------------------
# Corpus loading and the LLM-backed miner


def load_corpus(path: str | Path) -> list[tuple[str, list[Chunk]]]:
    """Read a JSON-Lines corpus ({"doc_id","chunk_id","ordinal","text"} per
    line); documents in first-appearance order, chunks in file order."""
    documents: dict[str, list[Chunk]] = {}
    seen_ids: set[str] = set()
    seen_positions: set[tuple[str, int]] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {line_no} is not valid JSON: {exc}") from exc
            chunk = Chunk(
                id=str(record["chunk_id"]),
                doc_id=str(record["doc_id"]),
                ordinal=int(record["ordinal"]),
                text=record["text"],
            )
            if chunk.id in seen_ids:
                raise ValueError(f"{path}: line {line_no}: duplicate chunk id {chunk.id!r}")
            position = (chunk.doc_id, chunk.ordinal)
            if position in seen_positions:
                raise ValueError(f"{path}: line {line_no}: duplicate position {position}")
            seen_ids.add(chunk.id)
            seen_positions.add(position)
            documents.setdefault(chunk.doc_id, []).append(chunk)
    return list(documents.items())


MINER_RESPONSE_SCHEMA = {
    "type": "object",
    "properties": {
        "entities": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "description": {"type": "string"},
                },
                "required": ["name"],
            },
        },
        "hierarchy": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "parent": {"type": "string", "minLength": 1},
                    "child": {"type": "string", "minLength": 1},
                },
                "required": ["parent", "child"],
            },
        },
    },
    "required": ["entities", "hierarchy"],
}


def llm_miner(
    backend: Backend,
    usage: UsageAccumulator,
    retries: int = llm.DEFAULT_RETRIES,
    temperature: float = 1.0,
) -> Miner:
    """Miner that asks the backend for the decision entities mentioned in a
    chunk plus hierarchy edges, as schema-checked JSON."""

    def mine(entities: Mapping[str, Entity], hierarchy: frozenset, chunk: Chunk) -> MinedChunk:
        from . import prompts

        request = GenerationRequest(
            system=prompts.ONTOLOGY_SYSTEM,
            user=prompts.build_ontology_prompt(entities, hierarchy, chunk),
            response_schema=MINER_RESPONSE_SCHEMA,
            temperature=temperature,
        )
        reply = llm.generate(backend, request, usage, llm.STAGE_ONTOLOGY, retries=retries)
        return MinedChunk(
            entities=tuple(
                MinedEntity(name=e["name"], description=e.get("description", ""))
                for e in reply["entities"]
            ),
            hierarchy=tuple((h["parent"], h["child"]) for h in reply["hierarchy"]),
        )

    return mine
