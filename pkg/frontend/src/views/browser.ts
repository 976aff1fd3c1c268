// Artifact browser: ontology hierarchy with per-entity provenance chunks,
// general frameworks, the parameter catalogue, and the contestation log
// with a replay preview diffed against the current revision.

import type { ApiClient } from "../api";
import type { Store } from "../state";
import type {
  GeneralQbafPayload,
  LogEntryPayload,
  OntologyPayload,
  ReplayPayload,
} from "../types";

export function renderOntologyTree(ontology: OntologyPayload): HTMLElement {
  const byId = new Map(ontology.entities.map((e) => [e.id, e]));
  const children = new Map<string, string[]>();
  const hasParent = new Set<string>();
  for (const [parent, child] of ontology.hierarchy) {
    children.set(parent, [...(children.get(parent) ?? []), child]);
    hasParent.add(child);
  }
  const chunksFor = (entityId: string) =>
    ontology.provenance.filter(([e]) => e === entityId).map(([, chunkId]) => chunkId);

  function renderEntity(entityId: string): HTMLElement {
    const item = document.createElement("li");
    item.dataset.entityId = entityId;
    const entity = byId.get(entityId);
    const line = document.createElement("div");
    line.className = "argument";
    line.textContent = entity ? entity.name : entityId;
    const provenance = chunksFor(entityId);
    if (provenance.length > 0) {
      const sources = document.createElement("span");
      sources.className = "badge";
      sources.textContent = `sources: ${provenance.join(", ")}`;
      line.appendChild(sources);
    }
    item.appendChild(line);
    const kids = (children.get(entityId) ?? []).sort();
    if (kids.length > 0) {
      const list = document.createElement("ul");
      for (const kid of kids) list.appendChild(renderEntity(kid));
      item.appendChild(list);
    }
    return item;
  }

  const roots = ontology.entities
    .filter((e) => !hasParent.has(e.id))
    .map((e) => e.id)
    .sort();
  const tree = document.createElement("ul");
  tree.className = "qbaf-tree ontology-tree";
  for (const root of roots) tree.appendChild(renderEntity(root));
  return tree;
}

export function diffReplayAgainstCurrent(
  replayed: ReplayPayload["artifacts"],
  currentQbafs: GeneralQbafPayload[],
  currentSchema: Record<string, unknown>,
): string[] {
  const differences: string[] = [];
  const currentByOption = new Map(currentQbafs.map((q) => [q.option.id, q]));
  const replayedOptions = new Set(Object.keys(replayed.qbafs));
  for (const [optionId, framework] of Object.entries(replayed.qbafs)) {
    const current = currentByOption.get(optionId);
    if (!current) {
      differences.push(`option ${optionId}: present at that revision, absent now`);
    } else if (JSON.stringify(framework) !== JSON.stringify(current)) {
      differences.push(`option ${optionId}: framework differs`);
    }
  }
  for (const optionId of currentByOption.keys()) {
    if (!replayedOptions.has(optionId)) {
      differences.push(`option ${optionId}: absent at that revision, present now`);
    }
  }
  if (JSON.stringify(replayed.schema) !== JSON.stringify(currentSchema)) {
    differences.push("parameter catalogue differs");
  }
  return differences;
}

export class BrowserView {
  readonly element: HTMLElement;
  private logHost: HTMLElement;
  private previewHost: HTMLElement;
  private artifactsHost: HTMLElement;

  constructor(
    private api: ApiClient,
    private store: Store,
  ) {
    this.element = document.createElement("section");
    this.element.className = "browser-view";
    this.artifactsHost = document.createElement("div");
    this.logHost = document.createElement("div");
    this.previewHost = document.createElement("div");
    this.element.append(this.artifactsHost, this.logHost, this.previewHost);
    this.render();
  }

  render(): void {
    this.renderArtifacts();
    void this.renderLog();
  }

  private renderArtifacts(): void {
    this.artifactsHost.innerHTML = "";
    const { ontology, qbafs, schema } = this.store.get();

    const ontologyHeading = document.createElement("h3");
    ontologyHeading.textContent = "Decision ontology";
    this.artifactsHost.appendChild(ontologyHeading);
    if (ontology) this.artifactsHost.appendChild(renderOntologyTree(ontology));

    const qbafHeading = document.createElement("h3");
    qbafHeading.textContent = "General frameworks";
    this.artifactsHost.appendChild(qbafHeading);
    for (const framework of qbafs) {
      const details = document.createElement("details");
      const summary = document.createElement("summary");
      summary.textContent = `${framework.option.name} (${framework.arguments.length} arguments)`;
      const pre = document.createElement("pre");
      pre.className = "json";
      pre.textContent = JSON.stringify(framework, null, 2);
      details.append(summary, pre);
      this.artifactsHost.appendChild(details);
    }

    const schemaHeading = document.createElement("h3");
    schemaHeading.textContent = "Parameter catalogue";
    const pre = document.createElement("pre");
    pre.className = "json";
    pre.textContent = JSON.stringify(schema, null, 2);
    this.artifactsHost.append(schemaHeading, pre);
  }

  private async renderLog(): Promise<void> {
    this.logHost.innerHTML = "";
    const heading = document.createElement("h3");
    heading.textContent = "Contestation log";
    this.logHost.appendChild(heading);
    const entries = await this.api.contestLog();
    if (entries.length === 0) {
      const empty = document.createElement("p");
      empty.textContent = "No contestations yet.";
      this.logHost.appendChild(empty);
      return;
    }
    for (const entry of entries) {
      this.logHost.appendChild(this.renderEntry(entry));
    }
  }

  private renderEntry(entry: LogEntryPayload): HTMLElement {
    const card = document.createElement("div");
    card.className = "log-entry";
    const meta = document.createElement("div");
    meta.className = "meta";
    meta.textContent = `revision ${entry.revision} — ${entry.timestamp}`;
    const justification = document.createElement("div");
    justification.textContent = entry.justification;
    const edit = document.createElement("pre");
    edit.className = "json";
    edit.textContent = JSON.stringify(entry.edit, null, 1);
    const preview = document.createElement("button");
    preview.textContent = "Preview state at this revision";
    preview.addEventListener("click", () => void this.previewRevision(entry.revision));
    card.append(meta, justification, edit, preview);
    return card;
  }

  private async previewRevision(revision: number): Promise<void> {
    const replay = await this.api.replay(revision);
    const { qbafs, schema } = this.store.get();
    const differences = diffReplayAgainstCurrent(replay.artifacts, qbafs, schema);
    this.previewHost.innerHTML = "";
    const heading = document.createElement("h3");
    heading.textContent = `Replay preview: revision ${revision} vs current`;
    this.previewHost.appendChild(heading);
    if (differences.length === 0) {
      const same = document.createElement("p");
      same.textContent =
        replay.verified === true
          ? "Identical to the current state (byte-equality verified by the server)."
          : "Identical to the current state.";
      this.previewHost.appendChild(same);
      return;
    }
    const list = document.createElement("ul");
    for (const difference of differences) {
      const item = document.createElement("li");
      item.textContent = difference;
      list.appendChild(item);
    }
    this.previewHost.appendChild(list);
  }
}
