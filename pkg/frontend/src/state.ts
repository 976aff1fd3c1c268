// Shared view model: the artifact snapshot the page was rendered from,
// the last inference, and staleness tracking against the live revision.

import type {
  GeneralQbafPayload,
  InferencePayload,
  OntologyPayload,
  SchemaPayload,
} from "./types";

export interface AppState {
  revision: number | null;
  stateHash: string | null;
  staleSince: number | null; // a newer revision seen after page load
  ontology: OntologyPayload | null;
  qbafs: GeneralQbafPayload[];
  schema: SchemaPayload;
  lastVignette: string;
  lastInference: InferencePayload | null;
}

export type Listener = (state: AppState) => void;

export class Store {
  private state: AppState = {
    revision: null,
    stateHash: null,
    staleSince: null,
    ontology: null,
    qbafs: [],
    schema: {},
    lastVignette: "",
    lastInference: null,
  };
  private listeners = new Set<Listener>();

  get(): AppState {
    return this.state;
  }

  update(partial: Partial<AppState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  /** Track the revision a server response was computed at; anything newer
   * than the loaded snapshot flags the page as stale. */
  observeRevision(revision: number): void {
    const { revision: loaded, staleSince } = this.state;
    if (loaded !== null && revision > loaded && staleSince === null) {
      this.update({ staleSince: revision });
    }
  }

  generalFor(optionId: string): GeneralQbafPayload | undefined {
    return this.state.qbafs.find((q) => q.option.id === optionId);
  }
}
