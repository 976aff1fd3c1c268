// Thin typed client over the service HTTP API. Mutations go through
// contest() only; nothing is applied optimistically — callers re-render
// from the revision the server acknowledges.

import type {
  ContestEdit,
  GeneralQbafPayload,
  InferencePayload,
  LogEntryPayload,
  OntologyPayload,
  ParamValue,
  ReplayPayload,
  RevisionPayload,
  SchemaPayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
  }
}

export interface InferRequest {
  case_text?: string;
  params?: Record<string, ParamValue | null>;
  case_id?: string;
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      throw new ApiError(response.status, body?.detail ?? response.statusText);
    }
    return body as T;
  }

  revision(): Promise<RevisionPayload> {
    return this.request("/artifacts/revision");
  }

  ontology(): Promise<OntologyPayload> {
    return this.request("/ontology");
  }

  qbafs(): Promise<GeneralQbafPayload[]> {
    return this.request("/qbafs");
  }

  qbaf(option: string): Promise<GeneralQbafPayload> {
    return this.request(`/qbafs/${encodeURIComponent(option)}`);
  }

  schema(): Promise<SchemaPayload> {
    return this.request("/schema");
  }

  infer(body: InferRequest): Promise<InferencePayload> {
    return this.request("/infer", { method: "POST", body: JSON.stringify(body) });
  }

  contest(edit: ContestEdit, justification: string): Promise<{ revision: number }> {
    return this.request("/contest", {
      method: "POST",
      body: JSON.stringify({ edit, justification }),
    });
  }

  contestLog(): Promise<LogEntryPayload[]> {
    return this.request("/contest/log");
  }

  replay(toRevision: number): Promise<ReplayPayload> {
    return this.request("/contest/replay", {
      method: "POST",
      body: JSON.stringify({ to_revision: toRevision }),
    });
  }
}
