// Client-side mirrors of the service payloads. The UI never recomputes
// strengths or scores; every number rendered comes from these payloads.

export type ParamValue = boolean | number | string;

export interface CaseParamsPayload {
  values: Record<string, ParamValue>;
  unknown: string[];
}

export interface QbafPayload {
  root: string;
  arguments: { id: string; text: string; base_score: number }[];
  attacks: [string, string][];
  supports: [string, string][];
}

export interface GeneralArgumentPayload {
  id: string;
  text: string;
  base_score: number;
  nl_condition?: string;
  condition?: unknown;
}

export interface GeneralQbafPayload {
  option: { id: string; name: string; description: string };
  root: string;
  arguments: GeneralArgumentPayload[];
  attacks: [string, string][];
  supports: [string, string][];
}

export interface RemovedArgumentPayload {
  id: string;
  text: string;
  base_score: number;
  reason: "condition-unsatisfied" | "ancestor-removed";
  condition?: unknown;
  ancestor?: string;
}

export interface ResultPayload {
  option: { id: string; name: string };
  score: number;
  qbaf: QbafPayload;
  strengths: Record<string, number>;
  removed: RemovedArgumentPayload[];
  params: CaseParamsPayload;
}

export interface InferencePayload {
  revision: number;
  params: CaseParamsPayload;
  results: ResultPayload[];
  errors: [string, string][];
}

export interface RevisionPayload {
  revision: number;
  state_hash: string;
}

export interface OntologyPayload {
  entities: { id: string; name: string; description: string }[];
  chunks: { id: string; doc_id: string; ordinal: number; text: string }[];
  hierarchy: [string, string][];
  provenance: [string, string][];
}

export interface ParamDefPayload {
  type: "boolean" | "integer" | "number" | "string";
  description: string;
  enum?: ParamValue[];
  minimum?: number;
  maximum?: number;
}

export type SchemaPayload = Record<string, ParamDefPayload>;

export interface LogEntryPayload {
  revision: number;
  timestamp: string;
  justification: string;
  edit: Record<string, unknown>;
}

export interface ReplayPayload {
  revision: number;
  verified: boolean | null;
  artifacts: {
    ontology: OntologyPayload;
    schema: SchemaPayload;
    qbafs: Record<string, GeneralQbafPayload>;
  };
}

export type ContestEdit = Record<string, unknown> & { kind: string };
