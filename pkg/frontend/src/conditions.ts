// Advisory client-side lint for condition documents, mirroring the
// service's supported keyword subset. The server stays authoritative; this
// only powers the live validity hint while editing.

const SCHEMA_KEYWORDS = new Set(["$schema", "type", "properties", "required", "anyOf", "allOf", "not"]);
const CONSTRAINT_KEYWORDS = new Set([
  "type",
  "const",
  "enum",
  "minimum",
  "maximum",
  "exclusiveMinimum",
  "exclusiveMaximum",
]);

export interface LintResult {
  ok: boolean;
  message: string;
}

function lintSchemaObject(node: unknown, path: string): string | null {
  if (typeof node !== "object" || node === null || Array.isArray(node)) {
    return `${path}: expected a schema object`;
  }
  const record = node as Record<string, unknown>;
  for (const key of Object.keys(record)) {
    if (!SCHEMA_KEYWORDS.has(key)) return `${path}: unsupported keyword "${key}"`;
  }
  if ("properties" in record) {
    const props = record.properties;
    if (typeof props !== "object" || props === null) return `${path}.properties: expected an object`;
    for (const [name, spec] of Object.entries(props as Record<string, unknown>)) {
      if (typeof spec !== "object" || spec === null) {
        return `${path}.properties.${name}: expected a constraint object`;
      }
      for (const key of Object.keys(spec as Record<string, unknown>)) {
        if (!CONSTRAINT_KEYWORDS.has(key)) {
          return `${path}.properties.${name}: unsupported keyword "${key}"`;
        }
      }
    }
  }
  for (const combinator of ["anyOf", "allOf"] as const) {
    if (combinator in record) {
      const children = record[combinator];
      if (!Array.isArray(children) || children.length === 0) {
        return `${path}.${combinator}: expected a non-empty array`;
      }
      for (let i = 0; i < children.length; i++) {
        const problem = lintSchemaObject(children[i], `${path}.${combinator}[${i}]`);
        if (problem) return problem;
      }
    }
  }
  if ("not" in record) {
    const problem = lintSchemaObject(record.not, `${path}.not`);
    if (problem) return problem;
  }
  if ("required" in record && !Array.isArray(record.required)) {
    return `${path}.required: expected an array of names`;
  }
  return null;
}

export function lintCondition(text: string): LintResult {
  let parsed: unknown;
  try {
    parsed = JSON.parse(text);
  } catch (error) {
    return { ok: false, message: `not valid JSON: ${(error as Error).message}` };
  }
  const problem = lintSchemaObject(parsed, "$");
  return problem ? { ok: false, message: problem } : { ok: true, message: "condition looks valid" };
}
