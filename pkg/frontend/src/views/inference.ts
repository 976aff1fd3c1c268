// Case inference screen: submit a vignette, inspect extracted parameters
// (editable for what-if re-inference), ranked option scores, and each
// option's tree with pruned arguments drawn dashed.

import type { ApiClient } from "../api";
import { ApiError } from "../api";
import type { Store } from "../state";
import { renderResultTree } from "../tree";
import type { CaseParamsPayload, InferencePayload, ParamValue } from "../types";

export function renderScoresTable(
  payload: InferencePayload,
  onSelect?: (optionId: string) => void,
): HTMLTableElement {
  const table = document.createElement("table");
  table.className = "scores";
  const head = table.createTHead().insertRow();
  for (const title of ["Option", "Score"]) {
    const cell = document.createElement("th");
    cell.textContent = title;
    head.appendChild(cell);
  }
  const body = table.createTBody();
  const ranked = [...payload.results].sort(
    (a, b) => b.score - a.score || a.option.id.localeCompare(b.option.id),
  );
  for (const result of ranked) {
    const row = body.insertRow();
    row.dataset.optionId = result.option.id;
    row.insertCell().textContent = result.option.name;
    const scoreCell = row.insertCell();
    scoreCell.className = "score";
    // rendered verbatim: the service is the single source of truth
    scoreCell.textContent = String(result.score);
    if (onSelect) {
      row.style.cursor = "pointer";
      row.addEventListener("click", () => onSelect(result.option.id));
    }
  }
  return table;
}

export function renderParamsPanel(
  params: CaseParamsPayload,
  onReinfer?: (edited: Record<string, ParamValue | null>) => void,
): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "params-panel";
  const heading = document.createElement("h3");
  heading.textContent = "Extracted case parameters";
  panel.appendChild(heading);

  const inputs = new Map<string, HTMLInputElement>();
  for (const [name, value] of Object.entries(params.values)) {
    const row = document.createElement("div");
    const label = document.createElement("label");
    label.textContent = `${name}: `;
    const input = document.createElement("input");
    input.name = name;
    input.value = String(value);
    inputs.set(name, input);
    label.appendChild(input);
    row.appendChild(label);
    panel.appendChild(row);
  }
  for (const name of params.unknown) {
    const row = document.createElement("div");
    row.className = "unknown";
    row.textContent = `${name}: unknown (mentioned but undetermined)`;
    panel.appendChild(row);
  }

  if (onReinfer) {
    const button = document.createElement("button");
    button.className = "primary";
    button.textContent = "Re-infer with edited parameters";
    button.addEventListener("click", () => {
      const edited: Record<string, ParamValue | null> = {};
      for (const [name, input] of inputs) {
        edited[name] = parseParamInput(input.value, params.values[name]);
      }
      onReinfer(edited);
    });
    panel.appendChild(button);
  }
  return panel;
}

function parseParamInput(text: string, previous: ParamValue | undefined): ParamValue {
  if (typeof previous === "boolean") return text.trim().toLowerCase() === "true";
  if (typeof previous === "number") {
    const parsed = Number(text);
    return Number.isNaN(parsed) ? text : parsed;
  }
  return text;
}

export class InferenceView {
  readonly element: HTMLElement;
  /** Handle to the most recent request, so form-triggered inference can be
   * awaited by tests and callers. */
  lastRequest: Promise<void> | null = null;
  private resultsHost: HTMLElement;
  private errorHost: HTMLElement;
  private selectedOption: string | null = null;

  constructor(
    private api: ApiClient,
    private store: Store,
  ) {
    this.element = document.createElement("section");
    this.element.className = "inference-view";

    const form = document.createElement("form");
    const textarea = document.createElement("textarea");
    textarea.className = "vignette";
    textarea.placeholder = "Describe the case, e.g. a 75-year-old patient with KPS 90 ...";
    const submit = document.createElement("button");
    submit.className = "primary";
    submit.type = "submit";
    submit.textContent = "Infer recommendations";
    form.append(textarea, submit);

    this.errorHost = document.createElement("div");
    this.resultsHost = document.createElement("div");
    this.element.append(form, this.errorHost, this.resultsHost);

    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const vignette = textarea.value.trim();
      if (!vignette) {
        this.showError("Please enter a case description first.", "form-error");
        return;
      }
      void this.infer({ case_text: vignette }, vignette);
    });
  }

  private showError(message: string, className = "banner error"): void {
    this.errorHost.innerHTML = "";
    const box = document.createElement("div");
    box.className = className;
    box.textContent = message;
    this.errorHost.appendChild(box);
  }

  infer(body: Parameters<ApiClient["infer"]>[0], vignette?: string): Promise<void> {
    this.lastRequest = this.runInfer(body, vignette);
    return this.lastRequest;
  }

  private async runInfer(
    body: Parameters<ApiClient["infer"]>[0],
    vignette?: string,
  ): Promise<void> {
    this.errorHost.innerHTML = "";
    try {
      const payload = await this.api.infer(body);
      this.store.observeRevision(payload.revision);
      this.store.update({
        lastInference: payload,
        lastVignette: vignette ?? this.store.get().lastVignette,
      });
      this.renderResults(payload);
    } catch (error) {
      if (error instanceof ApiError) {
        const revision = this.store.get().revision;
        this.showError(`Server rejected the request (revision ${revision}): ${error.message}`);
      } else {
        this.showError(String(error));
      }
    }
  }

  renderResults(payload: InferencePayload): void {
    this.resultsHost.innerHTML = "";
    this.resultsHost.appendChild(
      renderParamsPanel(payload.params, (edited) => void this.infer({ params: edited })),
    );
    this.resultsHost.appendChild(
      renderScoresTable(payload, (optionId) => {
        this.selectedOption = optionId;
        this.renderTrees(payload);
      }),
    );
    const trees = document.createElement("div");
    trees.className = "trees";
    this.resultsHost.appendChild(trees);
    this.renderTrees(payload);
    for (const [option, message] of payload.errors) {
      this.showError(`${option}: ${message}`);
    }
  }

  private renderTrees(payload: InferencePayload): void {
    const host = this.resultsHost.querySelector(".trees");
    if (!host) return;
    host.innerHTML = "";
    for (const result of payload.results) {
      if (this.selectedOption && result.option.id !== this.selectedOption) continue;
      const general = this.store.generalFor(result.option.id);
      if (!general) continue;
      const block = document.createElement("section");
      block.className = "option-block";
      const heading = document.createElement("h3");
      heading.textContent = `${result.option.name} — score ${String(result.score)}`;
      block.appendChild(heading);
      block.appendChild(renderResultTree(general, result));
      host.appendChild(block);
    }
  }
}
