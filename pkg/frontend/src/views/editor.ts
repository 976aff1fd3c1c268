// Contestation editor: guarded edits over the shared artifacts. Nothing is
// applied optimistically; an edit only lands when the server acknowledges
// it with a new revision, and rejections surface the server's invariant
// message verbatim. Every submission requires a justification, and after a
// commit the open case is re-inferred to show a before/after score diff.

import type { ApiClient } from "../api";
import { ApiError } from "../api";
import { lintCondition } from "../conditions";
import type { Store } from "../state";
import type { ContestEdit, GeneralQbafPayload, InferencePayload } from "../types";

export class EditorView {
  readonly element: HTMLElement;
  /** Handle to the most recent submission, so tests and callers can await
   * button-triggered edits. */
  lastSubmission: Promise<boolean> | null = null;
  private optionSelect: HTMLSelectElement;
  private argumentsHost: HTMLElement;
  private schemaHost: HTMLElement;
  private messageHost: HTMLElement;
  private diffHost: HTMLElement;
  private justificationInput: HTMLInputElement;

  constructor(
    private api: ApiClient,
    private store: Store,
    private refreshArtifacts: () => Promise<void>,
  ) {
    this.element = document.createElement("section");
    this.element.className = "editor-view";

    const justificationRow = document.createElement("div");
    const label = document.createElement("label");
    label.textContent = "Justification (required for every edit): ";
    this.justificationInput = document.createElement("input");
    this.justificationInput.size = 60;
    this.justificationInput.placeholder = "why this change is right";
    label.appendChild(this.justificationInput);
    justificationRow.appendChild(label);

    this.messageHost = document.createElement("div");
    this.diffHost = document.createElement("div");

    this.optionSelect = document.createElement("select");
    this.optionSelect.addEventListener("change", () => this.renderArguments());
    this.argumentsHost = document.createElement("div");
    this.schemaHost = document.createElement("div");

    const optionLabel = document.createElement("label");
    optionLabel.textContent = "Option: ";
    optionLabel.appendChild(this.optionSelect);

    this.element.append(
      justificationRow,
      this.messageHost,
      this.diffHost,
      optionLabel,
      this.argumentsHost,
      this.schemaHost,
    );
    this.render();
  }

  render(): void {
    const { qbafs } = this.store.get();
    const selected = this.optionSelect.value;
    this.optionSelect.innerHTML = "";
    for (const framework of qbafs) {
      const option = document.createElement("option");
      option.value = framework.option.id;
      option.textContent = framework.option.name;
      this.optionSelect.appendChild(option);
    }
    if (selected && qbafs.some((q) => q.option.id === selected)) {
      this.optionSelect.value = selected;
    }
    this.renderArguments();
    this.renderSchemaEditor();
  }

  private general(): GeneralQbafPayload | undefined {
    return this.store.generalFor(this.optionSelect.value);
  }

  private showMessage(text: string, kind: "error" | "ok"): void {
    this.messageHost.innerHTML = "";
    const box = document.createElement("div");
    box.className = kind === "error" ? "banner error" : "banner stale";
    box.textContent = text;
    this.messageHost.appendChild(box);
  }

  /** Single gate for every mutation: justification check, server round
   * trip, artifact refresh, and the before/after re-inference diff. */
  submitEdit(edit: ContestEdit): Promise<boolean> {
    this.lastSubmission = this.runEdit(edit);
    return this.lastSubmission;
  }

  private async runEdit(edit: ContestEdit): Promise<boolean> {
    const justification = this.justificationInput.value.trim();
    if (!justification) {
      this.showMessage("A justification is required before submitting an edit.", "error");
      return false;
    }
    const before = this.store.get().lastInference;
    try {
      const { revision } = await this.api.contest(edit, justification);
      this.store.update({ revision, staleSince: null });
      await this.refreshArtifacts();
      this.render();
      this.showMessage(`Edit applied; store is now at revision ${revision}.`, "ok");
      await this.showDiffAfterEdit(before);
      return true;
    } catch (error) {
      if (error instanceof ApiError) {
        this.showMessage(`Edit rejected (${error.status}): ${error.message}`, "error");
      } else {
        this.showMessage(String(error), "error");
      }
      return false;
    }
  }

  private async showDiffAfterEdit(before: InferencePayload | null): Promise<void> {
    const { lastVignette } = this.store.get();
    if (!before || !lastVignette) return;
    const after = await this.api.infer({ case_text: lastVignette });
    this.store.update({ lastInference: after, revision: after.revision });
    this.renderDiff(before, after);
  }

  renderDiff(before: InferencePayload, after: InferencePayload): void {
    this.diffHost.innerHTML = "";
    const heading = document.createElement("h3");
    heading.textContent = "Open case, before / after this edit";
    const table = document.createElement("table");
    table.className = "scores diff-table";
    const head = table.createTHead().insertRow();
    for (const title of ["Option", "Before", "After"]) {
      const cell = document.createElement("th");
      cell.textContent = title;
      head.appendChild(cell);
    }
    const beforeScores = new Map(before.results.map((r) => [r.option.id, r.score]));
    const body = table.createTBody();
    for (const result of after.results) {
      const row = body.insertRow();
      row.dataset.optionId = result.option.id;
      row.insertCell().textContent = result.option.name;
      const old = beforeScores.get(result.option.id);
      const beforeCell = row.insertCell();
      beforeCell.className = "score diff-before";
      beforeCell.textContent = old === undefined ? "-" : String(old);
      const afterCell = row.insertCell();
      afterCell.className = "score diff-after";
      afterCell.textContent = String(result.score);
      if (old !== undefined && result.score < old) afterCell.classList.add("worse");
      if (old !== undefined && result.score > old) afterCell.classList.add("better");
    }
    this.diffHost.append(heading, table);
    const params = document.createElement("div");
    params.className = "params-panel";
    params.textContent = `Re-extracted parameters: ${JSON.stringify(after.params.values)}`;
    this.diffHost.appendChild(params);
  }

  private renderArguments(): void {
    this.argumentsHost.innerHTML = "";
    const general = this.general();
    if (!general) return;
    for (const argument of general.arguments) {
      this.argumentsHost.appendChild(this.renderArgumentEditor(general, argument.id));
    }
    this.argumentsHost.appendChild(this.renderAddArgumentForm(general));
  }

  private renderArgumentEditor(general: GeneralQbafPayload, argumentId: string): HTMLElement {
    const argument = general.arguments.find((a) => a.id === argumentId)!;
    const card = document.createElement("div");
    card.className = "editor-argument";
    card.dataset.argumentId = argument.id;

    const title = document.createElement("div");
    title.textContent = `${argument.id === general.root ? "root: " : ""}${argument.text}`;
    card.appendChild(title);

    const scoreRow = document.createElement("div");
    scoreRow.className = "row";
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.value = String(argument.base_score);
    const numeric = document.createElement("input");
    numeric.type = "number";
    numeric.step = "0.01";
    numeric.className = "base-score";
    numeric.value = String(argument.base_score);
    slider.addEventListener("input", () => (numeric.value = slider.value));
    numeric.addEventListener("input", () => (slider.value = numeric.value));
    const apply = document.createElement("button");
    apply.textContent = "Set base score";
    apply.className = "primary set-base-score";
    apply.addEventListener("click", () =>
      void this.submitEdit({
        kind: "set_base_score",
        option: general.option.id,
        argument: argument.id,
        value: Number(numeric.value),
      }),
    );
    scoreRow.append(slider, numeric, apply);
    card.appendChild(scoreRow);

    if (argument.id !== general.root) {
      const conditionArea = document.createElement("textarea");
      conditionArea.className = "condition";
      conditionArea.value = JSON.stringify(argument.condition ?? {}, null, 1);
      const validity = document.createElement("div");
      validity.className = "condition-validity";
      const lint = () => {
        const result = lintCondition(conditionArea.value);
        validity.textContent = result.message;
        validity.className = `condition-validity ${result.ok ? "ok" : "bad"}`;
        return result.ok;
      };
      conditionArea.addEventListener("input", lint);
      lint();

      const conditionRow = document.createElement("div");
      conditionRow.className = "row";
      const saveCondition = document.createElement("button");
      saveCondition.textContent = "Replace condition";
      saveCondition.className = "primary replace-condition";
      saveCondition.addEventListener("click", () => {
        if (!lint()) return;
        void this.submitEdit({
          kind: "replace_condition",
          option: general.option.id,
          argument: argument.id,
          condition: JSON.parse(conditionArea.value),
        });
      });
      const remove = document.createElement("button");
      remove.textContent = "Remove argument";
      remove.className = "remove-argument";
      remove.addEventListener("click", () =>
        void this.submitEdit({
          kind: "remove_argument",
          option: general.option.id,
          argument: argument.id,
        }),
      );
      conditionRow.append(saveCondition, remove);
      card.append(conditionArea, validity, conditionRow);
    }
    return card;
  }

  private renderAddArgumentForm(general: GeneralQbafPayload): HTMLElement {
    const card = document.createElement("div");
    card.className = "editor-argument add-argument";
    const heading = document.createElement("h4");
    heading.textContent = "Add argument";
    card.appendChild(heading);

    const parent = document.createElement("select");
    parent.className = "parent";
    for (const argument of general.arguments) {
      const option = document.createElement("option");
      option.value = argument.id;
      option.textContent = argument.id;
      parent.appendChild(option);
    }
    const polarity = document.createElement("select");
    polarity.className = "polarity";
    for (const kind of ["attack", "support"]) {
      const option = document.createElement("option");
      option.value = kind;
      option.textContent = kind;
      polarity.appendChild(option);
    }
    const text = document.createElement("input");
    text.placeholder = "argument text";
    text.className = "text";
    text.size = 50;
    const score = document.createElement("input");
    score.type = "number";
    score.step = "0.01";
    score.value = "0.5";
    score.className = "base-score";
    const nl = document.createElement("input");
    nl.placeholder = "natural-language condition";
    nl.className = "nl-condition";
    nl.size = 50;
    const condition = document.createElement("textarea");
    condition.className = "condition";
    condition.value = "{}";
    const submit = document.createElement("button");
    submit.className = "primary submit-add";
    submit.textContent = "Add argument";
    submit.addEventListener("click", () =>
      void this.submitEdit({
        kind: "add_argument",
        option: general.option.id,
        parent: parent.value,
        polarity: polarity.value,
        text: text.value,
        base_score: Number(score.value),
        nl_condition: nl.value,
        condition: JSON.parse(condition.value || "{}"),
      }),
    );
    const row1 = document.createElement("div");
    row1.className = "row";
    row1.append(parent, polarity, score);
    const row2 = document.createElement("div");
    row2.className = "row";
    row2.append(text);
    const row3 = document.createElement("div");
    row3.className = "row";
    row3.append(nl);
    card.append(row1, row2, row3, condition, submit);
    return card;
  }

  private renderSchemaEditor(): void {
    this.schemaHost.innerHTML = "";
    const heading = document.createElement("h3");
    heading.textContent = "Parameter catalogue";
    this.schemaHost.appendChild(heading);
    const { schema } = this.store.get();
    for (const [name, definition] of Object.entries(schema)) {
      const card = document.createElement("div");
      card.className = "editor-argument param-def";
      card.dataset.paramName = name;
      const title = document.createElement("div");
      title.textContent = `${name} (${definition.type})`;
      const description = document.createElement("input");
      description.className = "description";
      description.size = 70;
      description.value = definition.description;
      const save = document.createElement("button");
      save.className = "primary save-description";
      save.textContent = "Save description";
      save.addEventListener("click", () =>
        void this.submitEdit({
          kind: "edit_param_description",
          name,
          description: description.value,
        }),
      );
      const row = document.createElement("div");
      row.className = "row";
      row.append(description, save);
      card.append(title, row);
      this.schemaHost.appendChild(card);
    }
  }
}
