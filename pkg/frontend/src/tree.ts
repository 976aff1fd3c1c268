// Renders one option's argumentation tree. The layout comes from the
// general framework; the inference result decides which nodes are retained
// (with their server-computed final strengths) and which are drawn dashed
// as removed, together with the condition that failed.

import type { GeneralQbafPayload, ResultPayload } from "./types";

interface ChildEdge {
  id: string;
  polarity: "attack" | "support";
}

function childrenOf(general: GeneralQbafPayload, parent: string): ChildEdge[] {
  const edges: ChildEdge[] = [];
  for (const [source, target] of general.attacks) {
    if (target === parent) edges.push({ id: source, polarity: "attack" });
  }
  for (const [source, target] of general.supports) {
    if (target === parent) edges.push({ id: source, polarity: "support" });
  }
  return edges;
}

function badge(label: string, value: string, extraClass = ""): HTMLElement {
  const span = document.createElement("span");
  span.className = `badge ${extraClass}`.trim();
  span.textContent = `${label} ${value}`;
  return span;
}

export function renderResultTree(
  general: GeneralQbafPayload,
  result: ResultPayload,
): HTMLElement {
  const byId = new Map(general.arguments.map((a) => [a.id, a]));
  const removed = new Map(result.removed.map((r) => [r.id, r]));

  function renderNode(id: string, polarity: "root" | "attack" | "support"): HTMLElement {
    const item = document.createElement("li");
    const argument = byId.get(id);
    if (!argument) return item;
    const removal = removed.get(id);
    item.className = polarity === "root" ? "root" : polarity;
    if (removal) item.classList.add("removed");
    item.dataset.argumentId = id;

    const line = document.createElement("div");
    line.className = "argument";
    if (polarity !== "root") {
      const edge = document.createElement("span");
      edge.className = "edge-label";
      edge.textContent = polarity === "attack" ? "attacks" : "supports";
      line.appendChild(edge);
    }
    const text = document.createElement("span");
    text.className = "text";
    text.textContent = argument.text;
    line.appendChild(text);
    line.appendChild(badge("base", String(argument.base_score)));
    const strength = result.strengths[id];
    if (!removal && strength !== undefined) {
      line.appendChild(badge("strength", String(strength), "strength"));
    }
    if (removal) {
      line.appendChild(badge("removed", removal.reason));
    }
    item.appendChild(line);

    if (removal?.reason === "condition-unsatisfied" && removal.condition !== undefined) {
      const failed = document.createElement("div");
      failed.className = "failed-condition";
      failed.textContent = `failed condition: ${JSON.stringify(removal.condition)}`;
      item.appendChild(failed);
    }

    const children = childrenOf(general, id);
    if (children.length > 0) {
      const list = document.createElement("ul");
      for (const child of children) {
        list.appendChild(renderNode(child.id, child.polarity));
      }
      item.appendChild(list);
    }
    return item;
  }

  const tree = document.createElement("ul");
  tree.className = "qbaf-tree";
  tree.appendChild(renderNode(general.root, "root"));
  return tree;
}
