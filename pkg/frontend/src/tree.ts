// Collapsible rendering of an estimated context tree.  Leaves are the
// server-reported contexts; internal nodes are derived by walking suffixes.
// Context strings are oldest-first, so the children of a node prepend one
// symbol: the parents of "01" are "1" then the root.

import type { EstimatedTree } from "./types.js";

interface TreeNode {
  label: string;
  isContext: boolean;
  q: number[] | null;
  children: TreeNode[];
}

export function buildTree(estimate: EstimatedTree): TreeNode {
  const contexts = new Set(estimate.contexts);
  const alphabet = alphabetSize(estimate);

  function make(label: string): TreeNode {
    const isContext = contexts.has(label === "eps" ? "eps" : label);
    const node: TreeNode = {
      label,
      isContext,
      q: isContext ? (estimate.q[label] ?? null) : null,
      children: [],
    };
    if (isContext) return node;
    const suffix = label === "eps" ? "" : label;
    for (let b = 0; b < alphabet; b += 1) {
      const child = `${b}${suffix}`;
      if (hasDescendantOrSelf(child, contexts, estimate.L)) {
        node.children.push(make(child));
      }
    }
    return node;
  }

  return make("eps");
}

function alphabetSize(estimate: EstimatedTree): number {
  const rows = Object.values(estimate.q);
  return rows.length > 0 ? rows[0].length : 3;
}

function hasDescendantOrSelf(label: string, contexts: Set<string>, maxDepth: number): boolean {
  if (contexts.has(label)) return true;
  if (label.length >= maxDepth) return false;
  return [...contexts].some((c) => c.length > label.length && c.endsWith(label));
}

export function renderTree(estimate: EstimatedTree, doc: Document): HTMLElement {
  const root = buildTree(estimate);
  const container = doc.createElement("div");
  container.className = "context-tree";
  container.dataset.testid = "context-tree";
  container.appendChild(renderNode(root, doc));
  return container;
}

function renderNode(node: TreeNode, doc: Document): HTMLElement {
  if (node.isContext) {
    const leaf = doc.createElement("div");
    leaf.className = "tree-leaf";
    leaf.dataset.context = node.label;
    const q = node.q ? ` [${node.q.map((v) => v.toFixed(2)).join(", ")}]` : "";
    leaf.textContent = `${node.label}${q}`;
    return leaf;
  }
  const details = doc.createElement("details");
  details.className = "tree-branch";
  details.open = true;
  const summary = doc.createElement("summary");
  summary.textContent = node.label;
  details.appendChild(summary);
  for (const child of node.children) {
    details.appendChild(renderNode(child, doc));
  }
  return details;
}

/** Leaf context labels as rendered, for fidelity checks. */
export function renderedLeafContexts(container: HTMLElement): string[] {
  return [...container.querySelectorAll<HTMLElement>(".tree-leaf")].map(
    (el) => el.dataset.context ?? "",
  );
}
