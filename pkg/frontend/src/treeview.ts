/** Pure projection from a tree snapshot to something a pane can draw.
 *
 * No DOM, no dates, no randomness: the same snapshot always yields the
 * same view model, and the snapshot itself is never mutated. A snapshot
 * that fails the structural checks yields null, which the pane renders
 * as "tree unavailable".
 */

import type { SnapshotNode, TreeSnapshot } from "./types.js";

export type Badge = "success" | "exhausted" | null;

export interface ViewNode {
  id: number;
  glyph: string;
  kind: string;
  label: string;
  badge: Badge;
  current: boolean;
  /** Task name a Ref node points at, otherwise null. */
  refTarget: string | null;
  /** Indentation level; the root sits at 0. */
  depth: number;
}

export interface ViewEdge {
  from: number;
  to: number;
  dashed: boolean;
}

export interface TreeViewModel {
  /** Depth-first pre-order, ready to draw as an indented list. */
  nodes: ViewNode[];
  edges: ViewEdge[];
  /** Paused tasks, oldest first. */
  stack: string[];
  currentId: number | null;
}

const GLYPHS: Record<string, string> = {
  Root: "●",
  TaskRoot: "◉",
  And: "∧",
  Or: "∨",
  Leaf: "□",
  Ref: "⇢",
};

function isNode(value: unknown): value is SnapshotNode {
  if (typeof value !== "object" || value === null) return false;
  const node = value as Record<string, unknown>;
  return (
    typeof node.id === "number" &&
    typeof node.kind === "string" &&
    typeof node.label === "string" &&
    typeof node.success === "boolean" &&
    typeof node.exhausted === "boolean" &&
    typeof node.current === "boolean" &&
    Array.isArray(node.children) &&
    node.children.every((c) => typeof c === "number")
  );
}

export function renderTree(snapshot: TreeSnapshot): TreeViewModel | null {
  if (typeof snapshot !== "object" || snapshot === null) return null;
  const { nodes, stack } = snapshot as { nodes?: unknown; stack?: unknown };
  if (!Array.isArray(nodes) || nodes.length === 0 || !nodes.every(isNode)) return null;
  if (!Array.isArray(stack) || !stack.every((t) => typeof t === "string")) return null;

  const byId = new Map<number, SnapshotNode>();
  for (const node of nodes) {
    if (byId.has(node.id) || !(node.kind in GLYPHS)) return null;
    byId.set(node.id, node);
  }

  const childIds = new Set<number>();
  for (const node of nodes) {
    for (const child of node.children) {
      if (!byId.has(child) || childIds.has(child)) return null; // dangling or shared child
      childIds.add(child);
    }
  }
  const roots = nodes.filter((n) => !childIds.has(n.id)).sort((a, b) => a.id - b.id);
  const currents = nodes.filter((n) => n.current);
  if (currents.length > 1) return null;

  const viewNodes: ViewNode[] = [];
  const edges: ViewEdge[] = [];
  const visited = new Set<number>();

  const walk = (id: number, depth: number): void => {
    const node = byId.get(id)!;
    visited.add(id);
    viewNodes.push({
      id: node.id,
      glyph: GLYPHS[node.kind],
      kind: node.kind,
      label: node.label,
      badge: node.success ? "success" : node.exhausted ? "exhausted" : null,
      current: node.current,
      refTarget: node.kind === "Ref" ? node.ref : null,
      depth,
    });
    for (const child of node.children) {
      edges.push({ from: node.id, to: child, dashed: false });
      walk(child, depth + 1);
    }
  };
  for (const root of roots) walk(root.id, 0);
  if (visited.size !== nodes.length) return null; // unreachable nodes

  // a Ref whose target task has started gets a dashed edge to that TaskRoot
  for (const node of nodes) {
    if (node.kind !== "Ref" || typeof node.ref !== "string") continue;
    const target = nodes.find((n) => n.kind === "TaskRoot" && n.label === node.ref);
    if (target) edges.push({ from: node.id, to: target.id, dashed: true });
  }

  return {
    nodes: viewNodes,
    edges,
    stack: [...stack],
    currentId: currents.length === 1 ? currents[0].id : null,
  };
}
