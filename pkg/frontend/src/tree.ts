/** View model for the proof tree: statuses, highlighting, collapsing. */

import type { SessionPayload, TreeNodePayload, TreePayload } from "./types.js";

export const DEFAULT_COLLAPSE_DEPTH = 3;

export interface TreeNodeView {
  id: number;
  label: string;
  /** Constraint name shown on the edge from the parent. */
  edgeLabel: string;
  cssClass: string;
  isQuestion: boolean;
  inCandidate: boolean;
  /** Children are hidden behind an expander when collapsed. */
  collapsed: boolean;
  hiddenCount: number;
  children: TreeNodeView[];
}

export function nodeClass(node: TreeNodePayload): string {
  if (node.status === "symptom") return "symptom";
  if (node.status === "not_symptom" || node.pruned) return "not-symptom";
  if (node.status === "unknown") return "unknown";
  return "untested";
}

function subtreeSize(tree: TreePayload, id: number): number {
  let count = 0;
  const stack = [id];
  while (stack.length > 0) {
    const next = stack.pop()!;
    count += 1;
    stack.push(...tree.nodes[next].children);
  }
  return count;
}

function pathToQuestion(tree: TreePayload, questionId: number | null): Set<number> {
  const onPath = new Set<number>();
  if (questionId === null) return onPath;
  const parent = new Map<number, number>();
  const stack = [tree.root_id];
  while (stack.length > 0) {
    const id = stack.pop()!;
    for (const child of tree.nodes[id].children) {
      parent.set(child, id);
      stack.push(child);
    }
  }
  let cursor: number | undefined = questionId;
  while (cursor !== undefined) {
    onPath.add(cursor);
    cursor = parent.get(cursor);
  }
  return onPath;
}

/**
 * Build the renderable tree.  Subtrees deeper than `collapseDepth` start
 * collapsed unless the user expanded them or they sit on the path to the
 * pending question, whose context the oracle always needs to see.
 */
export function buildTreeView(
  session: SessionPayload,
  expanded: Set<number>,
  collapseDepth: number = DEFAULT_COLLAPSE_DEPTH,
): TreeNodeView {
  const tree = session.tree;
  const questionId = session.question?.node_id ?? null;
  const keepOpen = pathToQuestion(tree, questionId);

  const build = (id: number, depth: number): TreeNodeView => {
    const node = tree.nodes[id];
    const hasChildren = node.children.length > 0;
    const collapsed =
      hasChildren &&
      depth >= collapseDepth &&
      !expanded.has(id) &&
      !keepOpen.has(id);
    return {
      id,
      label: `(${node.var},${node.value})`,
      edgeLabel: node.constraint_label,
      cssClass: nodeClass(node),
      isQuestion: questionId === id,
      inCandidate: node.in_candidate,
      collapsed,
      hiddenCount: collapsed ? subtreeSize(tree, id) - 1 : 0,
      children: collapsed
        ? []
        : node.children.map((child) => build(child, depth + 1)),
    };
  };
  return build(tree.root_id, 0);
}

export function toggleExpanded(expanded: Set<number>, id: number): Set<number> {
  const next = new Set(expanded);
  if (next.has(id)) next.delete(id);
  else next.add(id);
  return next;
}
