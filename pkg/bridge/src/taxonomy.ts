/**
 * Minimal taxonomy reader. Label ids are positions in the JSON `labels`
 * list — the same assignment the consumer uses, which is what keeps the
 * emission matrix columns aligned between components.
 */
import { readFileSync } from "node:fs";

import { ShapeError } from "./errors.js";

export interface LabelNode {
  id: number;
  name: string;
  level: number;
  parent: number | null;
}

export interface Taxonomy {
  name: string;
  nodes: LabelNode[];
  depth: number;
  m: number;
}

export function loadTaxonomy(path: string): Taxonomy {
  let doc: unknown;
  try {
    doc = JSON.parse(readFileSync(path, "utf-8"));
  } catch (err) {
    throw new ShapeError(`cannot read taxonomy ${path}: ${(err as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null || !Array.isArray((doc as any).labels)) {
    throw new ShapeError("taxonomy document must be an object with a 'labels' list");
  }
  const raw = (doc as any).labels as any[];
  if (raw.length === 0) {
    throw new ShapeError("taxonomy 'labels' must be non-empty");
  }
  const byName = new Map<string, number>();
  const nodes: LabelNode[] = [];
  raw.forEach((item, pos) => {
    if (typeof item !== "object" || item === null) {
      throw new ShapeError(`label entry ${pos} is not an object`);
    }
    const { name, level, parent = null } = item;
    if (typeof name !== "string" || name.length === 0) {
      throw new ShapeError(`label entry ${pos} has no usable 'name'`);
    }
    if (!Number.isInteger(level) || level < 1) {
      throw new ShapeError(`label '${name}' has invalid level ${level}`);
    }
    if (byName.has(name)) {
      throw new ShapeError(`duplicate label name '${name}'`);
    }
    byName.set(name, pos);
    let pid: number | null = null;
    if (level > 1) {
      if (typeof parent !== "string" || !byName.has(parent)) {
        throw new ShapeError(`label '${name}' at level ${level} needs a known parent`);
      }
      pid = byName.get(parent)!;
    } else if (parent !== null) {
      throw new ShapeError(`level-1 label '${name}' must have null parent`);
    }
    nodes.push({ id: pos, name, level, parent: pid });
  });
  const depth = Math.max(...nodes.map((n) => n.level));
  return { name: String((doc as any).name ?? ""), nodes, depth, m: nodes.length };
}
