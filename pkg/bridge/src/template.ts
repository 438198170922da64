/**
 * Chain schedule and prompt rendering.
 *
 * This is a byte-for-byte port of the consumer side's template code:
 * the rendered strings must compare equal across both components for
 * any (text, depth, iterations), so every space and period here is
 * load-bearing.
 */

export interface ChainSchedule {
  levels: number[];
  depth: number;
  iterations: number;
}

export const DEFAULT_ITERATIONS = 5;

export function buildSchedule(depth: number, iterations: number = DEFAULT_ITERATIONS): ChainSchedule {
  if (!Number.isInteger(depth) || depth < 1) {
    throw new RangeError(`depth must be >= 1, got ${depth}`);
  }
  if (!Number.isInteger(iterations) || iterations < 0) {
    throw new RangeError(`iterations must be >= 0, got ${iterations}`);
  }
  const levels: number[] = [];
  for (let v = 1; v <= depth; v++) levels.push(v);
  if (iterations >= 1) {
    for (let v = depth - 1; v >= 1; v--) levels.push(v);
    for (let k = 0; k < iterations - 1; k++) {
      for (let v = depth; v >= 1; v--) levels.push(v);
    }
  }
  return { levels, depth, iterations };
}

export function scheduleLength(schedule: ChainSchedule): number {
  return schedule.levels.length;
}

export function renderTemplate(text: string, schedule: ChainSchedule, maskToken = "[MASK]"): string {
  if (!maskToken) {
    throw new RangeError("maskToken must be non-empty");
  }
  const parts: string[] = [`${text}. It was `];
  for (const level of schedule.levels) {
    parts.push(`${level} level: ${maskToken} `);
  }
  const rendered = parts.join("");
  return rendered.slice(0, -1) + ".";
}
