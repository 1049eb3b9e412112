/**
 * The slash path grammar, bit-exact with the wire format:
 *
 *     0/pistil/1/petal:0/area        a bare area
 *     0/pistil/area#{0,2}            a selection within an area
 */

export const PISTIL = -1;

export type Step = { flower: number; part: number }; // part: PISTIL or petal index

export interface TreePath {
  steps: Step[];
  selection: number[] | null; // sorted; null = bare area
}

export function parsePath(text: string): TreePath {
  const tokens = text.trim().split("/");
  const steps: Step[] = [];
  let i = 0;
  while (i < tokens.length && /^[0-9]+$/.test(tokens[i])) {
    const flower = parseInt(tokens[i], 10);
    const part = tokens[i + 1];
    if (part === "pistil") {
      steps.push({ flower, part: PISTIL });
    } else if (part !== undefined && /^petal:[0-9]+$/.test(part)) {
      steps.push({ flower, part: parseInt(part.slice(6), 10) });
    } else {
      throw new Error(`bad step ${part} in ${text}`);
    }
    i += 2;
  }
  if (i !== tokens.length - 1) throw new Error(`malformed path ${text}`);
  const term = tokens[i];
  if (term === "area") return { steps, selection: null };
  const m = term.match(/^area#\{([0-9,]*)\}$/);
  if (!m) throw new Error(`bad terminal ${term} in ${text}`);
  const selection = m[1] === "" ? [] : m[1].split(",").map((s) => parseInt(s, 10));
  return { steps, selection: selection.sort((a, b) => a - b) };
}

export function serializePath(p: TreePath): string {
  const parts: string[] = [];
  for (const s of p.steps) {
    parts.push(String(s.flower));
    parts.push(s.part === PISTIL ? "pistil" : `petal:${s.part}`);
  }
  parts.push(p.selection === null ? "area" : `area#{${p.selection.join(",")}}`);
  return parts.join("/");
}

/** The area that owns a flower selection (flower paths select one index). */
export function areaOf(path: string): string {
  const p = parsePath(path);
  return serializePath({ steps: p.steps, selection: null });
}

/** Parent flower path of an area path ("" for the top area). */
export function parentFlower(areaPath: string): string | null {
  const p = parsePath(areaPath);
  if (p.steps.length === 0) return null;
  const last = p.steps[p.steps.length - 1];
  return serializePath({
    steps: p.steps.slice(0, -1),
    selection: [last.flower],
  });
}
