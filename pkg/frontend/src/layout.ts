/**
 * View tree and box layout, DOM-free.
 *
 * The server's flat node list (paths, polarity, texts) is rebuilt into the
 * nesting structure, then measured bottom-up: a flower is its pistil garden
 * beside its petals, petals fanned radially when there are at most five and
 * stacked vertically beyond that.  Every node gets exactly one box, whose
 * data-path drives selection in the renderer.
 */

import { WireNode } from "./protocol.js";
import { areaOf, parsePath, serializePath, PISTIL } from "./pathgrammar.js";

export interface ViewNode {
  path: string;
  kind: "area" | "flower" | "atom" | "pistil" | "petal";
  polarity: "positive" | "negative";
  label: string;          // atom text or binder list
  formula?: string;
  children: ViewNode[];
  // filled by layout:
  x: number;
  y: number;
  w: number;
  h: number;
}

const ATOM_W = 13;        // per character
const ATOM_H = 26;
const PAD = 10;
const GAP = 8;
export const RADIAL_LIMIT = 5;

function mk(path: string, kind: ViewNode["kind"], polarity: ViewNode["polarity"],
            label = "", formula?: string): ViewNode {
  return { path, kind, polarity, label, formula, children: [], x: 0, y: 0, w: 0, h: 0 };
}

/** Rebuild the nesting from the flat wire list. */
export function buildTree(nodes: WireNode[]): ViewNode {
  const areas = new Map<string, ViewNode>();
  const flowers = new Map<string, { node: ViewNode; wire: WireNode }>();
  for (const n of nodes) {
    if (n.kind === "area") {
      areas.set(n.path, mk(n.path, "area", n.polarity));
    }
  }
  for (const n of nodes) {
    if (n.kind === "area") continue;
    const v = mk(n.path, n.kind === "atom" ? "atom" : "flower", n.polarity,
                 n.kind === "atom" ? n.text ?? "" : "", n.formula);
    flowers.set(n.path, { node: v, wire: n });
    const host = areas.get(areaOf(n.path));
    if (!host) throw new Error(`no area for ${n.path}`);
    host.children.push(v);
  }
  // attach pistil/petal areas to their flowers
  for (const [path, area] of areas) {
    const parent = parsePath(path);
    if (parent.steps.length === 0) continue;
    const last = parent.steps[parent.steps.length - 1];
    const ownerPath = serializePath({
      steps: parent.steps.slice(0, -1),
      selection: [last.flower],
    });
    const owner = flowers.get(ownerPath);
    if (!owner) throw new Error(`no flower for area ${path}`);
    const wire = owner.wire;
    if (last.part === PISTIL) {
      const pistil = mk(path, "pistil", area.polarity,
                        (wire.pistil_binders ?? []).join(", "));
      pistil.children = area.children;
      owner.node.children.unshift(pistil);
    } else {
      const petal = mk(path, "petal", area.polarity,
                       (wire.petal_binders?.[last.part] ?? []).join(", "));
      petal.children = area.children;
      owner.node.children.push(petal);
    }
  }
  const root = areas.get("area");
  if (!root) throw new Error("missing top-level area");
  return root;
}

function sized(v: ViewNode, w: number, h: number): void {
  v.w = Math.max(w, 30);
  v.h = Math.max(h, 24);
}

export function measure(v: ViewNode): void {
  for (const c of v.children) measure(c);
  if (v.kind === "atom") {
    sized(v, v.label.length * ATOM_W + 2 * PAD, ATOM_H);
    return;
  }
  if (v.kind === "area" || v.kind === "pistil" || v.kind === "petal") {
    const binderW = v.label ? v.label.length * ATOM_W + PAD : 0;
    const w = v.children.reduce((a, c) => a + c.w + GAP, binderW) + PAD;
    const h = v.children.reduce((a, c) => Math.max(a, c.h), ATOM_H) + 2 * PAD;
    sized(v, Math.max(w, 40), h);
    return;
  }
  // flower: pistil on the left, petals to the right
  const pistil = v.children[0];
  const petals = v.children.slice(1);
  const petalsW = petals.reduce((a, p) => Math.max(a, p.w), 0);
  const petalsH = petals.reduce((a, p) => a + p.h + GAP, -GAP);
  sized(v,
        pistil.w + (petals.length ? petalsW + 3 * GAP : GAP) + 2 * PAD,
        Math.max(pistil.h, Math.max(petalsH, 0)) + 2 * PAD);
}

export function position(v: ViewNode, x: number, y: number): void {
  v.x = x;
  v.y = y;
  if (v.kind === "atom") return;
  if (v.kind === "area" || v.kind === "pistil" || v.kind === "petal") {
    let cx = x + PAD + (v.label ? v.label.length * ATOM_W + PAD : 0);
    for (const c of v.children) {
      position(c, cx, y + (v.h - c.h) / 2);
      cx += c.w + GAP;
    }
    return;
  }
  const pistil = v.children[0];
  const petals = v.children.slice(1);
  position(pistil, x + PAD, y + (v.h - pistil.h) / 2);
  const radial = petals.length <= RADIAL_LIMIT;
  let py = y + PAD;
  petals.forEach((p, i) => {
    // radial: a slight horizontal fan around the vertical middle; beyond the
    // limit everything stacks straight to stay readable
    const mid = (petals.length - 1) / 2;
    const fan = radial ? Math.abs(i - mid) * GAP : 0;
    position(p, x + PAD + pistil.w + 2 * GAP + fan, py);
    py += p.h + GAP;
  });
}

export function layout(nodes: WireNode[]): ViewNode {
  const tree = buildTree(nodes);
  measure(tree);
  position(tree, 4, 4);
  return tree;
}

export function boxes(v: ViewNode): ViewNode[] {
  return [v, ...v.children.flatMap(boxes)];
}

/** Axis-aligned overlap among sibling boxes (diagnostic for layout tests). */
export function siblingsOverlap(v: ViewNode): boolean {
  for (let i = 0; i < v.children.length; i++) {
    for (let j = i + 1; j < v.children.length; j++) {
      const a = v.children[i];
      const b = v.children[j];
      if (a.x < b.x + b.w && b.x < a.x + a.w && a.y < b.y + b.h && b.y < a.y + a.h) {
        return true;
      }
    }
  }
  return v.children.some(siblingsOverlap);
}
