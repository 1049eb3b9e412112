import { test } from "node:test";
import assert from "node:assert/strict";

import { boxes, layout, siblingsOverlap, RADIAL_LIMIT } from "../src/layout.js";
import { renderSVG } from "../src/render.js";
import { WireNode } from "../src/protocol.js";

function area(path: string, size: number): WireNode {
  return { path, kind: "area", polarity: "positive", size };
}

function flower(path: string, petals: number, pistilBinders: string[] = []): WireNode {
  return {
    path, kind: "flower", polarity: "positive", text: `[|>]`,
    petals, pistil_binders: pistilBinders,
    petal_binders: Array.from({ length: petals }, () => []),
  };
}

function atom(path: string, text: string): WireNode {
  return { path, kind: "atom", polarity: "positive", text, petals: 0 };
}

function simpleState(): WireNode[] {
  // [ a |> b ] beside an atom: one flower with pistil and one petal
  return [
    area("area", 2),
    atom("area#{0}", "q(u)"),
    flower("area#{1}", 1),
    area("1/pistil/area", 1),
    atom("1/pistil/area#{0}", "a"),
    area("1/petal:0/area", 1),
    atom("1/petal:0/area#{0}", "b"),
  ];
}

test("every kernel node gets exactly one clickable region", () => {
  const nodes = simpleState();
  const tree = layout(nodes);
  const svg = renderSVG(tree);
  const regions = svg.match(/data-path="/g) ?? [];
  assert.equal(regions.length, nodes.length);
  for (const n of nodes) {
    assert.ok(svg.includes(`data-path="${n.path}"`), n.path);
  }
});

test("nesting depth shows up as box containment", () => {
  const tree = layout(simpleState());
  const all = boxes(tree);
  const outer = all.find((b) => b.path === "area#{1}")!;
  const inner = all.find((b) => b.path === "1/pistil/area#{0}")!;
  assert.ok(inner.x >= outer.x && inner.y >= outer.y);
  assert.ok(inner.x + inner.w <= outer.x + outer.w);
  assert.ok(inner.y + inner.h <= outer.y + outer.h);
});

function deepState(depth: number): WireNode[] {
  // a chain of single-petal flowers nested through the petals
  const nodes: WireNode[] = [area("area", 1)];
  let prefix = "";
  for (let d = 0; d < depth; d++) {
    nodes.push(flower(`${prefix}area#{0}`, 1));
    nodes.push(area(`${prefix}0/pistil/area`, 0));
    prefix = `${prefix}0/petal:0/`;
    nodes.push(area(`${prefix}area`, 1));
  }
  nodes.push(atom(`${prefix}area#{0}`, "p(x)"));
  return nodes;
}

test("deep nesting lays out without sibling overlap", () => {
  const tree = layout(deepState(6));
  assert.equal(siblingsOverlap(tree), false);
  assert.ok(tree.w > 0 && tree.h > 0);
});

test("petal fan stays radial up to the limit and stacks beyond", () => {
  const many = RADIAL_LIMIT + 2;
  const nodes: WireNode[] = [area("area", 1), flower("area#{0}", many),
                             area("0/pistil/area", 0)];
  for (let k = 0; k < many; k++) {
    nodes.push(area(`0/petal:${k}/area`, 1));
    nodes.push(atom(`0/petal:${k}/area#{0}`, "a"));
  }
  const tree = layout(nodes);
  assert.equal(siblingsOverlap(tree), false);
  const petals = boxes(tree).filter((b) => b.kind === "petal");
  assert.equal(petals.length, many);
  const xs = new Set(petals.map((p) => p.x));
  assert.equal(xs.size, 1); // beyond the limit: a straight stack
});

test("candidate highlighting marks matching flowers", () => {
  const nodes = simpleState();
  const tree = layout(nodes);
  const svg = renderSVG(tree, {
    candidateTexts: new Set(["q(u)"]),
    nodeTexts: new Map([["area#{0}", "q(u)"]]),
  });
  assert.ok(svg.includes("#9cc4ff"));
});

test("the empty garden gets its celebratory view", async () => {
  const { emptyGardenSVG } = await import("../src/render.js");
  const svg = emptyGardenSVG();
  assert.ok(svg.includes("proved"));
  assert.ok(svg.startsWith("<svg"));
});
