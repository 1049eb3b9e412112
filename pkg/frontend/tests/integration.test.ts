/**
 * End-to-end: a real backend process, the real HTTP endpoint, the real proof
 * file.  This is the frontend half of the replay acceptance: every frame's
 * digest must match the server, the replay must end at the empty garden, and
 * the action menu at the initial goal must list the first worked step.
 */

import { after, before, test } from "node:test";
import assert from "node:assert/strict";
import { spawn, ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { createInterface } from "node:readline";

import { Client, httpTransport } from "../src/protocol.js";
import { ReplayDriver } from "../src/replay.js";
import { layout } from "../src/layout.js";
import { renderSVG } from "../src/render.js";

const here = dirname(fileURLToPath(import.meta.url));
const ROOT = join(here, "..", "..", "..");
const FIG8 = readFileSync(join(ROOT, "fig8.fproof"), "utf8");
const GOAL = "[[x. |> [p(x) |>] ; q(x)] |> [y. p(y) |> z. q(z)]]";

let server: ChildProcess;
let endpoint: string;

before(async () => {
  server = spawn("python3", ["-m", "floret.cli", "--sig", "fig8.sig",
                             "serve", "--http", "--port", "0"],
                 { cwd: ROOT, stdio: ["ignore", "ignore", "pipe"] });
  endpoint = await new Promise<string>((resolve, reject) => {
    const timer = setTimeout(() => reject(new Error("server did not start")), 15000);
    createInterface({ input: server.stderr! }).on("line", (line) => {
      const m = line.match(/serving on (http:\/\/[^\s]+)/);
      if (m) {
        clearTimeout(timer);
        resolve(m[1] + "/");
      }
    });
    server.on("exit", (code) => reject(new Error(`server exited: ${code}`)));
  });
});

after(() => {
  server.kill();
});

test("replaying the worked proof matches the server frame by frame", async () => {
  const client = new Client(httpTransport(endpoint));
  const driver = new ReplayDriver(client, FIG8);
  const frames = await driver.runToEnd();
  assert.equal(frames.length, driver.file.steps.length + 1);
  const last = frames[frames.length - 1].state;
  assert.equal(last.closed, true);
  assert.equal(last.bouquet, "");
});

test("the action menu at the initial goal lists the first worked step", async () => {
  const client = new Client(httpTransport(endpoint));
  const state = await client.newSession(GOAL);
  const menu = await client.actions(state.session, "0/petal:0/area");
  const ipets = menu.actions.filter(
    (a) => a.rule === "ipet" && a.params.includes("z:=y"));
  assert.ok(ipets.length >= 1);
  const nondup = ipets.filter((a) => a.params.includes("nondup"));
  assert.ok(nondup.length >= 1); // the exact non-duplicating step of the file
});

test("every state renders a diagram with one region per node", async () => {
  const client = new Client(httpTransport(endpoint));
  const driver = new ReplayDriver(client, FIG8);
  await driver.start();
  for (let i = 0; i < 3; i++) {
    const frame = await driver.next();
    if (frame.state.closed) break;
    const svg = renderSVG(layout(frame.state.nodes));
    const regions = svg.match(/data-path="/g) ?? [];
    assert.equal(regions.length, frame.state.nodes.length);
  }
});

test("undo after apply restores the previous digest over the wire", async () => {
  const client = new Client(httpTransport(endpoint));
  const st0 = await client.newSession("[p(u) |> p(u)]");
  const menu = await client.actions(st0.session);
  const poll = menu.actions.find((a) => a.rule === "poll_down")!;
  const st1 = await client.apply(st0.session, poll.id);
  assert.notEqual(st1.digest, st0.digest);
  const st2 = await client.undo(st0.session);
  assert.equal(st2.digest, st0.digest);
});

test("stale actions surface as protocol failures", async () => {
  const client = new Client(httpTransport(endpoint));
  const st0 = await client.newSession("[p(u) |> p(u)]");
  const menu = await client.actions(st0.session);
  const poll = menu.actions.find((a) => a.rule === "poll_down")!;
  await client.apply(st0.session, poll.id);
  await assert.rejects(() => client.apply(st0.session, poll.id),
                       (e: any) => e.code === "stale_action");
});

test("the initial worked goal renders one outer flower with one pistil flower and one petal flower", async () => {
  const client = new Client(httpTransport(endpoint));
  const state = await client.newSession(GOAL);
  const tree = layout(state.nodes);
  assert.equal(tree.children.length, 1);           // one outer flower
  const outer = tree.children[0];
  assert.equal(outer.kind, "flower");
  const pistil = outer.children[0];
  const petals = outer.children.slice(1);
  assert.equal(pistil.kind, "pistil");
  assert.equal(pistil.children.length, 1);         // one pistil flower
  assert.equal(petals.length, 1);                  // one petal...
  assert.equal(petals[0].children.length, 1);      // ...with one flower
});
