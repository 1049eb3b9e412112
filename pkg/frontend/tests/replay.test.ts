import { test } from "node:test";
import assert from "node:assert/strict";

import { Client, Response, SessionState } from "../src/protocol.js";
import { ReplayDriver } from "../src/replay.js";

function fakeState(digest: string, closed = false): SessionState {
  return {
    session: "s1", digest, goal: "a", bouquet: closed ? "" : "a",
    closed, depth: 0, nodes: [],
  };
}

function fakeServer(digests: string[]) {
  let cursor = 0;
  return async (request: any): Promise<Response> => {
    const { id, method } = request;
    if (method === "new") return { id, result: fakeState("11111111") };
    if (method === "step") {
      const digest = digests[cursor++];
      return { id, result: fakeState(digest, cursor === digests.length) };
    }
    return { id, error: { code: "rule_error", message: `unexpected ${method}` } };
  };
}

const FILE = [
  "goal: a, [a |> .]",
  "epet @ area#{1} => aaaaaaaa",
  "poll_down @ area#{0} => bbbbbbbb",
].join("\n");

test("replay walks every frame and ends done", async () => {
  const driver = new ReplayDriver(new Client(fakeServer(["aaaaaaaa", "bbbbbbbb"])), FILE);
  const frames = await driver.runToEnd();
  assert.equal(frames.length, 3); // initial + 2 steps
  assert.equal(driver.done, true);
  assert.equal(frames[2].state.closed, true);
});

test("digest drift between file and server is an error", async () => {
  const driver = new ReplayDriver(new Client(fakeServer(["aaaaaaaa", "ffffffff"])), FILE);
  await driver.start();
  await driver.next();
  await assert.rejects(() => driver.next(), /digest/);
});

test("stepping past the end is refused", async () => {
  const driver = new ReplayDriver(new Client(fakeServer(["aaaaaaaa", "bbbbbbbb"])), FILE);
  await driver.runToEnd();
  await assert.rejects(() => driver.next(), /finished/);
});
