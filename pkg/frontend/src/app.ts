/**
 * Browser wiring: one active session per tab, optimistic updates disabled —
 * every mutation awaits the server and the digest shown always comes from the
 * last round trip.
 */

import { Client, httpTransport, ProtocolFailure, SessionState } from "./protocol.js";
import { layout } from "./layout.js";
import { renderSVG, emptyGardenSVG } from "./render.js";
import { ReplayDriver } from "./replay.js";
import { areaOf } from "./pathgrammar.js";

interface UI {
  endpoint: HTMLInputElement;
  goal: HTMLInputElement;
  connect: HTMLButtonElement;
  undo: HTMLButtonElement;
  exportBtn: HTMLButtonElement;
  replayFile: HTMLInputElement;
  replayNext: HTMLButtonElement;
  digest: HTMLElement;
  diagram: HTMLElement;
  menu: HTMLElement;
  toast: HTMLElement;
}

let client: Client;
let state: SessionState | null = null;
let selected: string | null = null;
let candidates: Set<string> = new Set();
let driver: ReplayDriver | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function ui(): UI {
  return {
    endpoint: el("endpoint"),
    goal: el("goal"),
    connect: el("connect"),
    undo: el("undo"),
    exportBtn: el("export"),
    replayFile: el("replay-file"),
    replayNext: el("replay-next"),
    digest: el("digest"),
    diagram: el("diagram"),
    menu: el("menu"),
    toast: el("toast"),
  };
}

function toast(message: string): void {
  const t = ui().toast;
  t.textContent = message;
  t.classList.add("show");
  setTimeout(() => t.classList.remove("show"), 2600);
}

function draw(): void {
  const u = ui();
  if (!state) return;
  u.digest.textContent = `${state.digest} · ${state.depth} steps`;
  if (state.closed) {
    u.diagram.innerHTML = emptyGardenSVG();
    u.menu.innerHTML = "<em>nothing left to prove</em>";
    return;
  }
  const tree = layout(state.nodes);
  const nodeTexts = new Map(state.nodes
    .filter((n) => n.kind !== "area" && n.text)
    .map((n) => [n.path, n.text as string]));
  u.diagram.innerHTML = renderSVG(tree, { selected, candidateTexts: candidates, nodeTexts });
  u.diagram.querySelectorAll("[data-path]").forEach((g) => {
    g.addEventListener("click", (ev) => {
      ev.stopPropagation();
      void select((g as SVGGElement).dataset.path ?? null);
    });
  });
}

async function refresh(next: SessionState): Promise<void> {
  state = next;
  selected = null;
  candidates = new Set();
  draw();
  await listActions(undefined);
}

async function listActions(path: string | undefined): Promise<void> {
  if (!state) return;
  const u = ui();
  const res = await client.actions(state.session, path);
  candidates = new Set(res.candidates);
  u.menu.innerHTML = "";
  for (const action of res.actions) {
    const li = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = `${action.rule} @ ${action.path} — ${action.caption}`;
    button.addEventListener("click", () => void applyAction(action.id));
    li.appendChild(button);
    u.menu.appendChild(li);
  }
  draw();
}

async function select(path: string | null): Promise<void> {
  selected = path;
  if (path) await listActions(areaOf(path));
  else draw();
}

async function applyAction(id: string): Promise<void> {
  if (!state) return;
  try {
    await refresh(await client.apply(state.session, id));
  } catch (e) {
    if (e instanceof ProtocolFailure && e.code === "stale_action") {
      toast("that action went stale — state refreshed");
      await refresh(await client.state(state.session));
    } else {
      toast(String(e));
    }
  }
}

export function boot(): void {
  const u = ui();
  u.connect.addEventListener("click", async () => {
    try {
      client = new Client(httpTransport(u.endpoint.value));
      await refresh(await client.newSession(u.goal.value));
    } catch (e) {
      u.diagram.innerHTML = `<div class="error-banner">${String(e)}</div>`;
    }
  });
  u.undo.addEventListener("click", async () => {
    if (!state) return;
    try {
      await refresh(await client.undo(state.session));
    } catch (e) {
      toast(String(e));
    }
  });
  u.exportBtn.addEventListener("click", async () => {
    if (!state) return;
    try {
      const out = await client.export(state.session);
      await navigator.clipboard.writeText(out.proof);
      toast("proof copied to the clipboard");
    } catch (e) {
      toast(String(e));
    }
  });
  u.replayFile.addEventListener("change", async () => {
    const file = u.replayFile.files?.[0];
    if (!file) return;
    client = new Client(httpTransport(u.endpoint.value));
    driver = new ReplayDriver(client, await file.text());
    const frame = await driver.start();
    state = frame.state;
    await refresh(frame.state);
    u.replayNext.disabled = false;
  });
  u.replayNext.addEventListener("click", async () => {
    if (!driver) return;
    try {
      const frame = await driver.next();
      await refresh(frame.state);
      if (driver.done) {
        toast("replay finished at the empty garden");
        u.replayNext.disabled = true;
      }
    } catch (e) {
      toast(String(e));
    }
  });
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
