/**
 * The session protocol: request/response types and a small client.
 *
 * The transport is injected (fetch in the browser, anything test-side), so
 * every piece of UI logic stays independent of the network layer.  The UI
 * never computes rule legality itself: every enabled control corresponds to
 * an action listed by the server.
 */

export interface WireNode {
  path: string;
  kind: "area" | "flower" | "atom";
  polarity: "positive" | "negative";
  text?: string;
  formula?: string;
  size?: number;
  petals?: number;
  pistil_binders?: string[];
  petal_binders?: string[][];
}

export interface SessionState {
  session: string;
  digest: string;
  goal: string;
  bouquet: string;
  closed: boolean;
  depth: number;
  nodes: WireNode[];
}

export interface Action {
  id: string;
  rule: string;
  path: string;
  caption: string;
  params: string;
}

export interface ActionsResult {
  session: string;
  digest: string;
  actions: Action[];
  candidates: string[];
}

export interface ProtocolError {
  code: "stale_action" | "bad_session" | "bad_request" | "rule_error" | "bad_json";
  message: string;
}

export interface Response {
  id: number | string | null;
  result?: unknown;
  error?: ProtocolError;
}

export type Transport = (request: object) => Promise<Response>;

export class ProtocolFailure extends Error {
  constructor(public readonly code: ProtocolError["code"], message: string) {
    super(message);
  }
}

export class Client {
  private seq = 0;

  constructor(private readonly transport: Transport) {}

  private async call<T>(method: string, params?: object): Promise<T> {
    const response = await this.transport({ id: ++this.seq, method, params });
    if (response.error) {
      throw new ProtocolFailure(response.error.code, response.error.message);
    }
    return response.result as T;
  }

  newSession(goal: string): Promise<SessionState> {
    return this.call("new", { goal });
  }

  state(session: string): Promise<SessionState> {
    return this.call("state", { session });
  }

  actions(session: string, path?: string): Promise<ActionsResult> {
    return this.call("actions", path ? { session, path } : { session });
  }

  apply(session: string, action: string): Promise<SessionState> {
    return this.call("apply", { session, action });
  }

  step(session: string, step: string): Promise<SessionState> {
    return this.call("step", { session, step });
  }

  undo(session: string): Promise<SessionState> {
    return this.call("undo", { session });
  }

  export(session: string): Promise<{ session: string; proof: string }> {
    return this.call("export", { session });
  }
}

/** Transport over the single HTTP endpoint. */
export function httpTransport(endpoint: string): Transport {
  return async (request: object) => {
    const r = await fetch(endpoint, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    return (await r.json()) as Response;
  };
}
