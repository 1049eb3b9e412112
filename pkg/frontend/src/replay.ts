/**
 * Replay driver: walk a proof file step by step over the protocol, checking
 * the server digest against the file's recorded digest at every frame.
 */

import { Client, SessionState } from "./protocol.js";
import { parseProofFile, ProofFile } from "./prooffile.js";

export interface Frame {
  state: SessionState;
  stepIndex: number | null; // null for the initial frame
}

export class ReplayDriver {
  readonly file: ProofFile;
  private frames: Frame[] = [];
  private session: string | null = null;

  constructor(private readonly client: Client, fileText: string) {
    this.file = parseProofFile(fileText);
  }

  async start(): Promise<Frame> {
    const state = await this.client.newSession(this.file.goal);
    this.session = state.session;
    this.frames = [{ state, stepIndex: null }];
    return this.frames[0];
  }

  get frameCount(): number {
    return this.frames.length;
  }

  get done(): boolean {
    return this.frames.length === this.file.steps.length + 1;
  }

  current(): Frame {
    return this.frames[this.frames.length - 1];
  }

  /** Apply the next step; rejects on digest drift between file and server. */
  async next(): Promise<Frame> {
    if (this.session === null) throw new Error("replay not started");
    if (this.done) throw new Error("replay finished");
    const index = this.frames.length - 1;
    const step = this.file.steps[index];
    const state = await this.client.step(this.session, step.line);
    if (state.digest !== step.digest) {
      throw new Error(
        `frame ${index + 1}: server digest ${state.digest} != recorded ${step.digest}`);
    }
    const frame = { state, stepIndex: index };
    this.frames.push(frame);
    return frame;
  }

  async runToEnd(): Promise<Frame[]> {
    if (this.session === null) await this.start();
    while (!this.done) await this.next();
    return this.frames;
  }
}
