/**
 * Proof files, client side: extract the goal line and one entry per step.
 * The step body is kept opaque (the server resolves and validates it); the
 * recorded digest is what the replay driver checks each frame against.
 */

export interface ProofStep {
  line: string;   // "<rule> @ <path> [params...]" without the digest part
  digest: string; // hex8 recorded result digest
}

export interface ProofFile {
  goal: string;
  steps: ProofStep[];
}

export function parseProofFile(text: string): ProofFile {
  let goal: string | null = null;
  const steps: ProofStep[] = [];
  for (const [index, raw] of text.split(/\r?\n/).entries()) {
    const line = raw.replace(/(^|\s)#.*$/, "$1").trim();
    if (!line) continue;
    if (line.startsWith("goal:")) {
      if (goal !== null) throw new Error(`line ${index + 1}: duplicate goal header`);
      goal = line.slice(5).trim();
      continue;
    }
    const m = line.match(/^(.*?)\s*=>\s*([0-9a-f]{8})$/);
    if (!m) throw new Error(`line ${index + 1}: malformed step`);
    steps.push({ line: m[1], digest: m[2] });
  }
  if (goal === null) throw new Error("missing goal header");
  return { goal, steps };
}
