// Typed client for the llweave step-server JSON protocol.
// The UI never computes reductions itself: every transition is a round trip.

export interface EnabledEdge {
  id: number;
  channel: string;
  from: string;
  to: string;
}

export interface BlockedEdge {
  channel: string;
  from: string;
  to: string;
}

export interface ProcessCard {
  origin: string;
  text: string;
}

export interface TraceEvent {
  step: number;
  channel: string;
  from: string;
  to: string;
  payload: string[];
  pick: number;
}

export interface StateDoc {
  processes: ProcessCard[];
  enabled: EnabledEdge[];
  blocked: BlockedEdge[];
  step_index: number;
  digest: string;
  terminated: boolean;
  events: TraceEvent[];
}

export class ProtocolError extends Error {
  constructor(message: string, readonly code?: string) {
    super(message);
  }
}

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null;
}

function bad(where: string): never {
  throw new ProtocolError(`state document mismatch at ${where}`, "schema-mismatch");
}

/** Validate a server payload against the protocol shape. */
export function parseStateDoc(raw: unknown): StateDoc {
  if (!isRecord(raw)) bad("root");
  if (typeof raw.step_index !== "number") bad("step_index");
  if (typeof raw.digest !== "string") bad("digest");
  if (typeof raw.terminated !== "boolean") bad("terminated");
  if (!Array.isArray(raw.processes)) bad("processes");
  for (const card of raw.processes) {
    if (!isRecord(card) || typeof card.origin !== "string"
        || typeof card.text !== "string") bad("processes[]");
  }
  if (!Array.isArray(raw.enabled)) bad("enabled");
  for (const e of raw.enabled) {
    if (!isRecord(e) || typeof e.id !== "number" || typeof e.channel !== "string"
        || typeof e.from !== "string" || typeof e.to !== "string") bad("enabled[]");
  }
  if (!Array.isArray(raw.blocked)) bad("blocked");
  for (const b of raw.blocked) {
    if (!isRecord(b) || typeof b.channel !== "string"
        || typeof b.from !== "string" || typeof b.to !== "string") bad("blocked[]");
  }
  if (!Array.isArray(raw.events)) bad("events");
  for (const ev of raw.events) {
    if (!isRecord(ev) || typeof ev.step !== "number"
        || typeof ev.channel !== "string" || typeof ev.pick !== "number"
        || !Array.isArray(ev.payload)) bad("events[]");
  }
  return raw as unknown as StateDoc;
}

export class StepClient {
  constructor(readonly baseUrl: string) {}

  private async request(path: string, init?: RequestInit): Promise<StateDoc> {
    const resp = await fetch(this.baseUrl + path, init);
    const body: unknown = await resp.json();
    if (!resp.ok) {
      const doc = isRecord(body) ? body : {};
      throw new ProtocolError(String(doc.detail ?? resp.statusText),
                              String(doc.error ?? resp.status));
    }
    return parseStateDoc(body);
  }

  getState(): Promise<StateDoc> {
    return this.request("/state");
  }

  step(id: number): Promise<StateDoc> {
    return this.request("/step", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ id }),
    });
  }

  reset(): Promise<StateDoc> {
    return this.request("/reset", { method: "POST" });
  }

  /** Undo: reset then replay every pick but the last. */
  async undo(picks: number[]): Promise<StateDoc> {
    let doc = await this.reset();
    for (const pick of picks.slice(0, -1)) {
      doc = await this.step(pick);
    }
    return doc;
  }
}
