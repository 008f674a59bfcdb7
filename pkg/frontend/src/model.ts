// Pure view-state derivation from a server state document.
// The clickable edge set must equal the server's enabled list element for
// element, and the displayed digest is always the server's digest.

import type { StateDoc, EnabledEdge, BlockedEdge, TraceEvent } from "./protocol.js";

export interface ViewNode {
  origin: string;
  text: string;
  isClient: boolean;
}

export interface ViewEdge {
  key: string;
  channel: string;
  from: string;
  to: string;
  enabled: boolean;
  fireId: number | null; // server redex id when enabled
}

export interface ViewState {
  nodes: ViewNode[];
  edges: ViewEdge[];
  stepIndex: number;
  digest: string;
  terminated: boolean;
  trace: TraceEvent[];
}

export const CLIENT_ORIGIN = "Request";

export function deriveView(doc: StateDoc): ViewState {
  const origins = new Set<string>();
  for (const card of doc.processes) origins.add(card.origin);
  for (const e of doc.enabled) { origins.add(e.from); origins.add(e.to); }
  for (const b of doc.blocked) { origins.add(b.from); origins.add(b.to); }

  const cardText = new Map(doc.processes.map((c) => [c.origin, c.text]));
  const nodes: ViewNode[] = [...origins].sort().map((origin) => ({
    origin,
    text: cardText.get(origin) ?? "0",
    isClient: origin === CLIENT_ORIGIN,
  }));

  const edges: ViewEdge[] = [
    ...doc.enabled.map((e: EnabledEdge): ViewEdge => ({
      key: `e${e.id}`,
      channel: e.channel,
      from: e.from,
      to: e.to,
      enabled: true,
      fireId: e.id,
    })),
    ...doc.blocked.map((b: BlockedEdge, i: number): ViewEdge => ({
      key: `b${i}`,
      channel: b.channel,
      from: b.from,
      to: b.to,
      enabled: false,
      fireId: null,
    })),
  ];

  return {
    nodes,
    edges,
    stepIndex: doc.step_index,
    digest: doc.digest,
    terminated: doc.terminated,
    trace: doc.events,
  };
}

/** The selectable edges, exactly the server's enabled list. */
export function clickableEdges(view: ViewState): ViewEdge[] {
  return view.edges.filter((e) => e.enabled);
}

/** Pick indices fired so far, for reset-and-replay undo. */
export function pickHistory(view: ViewState): number[] {
  return view.trace.map((ev) => ev.pick);
}
