// Small deterministic force layout: spring edges, pairwise repulsion,
// centering pull. The client node is pinned to the left edge so the request
// always reads from the same side.

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  pinned: boolean;
}

export interface LayoutEdge {
  from: string;
  to: string;
}

export interface LayoutOptions {
  width: number;
  height: number;
  iterations?: number;
  springLength?: number;
}

export function layoutGraph(ids: string[], pinnedId: string | null,
                            edges: LayoutEdge[],
                            opts: LayoutOptions): Map<string, LayoutNode> {
  const { width, height } = opts;
  const iterations = opts.iterations ?? 220;
  const springLength = opts.springLength ?? Math.min(width, height) / 3;

  const nodes = new Map<string, LayoutNode>();
  ids.forEach((id, i) => {
    // deterministic ring start, no randomness: layouts are reproducible
    const angle = (2 * Math.PI * i) / Math.max(ids.length, 1);
    nodes.set(id, {
      id,
      x: width / 2 + (width / 3.2) * Math.cos(angle),
      y: height / 2 + (height / 3.2) * Math.sin(angle),
      pinned: id === pinnedId,
    });
  });
  const pinned = pinnedId ? nodes.get(pinnedId) : undefined;
  if (pinned) {
    pinned.x = width * 0.12;
    pinned.y = height / 2;
  }

  const links = edges
    .map((e) => [nodes.get(e.from), nodes.get(e.to)] as const)
    .filter((pair): pair is readonly [LayoutNode, LayoutNode] =>
      pair[0] !== undefined && pair[1] !== undefined && pair[0] !== pair[1]);

  const all = [...nodes.values()];
  for (let round = 0; round < iterations; round++) {
    const cooling = 1 - round / iterations;
    const fx = new Map<string, number>();
    const fy = new Map<string, number>();
    const push = (n: LayoutNode, dx: number, dy: number) => {
      fx.set(n.id, (fx.get(n.id) ?? 0) + dx);
      fy.set(n.id, (fy.get(n.id) ?? 0) + dy);
    };

    for (let i = 0; i < all.length; i++) {
      for (let j = i + 1; j < all.length; j++) {
        const a = all[i], b = all[j];
        const dx = a.x - b.x, dy = a.y - b.y;
        const dist = Math.max(Math.hypot(dx, dy), 1);
        const rep = (springLength * springLength) / (dist * dist) * 0.9;
        push(a, (dx / dist) * rep, (dy / dist) * rep);
        push(b, -(dx / dist) * rep, -(dy / dist) * rep);
      }
    }
    for (const [a, b] of links) {
      const dx = b.x - a.x, dy = b.y - a.y;
      const dist = Math.max(Math.hypot(dx, dy), 1);
      const pull = (dist - springLength) * 0.02;
      push(a, (dx / dist) * pull * springLength * 0.1,
              (dy / dist) * pull * springLength * 0.1);
      push(b, -(dx / dist) * pull * springLength * 0.1,
              -(dy / dist) * pull * springLength * 0.1);
    }
    for (const n of all) {
      push(n, (width / 2 - n.x) * 0.005, (height / 2 - n.y) * 0.005);
    }
    for (const n of all) {
      if (n.pinned) continue;
      n.x += (fx.get(n.id) ?? 0) * cooling;
      n.y += (fy.get(n.id) ?? 0) * cooling;
      const margin = 60;
      n.x = Math.min(Math.max(n.x, margin), width - margin);
      n.y = Math.min(Math.max(n.y, margin), height - margin);
    }
  }
  return nodes;
}
