import { describe, expect, it } from "vitest";
import { layoutGraph } from "../src/layout.js";

const ids = ["Request", "SelectModel", "SelectLength", "composition"];
const edges = [
  { from: "Request", to: "SelectModel" },
  { from: "Request", to: "SelectLength" },
  { from: "SelectModel", to: "composition" },
];
const opts = { width: 900, height: 560 };

describe("layoutGraph", () => {
  it("is deterministic", () => {
    const a = layoutGraph(ids, "Request", edges, opts);
    const b = layoutGraph(ids, "Request", edges, opts);
    for (const id of ids) {
      expect(a.get(id)!.x).toBeCloseTo(b.get(id)!.x);
      expect(a.get(id)!.y).toBeCloseTo(b.get(id)!.y);
    }
  });

  it("pins the client node", () => {
    const placed = layoutGraph(ids, "Request", edges, opts);
    const request = placed.get("Request")!;
    expect(request.x).toBeCloseTo(900 * 0.12);
    expect(request.y).toBeCloseTo(280);
  });

  it("keeps every node inside the viewport", () => {
    const placed = layoutGraph(ids, "Request", edges, opts);
    for (const node of placed.values()) {
      expect(node.x).toBeGreaterThanOrEqual(0);
      expect(node.x).toBeLessThanOrEqual(900);
      expect(node.y).toBeGreaterThanOrEqual(0);
      expect(node.y).toBeLessThanOrEqual(560);
    }
  });

  it("separates distinct nodes", () => {
    const placed = layoutGraph(ids, "Request", edges, opts);
    const nodes = [...placed.values()];
    for (let i = 0; i < nodes.length; i++) {
      for (let j = i + 1; j < nodes.length; j++) {
        const d = Math.hypot(nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y);
        expect(d).toBeGreaterThan(40);
      }
    }
  });
});
