// DOM/SVG rendering and interaction wiring. Only server-confirmed states are
// rendered: a click POSTs the step and the response document replaces the
// whole view.

import { StepClient, ProtocolError, type StateDoc } from "./protocol.js";
import { deriveView, clickableEdges, pickHistory, CLIENT_ORIGIN,
         type ViewState, type ViewEdge } from "./model.js";
import { layoutGraph } from "./layout.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export class StepperApp {
  private view: ViewState | null = null;
  private busy = false;

  constructor(private client: StepClient, private root: HTMLElement) {}

  async start(): Promise<void> {
    this.scaffold();
    await this.refresh(() => this.client.getState());
  }

  private scaffold(): void {
    this.root.innerHTML = `
      <header>
        <h1>llweave stepper</h1>
        <div class="status">
          <span id="step-index"></span>
          <span id="digest" title="server state digest"></span>
          <span id="terminal-badge" class="badge" hidden>terminated</span>
        </div>
        <div class="controls">
          <button id="undo">undo</button>
          <button id="reset">reset</button>
        </div>
      </header>
      <div id="banner" class="banner" hidden></div>
      <main>
        <svg id="network" viewBox="0 0 900 560"></svg>
        <aside>
          <section><h2>processes</h2><div id="cards"></div></section>
          <section><h2>trace</h2><ol id="trace"></ol></section>
        </aside>
      </main>
      <div id="toast" class="toast" hidden></div>`;
    this.root.querySelector("#reset")!.addEventListener("click", () => {
      void this.refresh(() => this.client.reset());
    });
    this.root.querySelector("#undo")!.addEventListener("click", () => {
      if (!this.view || this.view.trace.length === 0) return;
      const picks = pickHistory(this.view);
      void this.refresh(() => this.client.undo(picks));
    });
  }

  private async refresh(action: () => Promise<StateDoc>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    try {
      const doc = await action();
      this.view = deriveView(doc);
      this.render();
    } catch (err) {
      if (err instanceof ProtocolError && err.code === "invalid-redex-id") {
        this.toast("that interaction is no longer enabled");
        await this.refresh(() => this.client.getState());
      } else if (err instanceof ProtocolError && err.code === "schema-mismatch") {
        this.banner(`protocol mismatch: ${err.message}`);
      } else {
        this.banner(`server unreachable: ${String(err)}`);
      }
    } finally {
      this.busy = false;
    }
  }

  fire(edge: ViewEdge): void {
    if (edge.fireId === null) return;
    const id = edge.fireId;
    void this.refresh(() => this.client.step(id));
  }

  private render(): void {
    const view = this.view!;
    (this.root.querySelector("#step-index") as HTMLElement).textContent =
      `step ${view.stepIndex}`;
    (this.root.querySelector("#digest") as HTMLElement).textContent =
      view.digest;
    (this.root.querySelector("#terminal-badge") as HTMLElement).hidden =
      !view.terminated;
    this.renderNetwork(view);
    this.renderCards(view);
    this.renderTrace(view);
  }

  private renderNetwork(view: ViewState): void {
    const svg = this.root.querySelector("#network") as SVGSVGElement;
    svg.textContent = "";
    const ids = view.nodes.map((n) => n.origin);
    const pinned = ids.includes(CLIENT_ORIGIN) ? CLIENT_ORIGIN : null;
    const positions = layoutGraph(ids, pinned,
      view.edges.map((e) => ({ from: e.from, to: e.to })),
      { width: 900, height: 560 });

    for (const edge of view.edges) {
      const a = positions.get(edge.from);
      const b = positions.get(edge.to);
      if (!a || !b) continue;
      const group = document.createElementNS(SVG_NS, "g");
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      line.classList.add(edge.enabled ? "edge-enabled" : "edge-blocked");
      group.appendChild(line);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String((a.x + b.x) / 2));
      label.setAttribute("y", String((a.y + b.y) / 2 - 4));
      label.classList.add("edge-label");
      label.textContent = edge.channel;
      group.appendChild(label);
      if (edge.enabled) {
        group.classList.add("fireable");
        group.addEventListener("click", () => this.fire(edge));
      }
      svg.appendChild(group);
    }

    for (const node of view.nodes) {
      const pos = positions.get(node.origin)!;
      const group = document.createElementNS(SVG_NS, "g");
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(pos.x));
      circle.setAttribute("cy", String(pos.y));
      circle.setAttribute("r", "26");
      circle.classList.add("node");
      if (node.isClient) circle.classList.add("node-client");
      group.appendChild(circle);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(pos.x));
      label.setAttribute("y", String(pos.y + 42));
      label.classList.add("node-label");
      label.textContent = node.origin;
      group.appendChild(label);
      svg.appendChild(group);
    }
  }

  private renderCards(view: ViewState): void {
    const cards = this.root.querySelector("#cards") as HTMLElement;
    cards.textContent = "";
    for (const node of view.nodes) {
      const card = document.createElement("div");
      card.className = "card" + (node.isClient ? " card-client" : "");
      const title = document.createElement("h3");
      title.textContent = node.origin;
      const body = document.createElement("code");
      body.textContent = node.text;
      card.append(title, body);
      cards.appendChild(card);
    }
  }

  private renderTrace(view: ViewState): void {
    const list = this.root.querySelector("#trace") as HTMLElement;
    list.textContent = "";
    for (const ev of view.trace) {
      const item = document.createElement("li");
      item.textContent =
        `${ev.from} → ${ev.to} on ${ev.channel}` +
        (ev.payload.length ? ` ⟨${ev.payload.join(",")}⟩` : "");
      list.appendChild(item);
    }
  }

  private toast(message: string): void {
    const toast = this.root.querySelector("#toast") as HTMLElement;
    toast.textContent = message;
    toast.hidden = false;
    setTimeout(() => { toast.hidden = true; }, 2500);
  }

  private banner(message: string): void {
    const banner = this.root.querySelector("#banner") as HTMLElement;
    banner.textContent = message;
    banner.hidden = false;
  }

  /** Exposed for conformance checking: the currently clickable edge set. */
  clickable(): ViewEdge[] {
    return this.view ? clickableEdges(this.view) : [];
  }
}
