"""Figure rendering for simulation reports.

Mirrors the interaction-graph convention of the step visualiser: enabled
edges solid black, blocked edges grey dashed, one node per origin.  Written
to files alongside the trace exports.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx

from . import sim
from .sim import RunResult, SimState


def render_network(state: SimState, path: str, *, title: str | None = None):
    """Draw the current interaction graph to an image file."""
    report = sim.edge_report(state)
    term = state.term
    graph = nx.MultiDiGraph()
    enabled_edges = []
    blocked_edges = []
    for r in report.enabled:
        s = sim._origin_at(term, r.sender_path)
        t = sim._origin_at(term, r.receiver_path)
        graph.add_edge(s, t)
        enabled_edges.append((s, t, str(r.channel)))
    for b in report.blocked:
        graph.add_edge(b.sender_origin, b.receiver_origin)
        blocked_edges.append((b.sender_origin, b.receiver_origin, str(b.channel)))
    if not graph.nodes:
        graph.add_node("terminated")

    pos = nx.spring_layout(graph, seed=7)
    fig, axes = plt.subplots(figsize=(7, 5))
    nx.draw_networkx_nodes(graph, pos, ax=axes, node_color="#f0f0f0",
                           edgecolors="#333333", node_size=1800)
    nx.draw_networkx_labels(graph, pos, ax=axes, font_size=8)
    if blocked_edges:
        nx.draw_networkx_edges(graph, pos, ax=axes,
                               edgelist=[(s, t) for s, t, _ in blocked_edges],
                               edge_color="#aaaaaa", style="dashed",
                               connectionstyle="arc3,rad=0.1", node_size=1800)
    if enabled_edges:
        nx.draw_networkx_edges(graph, pos, ax=axes,
                               edgelist=[(s, t) for s, t, _ in enabled_edges],
                               edge_color="black", width=1.6,
                               connectionstyle="arc3,rad=-0.1", node_size=1800)
    labels = {}
    for s, t, c in enabled_edges + blocked_edges:
        labels.setdefault((s, t), c)
    nx.draw_networkx_edge_labels(graph, pos, ax=axes, edge_labels=labels,
                                 font_size=7)
    axes.set_title(title or f"step {state.step_index}")
    axes.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_timeline(result: RunResult, path: str):
    """Message timeline of a finished run: one marker per reduction."""
    fig, axes = plt.subplots(figsize=(8, 4.5))
    if result.events:
        origins = sorted({e.sender_origin for e in result.events}
                         | {e.receiver_origin for e in result.events})
        lane = {o: i for i, o in enumerate(origins)}
        for e in result.events:
            y0, y1 = lane[e.sender_origin], lane[e.receiver_origin]
            axes.annotate("", xy=(e.step, y1), xytext=(e.step, y0),
                          arrowprops=dict(arrowstyle="->", color="black", lw=1.1))
            axes.annotate(str(e.channel), xy=(e.step, (y0 + y1) / 2),
                          fontsize=7, ha="left", va="center",
                          xytext=(e.step + 0.08, (y0 + y1) / 2))
        axes.set_yticks(range(len(origins)))
        axes.set_yticklabels(origins, fontsize=8)
        axes.set_xlim(0.5, result.events[-1].step + 0.8)
    axes.set_xlabel("reduction step")
    axes.set_title(f"trace ({result.status}, {len(result.events)} reductions)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
