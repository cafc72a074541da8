"""Node-removal plans and immutable graph reduction.

Plans name who leaves the network: detected spammers, the loose
periphery (degree <= 1), the top hubs by percentile rank (ties kept),
unions of those, or an explicit list.  Removal never mutates; it builds
a fresh graph over the survivors.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .events import canonical_node_id
from .graph import CommGraph, GraphError

_TOP_RE = re.compile(r"top(\d+(?:\.\d+)?)$")
_TOP_BOTTOM_RE = re.compile(r"top(\d+(?:\.\d+)?)\+bottom$")


@dataclass(frozen=True)
class RemovalPlan:
    kind: str
    percentile: float | None = None
    custom_nodes: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        if self.kind == "top":
            return f"top{self.percentile:g}"
        if self.kind == "top+bottom":
            return f"top{self.percentile:g}+bottom"
        return self.kind


def default_custom_loader(path: str) -> tuple[str, ...]:
    """One account per line; blank lines and # comments are skipped."""
    nodes = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            nodes.append(canonical_node_id(line))
    return tuple(nodes)


def parse_plan(text: str, *, custom_loader=default_custom_loader) -> RemovalPlan:
    t = text.strip()
    if t == "spammers":
        return RemovalPlan("spammers")
    if t == "bottom":
        return RemovalPlan("bottom")
    if t == "spammers+bottom":
        return RemovalPlan("spammers+bottom")
    m = _TOP_BOTTOM_RE.fullmatch(t)
    if m:
        return RemovalPlan("top+bottom", percentile=_valid_pct(m.group(1), t))
    m = _TOP_RE.fullmatch(t)
    if m:
        return RemovalPlan("top", percentile=_valid_pct(m.group(1), t))
    if t.startswith("custom:"):
        path = t[len("custom:"):]
        if not path:
            raise ValueError("custom plan needs a file path after the colon")
        return RemovalPlan("custom", custom_nodes=custom_loader(path))
    raise ValueError(f"unknown removal plan {text!r}")


def _valid_pct(raw: str, plan: str) -> float:
    p = float(raw)
    if not (0.0 < p < 100.0):
        raise ValueError(f"percentile out of range in plan {plan!r}")
    return p


def bottom_nodes(graph: CommGraph) -> frozenset:
    """Isolates and single-link nodes: total distinct-arc degree <= 1."""
    total = graph.total_degrees
    return frozenset(graph.nodes[i] for i in np.flatnonzero(total <= 1))


def top_degree_nodes(graph: CommGraph, percentile: float) -> frozenset:
    """Nodes at or above the degree of the ceil(p% * n)-th ranked node.

    Rank is by total degree, descending; every node tied with the cutoff
    degree is included.
    """
    if graph.n == 0:
        return frozenset()
    if not (0.0 < percentile < 100.0):
        raise ValueError("percentile must be in (0, 100)")
    total = graph.total_degrees
    k = min(graph.n, max(1, math.ceil(percentile / 100.0 * graph.n)))
    cutoff = np.sort(total)[::-1][k - 1]
    return frozenset(graph.nodes[i] for i in np.flatnonzero(total >= cutoff))


def select_nodes(graph: CommGraph, plan: RemovalPlan, *,
                 verdicts=None, flags: list[str] | None = None) -> frozenset:
    """Resolve a plan to the node set it removes from this graph."""
    if plan.kind == "bottom":
        return bottom_nodes(graph)
    if plan.kind == "top":
        return top_degree_nodes(graph, plan.percentile)
    if plan.kind == "top+bottom":
        return top_degree_nodes(graph, plan.percentile) | bottom_nodes(graph)
    if plan.kind in ("spammers", "spammers+bottom"):
        if verdicts is None:
            raise ValueError(f"plan {plan.label!r} requires spam verdicts")
        spammers = verdicts.spammers if hasattr(verdicts, "spammers") else frozenset(verdicts)
        selected = frozenset(spammers) & set(graph.nodes)
        if plan.kind == "spammers+bottom":
            selected |= bottom_nodes(graph)
        return selected
    if plan.kind == "custom":
        node_set = set(graph.nodes)
        known = frozenset(v for v in plan.custom_nodes if v in node_set)
        unknown = len(set(plan.custom_nodes)) - len(known)
        if unknown and flags is not None:
            flags.append(f"custom plan: {unknown} listed nodes not in graph")
        return known
    raise ValueError(f"unknown plan kind {plan.kind!r}")


def remove(graph: CommGraph, nodes) -> CommGraph:
    """New graph without the given nodes and their incident arcs.

    Names outside the graph are ignored.  Removing in stages equals
    removing the union at once.
    """
    removed = set(nodes) & set(graph.nodes)
    if not removed:
        return CommGraph(graph.channel, graph.nodes,
                         graph.arc_src.copy(), graph.arc_dst.copy(),
                         graph.arc_weight.copy(), graph.arc_first_ts.copy(),
                         graph.arc_last_ts.copy())
    keep_mask = np.ones(graph.n, dtype=bool)
    idx = graph.node_index
    for name in removed:
        keep_mask[idx[name]] = False
    new_id = np.cumsum(keep_mask, dtype=np.int64) - 1
    arc_mask = keep_mask[graph.arc_src] & keep_mask[graph.arc_dst]
    nodes_kept = tuple(name for i, name in enumerate(graph.nodes) if keep_mask[i])
    return CommGraph(
        graph.channel, nodes_kept,
        new_id[graph.arc_src[arc_mask]].astype(np.int32),
        new_id[graph.arc_dst[arc_mask]].astype(np.int32),
        graph.arc_weight[arc_mask].copy(),
        graph.arc_first_ts[arc_mask].copy(),
        graph.arc_last_ts[arc_mask].copy(),
    )
