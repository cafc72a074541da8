"""Shared builders for compact test fixtures."""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from commstab.events import EMAIL, MessageEvent
from commstab.graph import build_graph

T0 = 1_600_000_000


def name(i: int) -> str:
    return f"n{i:02d}"


def events_from_arcs(arcs, n: int | None = None, t0: int = T0):
    """One email event per arc occurrence; optional isolated-node padding.

    Padding nodes send themselves a message: the self arc is dropped at
    build time but the node stays in the graph, which keeps index
    alignment with oracle adjacency matrices.
    """
    events = []
    for k, (u, v) in enumerate(arcs):
        events.append(MessageEvent(
            message_id=f"m{k:06d}", timestamp=t0 + k,
            sender=name(u), recipients=(name(v),), channel=EMAIL))
    present = {u for arc in arcs for u in arc}
    if n is not None:
        for i in range(n):
            if i not in present:
                events.append(MessageEvent(
                    message_id=f"pad{i:04d}", timestamp=t0,
                    sender=name(i), recipients=(name(i),), channel=EMAIL))
    return events


def graph_from_arcs(arcs, n: int | None = None):
    return build_graph(events_from_arcs(arcs, n=n), EMAIL)
