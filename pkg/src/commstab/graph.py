"""Directed communication graphs built from message events.

Arcs follow the information flow: e-mail sender to each recipient
occurrence; micropost author to each mentioned account, to the author of
the post being replied to, and to the author of the post being retweeted.
Self-loops are dropped at build time.  Arc weight counts the inducing
event instances; first/last timestamps track when the arc was active.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from xml.sax.saxutils import escape

import numpy as np

from ._io import open_output
from .events import CHANNELS, EMAIL, MessageEvent


class GraphError(ValueError):
    """Raised for graph operations on invalid input (e.g. empty graph)."""


@dataclass(frozen=True, eq=False)
class CommGraph:
    """Immutable directed multigraph aggregate over numpy arc arrays.

    ``nodes`` is sorted; arcs are sorted by (source index, target index).
    All arrays are read-only; derived views (CSR, degrees) are cached.
    """

    channel: str
    nodes: tuple[str, ...]
    arc_src: np.ndarray
    arc_dst: np.ndarray
    arc_weight: np.ndarray
    arc_first_ts: np.ndarray
    arc_last_ts: np.ndarray

    def __post_init__(self):
        for arr in (self.arc_src, self.arc_dst, self.arc_weight,
                    self.arc_first_ts, self.arc_last_ts):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.arc_src)

    @cached_property
    def node_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.nodes)}

    @cached_property
    def out_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr int64, indices int32) over distinct arcs, by source."""
        counts = np.bincount(self.arc_src, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, self.arc_dst.astype(np.int32, copy=True)

    @cached_property
    def in_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr int64, indices int32) over distinct arcs, by target."""
        order = np.lexsort((self.arc_src, self.arc_dst))
        counts = np.bincount(self.arc_dst, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, self.arc_src[order].astype(np.int32, copy=True)

    @cached_property
    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.arc_src, minlength=self.n).astype(np.int64)

    @cached_property
    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.arc_dst, minlength=self.n).astype(np.int64)

    @cached_property
    def total_degrees(self) -> np.ndarray:
        return self.out_degrees + self.in_degrees

    def arcs_as_dict(self) -> dict[tuple[str, str], tuple[int, int, int]]:
        """{(src, dst): (weight, first_ts, last_ts)} for inspection/tests."""
        out = {}
        for k in range(self.m):
            out[(self.nodes[self.arc_src[k]], self.nodes[self.arc_dst[k]])] = (
                int(self.arc_weight[k]), int(self.arc_first_ts[k]), int(self.arc_last_ts[k]))
        return out


def graphs_equal(a: CommGraph, b: CommGraph) -> bool:
    return (a.channel == b.channel and a.nodes == b.nodes
            and np.array_equal(a.arc_src, b.arc_src)
            and np.array_equal(a.arc_dst, b.arc_dst)
            and np.array_equal(a.arc_weight, b.arc_weight)
            and np.array_equal(a.arc_first_ts, b.arc_first_ts)
            and np.array_equal(a.arc_last_ts, b.arc_last_ts))


def arc_targets(event: MessageEvent, resolve_map: dict[str, str]) -> tuple[list[str], int]:
    """Directed targets induced by one event, self excluded.

    Returns (targets with multiplicity, dangling reference count).  The
    same rule feeds graph building, response pairing and received counts.
    """
    if event.channel == EMAIL:
        return [r for r in event.recipients if r != event.sender], 0
    targets = [r for r in event.recipients if r != event.sender]
    dangling = 0
    for ref in (event.in_reply_to, event.retweet_of):
        if ref is None:
            continue
        author = resolve_map.get(ref)
        if author is None:
            dangling += 1
        elif author != event.sender:
            targets.append(author)
    return targets, dangling


def _event_sort_key(e: MessageEvent):
    return (e.timestamp, e.message_id)


def build_graph(events: list[MessageEvent], link_rule: str, *,
                resolve_map: dict[str, str] | None = None,
                flags: list[str] | None = None) -> CommGraph:
    """Aggregate events into a CommGraph under the given channel rule.

    Deterministic for any input order (events are sorted by timestamp
    then message id before aggregation).  Dangling reply/retweet
    references are tallied into ``flags`` when a list is supplied.
    """
    if link_rule not in CHANNELS:
        raise GraphError(f"unknown link rule {link_rule!r}")
    evs = sorted(events, key=_event_sort_key)
    if resolve_map is None:
        resolve_map = {e.message_id: e.sender for e in evs}

    node_set: set[str] = set()
    resolved_targets: list[list[str]] = []
    dangling = 0
    for e in evs:
        node_set.add(e.sender)
        targets, d = arc_targets(e, resolve_map)
        dangling += d
        resolved_targets.append(targets)
        node_set.update(e.recipients)
        node_set.update(targets)
    nodes = tuple(sorted(node_set))
    index = {name: i for i, name in enumerate(nodes)}

    acc: dict[tuple[int, int], list[int]] = {}
    for e, targets in zip(evs, resolved_targets):
        si = index[e.sender]
        for t in targets:
            key = (si, index[t])
            rec = acc.get(key)
            if rec is None:
                acc[key] = [1, e.timestamp, e.timestamp]
            else:
                rec[0] += 1
                if e.timestamp < rec[1]:
                    rec[1] = e.timestamp
                if e.timestamp > rec[2]:
                    rec[2] = e.timestamp
    if dangling and flags is not None:
        flags.append(f"dangling references skipped: {dangling}")

    keys = sorted(acc)
    m = len(keys)
    arc_src = np.empty(m, dtype=np.int32)
    arc_dst = np.empty(m, dtype=np.int32)
    arc_weight = np.empty(m, dtype=np.int64)
    arc_first = np.empty(m, dtype=np.int64)
    arc_last = np.empty(m, dtype=np.int64)
    for k, (si, di) in enumerate(keys):
        w, first, last = acc[(si, di)]
        arc_src[k] = si
        arc_dst[k] = di
        arc_weight[k] = w
        arc_first[k] = first
        arc_last[k] = last
    return CommGraph(link_rule, nodes, arc_src, arc_dst, arc_weight, arc_first, arc_last)


@dataclass(frozen=True)
class Window:
    start: int
    end: int
    graph: CommGraph


@dataclass(frozen=True)
class SnapshotSeries:
    window_s: int
    windows: tuple[Window, ...]

    @property
    def n_windows(self) -> int:
        return len(self.windows)


def window_slices(events: list[MessageEvent], window_s: int, link_rule: str, *,
                  flags: list[str] | None = None) -> SnapshotSeries:
    """Partition events into consecutive fixed-length windows, one graph each.

    Windows are half-open [start, end), anchored at the earliest event
    timestamp and contiguous through the latest.  Reply references are
    resolved against the full event list, so an arc always lands in the
    window of the replying event.
    """
    if window_s <= 0:
        raise GraphError("window length must be positive")
    if not events:
        raise GraphError("cannot slice an empty event list")
    evs = sorted(events, key=_event_sort_key)
    resolve_map = {e.message_id: e.sender for e in evs}
    t0 = evs[0].timestamp
    t_max = evs[-1].timestamp
    n_windows = (t_max - t0) // window_s + 1
    buckets: list[list[MessageEvent]] = [[] for _ in range(n_windows)]
    for e in evs:
        buckets[(e.timestamp - t0) // window_s].append(e)
    windows = []
    for k, bucket in enumerate(buckets):
        g = build_graph(bucket, link_rule, resolve_map=resolve_map, flags=flags)
        windows.append(Window(t0 + k * window_s, t0 + (k + 1) * window_s, g))
    return SnapshotSeries(window_s, tuple(windows))


@dataclass(frozen=True)
class DegreeSummary:
    n: int
    m: int
    min_degree: int
    median_degree: float
    max_degree: int
    out_median: float
    out_max: int
    in_median: float
    in_max: int
    tail_ratio: float


def degree_summary(graph: CommGraph) -> DegreeSummary:
    """Distribution summary of distinct-arc degrees, with the max/median tail ratio."""
    if graph.n == 0:
        raise GraphError("degree summary of an empty graph")
    total = graph.total_degrees
    med = float(np.median(total))
    mx = int(total.max())
    if med > 0:
        tail = mx / med
    else:
        tail = float("inf") if mx > 0 else 0.0
    return DegreeSummary(
        n=graph.n, m=graph.m,
        min_degree=int(total.min()), median_degree=med, max_degree=mx,
        out_median=float(np.median(graph.out_degrees)), out_max=int(graph.out_degrees.max()),
        in_median=float(np.median(graph.in_degrees)), in_max=int(graph.in_degrees.max()),
        tail_ratio=tail)


def export_graphml(graph: CommGraph, path: str) -> None:
    """Write the graph as GraphML: node attribute ``id``, arc attribute ``weight``."""
    with open_output(path) as f:
        f.write('<?xml version="1.0" encoding="UTF-8"?>\n')
        f.write('<graphml xmlns="http://graphml.graphdrawing.org/xmlns">\n')
        f.write('  <key id="d0" for="node" attr.name="id" attr.type="string"/>\n')
        f.write('  <key id="d1" for="edge" attr.name="weight" attr.type="long"/>\n')
        f.write('  <graph id="G" edgedefault="directed">\n')
        for i, name in enumerate(graph.nodes):
            f.write(f'    <node id="n{i}"><data key="d0">{escape(name)}</data></node>\n')
        for k in range(graph.m):
            f.write(f'    <edge source="n{int(graph.arc_src[k])}" target="n{int(graph.arc_dst[k])}">'
                    f'<data key="d1">{int(graph.arc_weight[k])}</data></edge>\n')
        f.write('  </graph>\n</graphml>\n')


def export_edgelist(graph: CommGraph, path: str) -> None:
    """Write arcs as CSV rows source,target,weight."""
    with open_output(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["source", "target", "weight"])
        for k in range(graph.m):
            writer.writerow([graph.nodes[graph.arc_src[k]], graph.nodes[graph.arc_dst[k]],
                             int(graph.arc_weight[k])])
