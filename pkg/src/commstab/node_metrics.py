"""Per-node metrics: centralities, activity, contribution, response behaviour.

Response pairing walks the event stream once in (timestamp, message id)
order.  A message answers the earliest unanswered in-horizon prompt from
its target back to its sender (an explicit reply reference wins when it
is still answerable) and closes that whole pending run; every directed
message instance then becomes a new prompt itself.
"""
from __future__ import annotations

from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from .events import MessageEvent
from .graph import CommGraph, GraphError, SnapshotSeries, arc_targets
from .shortest_paths import structural_pass

#: Node-metric names in canonical reporting order.
METRIC_ORDER = (
    "alter_art", "ego_art", "alter_nudges", "ego_nudges",
    "activity", "contribution_index",
    "betweenness", "betweenness_oscillations", "closeness", "degree",
    "sentiment", "emotionality", "complexity",
)


def _event_sort_key(e: MessageEvent):
    return (e.timestamp, e.message_id)


def degree_centrality(graph: CommGraph) -> dict[str, tuple[int, int, int]]:
    """{node: (in_degree, out_degree, total)} over distinct arcs."""
    ind = graph.in_degrees
    outd = graph.out_degrees
    return {name: (int(ind[i]), int(outd[i]), int(ind[i] + outd[i]))
            for i, name in enumerate(graph.nodes)}


def betweenness_centrality(graph: CommGraph, *, threads: int = 1) -> dict[str, float]:
    """Raw directed betweenness (pair-dependency sums, unnormalised)."""
    bt = structural_pass(graph, threads=threads).betweenness
    return {name: float(bt[i]) for i, name in enumerate(graph.nodes)}


def closeness_centrality(graph: CommGraph, *, threads: int = 1) -> dict[str, float]:
    """Reachability-scaled closeness over directed out-distances."""
    close = structural_pass(graph, threads=threads).closeness
    return {name: float(close[i]) for i, name in enumerate(graph.nodes)}


def oscillation_count(values) -> int:
    """Strict local extrema after collapsing equal consecutive runs."""
    collapsed: list = []
    for v in values:
        if not collapsed or v != collapsed[-1]:
            collapsed.append(v)
    count = 0
    for i in range(1, len(collapsed) - 1):
        if (collapsed[i] - collapsed[i - 1]) * (collapsed[i] - collapsed[i + 1]) > 0:
            count += 1
    return count


def windowed_betweenness(series: SnapshotSeries, universe, *,
                         threads: int = 1) -> dict[str, list[float]]:
    """Per-window betweenness series for every node in ``universe``.

    A node absent from a window's graph scores 0 in that window.
    """
    out = {name: [0.0] * series.n_windows for name in universe}
    for k, window in enumerate(series.windows):
        g = window.graph
        if g.n == 0:
            continue
        bt = structural_pass(g, threads=threads).betweenness
        for i, name in enumerate(g.nodes):
            if name in out:
                out[name][k] = float(bt[i])
    return out


def betweenness_oscillations(series: SnapshotSeries, *, universe=None,
                             threads: int = 1,
                             flags: list[str] | None = None) -> dict[str, int]:
    """Oscillation counts of the per-window betweenness series."""
    if universe is None:
        seen: set[str] = set()
        for w in series.windows:
            seen.update(w.graph.nodes)
        universe = sorted(seen)
    if series.n_windows < 3:
        if flags is not None:
            flags.append("series too short for oscillation counting")
        return {name: 0 for name in universe}
    traces = windowed_betweenness(series, universe, threads=threads)
    return {name: oscillation_count(vals) for name, vals in traces.items()}


def activity_counts(events: list[MessageEvent]) -> Counter:
    """Messages authored per node."""
    counts: Counter = Counter()
    for e in events:
        counts[e.sender] += 1
    return counts


def received_counts(events: list[MessageEvent]) -> Counter:
    """Directed instances received per node (self-addressed excluded)."""
    resolve = {e.message_id: e.sender for e in events}
    counts: Counter = Counter()
    for e in events:
        targets, _ = arc_targets(e, resolve)
        for t in targets:
            counts[t] += 1
    return counts


def received_by_sender(events: list[MessageEvent]) -> dict[str, Counter]:
    """{recipient: Counter(sender -> instances)}, self-addressed excluded."""
    resolve = {e.message_id: e.sender for e in events}
    table: dict[str, Counter] = defaultdict(Counter)
    for e in events:
        targets, _ = arc_targets(e, resolve)
        for t in targets:
            table[t][e.sender] += 1
    return table


def contribution_index(sent: int, received: int) -> float | None:
    """(S - R) / (S + R) in [-1, 1]; undefined when the node never appears."""
    total = sent + received
    if total == 0:
        return None
    return (sent - received) / total


def contribution_indices(events: list[MessageEvent]) -> dict[str, float]:
    """Contribution index for every node that sent or received anything."""
    sent = activity_counts(events)
    received = received_counts(events)
    out: dict[str, float] = {}
    for node in set(sent) | set(received):
        value = contribution_index(sent.get(node, 0), received.get(node, 0))
        if value is not None:
            out[node] = value
    return out


@dataclass(frozen=True, slots=True)
class ResponsePair:
    prompt_id: str
    response_id: str
    prompter: str
    responder: str
    latency: int
    run_length: int


@dataclass(slots=True)
class PairingResult:
    pairs: list[ResponsePair]
    open_counts: dict[tuple[str, str], int]
    total_prompts: int

    @property
    def open_total(self) -> int:
        return sum(self.open_counts.values())


def pair_responses(events: list[MessageEvent], horizon_s: int) -> PairingResult:
    """Match prompts to responses per ordered node pair within a horizon.

    Each directed message instance responds at most once (closing the
    whole unanswered run it answers) and is then enqueued as a prompt of
    its own.  Prompts older than the horizon, or still pending at corpus
    end, are tallied as open.  Duplicate targets within one message count
    once.
    """
    if horizon_s <= 0:
        raise ValueError("horizon must be positive")
    evs = sorted(events, key=_event_sort_key)
    by_id = {e.message_id: e for e in evs}
    resolve = {e.message_id: e.sender for e in evs}
    pending: dict[tuple[str, str], deque] = defaultdict(deque)
    open_counts: Counter = Counter()
    pairs: list[ResponsePair] = []
    total_prompts = 0
    for e in evs:
        targets, _ = arc_targets(e, resolve)
        distinct = list(dict.fromkeys(targets))
        explicit_author = None
        explicit_id = None
        if e.in_reply_to is not None:
            ref = by_id.get(e.in_reply_to)
            if ref is not None and ref.sender != e.sender and ref.timestamp <= e.timestamp:
                explicit_author = ref.sender
                explicit_id = e.in_reply_to
        for t in distinct:
            key = (t, e.sender)
            q = pending.get(key)
            if q:
                cutoff = e.timestamp - horizon_s
                while q and q[0][0] < cutoff:
                    q.popleft()
                    open_counts[key] += 1
            if q:
                prompt_ts, prompt_id = q[0]
                if explicit_author == t:
                    for qts, qid in q:
                        if qid == explicit_id:
                            prompt_ts, prompt_id = qts, qid
                            break
                pairs.append(ResponsePair(
                    prompt_id=prompt_id, response_id=e.message_id,
                    prompter=t, responder=e.sender,
                    latency=e.timestamp - prompt_ts, run_length=len(q)))
                q.clear()
            pending[(e.sender, t)].append((e.timestamp, e.message_id))
            total_prompts += 1
    for key, q in pending.items():
        if q:
            open_counts[key] += len(q)
    return PairingResult(pairs, dict(open_counts), total_prompts)


@dataclass(slots=True)
class ResponseStats:
    """Per-node means derived from closed response runs.

    ego_art: how long the node takes to answer others.
    alter_art: how long others take to answer the node.
    ego_nudges: extra prompts the node sent before being answered.
    alter_nudges: extra prompts others sent before the node answered.
    """

    ego_art: dict[str, float] = field(default_factory=dict)
    alter_art: dict[str, float] = field(default_factory=dict)
    ego_nudges: dict[str, float] = field(default_factory=dict)
    alter_nudges: dict[str, float] = field(default_factory=dict)


def response_stats(pairing: PairingResult) -> ResponseStats:
    lat_by_responder: dict[str, list[int]] = defaultdict(list)
    lat_by_prompter: dict[str, list[int]] = defaultdict(list)
    nud_by_prompter: dict[str, list[int]] = defaultdict(list)
    nud_by_responder: dict[str, list[int]] = defaultdict(list)
    for p in pairing.pairs:
        lat_by_responder[p.responder].append(p.latency)
        lat_by_prompter[p.prompter].append(p.latency)
        nud_by_prompter[p.prompter].append(p.run_length - 1)
        nud_by_responder[p.responder].append(p.run_length - 1)
    def _means(table):
        return {node: sum(vals) / len(vals) for node, vals in table.items()}
    return ResponseStats(
        ego_art=_means(lat_by_responder),
        alter_art=_means(lat_by_prompter),
        ego_nudges=_means(nud_by_prompter),
        alter_nudges=_means(nud_by_responder),
    )


def art(pairing: PairingResult, node: str) -> tuple[float | None, float | None]:
    """(ego, alter) mean response times for one node; None when undefined."""
    stats = response_stats(pairing)
    return stats.ego_art.get(node), stats.alter_art.get(node)


def nudges(pairing: PairingResult, node: str) -> tuple[float | None, float | None]:
    """(ego, alter) mean nudge counts for one node; None when undefined."""
    stats = response_stats(pairing)
    return stats.ego_nudges.get(node), stats.alter_nudges.get(node)
