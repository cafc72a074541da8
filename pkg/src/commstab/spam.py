"""Multi-criteria spam detection with a fixed-point refinement.

Letter criteria per node: A = unusually high sending volume (microposts
may alternatively qualify via round-the-clock posting), B = receives at
most a trickle from accounts currently considered legitimate, C = manual
spam label (microposts may alternatively qualify via URL-heavy content),
D = follows vastly more accounts than follow back (microposts only).
E-mail nodes need two satisfied criteria, micropost nodes three.

Criterion B depends on who is already classified, so classification
iterates to a fixed point; the spam set can only grow between sweeps.
"""
from __future__ import annotations

import csv
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ._io import open_output
from .events import EMAIL, MICROPOST, MessageEvent, canonical_node_id
from .graph import CommGraph
from .node_metrics import activity_counts, contribution_indices, received_by_sender

_URL_RE = re.compile(r"https?://|www\.", re.IGNORECASE)

REQUIRED_CRITERIA = {EMAIL: 2, MICROPOST: 3}
APPLICABLE_CRITERIA = {EMAIL: ("A", "B", "C"), MICROPOST: ("A", "B", "C", "D")}


@dataclass(frozen=True)
class SpamThresholds:
    high_volume_percentile: float = 99.0
    min_received_nonspam: int = 1
    follow_ratio: float = 10.0
    active_hour_bins: int = 20
    ci_screen: float = 0.8
    max_fixed_point_iters: int = 5

    def validate(self) -> None:
        if not (0.0 < self.high_volume_percentile <= 100.0):
            raise ValueError("high_volume_percentile must be in (0, 100]")
        if self.min_received_nonspam < 0:
            raise ValueError("min_received_nonspam must be >= 0")
        if self.follow_ratio <= 1:
            raise ValueError("follow_ratio must be greater than 1")
        if not (1 <= self.active_hour_bins <= 24):
            raise ValueError("active_hour_bins must be in 1..24")
        if not (-1.0 <= self.ci_screen <= 1.0):
            raise ValueError("ci_screen must be in [-1, 1]")
        if self.max_fixed_point_iters < 1:
            raise ValueError("max_fixed_point_iters must be >= 1")


@dataclass(frozen=True)
class SpamVerdict:
    node: str
    satisfied: frozenset
    is_spammer: bool
    iteration_fixed: int


@dataclass
class SpamResult:
    verdicts: list[SpamVerdict]
    iterations: int
    converged: bool
    volume_cutoff: float | None

    @property
    def spammers(self) -> frozenset:
        return frozenset(v.node for v in self.verdicts if v.is_spammer)


def is_spam_verdict(satisfied, channel: str) -> bool:
    """Voting rule: spam iff enough applicable criteria are satisfied."""
    applicable = set(APPLICABLE_CRITERIA[channel])
    return len(set(satisfied) & applicable) >= REQUIRED_CRITERIA[channel]


@dataclass
class _Features:
    channel: str
    thresholds: SpamThresholds
    volume_ok: set
    hour_ok: set
    recv_from: dict
    label_spam: set
    url_ok: set
    follow_ok: set
    volume_cutoff: float | None

    def satisfied(self, node: str, spam_set) -> frozenset:
        out = []
        if node in self.volume_ok or node in self.hour_ok:
            out.append("A")
        recv = self.recv_from.get(node)
        nonspam = 0
        if recv:
            nonspam = sum(c for s, c in recv.items() if s not in spam_set)
        if nonspam <= self.thresholds.min_received_nonspam:
            out.append("B")
        if node in self.label_spam or node in self.url_ok:
            out.append("C")
        if self.channel == MICROPOST and node in self.follow_ok:
            out.append("D")
        return frozenset(out)


def _compute_features(events: list[MessageEvent], graph: CommGraph,
                      labels: dict | None, thresholds: SpamThresholds,
                      flags: list[str] | None) -> _Features:
    channel = graph.channel
    node_set = set(graph.nodes)
    activity = activity_counts(events)

    volume_ok: set = set()
    hour_ok: set = set()
    volume_cutoff = None
    senders = sorted(v for v in activity if v in node_set)
    # A percentile of 100 pins the cutoff above every sender on purpose:
    # it is the documented way to switch the volume criterion off.
    if senders and thresholds.high_volume_percentile < 100.0:
        if channel == EMAIL:
            values = np.array([activity[v] for v in senders], dtype=np.float64)
        else:
            t_min = min(e.timestamp for e in events)
            t_max = max(e.timestamp for e in events)
            span_days = max(1.0, (t_max - t_min) / 86400.0)
            values = np.array([activity[v] / span_days for v in senders], dtype=np.float64)
        volume_cutoff = float(np.percentile(values, thresholds.high_volume_percentile))
        volume_ok = {v for v, val in zip(senders, values) if val >= volume_cutoff}
    if channel == MICROPOST:
        hours: dict[str, set] = {}
        for e in events:
            hours.setdefault(e.sender, set()).add((e.timestamp // 3600) % 24)
        hour_ok = {v for v, hs in hours.items()
                   if v in node_set and len(hs) >= thresholds.active_hour_bins}

    label_spam: set = set()
    if labels:
        unknown = 0
        for raw, label in labels.items():
            node = canonical_node_id(raw)
            if node not in node_set:
                unknown += 1
                continue
            if label == "spam":
                label_spam.add(node)
        if unknown and flags is not None:
            flags.append(f"labels reference {unknown} unknown nodes")

    url_ok: set = set()
    follow_ok: set = set()
    if channel == MICROPOST:
        url_counts: Counter = Counter()
        latest: dict[str, tuple] = {}
        for e in sorted(events, key=lambda e: (e.timestamp, e.message_id)):
            if _URL_RE.search(e.body_text or ""):
                url_counts[e.sender] += 1
            if e.author_followers is not None or e.author_following is not None:
                latest[e.sender] = (e.author_followers, e.author_following)
        for v, sent in activity.items():
            if v in node_set and sent > 0 and url_counts[v] / sent >= 0.8:
                url_ok.add(v)
        for v, (followers, following) in latest.items():
            if v not in node_set or following is None:
                continue
            if following >= thresholds.follow_ratio * max(followers or 0, 1):
                follow_ok.add(v)

    recv_from = received_by_sender(events)
    return _Features(channel, thresholds, volume_ok, hour_ok, recv_from,
                     label_spam, url_ok, follow_ok, volume_cutoff)


def evaluate_criteria(events: list[MessageEvent], graph: CommGraph, *,
                      spam_set=frozenset(), labels: dict | None = None,
                      thresholds: SpamThresholds | None = None) -> dict[str, frozenset]:
    """Satisfied criteria per node, relative to a given current spam set."""
    thresholds = thresholds or SpamThresholds()
    thresholds.validate()
    features = _compute_features(events, graph, labels, thresholds, None)
    return {v: features.satisfied(v, spam_set) for v in graph.nodes}


def classify(events: list[MessageEvent], graph: CommGraph, *,
             labels: dict | None = None,
             thresholds: SpamThresholds | None = None,
             flags: list[str] | None = None) -> SpamResult:
    """Iterate criteria evaluation to a fixed point and return verdicts.

    Reported satisfied-criteria sets reflect the final spam set.  When
    the iteration cap is hit before the set stabilises, the result is
    flagged as non-converged.
    """
    thresholds = thresholds or SpamThresholds()
    thresholds.validate()
    features = _compute_features(events, graph, labels, thresholds, flags)
    channel = graph.channel
    spam: set = set()
    first_marked: dict[str, int] = {}
    converged = False
    iterations = 0
    for it in range(1, thresholds.max_fixed_point_iters + 1):
        iterations = it
        new = set()
        for v in graph.nodes:
            if is_spam_verdict(features.satisfied(v, spam), channel):
                new.add(v)
        for v in new - spam:
            first_marked[v] = it
        if new == spam:
            converged = True
            break
        spam = new
    if not converged and flags is not None:
        flags.append(f"spam fixed point not reached after {iterations} sweeps")
    verdicts = []
    for v in graph.nodes:
        sat = features.satisfied(v, spam)
        verdicts.append(SpamVerdict(
            node=v, satisfied=sat,
            is_spammer=is_spam_verdict(sat, channel),
            iteration_fixed=first_marked.get(v, iterations)))
    return SpamResult(verdicts, iterations, converged, features.volume_cutoff)


def ci_screen(events: list[MessageEvent], graph: CommGraph, *,
              thresholds: SpamThresholds | None = None) -> list[str]:
    """Advisory screen: high contribution index plus top-percentile volume."""
    thresholds = thresholds or SpamThresholds()
    thresholds.validate()
    features = _compute_features(events, graph, None, thresholds, None)
    ci = contribution_indices(events)
    return sorted(v for v in features.volume_ok
                  if ci.get(v) is not None and ci[v] >= thresholds.ci_screen)


def write_verdicts_csv(result: SpamResult, path: str) -> None:
    with open_output(path) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["node_id", "satisfied_criteria", "is_spammer", "iterations"])
        for v in result.verdicts:
            writer.writerow([v.node, "".join(sorted(v.satisfied)),
                             "true" if v.is_spammer else "false", v.iteration_fixed])


def read_labels_csv(path: str) -> dict[str, str]:
    """node_id,label rows; labels must be ``spam`` or ``ham``."""
    labels: dict[str, str] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["node_id", "label"]:
            raise ValueError(f"bad labels header {header!r}; expected node_id,label")
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise ValueError(f"bad labels row at line {reader.line_num}")
            label = row[1].strip().lower()
            if label not in ("spam", "ham"):
                raise ValueError(f"unknown label {row[1]!r} at line {reader.line_num}")
            labels[canonical_node_id(row[0])] = label
    return labels
