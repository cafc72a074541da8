"""Synthetic graph and message-stream generation with planted spammers.

The generator has two stages.  ``gen_scale_free`` grows a directed graph by
preferential attachment, so a handful of hubs accumulate most arcs while a
configurable fraction of late nodes stay on the degree-one periphery.
``gen_message_stream`` then walks the arcs and emits timestamped messages:
organic exchanges with replies and follow-up pings, plus broadcast traffic
from planted spammer accounts that never receive anything back.

Everything is driven by ``numpy.random.default_rng`` children of a single
seed, so a config maps to a byte-identical event stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .events import EMAIL, MICROPOST, CHANNELS, MessageEvent
from .graph import CommGraph

EPOCH_2020 = 1577836800  # 2020-01-01T00:00:00Z
DAY = 86400

# Emotion-bearing words injected on top of the neutral vocabulary.  They are
# a subset of the shipped default lexicon so the default scorer sees them.
_POSITIVE_WORDS = (
    "good", "great", "excellent", "happy", "love", "wonderful", "nice",
    "helpful", "perfect", "thanks",
)
_NEGATIVE_WORDS = (
    "bad", "terrible", "awful", "sad", "hate", "horrible", "poor",
    "useless", "wrong", "broken",
)
_SPAM_WORDS = (
    "free", "offer", "deal", "discount", "winner", "claim", "prize",
    "limited", "exclusive", "bonus", "cash", "upgrade",
)


@dataclass(frozen=True, slots=True)
class SynthConfig:
    """Knobs for the generator; every run is a pure function of this."""

    n: int = 2000
    m_attach: int = 3
    reciprocation_prob: float = 0.3
    leaf_fraction: float = 0.25
    spammer_count: int = 10
    spammer_volume_multiplier: float = 30.0
    arc_rate: float = 1.6
    period_days: float = 120.0
    reply_prob: float = 0.9
    reply_latency_mean_s: float = 7200.0
    nudge_prob: float = 0.25
    max_nudges: int = 3
    exchange_cooldown_s: float = 14.0 * DAY + 3600.0
    vocab_size: int = 400
    subject_tokens: float = 6.0
    body_tokens: float = 40.0
    emotion_tokens: float = 3.0
    valence_spread: float = 0.6
    vocab_skew_min: float = 0.7
    vocab_skew_max: float = 1.5
    channel: str = EMAIL
    seed: int = 42

    def validate(self) -> None:
        if not (self.n > self.m_attach >= 1):
            raise ValueError("require n > m_attach >= 1")
        for name in ("reciprocation_prob", "reply_prob", "nudge_prob"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"{name} must be in [0, 1]")
        if not (0.0 <= self.leaf_fraction < 1.0):
            raise ValueError("leaf_fraction must be in [0, 1)")
        if self.spammer_count < 0:
            raise ValueError("spammer_count must be >= 0")
        if self.spammer_count and self.spammer_volume_multiplier <= 1.0:
            raise ValueError("spammer_volume_multiplier must be > 1")
        if self.arc_rate <= 0 or self.period_days <= 0:
            raise ValueError("arc_rate and period_days must be positive")
        if self.reply_latency_mean_s <= 0:
            raise ValueError("reply_latency_mean_s must be positive")
        if self.max_nudges < 0 or self.exchange_cooldown_s < 0:
            raise ValueError("max_nudges and exchange_cooldown_s must be >= 0")
        if self.vocab_size < 10:
            raise ValueError("vocab_size must be >= 10")
        if not (0.0 < self.vocab_skew_min <= self.vocab_skew_max):
            raise ValueError("require 0 < vocab_skew_min <= vocab_skew_max")
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")


@dataclass(frozen=True)
class GroundTruth:
    """What the generator planted, for scoring detectors downstream."""

    spammers: frozenset
    reply_params: dict = field(default_factory=dict)

    def labels(self, nodes) -> dict:
        return {v: ("spam" if v in self.spammers else "ham") for v in nodes}


def _node_names(config: SynthConfig) -> list[str]:
    width = max(4, len(str(config.n - 1)))
    return [f"u{i:0{width}d}" for i in range(config.n)]


def _spammer_names(config: SynthConfig) -> list[str]:
    return [f"spam{j:03d}" for j in range(config.spammer_count)]


def gen_scale_free(config: SynthConfig) -> CommGraph:
    """Grow a directed graph by (degree + 1)-proportional attachment.

    Node ``i`` attaches ``m_attach`` out-arcs (one for the trailing
    ``leaf_fraction`` of nodes) to distinct earlier nodes, picking target
    ``v`` with probability proportional to its current total degree plus
    one.  Core arcs gain a reverse arc with ``reciprocation_prob``; leaf
    arcs never do, so the periphery stays at total degree one unless a
    later leaf happens to attach to it.
    """
    config.validate()
    rng = np.random.default_rng([config.seed, 0])
    n = config.n
    n_leaves = int(config.leaf_fraction * n)
    first_leaf = n - n_leaves

    arcs: set[tuple[int, int]] = set()
    # One slot per arc endpoint; sampling a uniform slot weights nodes by
    # degree, and mixing in a uniform node draw adds the +1 smoothing.
    endpoints: list[int] = []

    for i in range(1, n):
        m = 1 if i >= first_leaf else min(config.m_attach, i)
        chosen: set[int] = set()
        while len(chosen) < m:
            total = len(endpoints) + i
            if rng.integers(0, total) < len(endpoints):
                v = endpoints[rng.integers(0, len(endpoints))]
            else:
                v = int(rng.integers(0, i))
            chosen.add(v)
        for v in sorted(chosen):
            arcs.add((i, v))
            endpoints.append(i)
            endpoints.append(v)
            if i < first_leaf and rng.random() < config.reciprocation_prob:
                if (v, i) not in arcs:
                    arcs.add((v, i))
                    endpoints.append(v)
                    endpoints.append(i)

    names = _node_names(config)
    pairs = sorted(arcs)
    src = np.array([p[0] for p in pairs], dtype=np.int32)
    dst = np.array([p[1] for p in pairs], dtype=np.int32)
    order = np.lexsort((dst, src))
    zeros = np.zeros(len(pairs), dtype=np.int64)
    return CommGraph(
        channel=config.channel,
        nodes=tuple(names),
        arc_src=src[order],
        arc_dst=dst[order],
        arc_weight=np.ones(len(pairs), dtype=np.int64),
        arc_first_ts=zeros.copy(),
        arc_last_ts=zeros.copy(),
    )


@dataclass(slots=True)
class _Draft:
    """Message under construction, before ids exist."""

    ts: int
    sender: str
    target: str
    kind: str  # prompt | nudge | reply | spam
    parent: int = -1  # index of the prompt this replies to


def _simulate_lane(rng, u: str, v: str, directions: list[tuple[str, str]],
                   config: SynthConfig, t_end: float,
                   drafts: list[_Draft], reply_prob: float) -> None:
    """Emit serialized exchanges for one conversation lane.

    A lane covers both arcs between ``u`` and ``v``.  Only one exchange is
    in flight at a time and the next one starts no earlier than a cooldown
    after the last event, so downstream response pairing under a horizon
    no longer than the cooldown sees each exchange in isolation.
    """
    gap_mean = (config.period_days * DAY) / (config.arc_rate * len(directions))
    t = EPOCH_2020 + rng.exponential(gap_mean)
    while t < t_end:
        if len(directions) == 1:
            a, b = directions[0]
        else:
            a, b = directions[int(rng.integers(0, 2))]
        prompt_idx = len(drafts)
        drafts.append(_Draft(int(t), a, b, "prompt"))
        replied = rng.random() < reply_prob
        n_nudges = 0
        while n_nudges < config.max_nudges and rng.random() < config.nudge_prob:
            n_nudges += 1
        if replied:
            latency = rng.exponential(config.reply_latency_mean_s)
            reply_ts = t + max(latency, 1.0)
            for nudge_ts in sorted(rng.uniform(t + 1.0, reply_ts, size=n_nudges)):
                if int(nudge_ts) > int(t) and int(nudge_ts) < int(reply_ts):
                    drafts.append(_Draft(int(nudge_ts), a, b, "nudge"))
            drafts.append(_Draft(int(reply_ts), b, a, "reply", parent=prompt_idx))
            last = reply_ts
        else:
            window = 2.0 * config.reply_latency_mean_s
            last = t
            for nudge_ts in sorted(rng.uniform(t + 1.0, t + window, size=n_nudges)):
                if int(nudge_ts) > int(t):
                    drafts.append(_Draft(int(nudge_ts), a, b, "nudge"))
                    last = nudge_ts
        t = last + config.exchange_cooldown_s + rng.exponential(gap_mean)


def _author_token_params(authors: list[str], config: SynthConfig, rng):
    """Per-author text style: a vocabulary skew and a valence bias."""
    k = len(authors)
    skew = rng.uniform(config.vocab_skew_min, config.vocab_skew_max, size=k)
    bias = np.clip(rng.normal(0.0, config.valence_spread, size=k), -0.95, 0.95)
    return skew, bias


def _rank_cdf(skew: float, vocab_size: int) -> np.ndarray:
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    weights = ranks ** (-skew)
    return np.cumsum(weights / weights.sum())


def _synth_texts(drafts: list[_Draft], authors: list[str], spammers: frozenset,
                 config: SynthConfig, rng) -> tuple[list[str], list[str]]:
    """Fill subject and body text for every draft, grouped by author.

    Neutral tokens come from a rank-frequency distribution whose skew is an
    author trait shared by subjects and bodies; emotion words follow the
    author's valence bias.  Spam posts use promotional words plus a URL.
    """
    author_ix = {a: i for i, a in enumerate(authors)}
    skew, bias = _author_token_params(authors, config, rng)
    vocab = np.array([f"w{r:04d}" for r in range(config.vocab_size)])
    pos = np.array(_POSITIVE_WORDS)
    neg = np.array(_NEGATIVE_WORDS)

    subjects = [""] * len(drafts)
    bodies = [""] * len(drafts)
    by_author: dict[int, list[int]] = {}
    spam_ix: list[int] = []
    for i, d in enumerate(drafts):
        if d.sender in spammers:
            spam_ix.append(i)
        else:
            by_author.setdefault(author_ix[d.sender], []).append(i)

    for a_ix in sorted(by_author):
        idxs = by_author[a_ix]
        cdf = _rank_cdf(skew[a_ix], config.vocab_size)
        p_pos = 0.5 * (1.0 + bias[a_ix])
        n_msgs = len(idxs)
        subj_len = 1 + rng.poisson(config.subject_tokens, size=n_msgs)
        body_len = 1 + rng.poisson(config.body_tokens, size=n_msgs)
        emo_b_len = rng.poisson(config.emotion_tokens, size=n_msgs)
        emo_s_len = rng.poisson(config.emotion_tokens / 4.0, size=n_msgs)
        total_neutral = int(subj_len.sum() + body_len.sum())
        neutral = vocab[np.searchsorted(cdf, rng.random(total_neutral))]
        emo_total = int(emo_b_len.sum() + emo_s_len.sum())
        emo_words = np.where(rng.random(emo_total) < p_pos,
                             pos[rng.integers(0, len(pos), size=emo_total)],
                             neg[rng.integers(0, len(neg), size=emo_total)])
        n_off = 0
        e_off = 0
        for j, i in enumerate(idxs):
            s_end = n_off + int(subj_len[j])
            b_end = s_end + int(body_len[j])
            es_end = e_off + int(emo_s_len[j])
            eb_end = es_end + int(emo_b_len[j])
            subj_words = list(neutral[n_off:s_end]) + list(emo_words[e_off:es_end])
            body_words = list(neutral[s_end:b_end]) + list(emo_words[es_end:eb_end])
            subjects[i] = " ".join(subj_words)
            bodies[i] = " ".join(body_words)
            n_off = b_end
            e_off = eb_end

    for k, i in enumerate(spam_ix):
        words = [_SPAM_WORDS[int(x)] for x in rng.integers(0, len(_SPAM_WORDS), size=8)]
        subjects[i] = " ".join(words[:3])
        bodies[i] = " ".join(words[3:]) + f" http://promo.example/x{k % 97}"
    return subjects, bodies


def gen_message_stream(graph: CommGraph, config: SynthConfig):
    """Emit a timestamped message stream over ``graph`` plus spam traffic.

    Returns ``(events, GroundTruth)``.  Organic arcs carry serialized
    prompt/nudge/reply exchanges; planted spammers broadcast single-target
    messages at ``spammer_volume_multiplier`` times the median organic
    sender volume and never receive a message back.
    """
    config.validate()
    rng = np.random.default_rng([config.seed, 1])
    t_end = EPOCH_2020 + config.period_days * DAY

    lanes: dict[tuple[str, str], list[tuple[str, str]]] = {}
    for i in range(graph.m):
        a = graph.nodes[graph.arc_src[i]]
        b = graph.nodes[graph.arc_dst[i]]
        key = (a, b) if a <= b else (b, a)
        lanes.setdefault(key, []).append((a, b))

    # Arcs whose origin has structural degree one stay unanswered, so the
    # event graph keeps a genuine degree-one periphery for bottom plans.
    deg = graph.total_degrees
    leaf = {graph.nodes[i] for i in range(graph.n) if deg[i] <= 1}

    drafts: list[_Draft] = []
    reply_params: dict[tuple[str, str], tuple[float, float]] = {}
    for key in sorted(lanes):
        directions = sorted(lanes[key])
        p_reply = config.reply_prob
        if len(directions) == 1 and directions[0][0] in leaf:
            p_reply = 0.0
        _simulate_lane(rng, key[0], key[1], directions, config, t_end, drafts,
                       p_reply)
        for a, b in directions:
            reply_params[(a, b)] = (p_reply, config.reply_latency_mean_s)

    spammers = frozenset(_spammer_names(config))
    if config.spammer_count:
        sent_counts: dict[str, int] = {}
        for d in drafts:
            sent_counts[d.sender] = sent_counts.get(d.sender, 0) + 1
        median_volume = float(np.median(list(sent_counts.values()))) if sent_counts else 1.0
        per_spammer = max(1, round(config.spammer_volume_multiplier * median_volume))
        organic = list(graph.nodes)
        for s in sorted(spammers):
            times = np.sort(rng.integers(EPOCH_2020, int(t_end), size=per_spammer))
            targets = rng.integers(0, len(organic), size=per_spammer)
            for ts, v_ix in zip(times, targets):
                drafts.append(_Draft(int(ts), s, organic[int(v_ix)], "spam"))
            reply_params[(s, "*")] = (0.0, config.reply_latency_mean_s)

    order = sorted(range(len(drafts)), key=lambda i: (drafts[i].ts, i))
    final_id = [""] * len(drafts)
    for k, i in enumerate(order):
        final_id[i] = f"m{k:08d}"

    text_rng = np.random.default_rng([config.seed, 2])
    authors = list(graph.nodes) + sorted(spammers)
    subjects, bodies = _synth_texts(drafts, authors, spammers, config, text_rng)

    followers: dict[str, int] = {}
    following: dict[str, int] = {}
    if config.channel == MICROPOST:
        deg = graph.total_degrees
        f_rng = np.random.default_rng([config.seed, 3])
        f_scale = f_rng.uniform(0.8, 1.2, size=graph.n)
        g_scale = f_rng.uniform(0.5, 1.5, size=graph.n)
        for ix, name in enumerate(graph.nodes):
            followers[name] = max(1, int(round(10.0 * float(deg[ix]) * f_scale[ix])))
            following[name] = max(1, int(round(followers[name] * g_scale[ix])))
        for s in sorted(spammers):
            followers[s] = int(f_rng.integers(10, 100))
            following[s] = int(f_rng.integers(5000, 20000))

    events = []
    for i in order:
        d = drafts[i]
        parent_id = final_id[d.parent] if d.parent >= 0 else None
        if config.channel == EMAIL:
            events.append(MessageEvent(
                message_id=final_id[i],
                timestamp=d.ts,
                sender=d.sender,
                recipients=(d.target,),
                channel=EMAIL,
                in_reply_to=parent_id,
                subject_text=subjects[i],
                body_text=bodies[i],
            ))
        else:
            events.append(MessageEvent(
                message_id=final_id[i],
                timestamp=d.ts,
                sender=d.sender,
                recipients=() if parent_id else (d.target,),
                channel=MICROPOST,
                in_reply_to=parent_id,
                subject_text=None,
                body_text=bodies[i],
                author_followers=followers.get(d.sender),
                author_following=following.get(d.sender),
            ))

    for e in events:
        assert not (set(e.recipients) & spammers), "spammer received a message"
    truth = GroundTruth(spammers=spammers, reply_params=reply_params)
    return events, truth


def generate(config: SynthConfig):
    """Convenience wrapper: grow the graph, then emit its stream."""
    graph = gen_scale_free(config)
    return gen_message_stream(graph, config)


def write_ground_truth(truth: GroundTruth, nodes, stream) -> None:
    """Write a ``node_id,label`` table covering every given node."""
    import csv

    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["node_id", "label"])
    all_nodes = sorted(set(nodes) | set(truth.spammers))
    for v in all_nodes:
        writer.writerow([v, "spam" if v in truth.spammers else "ham"])
