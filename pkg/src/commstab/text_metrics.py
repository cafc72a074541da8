"""Semantic metrics over message text: sentiment, emotionality, complexity.

Sentiment is produced by a pluggable scorer mapping text to [0, 1] with
0.5 neutral; the built-in scorer counts lexicon hits.  Emotionality is
the deviation from neutral, 2|v - 0.5|.  Complexity is the mean add-one
smoothed unigram surprisal of a message against the corpus it belongs to.
"""
from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from importlib import resources
from math import log2

import numpy as np

from .correlate import CorrelationResult, correlate_vectors
from .events import MessageEvent

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

#: Variable order used by the subject/body correlation matrices.
SEMANTIC_VARS = (
    "body_sentiment", "subject_sentiment",
    "body_complexity", "subject_complexity",
    "body_emotionality", "subject_emotionality",
)


def tokenize(text: str) -> list[str]:
    """Lower-cased alphanumeric runs; underscores and punctuation split."""
    return _TOKEN_RE.findall(text.lower())


class LexiconScorer:
    """Sentiment from positive/negative wordlist hits.

    score = 0.5 + 0.5 * (pos - neg) / max(pos + neg, 1); text without
    lexicon hits (or without tokens at all) scores exactly neutral 0.5.
    """

    def __init__(self, positive: frozenset, negative: frozenset, name: str = "lexicon"):
        self.positive = positive
        self.negative = negative
        self.name = name

    def __call__(self, text: str) -> float:
        pos = 0
        neg = 0
        for tok in tokenize(text):
            if tok in self.positive:
                pos += 1
            elif tok in self.negative:
                neg += 1
        return 0.5 + 0.5 * (pos - neg) / max(pos + neg, 1)


class ConstantScorer:
    """Degenerate scorer for tests: every text gets the same value."""

    def __init__(self, value: float = 0.5):
        self.value = value
        self.name = f"constant:{value:g}"

    def __call__(self, text: str) -> float:
        return self.value


def load_lexicon(path: str | None = None) -> LexiconScorer:
    """Load a scorer from a sectioned wordlist.

    The file is UTF-8 with one token per line under ``[positive]`` and
    ``[negative]`` section headers; blank lines and ``#`` comments are
    skipped.  With no path the wordlist shipped with the package is used.
    """
    if path is None:
        text = resources.files("commstab").joinpath("data/default.lex").read_text("utf-8")
        name = "lexicon:default"
    else:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
        name = f"lexicon:{path}"
    sections: dict[str, set] = {"positive": set(), "negative": set()}
    current: set | None = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            key = line[1:-1].strip().lower()
            if key not in sections:
                raise ValueError(f"unknown lexicon section at line {line_no}: {line!r}")
            current = sections[key]
            continue
        if current is None:
            raise ValueError(f"lexicon token before any section at line {line_no}: {line!r}")
        if len(line.split()) != 1:
            raise ValueError(f"bad lexicon entry at line {line_no}: {line!r}")
        current.add(line.lower())
    return LexiconScorer(frozenset(sections["positive"]), frozenset(sections["negative"]), name)


_DEFAULT_SCORER: LexiconScorer | None = None


def default_scorer() -> LexiconScorer:
    global _DEFAULT_SCORER
    if _DEFAULT_SCORER is None:
        _DEFAULT_SCORER = load_lexicon(None)
    return _DEFAULT_SCORER


def sentiment(text: str, scorer=None) -> float:
    """Score one text in [0, 1]; 0.5 is neutral."""
    if scorer is None:
        scorer = default_scorer()
    return float(scorer(text))


def emotionality(scores) -> float | None:
    """Mean deviation from neutral, 2|v - 0.5|; None for an empty list."""
    scores = list(scores)
    if not scores:
        return None
    return sum(2.0 * abs(v - 0.5) for v in scores) / len(scores)


@dataclass(frozen=True)
class CorpusModel:
    counts: dict[str, int]
    total: int

    @property
    def vocab_size(self) -> int:
        return len(self.counts)


def build_corpus_model(texts) -> CorpusModel:
    counts: Counter = Counter()
    total = 0
    for text in texts:
        toks = tokenize(text)
        counts.update(toks)
        total += len(toks)
    return CorpusModel(dict(counts), total)


def complexity(text: str, model: CorpusModel) -> float | None:
    """Mean -log2 probability of the text's tokens under add-one smoothing.

    Probabilities are (count + 1) / (total + vocab), so unseen tokens are
    still scoreable.  Undefined (None) for token-less text.
    """
    toks = tokenize(text)
    if not toks:
        return None
    denom = model.total + model.vocab_size
    if denom == 0:
        return None
    acc = 0.0
    for tok in toks:
        acc -= log2((model.counts.get(tok, 0) + 1) / denom)
    return acc / len(toks)


def message_text(event: MessageEvent) -> str:
    """Subject and body joined; the unit of per-message semantic scoring."""
    parts = [p for p in (event.subject_text, event.body_text) if p]
    return " ".join(parts)


@dataclass(frozen=True)
class TokenTable:
    """Pre-tokenised corpus in flat id arrays, reusable across event subsets."""

    vocab: dict[str, int]
    ids_flat: np.ndarray
    offsets: np.ndarray
    row_of: dict[str, int]
    pos_mask: np.ndarray
    neg_mask: np.ndarray
    scorer_name: str


def build_token_table(events: list[MessageEvent], scorer: LexiconScorer | None = None) -> TokenTable:
    if scorer is None:
        scorer = default_scorer()
    vocab: dict[str, int] = {}
    ids: list[int] = []
    offsets = [0]
    row_of: dict[str, int] = {}
    for e in events:
        row_of[e.message_id] = len(offsets) - 1
        for tok in tokenize(message_text(e)):
            idx = vocab.get(tok)
            if idx is None:
                idx = len(vocab)
                vocab[tok] = idx
            ids.append(idx)
        offsets.append(len(ids))
    pos_mask = np.zeros(len(vocab), dtype=bool)
    neg_mask = np.zeros(len(vocab), dtype=bool)
    for tok, idx in vocab.items():
        if tok in scorer.positive:
            pos_mask[idx] = True
        elif tok in scorer.negative:
            neg_mask[idx] = True
    return TokenTable(
        vocab=vocab,
        ids_flat=np.array(ids, dtype=np.int32),
        offsets=np.array(offsets, dtype=np.int64),
        row_of=row_of,
        pos_mask=pos_mask,
        neg_mask=neg_mask,
        scorer_name=scorer.name,
    )


@dataclass(frozen=True)
class AuthorSemantics:
    sentiment: float
    emotionality: float
    emotionality_var: float
    complexity: float | None
    n_messages: int


def _segment_sums(values: np.ndarray, lens: np.ndarray) -> np.ndarray:
    csum = np.concatenate([[0.0], np.cumsum(values, dtype=np.float64)])
    ends = np.cumsum(lens)
    return csum[ends] - csum[ends - lens]


def _author_semantics_fast(events, table: TokenTable):
    rows = np.array([table.row_of[e.message_id] for e in events], dtype=np.int64)
    all_lens = np.diff(table.offsets)
    starts = table.offsets[:-1][rows]
    lens = all_lens[rows]
    total = int(lens.sum())
    starts_out = np.cumsum(lens) - lens
    gather = (np.arange(total, dtype=np.int64)
              - np.repeat(starts_out, lens) + np.repeat(starts, lens))
    flat = table.ids_flat[gather]

    counts = np.bincount(flat, minlength=len(table.vocab))
    vocab_present = int((counts > 0).sum())
    denom = float(total + vocab_present)
    logp = np.log2(counts + 1.0) - (log2(denom) if denom > 0 else 0.0)

    comp_sums = _segment_sums(logp[flat], lens)
    pos = _segment_sums(table.pos_mask[flat].astype(np.float64), lens)
    neg = _segment_sums(table.neg_mask[flat].astype(np.float64), lens)
    sent = 0.5 + 0.5 * (pos - neg) / np.maximum(pos + neg, 1.0)
    emo = 2.0 * np.abs(sent - 0.5)
    comp = np.where(lens > 0, -comp_sums / np.maximum(lens, 1), np.nan)
    return sent, emo, comp


def _author_semantics_slow(events, scorer):
    model = build_corpus_model(message_text(e) for e in events)
    sent = np.empty(len(events), dtype=np.float64)
    comp = np.empty(len(events), dtype=np.float64)
    for i, e in enumerate(events):
        text = message_text(e)
        sent[i] = scorer(text)
        c = complexity(text, model)
        comp[i] = c if c is not None else np.nan
    emo = 2.0 * np.abs(sent - 0.5)
    return sent, emo, comp


def author_semantic_values(events: list[MessageEvent], scorer=None, *,
                           token_table: TokenTable | None = None) -> dict[str, AuthorSemantics]:
    """Per-author semantic means over the given event stream.

    The complexity model is built from exactly these events, so reduced
    streams are scored against their own corpus.  A prebuilt TokenTable
    (covering a superset of the events) makes repeated calls cheap.
    """
    if not events:
        return {}
    if scorer is None:
        scorer = default_scorer()
    usable = (isinstance(scorer, LexiconScorer) and token_table is not None
              and token_table.scorer_name == scorer.name
              and all(e.message_id in token_table.row_of for e in events))
    if usable:
        sent, emo, comp = _author_semantics_fast(events, token_table)
    else:
        sent, emo, comp = _author_semantics_slow(events, scorer)

    authors = np.array([e.sender for e in events])
    uniq, inv = np.unique(authors, return_inverse=True)
    k = len(uniq)
    n_msgs = np.bincount(inv, minlength=k)
    sent_mean = np.bincount(inv, weights=sent, minlength=k) / n_msgs
    emo_mean = np.bincount(inv, weights=emo, minlength=k) / n_msgs
    emo_sq = np.bincount(inv, weights=emo * emo, minlength=k) / n_msgs
    emo_var = np.maximum(emo_sq - emo_mean * emo_mean, 0.0)
    defined = ~np.isnan(comp)
    comp_cnt = np.bincount(inv[defined], minlength=k)
    comp_sum = np.bincount(inv[defined], weights=comp[defined], minlength=k)

    out: dict[str, AuthorSemantics] = {}
    for j, author in enumerate(uniq):
        c = float(comp_sum[j] / comp_cnt[j]) if comp_cnt[j] > 0 else None
        out[str(author)] = AuthorSemantics(
            sentiment=float(sent_mean[j]),
            emotionality=float(emo_mean[j]),
            emotionality_var=float(emo_var[j]),
            complexity=c,
            n_messages=int(n_msgs[j]),
        )
    return out


@dataclass(frozen=True)
class SemanticMatrix:
    variables: tuple[str, ...]
    r: list[list[float | None]]
    p: list[list[float | None]]
    n_pairs: list[list[int]]
    n_rows: int


@dataclass(frozen=True)
class SemanticCorrelations:
    email_level: SemanticMatrix | None
    author_level: SemanticMatrix | None


def _matrix_from_columns(columns: list[list], n_rows: int) -> SemanticMatrix:
    k = len(SEMANTIC_VARS)
    r: list[list[float | None]] = [[None] * k for _ in range(k)]
    p: list[list[float | None]] = [[None] * k for _ in range(k)]
    n: list[list[int]] = [[0] * k for _ in range(k)]
    for i in range(k):
        for j in range(i, k):
            res = correlate_vectors(columns[i], columns[j])
            r[i][j] = r[j][i] = res.pearson_r
            p[i][j] = p[j][i] = res.p_value
            n[i][j] = n[j][i] = res.n_pairs
    return SemanticMatrix(SEMANTIC_VARS, r, p, n, n_rows)


def subject_body_correlation(events: list[MessageEvent], scorer=None, *,
                             min_author_msgs: int = 3,
                             flags: list[str] | None = None) -> SemanticCorrelations:
    """Message-level and author-level 6x6 correlation matrices.

    Only events carrying both a subject and a body qualify.  Author rows
    aggregate authors with at least ``min_author_msgs`` qualifying
    messages.  Matrices degenerate to None (with a flag) when no rows
    qualify.
    """
    if scorer is None:
        scorer = default_scorer()
    qualifying = [e for e in events
                  if e.subject_text is not None and e.body_text is not None]
    if len(qualifying) < 3:
        if flags is not None:
            flags.append("fewer than 3 messages with both subject and body")
        return SemanticCorrelations(None, None)
    corpus: list[str] = []
    for e in qualifying:
        corpus.append(e.subject_text)
        corpus.append(e.body_text)
    model = build_corpus_model(corpus)

    per_message: list[list] = [[] for _ in SEMANTIC_VARS]
    by_author: dict[str, list[list]] = defaultdict(lambda: [[] for _ in SEMANTIC_VARS])
    for e in qualifying:
        s_body = float(scorer(e.body_text))
        s_subj = float(scorer(e.subject_text))
        row = [
            s_body,
            s_subj,
            complexity(e.body_text, model),
            complexity(e.subject_text, model),
            2.0 * abs(s_body - 0.5),
            2.0 * abs(s_subj - 0.5),
        ]
        for col, value in zip(per_message, row):
            col.append(value)
        for col, value in zip(by_author[e.sender], row):
            if value is not None:
                col.append(value)

    email_level = _matrix_from_columns(per_message, len(qualifying))

    author_rows: list[list] = [[] for _ in SEMANTIC_VARS]
    n_authors = 0
    for author in sorted(by_author):
        cols = by_author[author]
        if len(cols[0]) < min_author_msgs:
            continue
        n_authors += 1
        for k, col in enumerate(cols):
            author_rows[k].append(sum(col) / len(col) if col else None)
    if n_authors < 3:
        if flags is not None:
            flags.append("fewer than 3 authors meet the message minimum")
        return SemanticCorrelations(email_level, None)
    return SemanticCorrelations(email_level, _matrix_from_columns(author_rows, n_authors))
