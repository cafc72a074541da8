"""Message-event model: canonical account ids, timestamp parsing, ingestion.

An event is one e-mail or one micropost.  Ingestion never mutates raw
content: self-addressed recipients, duplicate mentions and empty text are
kept on the event and interpreted later by the graph / metric layers.
"""
from __future__ import annotations

import csv
import io
import json
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

EMAIL = "email"
MICROPOST = "micropost"
CHANNELS = (EMAIL, MICROPOST)

# Accepted timestamp range, seconds since the Unix epoch: 1970-01-01 .. 2100-01-01.
EPOCH_MIN = 0
EPOCH_MAX = 4102444800

EMAIL_CSV_HEADER = ("message_id", "timestamp", "sender", "recipients",
                    "in_reply_to", "subject", "body")

_ANGLE_ADDR = re.compile(r"<([^<>]*)>")


class IngestError(ValueError):
    """Raised when an input file cannot be ingested at all."""


class RejectThresholdError(IngestError):
    """Raised when the malformed-row fraction exceeds the configured cap."""

    def __init__(self, message: str, result: "IngestResult"):
        super().__init__(message)
        self.result = result


def canonical_node_id(raw: str) -> str:
    """Map a raw account string to its canonical form.

    Lower-cases, trims whitespace, strips a leading ``@`` and reduces
    ``Display Name <addr>`` to ``addr``.  Idempotent.
    """
    s = raw.strip()
    m = _ANGLE_ADDR.search(s)
    if m is not None:
        s = m.group(1).strip()
    s = s.lower()
    if s.startswith("@"):
        s = s.lstrip("@").strip()
    return s


def parse_timestamp(text: str) -> int:
    """Parse an ISO-8601 timestamp to integer epoch seconds (UTC).

    A missing offset is read as UTC; fractional seconds are truncated.
    Raises ValueError outside the supported 1970..2100 range.
    """
    s = text.strip()
    if not s:
        raise ValueError("empty timestamp")
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    ts = int(dt.timestamp())
    if not (EPOCH_MIN <= ts <= EPOCH_MAX):
        raise ValueError(f"timestamp {text!r} outside supported range")
    return ts


@dataclass(frozen=True, slots=True)
class MessageEvent:
    """One communication event, canonicalised but otherwise unfiltered."""

    message_id: str
    timestamp: int
    sender: str
    recipients: tuple[str, ...]
    channel: str
    in_reply_to: str | None = None
    retweet_of: str | None = None
    subject_text: str | None = None
    body_text: str | None = None
    author_followers: int | None = None
    author_following: int | None = None


@dataclass(frozen=True, slots=True)
class RejectedRow:
    line_no: int
    reason: str


@dataclass(slots=True)
class IngestResult:
    events: list[MessageEvent]
    rejects: list[RejectedRow]
    n_rows: int

    @property
    def reject_fraction(self) -> float:
        return len(self.rejects) / self.n_rows if self.n_rows else 0.0


def _opt_text(value: str | None) -> str | None:
    if value is None:
        return None
    return value if value != "" else None


def _parse_email_row(row: list[str], seen_ids: set[str]) -> MessageEvent:
    if len(row) != len(EMAIL_CSV_HEADER):
        raise ValueError(f"expected {len(EMAIL_CSV_HEADER)} fields, got {len(row)}")
    message_id = row[0].strip()
    if not message_id:
        raise ValueError("empty message_id")
    if message_id in seen_ids:
        raise ValueError(f"duplicate message_id {message_id!r}")
    try:
        ts = parse_timestamp(row[1])
    except ValueError as exc:
        raise ValueError(f"bad timestamp {row[1]!r}: {exc}") from exc
    sender = canonical_node_id(row[2])
    if not sender:
        raise ValueError("empty sender")
    recipients = tuple(r for r in (canonical_node_id(part) for part in row[3].split(";")) if r)
    if not recipients:
        raise ValueError("no recipients")
    in_reply_to = row[4].strip() or None
    return MessageEvent(
        message_id=message_id,
        timestamp=ts,
        sender=sender,
        recipients=recipients,
        channel=EMAIL,
        in_reply_to=in_reply_to,
        subject_text=_opt_text(row[5]),
        body_text=_opt_text(row[6]),
    )


def _opt_count(obj: dict, key: str) -> int | None:
    value = obj.get(key)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValueError(f"{key} must be a non-negative integer or null")
    return value


def _opt_ref(obj: dict, key: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"{key} must be a non-empty string or null")
    return value.strip()


def _parse_micropost_obj(obj: dict, seen_ids: set[str]) -> MessageEvent:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    for key in ("id", "created_at", "author", "text", "mentions"):
        if key not in obj:
            raise ValueError(f"missing key {key!r}")
    message_id = obj["id"]
    if not isinstance(message_id, str) or not message_id.strip():
        raise ValueError("id must be a non-empty string")
    message_id = message_id.strip()
    if message_id in seen_ids:
        raise ValueError(f"duplicate message_id {message_id!r}")
    if not isinstance(obj["created_at"], str):
        raise ValueError("created_at must be a string")
    try:
        ts = parse_timestamp(obj["created_at"])
    except ValueError as exc:
        raise ValueError(f"bad timestamp {obj['created_at']!r}: {exc}") from exc
    if not isinstance(obj["author"], str):
        raise ValueError("author must be a string")
    author = canonical_node_id(obj["author"])
    if not author:
        raise ValueError("empty author")
    text = obj["text"]
    if text is not None and not isinstance(text, str):
        raise ValueError("text must be a string or null")
    mentions = obj["mentions"]
    if not isinstance(mentions, list) or any(not isinstance(m, str) for m in mentions):
        raise ValueError("mentions must be a list of strings")
    targets = tuple(t for t in (canonical_node_id(m) for m in mentions) if t)
    return MessageEvent(
        message_id=message_id,
        timestamp=ts,
        sender=author,
        recipients=targets,
        channel=MICROPOST,
        in_reply_to=_opt_ref(obj, "in_reply_to"),
        retweet_of=_opt_ref(obj, "retweet_of"),
        body_text=_opt_text(text),
        author_followers=_opt_count(obj, "author_followers"),
        author_following=_opt_count(obj, "author_following"),
    )


def _open_input(path: str):
    if path == "-":
        return sys.stdin, False
    return open(path, "r", encoding="utf-8", newline=""), True


def ingest(path: str, fmt: str, *, max_reject_fraction: float = 0.1) -> IngestResult:
    """Read events from ``path`` ("-" for stdin) in the given format.

    Malformed rows are collected per row with a reason; if their fraction
    exceeds ``max_reject_fraction`` the whole ingest fails with
    RejectThresholdError (the partial result rides on the exception).
    Returned events are sorted by timestamp, stably.
    """
    if fmt not in CHANNELS:
        raise IngestError(f"unknown format {fmt!r}; expected one of {CHANNELS}")
    stream, owned = _open_input(path)
    try:
        if fmt == EMAIL:
            result = _ingest_email_csv(stream)
        else:
            result = _ingest_micropost_jsonl(stream)
    finally:
        if owned:
            stream.close()
    if result.n_rows and result.reject_fraction > max_reject_fraction:
        raise RejectThresholdError(
            f"rejected {len(result.rejects)} of {result.n_rows} rows "
            f"({result.reject_fraction:.1%} > {max_reject_fraction:.1%} allowed); "
            f"first reject at line {result.rejects[0].line_no}: {result.rejects[0].reason}",
            result,
        )
    result.events.sort(key=lambda e: e.timestamp)
    return result


def _ingest_email_csv(stream) -> IngestResult:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("empty input: missing CSV header") from None
    except csv.Error as exc:
        raise IngestError(f"unreadable CSV: {exc}") from exc
    if tuple(h.strip() for h in header) != EMAIL_CSV_HEADER:
        raise IngestError(
            f"bad CSV header {header!r}; expected {','.join(EMAIL_CSV_HEADER)}")
    events: list[MessageEvent] = []
    rejects: list[RejectedRow] = []
    seen: set[str] = set()
    n_rows = 0
    while True:
        try:
            row = next(reader)
        except StopIteration:
            break
        except csv.Error as exc:
            n_rows += 1
            rejects.append(RejectedRow(reader.line_num, f"CSV parse error: {exc}"))
            continue
        if not row:
            continue
        n_rows += 1
        try:
            event = _parse_email_row(row, seen)
        except ValueError as exc:
            rejects.append(RejectedRow(reader.line_num, str(exc)))
            continue
        seen.add(event.message_id)
        events.append(event)
    return IngestResult(events, rejects, n_rows)


def _ingest_micropost_jsonl(stream) -> IngestResult:
    events: list[MessageEvent] = []
    rejects: list[RejectedRow] = []
    seen: set[str] = set()
    n_rows = 0
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        n_rows += 1
        try:
            obj = json.loads(line)
            event = _parse_micropost_obj(obj, seen)
        except (ValueError, TypeError) as exc:
            rejects.append(RejectedRow(line_no, str(exc)))
            continue
        seen.add(event.message_id)
        events.append(event)
    return IngestResult(events, rejects, n_rows)


def restrict_events(events: list[MessageEvent], removed: set[str]) -> list[MessageEvent]:
    """Reduce an event stream after node removal.

    Events sent by a removed node are dropped.  Surviving events lose the
    removed accounts from their recipient/mention lists; an e-mail whose
    recipients all vanish is dropped with them.  Reply and retweet
    references are kept verbatim (they may dangle afterwards).
    """
    out: list[MessageEvent] = []
    for e in events:
        if e.sender in removed:
            continue
        if any(r in removed for r in e.recipients):
            kept = tuple(r for r in e.recipients if r not in removed)
            if not kept and e.channel == EMAIL:
                continue
            e = MessageEvent(
                message_id=e.message_id, timestamp=e.timestamp, sender=e.sender,
                recipients=kept, channel=e.channel, in_reply_to=e.in_reply_to,
                retweet_of=e.retweet_of, subject_text=e.subject_text,
                body_text=e.body_text, author_followers=e.author_followers,
                author_following=e.author_following)
        out.append(e)
    return out


def write_email_csv(events: list[MessageEvent], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(EMAIL_CSV_HEADER)
    for e in events:
        writer.writerow([
            e.message_id,
            datetime.fromtimestamp(e.timestamp, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            e.sender,
            ";".join(e.recipients),
            e.in_reply_to or "",
            e.subject_text or "",
            e.body_text or "",
        ])


def write_micropost_jsonl(events: list[MessageEvent], stream) -> None:
    for e in events:
        obj = {
            "id": e.message_id,
            "created_at": datetime.fromtimestamp(e.timestamp, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            "author": e.sender,
            "text": e.body_text or "",
            "mentions": list(e.recipients),
            "in_reply_to": e.in_reply_to,
            "retweet_of": e.retweet_of,
            "author_followers": e.author_followers,
            "author_following": e.author_following,
        }
        stream.write(json.dumps(obj, separators=(",", ":")) + "\n")
