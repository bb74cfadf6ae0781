"""Edge-log and demographics CSV parsing, chat sessionization, and writers.

Edge log header: ``ts,src,dst,layer,attr``.  ``attr`` is the trust level
(0-4) on trust rows and empty otherwise.  Demographics header:
``player,gender,experience`` with gender in ``M``, ``F``, ``?``.
"""

from __future__ import annotations

import csv
import io
import logging
from collections import Counter
from dataclasses import dataclass, field

from .model import (
    Event,
    Gender,
    Layer,
    PlayerDemographics,
    TrustLevel,
    day_index,
)

log = logging.getLogger(__name__)

EDGE_HEADER = ["ts", "src", "dst", "layer", "attr"]
DEMO_HEADER = ["player", "gender", "experience"]


class IngestError(ValueError):
    """Unrecoverable input problem (bad header, duplicate player)."""


@dataclass
class IngestReport:
    read: int = 0
    accepted: int = 0
    rejected: list = field(default_factory=list)  # (line number, reason)
    per_layer: dict = field(default_factory=dict)
    min_ts: int | None = None
    max_ts: int | None = None

    @property
    def rejected_count(self) -> int:
        return len(self.rejected)

    def to_dict(self) -> dict:
        reasons = Counter(reason for _, reason in self.rejected)
        return {
            "records_read": self.read,
            "records_accepted": self.accepted,
            "records_rejected": self.rejected_count,
            "rejection_reasons": dict(sorted(reasons.items())),
            "per_layer": {layer.tag: self.per_layer.get(layer, 0) for layer in Layer},
            "min_ts": self.min_ts,
            "max_ts": self.max_ts,
        }


class _Reject(Exception):
    pass


def _text(stream):
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(bytes(stream).decode("utf-8"), newline="")
    if isinstance(stream, io.TextIOBase):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8", newline="")


def _parse_row(row) -> Event:
    if len(row) != 5:
        raise _Reject("field-count")
    ts_s, src, dst, layer_s, attr = row
    try:
        ts = int(ts_s)
    except ValueError:
        raise _Reject("bad-timestamp") from None
    if ts < 0:
        raise _Reject("bad-timestamp")
    if not src or not dst:
        raise _Reject("missing-player")
    if src == dst:
        raise _Reject("self-loop")
    try:
        layer = Layer.parse(layer_s)
    except ValueError:
        raise _Reject("bad-layer") from None
    if layer is Layer.TRUST:
        try:
            level = TrustLevel(int(attr))
        except ValueError:
            raise _Reject("bad-trust-level") from None
        return Event(ts, src, dst, layer, level)
    if attr:
        raise _Reject("unexpected-attr")
    return Event(ts, src, dst, layer)


def parse_edge_log(stream):
    """Parse an edge-log CSV into ``(events, IngestReport)``.

    ``stream`` may be bytes, a binary file object or a text file object.
    Malformed rows are counted and skipped; only a wrong header raises.
    Events come back in file order.
    """
    reader = csv.reader(_text(stream))
    header = next(reader, None)
    if header != EDGE_HEADER:
        raise IngestError(f"edge log header must be {','.join(EDGE_HEADER)!r}, got {header!r}")
    report = IngestReport()
    per_layer = Counter()
    events = []
    lo = hi = None
    for lineno, row in enumerate(reader, start=2):
        report.read += 1
        try:
            e = _parse_row(row)
        except _Reject as exc:
            report.rejected.append((lineno, str(exc)))
            continue
        events.append(e)
        per_layer[e.layer] += 1
        if lo is None or e.ts < lo:
            lo = e.ts
        if hi is None or e.ts > hi:
            hi = e.ts
    report.accepted = len(events)
    report.per_layer = dict(per_layer)
    report.min_ts, report.max_ts = lo, hi
    if report.rejected:
        log.info("edge log: %d of %d records rejected", report.rejected_count, report.read)
    return events, report


def write_edge_log(events, fh) -> None:
    """Write events as an edge-log CSV to the text handle ``fh``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(EDGE_HEADER)
    for e in events:
        attr = "" if e.trust_level is None else int(e.trust_level)
        w.writerow([e.ts, e.src, e.dst, e.layer.tag, attr])


def sessionize_chat(events):
    """Collapse chat events per (src, dst, UTC day) to the earliest one.

    Non-chat events pass through untouched; relative order is preserved.
    """
    keep = {}
    for i, e in enumerate(events):
        if e.layer is not Layer.CHAT:
            continue
        key = (e.src, e.dst, day_index(e.ts))
        cur = keep.get(key)
        if cur is None or e.ts < events[cur].ts:
            keep[key] = i
    chosen = set(keep.values())
    return [e for i, e in enumerate(events) if e.layer is not Layer.CHAT or i in chosen]


_GENDERS = {"M": Gender.M, "F": Gender.F}


def parse_demographics(stream, rejects: list | None = None) -> dict:
    """Parse a demographics CSV into ``{player: PlayerDemographics}``.

    Records with negative or unparsable experience are skipped and, when
    ``rejects`` is given, appended to it as ``(line number, reason)``.
    A repeated player id raises ``IngestError``.
    """
    reader = csv.reader(_text(stream))
    header = next(reader, None)
    if header != DEMO_HEADER:
        raise IngestError(f"demographics header must be {','.join(DEMO_HEADER)!r}, got {header!r}")
    out = {}
    for lineno, row in enumerate(reader, start=2):
        reason = None
        if len(row) != 3 or not row[0]:
            reason = "field-count"
        else:
            player, gender, exp = row
            try:
                experience = int(exp)
            except ValueError:
                experience = None
            if experience is None or experience < 0:
                reason = "bad-experience"
        if reason is not None:
            if rejects is not None:
                rejects.append((lineno, reason))
            continue
        if player in out:
            raise IngestError(f"duplicate player id {player!r} on line {lineno}")
        out[player] = PlayerDemographics(player, _GENDERS.get(gender, Gender.UNKNOWN), experience)
    return out


def write_demographics(demographics, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(DEMO_HEADER)
    for player in sorted(demographics):
        d = demographics[player]
        w.writerow([d.player, d.gender.value, d.experience])
