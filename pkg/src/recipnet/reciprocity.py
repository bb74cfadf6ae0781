"""Per-pair reciprocation partitioning and the statistics built on it.

A pair's *initiator* is the source of the earliest edge between the two
players in the analysed layer.  Edges from initiator to responder are
forward edges; edges the other way are backward edges.  The timeline is cut
into partitions: each opens at an unconsumed forward edge and closes at the
first backward edge at or after it, absorbing every forward edge up to the
close.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Optional

from ._parallel import chunked_map
from .model import SECONDS_PER_DAY, Event, Layer, TemporalMultigraph, TrustLevel

PARTITION_BUCKETS = ("first", "second", "third", "other")


def bucket_of(index: int) -> str:
    return PARTITION_BUCKETS[min(index, 4) - 1]


@dataclass(frozen=True)
class PartitionRecord:
    pair: tuple
    index: int
    t_forward: int
    t_backward: Optional[int]
    subsumed_forward_count: int

    @property
    def closed(self) -> bool:
        return self.t_backward is not None

    @property
    def response_time_days(self) -> Optional[float]:
        if self.t_backward is None:
            return None
        return (self.t_backward - self.t_forward) / SECONDS_PER_DAY


def _check_sorted(xs, name):
    for a, b in zip(xs, xs[1:]):
        if b < a:
            raise ValueError(f"{name} timestamps are not sorted")


def partition_pair(forward, backward, pair=None) -> list:
    """Split one pair's timeline into reciprocation partitions.

    ``forward`` and ``backward`` are ascending timestamp lists.  A backward
    edge at exactly the opening time closes the partition with response
    time zero.  Backward edges that arrive while no partition is open are
    ignored; a final partition with no reply is returned open.
    """
    _check_sorted(forward, "forward")
    _check_sorted(backward, "backward")
    out = []
    i, j, n = 0, 0, len(forward)
    while i < n:
        t1 = forward[i]
        j = bisect_left(backward, t1, j)
        if j == len(backward):
            out.append(PartitionRecord(pair, len(out) + 1, t1, None, n - i - 1))
            break
        t2 = backward[j]
        j += 1
        k = bisect_right(forward, t2, i + 1)
        out.append(PartitionRecord(pair, len(out) + 1, t1, t2, k - i - 1))
        i = k
    return out


def pair_timelines(graph: TemporalMultigraph, layer: Layer) -> list:
    """``[(initiator, responder, forward_ts, backward_ts)]`` for every pair.

    Trust-layer timelines use grant (Trustee) events only.  Pairs come back
    in sorted (initiator, responder) order.
    """
    timelines = {}
    for e in graph.events:
        if e.layer is not layer or (layer is Layer.TRUST and not e.is_grant):
            continue
        key = (e.src, e.dst) if e.src < e.dst else (e.dst, e.src)
        tl = timelines.get(key)
        if tl is None:
            tl = timelines[key] = (e.src, e.dst, [], [])
        (tl[2] if e.src == tl[0] else tl[3]).append(e.ts)
    return sorted(timelines.values(), key=lambda t: (t[0], t[1]))


def layer_partitions(graph: TemporalMultigraph, layer: Layer, threads: int = 1) -> list:
    """All partition records of a layer, grouped by pair in pair order."""
    timelines = pair_timelines(graph, layer)
    per_pair = chunked_map(
        lambda tl: partition_pair(tl[2], tl[3], pair=(tl[0], tl[1])), timelines, threads
    )
    return [rec for recs in per_pair for rec in recs]


@dataclass
class ReciprocationStats:
    layer: Layer
    total_forward_edges: int = 0
    counts: dict = field(default_factory=lambda: dict.fromkeys(PARTITION_BUCKETS, 0))
    mean_response_days: dict = field(
        default_factory=lambda: dict.fromkeys(PARTITION_BUCKETS + ("overall",))
    )

    @property
    def total_reciprocations(self) -> int:
        return sum(self.counts.values())

    def rate(self, bucket: str) -> float:
        if not self.total_forward_edges:
            return 0.0
        n = self.total_reciprocations if bucket == "total" else self.counts[bucket]
        return n / self.total_forward_edges

    @property
    def total_rate(self) -> float:
        return self.rate("total")

    def to_dict(self) -> dict:
        row = {"layer": self.layer.tag, "all_forward_edges": self.total_forward_edges}
        for b in PARTITION_BUCKETS:
            row[f"{b}_reciprocation"] = self.counts[b]
            row[f"{b}_rate"] = self.rate(b)
        row["total_reciprocation"] = self.total_reciprocations
        row["total_rate"] = self.total_rate
        for b, v in self.mean_response_days.items():
            row[f"mean_response_days_{b}"] = v
        return row


def stats_from_partitions(layer: Layer, partitions) -> ReciprocationStats:
    stats = ReciprocationStats(layer)
    sums = defaultdict(int)
    for p in partitions:
        stats.total_forward_edges += 1 + p.subsumed_forward_count
        if p.closed:
            b = bucket_of(p.index)
            stats.counts[b] += 1
            sums[b] += p.t_backward - p.t_forward
    for b in PARTITION_BUCKETS:
        if stats.counts[b]:
            stats.mean_response_days[b] = sums[b] / stats.counts[b] / SECONDS_PER_DAY
    if stats.total_reciprocations:
        # integer-second sums keep this exact and order independent
        total = sum(sums.values())
        stats.mean_response_days["overall"] = total / stats.total_reciprocations / SECONDS_PER_DAY
    return stats


def reciprocation_stats(graph: TemporalMultigraph, layer: Layer, threads: int = 1) -> ReciprocationStats:
    """Per-partition-bucket reciprocation counts, rates and mean response times.

    Every forward event counts toward the denominator, including those
    absorbed into an open partition.
    """
    return stats_from_partitions(layer, layer_partitions(graph, layer, threads))


def response_time_histogram(partitions, bin_days: float) -> dict:
    """Count closed partitions per response-time bin ``[k*bin, (k+1)*bin)``."""
    if not bin_days > 0:
        raise ValueError("bin_days must be positive")
    hist = Counter()
    for p in partitions:
        if p.closed:
            hist[math.floor(p.response_time_days / bin_days)] += 1
    return dict(sorted(hist.items()))


# -- trust collapse ---------------------------------------------------------


@dataclass
class TrustCollapseReport:
    per_level: dict = field(default_factory=lambda: {lvl: 0 for lvl in TrustLevel})

    @property
    def trust(self) -> int:
        return self.per_level[TrustLevel.TRUSTEE]

    @property
    def not_trust(self) -> int:
        return sum(n for lvl, n in self.per_level.items() if lvl is not TrustLevel.TRUSTEE)

    def to_dict(self) -> dict:
        return {
            "per_level": {lvl.name.lower(): self.per_level[lvl] for lvl in sorted(TrustLevel, reverse=True)},
            "trust": self.trust,
            "not_trust": self.not_trust,
        }


def collapse_trust(events):
    """Map trust levels to grant (Trustee) or revocation (Remove).

    Returns ``(events, TrustCollapseReport)``; the report holds the level
    histogram before collapsing.
    """
    report = TrustCollapseReport()
    out = []
    for e in events:
        if e.layer is Layer.TRUST:
            report.per_level[e.trust_level] += 1
            if e.trust_level is not TrustLevel.TRUSTEE and e.trust_level is not TrustLevel.REMOVE:
                e = Event(e.ts, e.src, e.dst, e.layer, TrustLevel.REMOVE)
        out.append(e)
    return out, report


# -- cancellation and patience ---------------------------------------------


@dataclass
class CancellationStats:
    mutual_trust_pairs: int = 0
    cancellation_initiations: int = 0
    cancellation_reciprocations: int = 0
    mean_cancellation_response_days: Optional[float] = None
    one_way_pairs: int = 0
    waited_indefinitely: int = 0
    downgraded_without_reply: int = 0

    @property
    def residual(self) -> int:
        return self.one_way_pairs - self.waited_indefinitely - self.downgraded_without_reply

    def _frac(self, n):
        return n / self.one_way_pairs if self.one_way_pairs else 0.0

    def to_dict(self) -> dict:
        return {
            "mutual_trust_pairs": self.mutual_trust_pairs,
            "cancellation_initiations": self.cancellation_initiations,
            "cancellation_reciprocations": self.cancellation_reciprocations,
            "cancellation_reciprocation_rate": (
                self.cancellation_reciprocations / self.cancellation_initiations
                if self.cancellation_initiations else 0.0
            ),
            "mean_cancellation_response_days": self.mean_cancellation_response_days,
            "one_way_pairs": self.one_way_pairs,
            "waited_indefinitely_fraction": self._frac(self.waited_indefinitely),
            "downgraded_without_reply_fraction": self._frac(self.downgraded_without_reply),
            "residual_fraction": self._frac(self.residual),
        }


def _pair_cancellation(a, b, evs):
    """Per-pair outcome: (mutual, initiated, reciprocated delay or None, patience tag)."""
    active = {a: False, b: False}
    mutual = False
    initiator = t_init = None
    delay = None
    first_grant = next((e for e in evs if e.is_grant), None)
    for e in evs:
        if e.is_grant:
            active[e.src] = True
            if active[a] and active[b]:
                mutual = True
            continue
        if mutual and initiator is None and active[e.src]:
            initiator, t_init = e.src, e.ts
        elif initiator is not None and e.src != initiator and delay is None:
            delay = e.ts - t_init
        active[e.src] = False

    patience = None
    if first_grant is not None:
        x, y = first_grant.src, first_grant.dst
        after = [e for e in evs if e.sort_key() > first_grant.sort_key()]
        if not any(e.src == y and e.is_grant for e in after):
            replies = [e for e in after if e.src == y]
            own_revokes = [e for e in after if e.src == x and not e.is_grant]
            if not replies and not active[x]:
                patience = "downgraded" if own_revokes else "residual"
            elif not replies:
                patience = "waited"
            elif own_revokes and own_revokes[0].sort_key() < replies[0].sort_key():
                patience = "downgraded"
            else:
                patience = "residual"
    return mutual, initiator is not None, delay, patience


def cancellation_analysis(events) -> CancellationStats:
    """Cancellation reciprocation and patience over collapsed trust events.

    Among mutually trusting pairs, the first revocation counts as an
    initiation and the partner's next revocation as its reciprocation.
    Patience is measured over pairs whose first grant was never answered by
    a grant: *waited* if the responder never sent any trust event and the
    grant stayed active, *downgraded* if the initiator revoked before any
    reply; the rest is the residual.
    """
    by_pair = defaultdict(list)
    for e in events:
        if e.layer is Layer.TRUST:
            key = (e.src, e.dst) if e.src < e.dst else (e.dst, e.src)
            by_pair[key].append(e)
    stats = CancellationStats()
    delays = []
    for (a, b), evs in sorted(by_pair.items()):
        evs.sort(key=Event.sort_key)
        mutual, initiated, delay, patience = _pair_cancellation(a, b, evs)
        stats.mutual_trust_pairs += mutual
        stats.cancellation_initiations += initiated
        if delay is not None:
            stats.cancellation_reciprocations += 1
            delays.append(delay)
        if patience is not None:
            stats.one_way_pairs += 1
            stats.waited_indefinitely += patience == "waited"
            stats.downgraded_without_reply += patience == "downgraded"
    if delays:
        stats.mean_cancellation_response_days = sum(delays) / len(delays) / SECONDS_PER_DAY
    return stats
