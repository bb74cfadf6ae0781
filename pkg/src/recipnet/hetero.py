"""Cross-layer reciprocation: first-response typing and trust completion."""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import SECONDS_PER_DAY, Layer, TemporalMultigraph, restrict
from .reciprocity import layer_partitions


def _usable(e) -> bool:
    return e.layer is not Layer.TRUST or e.is_grant


def common_window(graph: TemporalMultigraph) -> tuple:
    """Intersection of the time spans covered by each of the three layers."""
    spans = {}
    for e in graph.events:
        lo, hi = spans.get(e.layer, (e.ts, e.ts))
        spans[e.layer] = (min(lo, e.ts), max(hi, e.ts))
    missing = [l.tag for l in Layer if l not in spans]
    if missing:
        raise ValueError(f"empty common window: no events in layer(s) {', '.join(missing)}")
    lo = max(s[0] for s in spans.values())
    hi = min(s[1] for s in spans.values())
    if lo > hi:
        raise ValueError("empty common window: layer time spans do not overlap")
    return lo, hi


def restrict_to_common_window(graph: TemporalMultigraph) -> TemporalMultigraph:
    return restrict(graph, set(Layer), common_window(graph))


@dataclass
class FirstResponseTable:
    forward: dict = field(default_factory=lambda: dict.fromkeys(Layer, 0))
    responses: dict = field(default_factory=lambda: {f: dict.fromkeys(Layer, 0) for f in Layer})

    def rows(self) -> list:
        return [
            {
                "forward_type": f.tag,
                "first_forward_edges": self.forward[f],
                **{f"{r.tag}_reciprocation": self.responses[f][r] for r in Layer},
            }
            for f in Layer
        ]


def first_response_table(graph: TemporalMultigraph) -> FirstResponseTable:
    """Count each pair's first forward edge and the layer(s) of its first reply.

    The globally first edge of a pair (trust revocations ignored) fixes the
    initiator and the row.  The reply is the earliest edge in the opposite
    direction; every layer present among equally-early replies is counted.
    """
    if not graph.events:
        raise ValueError("empty common window: graph has no events")
    first = {}
    reply = {}
    for e in graph.events:
        if not _usable(e):
            continue
        key = (e.src, e.dst) if e.src < e.dst else (e.dst, e.src)
        head = first.get(key)
        if head is None:
            first[key] = e
            continue
        if e.src != head.src:
            r = reply.get(key)
            if r is None:
                reply[key] = (e.ts, {e.layer})
            elif r[0] == e.ts:
                r[1].add(e.layer)
    table = FirstResponseTable()
    for key, head in first.items():
        table.forward[head.layer] += 1
        r = reply.get(key)
        if r is not None:
            for layer in r[1]:
                table.responses[head.layer][layer] += 1
    return table


@dataclass(frozen=True)
class TruncationPolicy:
    horizon_days: float

    def __post_init__(self):
        if not self.horizon_days > 0:
            raise ValueError("horizon_days must be positive")


def mean_trust_response(graph: TemporalMultigraph) -> TruncationPolicy:
    """Horizon = mean response time of closed first trust partitions."""
    closed = [
        p.response_time_days
        for p in layer_partitions(graph, Layer.TRUST)
        if p.index == 1 and p.closed
    ]
    if not closed:
        raise ValueError("no closed trust reciprocations to average")
    mean = sum(closed) / len(closed)
    if mean <= 0:
        raise ValueError("mean trust response time is zero")
    return TruncationPolicy(mean)


@dataclass
class CompletionRow:
    forward: int = 0
    chat: int = 0
    trade: int = 0

    def share(self, layer: Layer):
        total = self.chat + self.trade
        if not total:
            return None
        return (self.chat if layer is Layer.CHAT else self.trade) / total


@dataclass
class TrustCompletionTable:
    complete: CompletionRow = field(default_factory=CompletionRow)
    incomplete: CompletionRow = field(default_factory=CompletionRow)

    def rows(self) -> list:
        out = []
        for name, row in (("complete", self.complete), ("incomplete", self.incomplete)):
            out.append({
                "trust_type": name,
                "forward_edges": row.forward,
                "chat_responses": row.chat,
                "chat_share": row.share(Layer.CHAT),
                "trade_responses": row.trade,
                "trade_share": row.share(Layer.TRADE),
            })
        return out


def trust_completion_table(graph: TemporalMultigraph, policy: TruncationPolicy) -> TrustCompletionTable:
    """Split first trust requests into complete / incomplete and count the
    chat and trade replies that preceded the trust reply (or the horizon)."""
    horizon = policy.horizon_days * SECONDS_PER_DAY
    firsts = {}
    for e in graph.events:
        if e.layer is Layer.TRUST and e.is_grant:
            key = (e.src, e.dst) if e.src < e.dst else (e.dst, e.src)
            firsts.setdefault(key, e)
    table = TrustCompletionTable()
    for key in sorted(firsts):
        head = firsts[key]
        a, b, t0 = head.src, head.dst, head.ts
        back = [e for e in graph.pair_events(b, a) if e.ts > t0]
        reply = next(
            (e.ts for e in back if e.layer is Layer.TRUST and e.is_grant and e.ts <= t0 + horizon),
            None,
        )
        row = table.incomplete if reply is None else table.complete
        end = t0 + horizon if reply is None else reply
        row.forward += 1
        for e in back:
            if e.ts > end:
                break
            if e.layer is Layer.CHAT:
                row.chat += 1
            elif e.layer is Layer.TRADE:
                row.trade += 1
    return table
