"""Immutable domain types: events, layers, trust levels, demographics and the
time-sorted temporal multigraph every analysis runs on."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Optional, Sequence

SECONDS_PER_DAY = 86400

PlayerId = str


class Layer(IntEnum):
    # integer values fix the tie-break order chat < trade < trust
    CHAT = 0
    TRADE = 1
    TRUST = 2

    @property
    def tag(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, token: str) -> "Layer":
        try:
            return _LAYER_TOKENS[token]
        except KeyError:
            raise ValueError(f"unknown layer {token!r}") from None


_LAYER_TOKENS = {layer.name.lower(): layer for layer in Layer}


class TrustLevel(IntEnum):
    REMOVE = 0
    NONE = 1
    VISITOR = 2
    FRIEND = 3
    TRUSTEE = 4


class Gender(Enum):
    M = "M"
    F = "F"
    UNKNOWN = "?"


def day_index(ts: int) -> int:
    return ts // SECONDS_PER_DAY


class EventError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class Event:
    ts: int
    src: PlayerId
    dst: PlayerId
    layer: Layer
    trust_level: Optional[TrustLevel] = None

    def __post_init__(self):
        if self.ts < 0:
            raise EventError(f"negative timestamp {self.ts}")
        if self.src == self.dst:
            raise EventError(f"self-loop on {self.src!r}")
        if (self.layer is Layer.TRUST) != (self.trust_level is not None):
            raise EventError("trust_level must be set exactly for trust events")

    def sort_key(self):
        level = -1 if self.trust_level is None else int(self.trust_level)
        return (self.ts, self.src, self.dst, int(self.layer), level)

    @property
    def is_grant(self) -> bool:
        return self.trust_level is TrustLevel.TRUSTEE


@dataclass(frozen=True, slots=True)
class PlayerDemographics:
    player: PlayerId
    gender: Gender
    experience: int

    def __post_init__(self):
        if self.experience < 0:
            raise ValueError(f"negative experience for {self.player!r}")


@dataclass(frozen=True)
class TemporalMultigraph:
    """Time-sorted event log with per-ordered-pair and per-node offset indexes.

    Build through :func:`build_graph`; the constructor does not sort or index.
    """

    events: tuple
    window: tuple
    pair_index: dict = field(repr=False)
    node_index: dict = field(repr=False)

    def __len__(self):
        return len(self.events)

    @property
    def t_start(self) -> int:
        return self.window[0]

    @property
    def t_end(self) -> int:
        return self.window[1]

    @property
    def layers(self) -> frozenset:
        return frozenset(e.layer for e in self.events)

    def pair_events(self, src: PlayerId, dst: PlayerId) -> list:
        return [self.events[i] for i in self.pair_index.get((src, dst), ())]

    def pair_times(self, src: PlayerId, dst: PlayerId, layer: Layer) -> list:
        return [
            self.events[i].ts
            for i in self.pair_index.get((src, dst), ())
            if self.events[i].layer is layer
        ]

    def node_events(self, player: PlayerId) -> list:
        return [self.events[i] for i in self.node_index.get(player, ())]

    def unordered_pairs(self) -> list:
        """Unordered player pairs with at least one event, as sorted 2-tuples."""
        return sorted({(s, d) if s < d else (d, s) for s, d in self.pair_index})


def _check_window(window) -> tuple:
    t_start, t_end = window
    if t_start > t_end:
        raise ValueError(f"empty window [{t_start}, {t_end}]")
    return int(t_start), int(t_end)


def build_graph(events: Iterable[Event], window) -> TemporalMultigraph:
    """Sort ``events`` deterministically and index them.

    Raises ``EventError`` naming the input position of the first event that
    falls outside ``window`` (inclusive bounds).
    """
    t_start, t_end = _check_window(window)
    events = list(events)
    for pos, e in enumerate(events):
        if not t_start <= e.ts <= t_end:
            raise EventError(
                f"event at position {pos} has ts={e.ts} outside window [{t_start}, {t_end}]"
            )
        if e.src == e.dst:
            raise EventError(f"event at position {pos} is a self-loop")
    ordered = tuple(sorted(events, key=Event.sort_key))
    return _index(ordered, (t_start, t_end))


def _index(ordered: tuple, window: tuple) -> TemporalMultigraph:
    pairs = defaultdict(list)
    nodes = defaultdict(list)
    for i, e in enumerate(ordered):
        pairs[(e.src, e.dst)].append(i)
        nodes[e.src].append(i)
        nodes[e.dst].append(i)
    return TemporalMultigraph(
        events=ordered,
        window=window,
        pair_index={k: tuple(v) for k, v in pairs.items()},
        node_index={k: tuple(v) for k, v in nodes.items()},
    )


def restrict(graph: TemporalMultigraph, layers, window=None) -> TemporalMultigraph:
    """Keep only events in ``layers`` whose timestamp lies inside ``window``."""
    layers = frozenset(layers)
    if not layers:
        raise ValueError("restrict needs at least one layer")
    if window is None:
        window = graph.window
    t_start, t_end = _check_window(window)
    if t_start < graph.t_start or t_end > graph.t_end:
        raise ValueError(
            f"window [{t_start}, {t_end}] is not inside graph window {list(graph.window)}"
        )
    kept = tuple(
        e for e in graph.events if e.layer in layers and t_start <= e.ts <= t_end
    )
    return _index(kept, (t_start, t_end))


def events_window(events: Sequence[Event]) -> tuple:
    """Tightest inclusive window covering ``events``; (0, 0) when empty."""
    if not events:
        return (0, 0)
    return (min(e.ts for e in events), max(e.ts for e in events))
