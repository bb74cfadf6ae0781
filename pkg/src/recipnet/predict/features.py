"""Trust-request instances and their cross-layer feature vectors."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections import defaultdict
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .._parallel import chunked_map
from ..model import SECONDS_PER_DAY, Gender, Layer, TemporalMultigraph


@dataclass(frozen=True)
class TrustRequestInstance:
    initiator: str
    responder: str
    t0: int
    reciprocated: bool


def build_instances(graph: TemporalMultigraph, window=None, exclude_last_days: int = 30) -> list:
    """One instance per pair's first trust grant.

    Requests made during the final ``exclude_last_days`` of the window are
    dropped since their outcome cannot be observed.  The label is whether
    the responder ever granted trust back after ``t0``.
    """
    t_start, t_end = window if window is not None else graph.window
    cutoff = t_end - exclude_last_days * SECONDS_PER_DAY
    first = {}
    replied = set()
    for e in graph.events:
        if e.layer is not Layer.TRUST or not e.is_grant or not t_start <= e.ts <= t_end:
            continue
        key = (e.src, e.dst) if e.src < e.dst else (e.dst, e.src)
        head = first.get(key)
        if head is None:
            first[key] = e
        elif e.src == head.dst and e.ts > head.ts:
            replied.add(key)
    return [
        TrustRequestInstance(head.src, head.dst, head.ts, key in replied)
        for key, head in sorted(first.items())
        if head.ts <= cutoff
    ]


@dataclass(frozen=True)
class FeatureConfig:
    include_trust: bool = True
    include_trade: bool = False
    include_homophily: bool = False
    k_days: int = 0

    def __post_init__(self):
        if not (self.include_trust or self.include_trade or self.include_homophily):
            raise ValueError("at least one feature group must be enabled")
        if self.k_days < 0:
            raise ValueError("K must be non-negative")

    @property
    def uses_k(self) -> bool:
        return self.include_trade and self.k_days > 0

    @property
    def label(self) -> str:
        parts = []
        if self.include_trust:
            parts.append("trust")
        if self.include_trade:
            parts.append(f"trade(K={self.k_days})")
        if self.include_homophily:
            parts.append("homophily")
        return "+".join(parts)

    @classmethod
    def parse(cls, spec: str, k_days: int = 0) -> "FeatureConfig":
        groups = {g.strip() for g in spec.split("+") if g.strip()}
        unknown = groups - {"trust", "trade", "homophily"}
        if unknown:
            raise ValueError(f"unknown feature group(s): {', '.join(sorted(unknown))}")
        return cls("trust" in groups, "trade" in groups, "homophily" in groups, k_days)


@dataclass(frozen=True)
class FeatureVector:
    trust_deg_A: Optional[int] = None
    trust_deg_B: Optional[int] = None
    trade_deg_A: Optional[int] = None
    trade_deg_B: Optional[int] = None
    past_trades_AB: Optional[int] = None
    past_trades_BA: Optional[int] = None
    future_trades_AB: Optional[int] = None
    future_trades_BA: Optional[int] = None
    gender_homophily: Optional[int] = None
    experience_diff: Optional[int] = None

    def present(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


def feature_names(config: FeatureConfig) -> list:
    names = []
    if config.include_trust:
        names += ["trust_deg_A", "trust_deg_B"]
    if config.include_trade:
        names += ["trade_deg_A", "trade_deg_B", "past_trades_AB", "past_trades_BA"]
        if config.k_days > 0:
            names += ["future_trades_AB", "future_trades_BA"]
    if config.include_homophily:
        names += ["gender_homophily", "experience_diff"]
    return names


class MissingDemographics(ValueError):
    pass


class FeatureIndex:
    """Per-graph lookup tables for constant-time-ish feature extraction.

    Degrees are distinct-neighbour counts over trust grants (resp. trades)
    in either direction strictly before the request time.
    """

    def __init__(self, graph: TemporalMultigraph):
        first_contact = {Layer.TRUST: defaultdict(dict), Layer.TRADE: defaultdict(dict)}
        trades = defaultdict(list)
        for e in graph.events:
            if e.layer is Layer.TRADE:
                trades[(e.src, e.dst)].append(e.ts)
            elif not (e.layer is Layer.TRUST and e.is_grant):
                continue
            contacts = first_contact[e.layer]
            contacts[e.src].setdefault(e.dst, e.ts)
            contacts[e.dst].setdefault(e.src, e.ts)
        self._contacts = {
            layer: {n: sorted(d.values()) for n, d in per_node.items()}
            for layer, per_node in first_contact.items()
        }
        self._trades = dict(trades)

    def degree_before(self, layer: Layer, node, t0) -> int:
        return bisect_left(self._contacts[layer].get(node, ()), t0)

    def trades_between(self, src, dst, lo, hi=None) -> int:
        """Trades src->dst with ``lo <= ts <= hi``, or ``ts < lo`` when ``hi`` is None."""
        ts = self._trades.get((src, dst), ())
        if hi is None:
            return bisect_left(ts, lo)
        return bisect_right(ts, hi) - bisect_left(ts, lo)


def extract_features(instance, index, demographics, config: FeatureConfig) -> FeatureVector:
    """Feature vector of one request; ``index`` may be a graph or a FeatureIndex."""
    if isinstance(index, TemporalMultigraph):
        index = FeatureIndex(index)
    a, b, t0 = instance.initiator, instance.responder, instance.t0
    values = {}
    if config.include_trust:
        values["trust_deg_A"] = index.degree_before(Layer.TRUST, a, t0)
        values["trust_deg_B"] = index.degree_before(Layer.TRUST, b, t0)
    if config.include_trade:
        values["trade_deg_A"] = index.degree_before(Layer.TRADE, a, t0)
        values["trade_deg_B"] = index.degree_before(Layer.TRADE, b, t0)
        values["past_trades_AB"] = index.trades_between(a, b, t0)
        values["past_trades_BA"] = index.trades_between(b, a, t0)
        if config.k_days > 0:
            hi = t0 + config.k_days * SECONDS_PER_DAY
            values["future_trades_AB"] = index.trades_between(a, b, t0, hi)
            values["future_trades_BA"] = index.trades_between(b, a, t0, hi)
    if config.include_homophily:
        da, db = demographics.get(a), demographics.get(b)
        if da is None or db is None:
            missing = a if da is None else b
            raise MissingDemographics(f"no experience level for player {missing!r}")
        same = da.gender is db.gender and da.gender is not Gender.UNKNOWN
        values["gender_homophily"] = int(same)
        values["experience_diff"] = da.experience - db.experience
    return FeatureVector(**values)


@dataclass
class FeatureMatrix:
    names: list
    X: np.ndarray
    y: np.ndarray
    instances: list
    skipped: list  # (instance, reason)


def feature_matrix(instances, index: FeatureIndex, demographics, config: FeatureConfig, threads: int = 1) -> FeatureMatrix:
    names = feature_names(config)

    def one(inst):
        try:
            return extract_features(inst, index, demographics, config)
        except MissingDemographics as exc:
            return exc

    results = chunked_map(one, instances, threads)
    rows, kept, skipped = [], [], []
    for inst, res in zip(instances, results):
        if isinstance(res, MissingDemographics):
            skipped.append((inst, str(res)))
            continue
        present = res.present()
        rows.append([present[n] for n in names])
        kept.append(inst)
    X = np.array(rows, dtype=float).reshape(len(rows), len(names))
    y = np.array([int(i.reciprocated) for i in kept], dtype=int)
    return FeatureMatrix(names, X, y, kept, skipped)
