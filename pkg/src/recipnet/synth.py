"""Seeded generator of barrier-coupled chat/trade/trust interaction logs.

Every activated pair in a layer produces a run of *episodes*: a forward
edge, answered with the layer's reciprocation probability after a
power-law distributed delay.  A run continues (with ``continue_prob``) only
after an answered episode, and the next forward edge always falls on a
later UTC day than the previous reply.  With that structure each planted
reply closes exactly one partition, chat sessionization is a no-op, and the
recorded ground truth equals what the analytics measure.

Trust requests additionally draw *companion* chat and trade replies from
responder to initiator; the trust reply probability is
``sigmoid(beta0 + beta_trade * trades_before_reply)``.

All randomness comes from ``numpy.random.PCG64`` through uniform draws only,
so a seed fixes the output bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .model import (
    SECONDS_PER_DAY,
    Event,
    Gender,
    Layer,
    PlayerDemographics,
    TrustLevel,
    day_index,
)
from .reciprocity import ReciprocationStats, bucket_of


@dataclass
class LayerParams:
    pairs: int
    p: float
    continue_prob: float = 0.0
    gap_days: float = 5.0
    delay_alpha: float = 2.0
    delay_cutoff: int = 30
    mean_delay_days: float = 1.0

    def validate(self, name):
        if self.pairs < 0:
            raise ValueError(f"{name}.pairs must be non-negative")
        for attr in ("p", "continue_prob"):
            v = getattr(self, attr)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}.{attr} must lie in [0, 1]")
        if not self.delay_alpha > 1.0:
            raise ValueError(f"{name}.delay_alpha must exceed 1")
        if self.delay_cutoff < 1:
            raise ValueError(f"{name}.delay_cutoff must be at least 1")
        if not (self.gap_days > 0 and self.mean_delay_days > 0):
            raise ValueError(f"{name}: gap_days and mean_delay_days must be positive")

    @property
    def unit_days(self) -> float:
        return self.mean_delay_days / (power_law_mean(self.delay_alpha, self.delay_cutoff) - 0.5)

    @property
    def max_delay_days(self) -> float:
        return self.unit_days * self.delay_cutoff


@dataclass
class Coupling:
    beta0: Optional[float] = -3.8  # None: logit of trust.p
    beta_trade: float = 2.2
    trade_responses: float = 1.0  # mean companion trades per trust request
    chat_responses: float = 2.0
    response_window_days: float = 30.0

    @classmethod
    def off(cls) -> "Coupling":
        """No companions; trust replies follow ``trust.p`` alone."""
        return cls(None, 0.0, 0.0, 0.0)


@dataclass
class Cancellation:
    revoke_prob: float = 0.12
    revoke_reply_prob: float = 0.2
    downgrade_prob: float = 0.08


@dataclass
class Demography:
    gender_weights: dict = field(default_factory=lambda: {"M": 0.6, "F": 0.3, "?": 0.1})
    experience_max: int = 90


def _default_chat():
    return LayerParams(40000, 0.326, 0.5, 2.0, 2.0, 50, 0.317)


def _default_trade():
    return LayerParams(20000, 0.263, 0.4, 10.0, 1.5, 30, 13.0)


def _default_trust():
    return LayerParams(2000, 0.14, 0.05, 30.0, 1.5, 12, 27.0)


@dataclass
class SynthConfig:
    n_players: int = 30000
    window_days: int = 253
    start_ts: int = 1136073600  # 2006-01-01T00:00:00Z
    activity_exponent: float = 0.8
    chat: LayerParams = field(default_factory=_default_chat)
    trade: LayerParams = field(default_factory=_default_trade)
    trust: LayerParams = field(default_factory=_default_trust)
    coupling: Coupling = field(default_factory=Coupling)
    cancellation: Cancellation = field(default_factory=Cancellation)
    demography: Demography = field(default_factory=Demography)
    seed: int = 0

    def layer(self, layer: Layer) -> LayerParams:
        return {Layer.CHAT: self.chat, Layer.TRADE: self.trade, Layer.TRUST: self.trust}[layer]

    def validate(self) -> "SynthConfig":
        if self.n_players < 2:
            raise ValueError("n_players must be at least 2")
        for layer in Layer:
            self.layer(layer).validate(layer.tag)
        for name in ("revoke_prob", "revoke_reply_prob", "downgrade_prob"):
            if not 0.0 <= getattr(self.cancellation, name) <= 1.0:
                raise ValueError(f"cancellation.{name} must lie in [0, 1]")
        c = self.coupling
        if c.trade_responses < 0 or c.chat_responses < 0 or c.response_window_days <= 0:
            raise ValueError("coupling response means must be >= 0 and window > 0")
        total_pairs = sum(self.layer(l).pairs for l in Layer)
        if total_pairs > self.n_players * (self.n_players - 1) // 4:
            raise ValueError("too many pairs requested for n_players")
        for layer in Layer:
            if self._horizon(layer) <= self.start_ts:
                raise ValueError(f"{layer.tag}: window too short for the configured delays")
        return self

    @property
    def t_end(self) -> int:
        return self.start_ts + self.window_days * SECONDS_PER_DAY

    def _horizon(self, layer: Layer) -> int:
        """Latest forward time whose reply (and companions) still fit the window."""
        reach = self.layer(layer).max_delay_days
        if layer is Layer.TRUST:
            reach = max(reach, self.coupling.response_window_days)
        return self.t_end - math.ceil(reach * SECONDS_PER_DAY) - 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SynthConfig":
        return _build(cls, data)


def _build(klass, data):
    if not isinstance(data, dict):
        raise ValueError(f"expected an object for {klass.__name__}")
    known = {f.name: f for f in fields(klass)}
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown {klass.__name__} key(s): {', '.join(sorted(unknown))}")
    kwargs = {}
    defaults = klass() if klass is not LayerParams else None
    for name, value in data.items():
        current = getattr(defaults, name, None) if defaults is not None else None
        if is_dataclass(current):
            merged = asdict(current)
            merged.update(value)
            value = _build(type(current), merged)
        kwargs[name] = value
    if defaults is not None:
        for name in known:
            kwargs.setdefault(name, getattr(defaults, name))
    return klass(**kwargs)


def load_config(path) -> SynthConfig:
    with open(path, encoding="utf-8") as fh:
        return SynthConfig.from_dict(json.load(fh)).validate()


# -- power-law delays -------------------------------------------------------


@lru_cache(maxsize=64)
def _power_law_cdf(alpha: float, cutoff: int) -> np.ndarray:
    w = np.arange(1, cutoff + 1, dtype=float) ** -alpha
    cdf = np.cumsum(w)
    return cdf / cdf[-1]


def power_law_mean(alpha: float, cutoff: int) -> float:
    d = np.arange(1, cutoff + 1, dtype=float)
    w = d ** -alpha
    return float((d * w).sum() / w.sum())


def _check_power_law(alpha, cutoff):
    if not alpha > 1.0:
        raise ValueError("alpha must exceed 1")
    if int(cutoff) != cutoff or cutoff < 1:
        raise ValueError("cutoff must be an integer >= 1")


def sample_power_law_delays(alpha: float, cutoff: int, rng, size: int) -> np.ndarray:
    """``size`` draws from P(d) proportional to d**-alpha on {1, ..., cutoff}."""
    _check_power_law(alpha, cutoff)
    cdf = _power_law_cdf(float(alpha), int(cutoff))
    idx = np.searchsorted(cdf, rng.random(size), side="right")
    return np.minimum(idx, cutoff - 1) + 1


def sample_power_law_delay(alpha: float, cutoff_days: int, rng) -> int:
    return int(sample_power_law_delays(alpha, cutoff_days, rng, 1)[0])


# -- generator ----------------------------------------------------------------


@dataclass
class GroundTruth:
    seed: int
    window: tuple
    forward_events: dict = field(default_factory=lambda: dict.fromkeys(Layer, 0))
    reciprocations: dict = field(default_factory=lambda: {l: [] for l in Layer})
    trust_requests: list = field(default_factory=list)  # (a, b, t0, trades_before_reply, replied)

    def stats(self, layer: Layer) -> ReciprocationStats:
        """Reciprocation statistics implied by what was planted."""
        stats = ReciprocationStats(layer, self.forward_events[layer])
        sums = dict.fromkeys(stats.counts, 0)
        for _, _, index, t1, t2 in self.reciprocations[layer]:
            b = bucket_of(index)
            stats.counts[b] += 1
            sums[b] += t2 - t1
        for b, n in stats.counts.items():
            if n:
                stats.mean_response_days[b] = sums[b] / n / SECONDS_PER_DAY
        if stats.total_reciprocations:
            stats.mean_response_days["overall"] = (
                sum(sums.values()) / stats.total_reciprocations / SECONDS_PER_DAY
            )
        return stats

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "window": list(self.window),
            "layers": {
                l.tag: {
                    "forward_events": self.forward_events[l],
                    "reciprocations": [list(r) for r in self.reciprocations[l]],
                }
                for l in Layer
            },
            "trust_requests": [list(r) for r in self.trust_requests],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruth":
        gt = cls(data["seed"], tuple(data["window"]))
        for l in Layer:
            d = data["layers"][l.tag]
            gt.forward_events[l] = d["forward_events"]
            gt.reciprocations[l] = [tuple(r) for r in d["reciprocations"]]
        gt.trust_requests = [tuple(r) for r in data["trust_requests"]]
        return gt


# revocation levels weighted by their relative frequency in observed trust logs
_REVOKE_LEVELS = (TrustLevel.FRIEND, TrustLevel.VISITOR, TrustLevel.NONE, TrustLevel.REMOVE)
_REVOKE_CDF = np.cumsum([30850, 10928, 4336, 11902]) / (30850 + 10928 + 4336 + 11902)


class _Sampler:
    def __init__(self, seed: int):
        self.rng = np.random.Generator(np.random.PCG64(seed))

    def u(self) -> float:
        return float(self.rng.random())

    def bernoulli(self, p: float) -> bool:
        return self.u() < p

    def exponential(self, mean: float) -> float:
        return -mean * math.log1p(-self.u())

    def poisson(self, lam: float) -> int:
        # inversion by sequential search; fine for the small means used here
        if lam <= 0:
            return 0
        u = self.u()
        k, p = 0, math.exp(-lam)
        c = p
        while u > c and k < 10000:
            k += 1
            p *= lam / k
            c += p
        return k

    def delay_seconds(self, params: LayerParams) -> int:
        d = int(sample_power_law_delays(params.delay_alpha, params.delay_cutoff, self.rng, 1)[0])
        days = params.unit_days * (d - self.u())
        return max(1, int(round(days * SECONDS_PER_DAY)))

    def uniform_int(self, lo: int, hi: int) -> int:
        return lo + min(int(self.u() * (hi - lo + 1)), hi - lo)


def _players(n):
    width = max(4, len(str(n - 1)))
    return [f"p{i:0{width}d}" for i in range(n)]


def _sigmoid(x):
    return 1.0 / (1.0 + math.exp(-x)) if x >= 0 else math.exp(x) / (1.0 + math.exp(x))


def generate(config: SynthConfig):
    """Return ``(events, demographics, ground_truth)`` for ``config``."""
    config.validate()
    s = _Sampler(config.seed)
    players = _players(config.n_players)
    weights = np.arange(1, config.n_players + 1, dtype=float) ** -config.activity_exponent
    cdf = np.cumsum(weights) / weights.sum()
    gt = GroundTruth(config.seed, (config.start_ts, config.t_end))
    events = []

    def draw_pairs(n, exclude):
        out, seen = [], set()
        while len(out) < n:
            i = min(int(np.searchsorted(cdf, s.u(), side="right")), config.n_players - 1)
            j = min(int(np.searchsorted(cdf, s.u(), side="right")), config.n_players - 1)
            key = (min(i, j), max(i, j))
            if i == j or key in seen or key in exclude:
                continue
            seen.add(key)
            out.append((players[i], players[j]))
        return out, seen

    trust_pairs, trust_keys = draw_pairs(config.trust.pairs, set())
    chat_pairs, _ = draw_pairs(config.chat.pairs, trust_keys)
    trade_pairs, _ = draw_pairs(config.trade.pairs, trust_keys)

    for layer, pairs in ((Layer.CHAT, chat_pairs), (Layer.TRADE, trade_pairs)):
        params = config.layer(layer)
        horizon = config._horizon(layer)
        for a, b in pairs:
            t0 = s.uniform_int(config.start_ts, horizon)
            _episodes(s, config, layer, params, a, b, t0, horizon, events, gt)

    c = config.coupling
    beta0 = c.beta0 if c.beta0 is not None else _logit(config.trust.p)
    horizon = config._horizon(Layer.TRUST)
    for a, b in trust_pairs:
        t0 = s.uniform_int(config.start_ts, horizon)
        companions = _companions(s, c, b, a, t0)
        trades = sorted(e.ts for e in companions if e.layer is Layer.TRADE)
        for e in companions:
            events.append(e)
            gt.forward_events[e.layer] += 1
        delay = s.delay_seconds(config.trust)
        n_pre = sum(1 for t in trades if t < t0 + delay)
        replied = s.bernoulli(_sigmoid(beta0 + c.beta_trade * n_pre))
        gt.trust_requests.append((a, b, t0, n_pre, replied))
        mutual, last = _episodes(
            s, config, Layer.TRUST, config.trust, a, b, t0, horizon, events, gt,
            first=(replied, delay),
        )
        _cancellations(s, config, a, b, mutual, last, events)

    demographics = _demographics(s, config, players)
    return events, demographics, gt


def _logit(p):
    p = min(max(p, 1e-12), 1 - 1e-12)
    return math.log(p / (1 - p))


def _episodes(s, config, layer, params, a, b, t, horizon, events, gt, first=None):
    """Emit one pair's forward/reply run; returns (ever replied, last event ts)."""
    level = TrustLevel.TRUSTEE if layer is Layer.TRUST else None
    index, ever = 1, False
    last = t
    while True:
        events.append(Event(t, a, b, layer, level))
        gt.forward_events[layer] += 1
        if first is not None and index == 1:
            replied, delay = first
        else:
            replied = s.bernoulli(params.p)
            delay = s.delay_seconds(params) if replied else 0
        if not replied:
            return ever, last
        t2 = t + delay
        events.append(Event(t2, b, a, layer, level))
        gt.reciprocations[layer].append((a, b, index, t, t2))
        ever, last = True, t2
        if not s.bernoulli(params.continue_prob):
            return ever, last
        nxt = (day_index(t2) + 1) * SECONDS_PER_DAY + int(s.exponential(params.gap_days) * SECONDS_PER_DAY)
        if nxt > horizon:
            return ever, last
        t, index = nxt, index + 1


def _companions(s, c, src, dst, t0):
    """Chat and trade replies from the trust responder after a request."""
    out = []
    span = c.response_window_days * SECONDS_PER_DAY
    for layer, mean in ((Layer.TRADE, c.trade_responses), (Layer.CHAT, c.chat_responses)):
        times = sorted(t0 + 1 + int(s.u() * span) for _ in range(s.poisson(mean)))
        if layer is Layer.CHAT:
            by_day = {}
            for t in times:
                by_day.setdefault(day_index(t), t)
            times = sorted(by_day.values())
        out.extend(Event(t, src, dst, layer) for t in times)
    return out


def _revoke_level(s):
    return _REVOKE_LEVELS[min(int(np.searchsorted(_REVOKE_CDF, s.u(), side="right")), 3)]


def _cancellations(s, config, a, b, mutual, last, events):
    cc = config.cancellation
    trust = config.trust
    if mutual:
        if not s.bernoulli(cc.revoke_prob):
            return
        x, y = (a, b) if s.bernoulli(0.5) else (b, a)
        t = last + s.delay_seconds(trust)
        if t > config.t_end:
            return
        events.append(Event(t, x, y, Layer.TRUST, _revoke_level(s)))
        if s.bernoulli(cc.revoke_reply_prob):
            t2 = t + s.delay_seconds(trust)
            if t2 <= config.t_end:
                events.append(Event(t2, y, x, Layer.TRUST, _revoke_level(s)))
    elif s.bernoulli(cc.downgrade_prob):
        t = last + s.delay_seconds(trust)
        if t <= config.t_end:
            events.append(Event(t, a, b, Layer.TRUST, _revoke_level(s)))


def _demographics(s, config, players):
    genders = list(config.demography.gender_weights.items())
    total = sum(w for _, w in genders)
    cum = np.cumsum([w for _, w in genders]) / total
    out = {}
    for p in players:
        token = genders[min(int(np.searchsorted(cum, s.u(), side="right")), len(genders) - 1)][0]
        gender = {"M": Gender.M, "F": Gender.F}.get(token, Gender.UNKNOWN)
        out[p] = PlayerDemographics(p, gender, s.uniform_int(1, config.demography.experience_max))
    return out
