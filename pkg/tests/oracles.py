"""Naive reference implementations used as test oracles.

Each one walks the raw data directly and shares no code with the package
beyond the plain data types.
"""

import random

from recipnet.model import Event, Layer, TrustLevel

DAY = 86400


# -- partitions -------------------------------------------------------------------


def sweep_partitions(forward, backward):
    """Replay one pair's timeline event by event.

    At equal timestamps forward edges are handled before backward ones, so a
    reply at the opening instant closes the partition and a forward edge at
    the closing instant is absorbed.  Returns tuples
    (index, t_forward, t_backward or None, subsumed).
    """
    stream = [(t, 0) for t in forward] + [(t, 1) for t in backward]
    stream.sort()
    out = []
    open_t = None
    subsumed = 0
    for t, kind in stream:
        if kind == 0:
            if open_t is None:
                open_t, subsumed = t, 0
            else:
                subsumed += 1
        elif open_t is not None:
            out.append((len(out) + 1, open_t, t, subsumed))
            open_t = None
    if open_t is not None:
        out.append((len(out) + 1, open_t, None, subsumed))
    return out


def sweep_layer_counts(events, layer):
    """Whole-layer sweep: (total forwards, {bucket: closed count}, {bucket: summed seconds})."""
    evs = sorted(
        (e for e in events if e.layer is layer and (layer is not Layer.TRUST or e.trust_level == TrustLevel.TRUSTEE)),
        key=lambda e: (e.ts, e.src, e.dst, int(e.layer), -1 if e.trust_level is None else int(e.trust_level)),
    )
    state = {}  # unordered pair -> [initiator, open_t, n_closed]
    # group per pair first so equal-time forward/backward ordering matches the sweep rule
    per_pair = {}
    for e in evs:
        key = frozenset((e.src, e.dst))
        per_pair.setdefault(key, []).append(e)
    forwards = 0
    counts = {"first": 0, "second": 0, "third": 0, "other": 0}
    secs = dict.fromkeys(counts, 0)
    names = ["first", "second", "third"]
    for key, pe in per_pair.items():
        initiator = pe[0].src
        ordered = sorted(pe, key=lambda e: (e.ts, 0 if e.src == initiator else 1))
        open_t, closed = None, 0
        for e in ordered:
            if e.src == initiator:
                forwards += 1
                if open_t is None:
                    open_t = e.ts
            elif open_t is not None:
                closed += 1
                b = names[closed - 1] if closed <= 3 else "other"
                counts[b] += 1
                secs[b] += e.ts - open_t
                open_t = None
        state[key] = closed
    return forwards, counts, secs


def random_timeline(rng: random.Random, max_events=50, span=40):
    n = rng.randint(0, max_events)
    nf = rng.randint(0, n)
    forward = sorted(rng.randint(0, span) for _ in range(nf))
    backward = sorted(rng.randint(0, span) for _ in range(n - nf))
    return forward, backward


# -- random multilayer instances ----------------------------------------------------


def random_events(rng: random.Random, n_events, n_players=6, span_days=10, grants_only=False):
    players = [f"u{i}" for i in range(n_players)]
    out = []
    for _ in range(n_events):
        a, b = rng.sample(players, 2)
        layer = rng.choice(list(Layer))
        ts = rng.randint(0, span_days * DAY // 3600) * 3600  # hour grid to force ties
        level = None
        if layer is Layer.TRUST:
            level = TrustLevel.TRUSTEE if grants_only or rng.random() < 0.7 else TrustLevel.REMOVE
        out.append(Event(ts, a, b, layer, level))
    return out


def _key(e):
    return (e.ts, e.src, e.dst, int(e.layer), -1 if e.trust_level is None else int(e.trust_level))


def naive_first_response(events):
    """Quadratic scan: per pair, find the first usable event and the first reply(s)."""
    usable = [e for e in events if e.layer is not Layer.TRUST or e.trust_level == TrustLevel.TRUSTEE]
    pairs = {frozenset((e.src, e.dst)) for e in usable}
    forward = {l: 0 for l in Layer}
    resp = {l: {r: 0 for r in Layer} for l in Layer}
    for pair in pairs:
        mine = [e for e in usable if frozenset((e.src, e.dst)) == pair]
        head = mine[0]
        for e in mine:
            if _key(e) < _key(head):
                head = e
        forward[head.layer] += 1
        replies = [e for e in mine if e.src == head.dst]
        if not replies:
            continue
        t = min(e.ts for e in replies)
        for layer in {e.layer for e in replies if e.ts == t}:
            resp[head.layer][layer] += 1
    return forward, resp


def naive_trust_completion(events, horizon_days):
    h = horizon_days * DAY
    grants = [e for e in events if e.layer is Layer.TRUST and e.trust_level == TrustLevel.TRUSTEE]
    pairs = {frozenset((e.src, e.dst)) for e in grants}
    rows = {"complete": [0, 0, 0], "incomplete": [0, 0, 0]}  # forward, chat, trade
    for pair in pairs:
        mine = [e for e in grants if frozenset((e.src, e.dst)) == pair]
        head = min(mine, key=_key)
        a, b, t0 = head.src, head.dst, head.ts
        reply = None
        for e in grants:
            if e.src == b and e.dst == a and t0 < e.ts <= t0 + h:
                if reply is None or e.ts < reply:
                    reply = e.ts
        name = "incomplete" if reply is None else "complete"
        end = t0 + h if reply is None else reply
        rows[name][0] += 1
        for e in events:
            if e.src == b and e.dst == a and t0 < e.ts <= end:
                if e.layer is Layer.CHAT:
                    rows[name][1] += 1
                elif e.layer is Layer.TRADE:
                    rows[name][2] += 1
    return rows


def naive_mean_first_trust_response(events):
    grants = [e for e in events if e.layer is Layer.TRUST and e.trust_level == TrustLevel.TRUSTEE]
    pairs = {frozenset((e.src, e.dst)) for e in grants}
    rts = []
    for pair in pairs:
        mine = sorted((e for e in grants if frozenset((e.src, e.dst)) == pair), key=_key)
        a = mine[0].src
        t0 = mine[0].ts
        backs = [e.ts for e in mine if e.src != a and e.ts >= t0]
        if backs:
            rts.append((min(backs) - t0) / DAY)
    return rts


# -- features -----------------------------------------------------------------------


def naive_features(inst, events, demographics, k_days, homophily=True):
    a, b, t0 = inst.initiator, inst.responder, inst.t0
    grants = [e for e in events if e.layer is Layer.TRUST and e.trust_level == TrustLevel.TRUSTEE]
    trades = [e for e in events if e.layer is Layer.TRADE]

    def degree(evs, node):
        return len({e.dst if e.src == node else e.src for e in evs if node in (e.src, e.dst) and e.ts < t0})

    out = {
        "trust_deg_A": degree(grants, a),
        "trust_deg_B": degree(grants, b),
        "trade_deg_A": degree(trades, a),
        "trade_deg_B": degree(trades, b),
        "past_trades_AB": sum(1 for e in trades if e.src == a and e.dst == b and e.ts < t0),
        "past_trades_BA": sum(1 for e in trades if e.src == b and e.dst == a and e.ts < t0),
    }
    if k_days > 0:
        hi = t0 + k_days * DAY
        out["future_trades_AB"] = sum(1 for e in trades if e.src == a and e.dst == b and t0 <= e.ts <= hi)
        out["future_trades_BA"] = sum(1 for e in trades if e.src == b and e.dst == a and t0 <= e.ts <= hi)
    if homophily:
        da, db = demographics[a], demographics[b]
        out["gender_homophily"] = int(da.gender == db.gender and da.gender.value != "?")
        out["experience_diff"] = da.experience - db.experience
    return out


# -- metrics ------------------------------------------------------------------------


def brute_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    total = 0.0
    for p in pos:
        for n in neg:
            total += 1.0 if p > n else 0.5 if p == n else 0.0
    return total / (len(pos) * len(neg))


def brute_rates(pred, labels):
    """Per-class precision/recall/F1 by explicit counting over the instances."""
    out = {}
    for cls in (0, 1):
        tp = sum(1 for p, l in zip(pred, labels) if p == cls and l == cls)
        predicted = sum(1 for p in pred if p == cls)
        actual = sum(1 for l in labels if l == cls)
        prec = tp / predicted if predicted else 0.0
        rec = tp / actual if actual else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        out[cls] = (prec, rec, f1)
    return out


def metric_cases():
    """Fixed small (scores, labels) cases covering ties, perfect and inverted rankings."""
    cases = [
        ([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0]),
        ([0.1, 0.3, 0.8, 0.9], [1, 1, 0, 0]),
        ([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]),
        ([0.6, 0.4], [1, 0]),
        ([0.4, 0.6], [1, 0]),
        ([0.7, 0.7, 0.2], [1, 0, 0]),
        ([0.2, 0.9, 0.9, 0.4, 0.55], [0, 1, 0, 1, 1]),
        ([0.51, 0.49, 0.5, 0.5, 0.1, 0.99], [1, 1, 0, 1, 0, 0]),
        ([0.3, 0.3, 0.3], [1, 1, 0]),
        ([0.8, 0.6, 0.6, 0.6, 0.2, 0.2], [1, 1, 0, 0, 1, 0]),
        ([0.95, 0.05], [0, 1]),
        ([0.5, 0.49999], [1, 0]),
        ([0.0, 1.0, 0.25, 0.75, 0.5], [0, 1, 0, 1, 0]),
        ([0.6, 0.7, 0.8], [0, 0, 1]),
        ([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], [0, 1, 0, 1, 0, 1, 0, 1]),
    ]
    rng = random.Random(8)
    while len(cases) < 30:
        n = rng.randint(2, 12)
        labels = [rng.randint(0, 1) for _ in range(n)]
        if len(set(labels)) < 2:
            continue
        scores = [rng.choice([0.1, 0.25, 0.5, 0.5, 0.75, 0.9]) for _ in range(n)]
        cases.append((scores, labels))
    return cases
