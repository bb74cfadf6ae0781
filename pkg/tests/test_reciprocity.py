import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DAY, chat, graph_of, trade, trust
from oracles import random_events, random_timeline, sweep_layer_counts, sweep_partitions
from recipnet.model import Layer, TrustLevel
from recipnet.reciprocity import (
    bucket_of,
    cancellation_analysis,
    collapse_trust,
    layer_partitions,
    pair_timelines,
    partition_pair,
    reciprocation_stats,
    response_time_histogram,
)


def fields(recs):
    return [(r.index, r.t_forward, r.t_backward, r.subsumed_forward_count) for r in recs]


def test_bucket_of():
    assert [bucket_of(i) for i in (1, 2, 3, 4, 9)] == ["first", "second", "third", "other", "other"]


def test_partition_basic():
    recs = partition_pair([1, 2, 10, 20], [5, 6, 25])
    assert fields(recs) == [(1, 1, 5, 1), (2, 10, 25, 1)]
    assert recs[0].closed and recs[0].response_time_days == 4 / DAY


def test_partition_ties():
    # a reply at the opening instant closes with zero response time
    assert fields(partition_pair([5], [5])) == [(1, 5, 5, 0)]
    # forward edges at the closing instant are absorbed
    assert fields(partition_pair([1, 5, 5, 6], [5])) == [(1, 1, 5, 2), (2, 6, None, 0)]
    # duplicate forward at the opening instant is subsumed
    assert fields(partition_pair([3, 3], [4, 4])) == [(1, 3, 4, 1)]


def test_partition_open_and_ignored_backward():
    assert fields(partition_pair([10, 11, 12], [1, 2])) == [(1, 10, None, 2)]
    assert partition_pair([], [1, 2]) == []
    r = partition_pair([4], [])[0]
    assert not r.closed and r.response_time_days is None


def test_partition_rejects_unsorted():
    with pytest.raises(ValueError):
        partition_pair([3, 1], [])
    with pytest.raises(ValueError):
        partition_pair([1], [5, 2])


def test_partition_matches_sweep_random():
    rng = random.Random(5)
    for _ in range(2000):
        f, b = random_timeline(rng)
        assert fields(partition_pair(f, b)) == sweep_partitions(f, b)


timelines = st.tuples(
    st.lists(st.integers(0, 30), max_size=40).map(sorted),
    st.lists(st.integers(0, 30), max_size=40).map(sorted),
)


@settings(max_examples=300, deadline=None)
@given(timelines)
def test_partition_invariants(tl):
    f, b = tl
    recs = partition_pair(f, b)
    # every forward edge is accounted for exactly once
    assert sum(1 + r.subsumed_forward_count for r in recs) == len(f)
    assert [r.index for r in recs] == list(range(1, len(recs) + 1))
    # only the last partition may be open
    assert all(r.closed for r in recs[:-1])
    for r in recs:
        if r.closed:
            assert r.t_backward >= r.t_forward
    for r, s in zip(recs, recs[1:]):
        assert s.t_forward > r.t_backward
    closed = [r.t_backward for r in recs if r.closed]
    assert len(closed) == len(set(closed)) or len(b) != len(set(b))
    assert len(closed) <= len(b)


def test_pair_timelines_initiator_and_trust_grants():
    g = graph_of([
        chat(5, "b", "a"), chat(7, "a", "b"), chat(9, "b", "a"),
        trust(1, "a", "c", TrustLevel.REMOVE), trust(2, "c", "a"), trust(3, "a", "c"),
    ])
    assert pair_timelines(g, Layer.CHAT) == [("b", "a", [5, 9], [7])]
    assert pair_timelines(g, Layer.TRUST) == [("c", "a", [2], [3])]


def test_reciprocation_stats_worked_example():
    # a->b: forward 0, back 1 day; forward 2 days, 3 days (subsumed), back 5 days; forward 9 (open)
    g = graph_of([
        trade(0, "a", "b"), trade(DAY, "b", "a"),
        trade(2 * DAY, "a", "b"), trade(3 * DAY, "a", "b"), trade(5 * DAY, "b", "a"),
        trade(9 * DAY, "a", "b"),
        trade(0, "c", "d"),
    ])
    s = reciprocation_stats(g, Layer.TRADE)
    assert s.total_forward_edges == 5
    assert s.counts == {"first": 1, "second": 1, "third": 0, "other": 0}
    assert s.total_rate == pytest.approx(2 / 5)
    assert s.mean_response_days["first"] == 1.0
    assert s.mean_response_days["second"] == 3.0
    assert s.mean_response_days["third"] is None
    assert s.mean_response_days["overall"] == 2.0
    d = s.to_dict()
    assert d["all_forward_edges"] == 5 and d["first_rate"] == 0.2 and d["total_reciprocation"] == 2


def test_stats_match_layer_sweep_oracle():
    rng = random.Random(11)
    for _ in range(200):
        evs = random_events(rng, rng.randint(1, 120), n_players=5)
        g = graph_of(evs)
        for layer in Layer:
            fwd, counts, secs = sweep_layer_counts(evs, layer)
            s = reciprocation_stats(g, layer)
            assert s.total_forward_edges == fwd
            assert s.counts == counts
            for b, n in counts.items():
                if n:
                    assert s.mean_response_days[b] == secs[b] / n / DAY


def test_threads_do_not_change_partitions():
    rng = random.Random(2)
    g = graph_of(random_events(rng, 3000, n_players=40))
    for layer in Layer:
        assert layer_partitions(g, layer, threads=1) == layer_partitions(g, layer, threads=8)


def test_response_time_histogram():
    recs = partition_pair([0, 10 * DAY, 20 * DAY], [DAY // 2, 12 * DAY])
    assert response_time_histogram(recs, 1.0) == {0: 1, 2: 1}
    assert response_time_histogram(recs, 7.0) == {0: 2}
    with pytest.raises(ValueError):
        response_time_histogram(recs, 0)


def test_collapse_trust():
    evs = [trust(1, "a", "b", lvl) for lvl in TrustLevel] + [chat(2, "a", "b")]
    out, report = collapse_trust(evs)
    assert [e.trust_level for e in out[:5]] == [
        TrustLevel.TRUSTEE if lvl is TrustLevel.TRUSTEE else TrustLevel.REMOVE for lvl in TrustLevel
    ]
    assert out[5] == evs[5]
    assert report.trust == 1 and report.not_trust == 4
    assert report.to_dict()["per_level"]["trustee"] == 1


R = TrustLevel.REMOVE


def test_cancellation_reciprocated():
    evs = [trust(0, "a", "b"), trust(DAY, "b", "a"), trust(3 * DAY, "b", "a", R), trust(5 * DAY, "a", "b", R)]
    s = cancellation_analysis(evs)
    assert s.mutual_trust_pairs == 1
    assert s.cancellation_initiations == 1 and s.cancellation_reciprocations == 1
    assert s.mean_cancellation_response_days == 2.0
    assert s.one_way_pairs == 0


def test_cancellation_unreciprocated_and_patience():
    evs = [
        trust(0, "a", "b"), trust(DAY, "b", "a"), trust(2 * DAY, "a", "b", R),  # initiated, not answered
        trust(0, "c", "d"),  # waited indefinitely
        trust(0, "e", "f"), trust(DAY, "e", "f", R),  # downgraded without reply
        trust(0, "g", "h"), trust(DAY, "h", "g", R),  # responder answered with a revoke: residual
    ]
    s = cancellation_analysis(evs)
    assert s.mutual_trust_pairs == 1
    assert s.cancellation_initiations == 1 and s.cancellation_reciprocations == 0
    assert s.mean_cancellation_response_days is None
    assert (s.one_way_pairs, s.waited_indefinitely, s.downgraded_without_reply, s.residual) == (3, 1, 1, 1)
    d = s.to_dict()
    assert d["waited_indefinitely_fraction"] == pytest.approx(1 / 3)
    assert d["cancellation_reciprocation_rate"] == 0.0
