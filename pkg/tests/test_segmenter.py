from __future__ import annotations

from hypothesis import given, strategies as st

from oudasim.segmenter import (
    MemoryBuffer,
    assign_segment,
    make_segments,
    memory_view,
    split_by_segment,
)

from conftest import make_record

MIN = 60_000


def test_assign_segment_examples():
    assert assign_segment(0, 15) == 0
    assert assign_segment(899_999, 15) == 0
    assert assign_segment(900_000, 15) == 1


def test_one_hour_at_tau_20_has_three_segments():
    assert {assign_segment(ts, 20) for ts in range(0, 3_600_000, 1000)} == {0, 1, 2}
    segs = make_segments(3_600_000, 20)
    assert [s.index for s in segs] == [0, 1, 2]
    assert not any(s.partial for s in segs)


def test_segments_tile_without_gaps():
    for tau in (15, 20, 30):
        segs = make_segments(3_600_000, tau)
        assert len(segs) == 60 // tau
        assert segs[0].start_ms == 0
        for a, b in zip(segs, segs[1:]):
            assert a.end_ms == b.start_ms
            assert a.end_ms - a.start_ms == tau * MIN


def test_partial_final_segment_flagged():
    segs = make_segments(50 * MIN, 20)
    assert [s.partial for s in segs] == [False, False, True]


@given(st.lists(st.integers(0, 10**8), max_size=50), st.sampled_from([15, 20, 30, 7.5]))
def test_every_record_in_exactly_one_segment(ts_list, tau):
    recs = [make_record(ts=ts) for ts in ts_list]
    parts = split_by_segment(recs, tau)
    flat = [r for rs in parts.values() for r in rs]
    assert sorted(map(id, flat)) == sorted(map(id, recs))
    for t, rs in parts.items():
        for r in rs:
            assert t * tau * MIN <= r.timestamp_ms < (t + 1) * tau * MIN


def _filled_buffer(tau, retention, per_segment=3, num_segments=3):
    buf = MemoryBuffer(tau, retention)
    segs = {}
    for t in range(num_segments):
        recs = [make_record(ts=t * tau * MIN + j * 1000) for j in range(per_segment)]
        segs[t] = recs
        buf.add_segment(t, recs)
    return buf, segs


def test_memory_view_sixty_minutes_sees_all_three_segments():
    buf, segs = _filled_buffer(20, 60)
    view = memory_view(buf, 2)
    assert len(view) == 9
    assert set(map(id, view)) == {id(r) for rs in segs.values() for r in rs}


def test_memory_view_with_retention_tau_is_standard_view():
    buf = MemoryBuffer(20, 20)
    for t in range(3):
        recs = [make_record(ts=t * 20 * MIN + j) for j in (0, 1, 19 * MIN)]
        buf.add_segment(t, recs)
        assert memory_view(buf, t) == recs


def test_memory_and_standard_identical_at_t0():
    mem = MemoryBuffer(20, 60)
    std = MemoryBuffer(20, 20)
    recs = [make_record(ts=j * 1000) for j in range(5)]
    mem.add_segment(0, recs)
    std.add_segment(0, recs)
    assert memory_view(mem, 0) == memory_view(std, 0) == recs


def test_memory_view_superset_of_standard_and_eviction():
    buf = MemoryBuffer(15, 30)
    segs = {}
    for t in range(4):
        recs = [make_record(ts=t * 15 * MIN + j * MIN) for j in range(15)]
        segs[t] = recs
        buf.add_segment(t, recs)
        evicted = buf.evict(t)
        view = memory_view(buf, t)
        assert set(map(id, segs[t])) <= set(map(id, view))
        now = (t + 1) * 15 * MIN
        assert all(now - r.timestamp_ms <= 30 * MIN for r in view)
        if t >= 2:
            assert evicted > 0
    assert buf.segments() == [2, 3]
