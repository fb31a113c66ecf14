import pytest

from tagrace.corpus import get_case
from tagrace.engine import (
    PrefixReplayer, RaceKind, RaceReport, Tagging, classify_fault, data_races, dummy_load,
    new_state, on_granule_retarget, on_thread_terminate, process_event, run_detector,
    tag_of_thread, tid_residue, update_tag_pointee, update_tag_pointer,
)
from tagrace.errors import ProtocolError, ReservedTagError, TraceValidationError
from tagrace.lockset import LocksetState
from tagrace.program import (
    ALLOC, EXCLUSIVE, JOIN, LA, LR, RD, READER, SPAWN, WR, Event, enumerate_interleavings,
    parse_program,
)
from tagrace.tagged_memory import Fault, GranuleId, TaggedRef

A0, A1 = GranuleId("A", 0), GranuleId("A", 1)

PROG = parse_program("""
pointee A size 32
lock m kind mutex
lock r kind rwlock
thread t1 { write A }
thread t2 { write A }
""")


def fresh():
    st = new_state(PROG)
    process_event(st, Event(ALLOC, 0, 0, "A"))
    process_event(st, Event(SPAWN, 0, 1, child=1))
    process_event(st, Event(SPAWN, 0, 2, child=2))
    return st


def feed(st, *events):
    out = []
    for e in events:
        r = process_event(st, e)
        if r is not None:
            out.append(r)
    return out


@pytest.mark.parametrize("tid, tag", [(0, 1), (13, 14), (14, 1)])
def test_tag_of_thread_examples(tid, tag):
    assert tag_of_thread(tid) == tag


def test_tag_of_thread_sweep():
    for tid in range(101):
        t = tag_of_thread(tid)
        assert 1 <= t <= 14
        assert tid_residue(t) == tid % 14
    assert tid_residue(0) is None


def test_first_locked_write_claims_granule():
    st = fresh()
    assert feed(st, Event(LA, 1, 3, lock="m", mode=EXCLUSIVE), Event(WR, 1, 4, "A", 0)) == []
    assert st.memory.granule_tag(A0) == 2
    assert st.metas["A"].ls == {("m", EXCLUSIVE)}


def test_unlocked_write_after_locked_write_is_race():
    st = fresh()
    feed(st, Event(LA, 1, 3, lock="m", mode=EXCLUSIVE), Event(WR, 1, 4, "A", 0))
    (report,) = feed(st, Event(WR, 2, 5, "A", 0))
    assert report.kind is RaceKind.DATA_RACE
    assert (report.event_seq, report.ref_tag, report.granule_tag) == (5, 0, 2)
    assert report.prior_tid_residue == 1 and report.accessor == 2


def test_shared_reader_inherits_tag():
    st = fresh()
    # precondition from the example: A[0] carries thread 1's tag from a reader
    # access under r, and A's minimal lockset is {r (reader)}
    feed(st, Event(LA, 1, 3, lock="r", mode=READER), Event(RD, 1, 4, "A", 0))
    st.memory.set_granule_tag(A0, 2)
    st.last_tagging[A0] = Tagging(RD, 1, frozenset({("r", READER)}))
    assert feed(st, Event(LA, 2, 5, lock="r", mode=READER), Event(RD, 2, 6, "A", 0)) == []
    ref = st.refs[("&A", 2)]
    assert ref.tag == 2 and st.memory.granule_tag(A0) == 2
    assert st.segments[2]["&A"].state is LocksetState.SHARED


def test_first_reader_access_is_shared_and_untagged():
    st = fresh()
    feed(st, Event(LA, 1, 3, lock="r", mode=READER), Event(RD, 1, 4, "A", 0))
    assert st.segments[1]["&A"].state is LocksetState.SHARED
    assert st.memory.granule_tag(A0) == 0 == st.refs[("&A", 1)].tag


def test_dummy_load():
    st = fresh()
    ref = st.ref("&A", 1)
    assert dummy_load(st, ref, A0) is None
    st.memory.set_granule_tag(A0, 5)
    fault = dummy_load(st, ref, A0)
    assert fault == Fault(0, 5, A0, 1, "read")


def test_tag_pointer_and_pointee():
    st = fresh()
    ref = st.ref("&A", 1)
    ref.target = A0
    update_tag_pointer(ref, 3)
    update_tag_pointee(st, ref)
    assert st.memory.granule_tag(A0) == 3 and st.memory.tag_check(ref.tag, A0)
    with pytest.raises(ReservedTagError):
        update_tag_pointer(ref, 15)


def test_exclusive_retarget_moves_tag():
    st = fresh()
    feed(st, Event(LA, 1, 3, lock="m", mode=EXCLUSIVE), Event(WR, 1, 4, "A", 0))
    meta_before = (st.metas["A"].ls, st.metas["A"].spa)
    assert feed(st, Event(WR, 1, 5, "A", 16)) == []
    assert st.memory.granule_tag(A1) == 2
    assert (st.metas["A"].ls, st.metas["A"].spa) == meta_before
    ref = st.refs[("&A", 1)]
    assert on_granule_retarget(st, ref, A1, Event(WR, 1, 6, "A", 16)) is None


def test_inconclusive_retarget_hits_foreign_tag():
    st = fresh()
    feed(st, Event(LA, 1, 3, lock="m", mode=EXCLUSIVE), Event(WR, 1, 4, "A", 16),
         Event(LR, 1, 5, lock="m"))
    # thread 2 is lock-free: inconclusive segment on A, first on A[0] then A[1]
    assert feed(st, Event(RD, 2, 6, "A", 0)) == []
    (report,) = feed(st, Event(WR, 2, 7, "A", 16))
    assert report.kind is RaceKind.DATA_RACE and report.granule == A1


def test_thread_terminate_hands_off_to_parent():
    st = fresh()
    feed(st, Event(LA, 1, 3, lock="m", mode=EXCLUSIVE), Event(WR, 1, 4, "A", 0),
         Event(LR, 1, 5, lock="m"))
    tags_before = dict(st.memory.granule_tags)
    on_thread_terminate(st, 2)  # owns nothing
    assert st.memory.granule_tags == tags_before
    feed(st, Event(JOIN, 0, 6, child=1))
    assert st.memory.granule_tag(A0) == 1 and st.exclusive_owner[A0] == 0
    assert feed(st, Event(WR, 0, 7, "A", 0)) == []


def test_terminate_holding_lock():
    st = fresh()
    feed(st, Event(LA, 1, 3, lock="m", mode=EXCLUSIVE))
    with pytest.raises(ProtocolError):
        on_thread_terminate(st, 1)


@pytest.mark.parametrize("prior, current, kind", [
    (WR, RD, RaceKind.DATA_RACE), (RD, RD, RaceKind.READER_ILU), (WR, WR, RaceKind.DATA_RACE),
])
def test_classify_fault(prior, current, kind):
    st = fresh()
    st.memory.set_granule_tag(A0, 2)
    st.last_tagging[A0] = Tagging(prior, 1, frozenset({("m", EXCLUSIVE)}))
    st.locksets[2] = frozenset({("n", EXCLUSIVE)})
    r = classify_fault(st, Fault(0, 2, A0, 2, "read"), Event(current, 2, 9, "A", 0))
    assert r.kind is kind and r.severity == ("error" if kind is RaceKind.DATA_RACE else "warning")


def test_classify_fault_benign_cases():
    st = fresh()
    st.memory.set_granule_tag(A0, 2)
    st.last_tagging[A0] = Tagging(WR, 1, frozenset({("m", EXCLUSIVE)}))
    # same thread
    assert classify_fault(st, Fault(0, 2, A0, 1, "read"), Event(RD, 1, 9, "A", 0)) is None
    # common exclusive lock
    st.locksets[2] = frozenset({("m", EXCLUSIVE)})
    assert classify_fault(st, Fault(0, 2, A0, 2, "read"), Event(RD, 2, 9, "A", 0)) is None


def test_report_record_round_trip():
    r = RaceReport(RaceKind.READER_ILU, 4, A1, 0, 3, 2, RD, 2)
    rec = r.to_record()
    assert list(rec) == ["kind", "event_seq", "pointee", "granule_index", "ref_tag",
                         "granule_tag", "accessor_tid", "prior_event_type", "prior_tid_residue"]
    assert RaceReport.from_record(rec) == r


def _all_traces(name):
    p = get_case(name).program
    return p, list(enumerate_interleavings(p))


def test_case_e_one_race_per_trace():
    p, traces = _all_traces("case_e")
    for t in traces:
        assert [r.kind for r in run_detector(t, p)] == [RaceKind.DATA_RACE]


def test_case_b_clean():
    p, traces = _all_traces("case_b")
    assert all(run_detector(t, p) == [] for t in traces)


def test_empty_trace():
    empty = parse_program("pointee A size 16")
    assert run_detector((), empty, validate=False) == []


def test_trace_program_mismatch():
    p, traces = _all_traces("case_e")
    with pytest.raises(TraceValidationError):
        run_detector(traces[0][:-1], p)


CORPUS = ["case_a", "case_c", "case_d", "case_f", "case_g", "syn_rwlock", "syn_wrong_lock",
          "sh_heap_alias_race", "eb_init_then_parallel", "ld_neighbour_race"]


@pytest.mark.parametrize("name", CORPUS)
def test_unlock_hygiene_and_bookkeeping(name):
    p, traces = _all_traces(name)
    for t in traces:
        st = new_state(p)
        for e in t:
            segs_before = list(st.segments.get(e.tid, {}).values()) if e.etype == LR else []
            updated = [ref for s in segs_before for ref in s.updated_refs]
            report = process_event(st, e)
            if report is not None:
                assert report.event_seq == e.seq  # synchronous
            if e.etype == LR:
                assert all(ref.tag == 0 for ref in updated)
            if e.etype in (RD, WR):
                ref = st.refs[(e.ref_id, e.tid)]
                assert ref.target == e.target
                assert st.memory.tag_check(ref.tag, e.target)


@pytest.mark.parametrize("name", CORPUS)
def test_prefix_replayer_matches_fresh_runs(name):
    p, traces = _all_traces(name)
    rp = PrefixReplayer(p)
    for t in traces:
        assert rp.run(t) == run_detector(t, p)
    # out-of-order replays still agree
    for t in reversed(traces):
        assert rp.run(t) == run_detector(t, p)


def test_data_races_filter():
    p, traces = _all_traces("case_d")
    for t in traces:
        reports = run_detector(t, p)
        assert reports and data_races(reports) == []
