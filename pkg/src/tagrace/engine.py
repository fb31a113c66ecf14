"""Tag-based race inference over a replayed trace.

Each thread accesses shared memory through thread-private tagged references.
At segment setup the lockset check decides how tags move:

* conclusive (Exclusive/Shared): the reference and the granule take the
  thread's tag, except that a Shared read inherits the granule's tag instead;
* inconclusive: an untagged dummy load is issued first.  It faults exactly
  when some thread's tag is live on the granule, which flags the race.

Faults are classified synchronously at the event that raised them.  Every
granule remembers the access that last stored a tag into it (event type,
thread and lockset) so a fault can be judged against the earlier access: a
common lock or a self-owned tag makes the fault benign, a write on either
side makes it a DataRace, two reads make it a ReaderILU.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from .errors import DeadGranuleError, ProtocolError, TraceValidationError
from .lockset import (
    EMPTY,
    Lockset,
    LocksetState,
    PointeeMeta,
    handle_lock_event,
    handle_lockset_check,
    handle_unlock_event,
    mutually_exclusive,
)
from .program import (
    ALLOC, FREE, JOIN, LA, LR, RD, SPAWN, WR,
    Event, Program, check_trace, default_alias,
)
from .tagged_memory import (
    GRANULE_SIZE,
    UNTAGGED,
    Fault,
    GranuleId,
    TaggedMemory,
    TaggedRef,
    check_tag,
)

USABLE_TAGS = 14


def tag_of_thread(tid: int) -> int:
    """Map a thread id onto the usable tags 1..14."""
    return tid % USABLE_TAGS + 1


def tid_residue(tag: int) -> int | None:
    """Residue class (tid mod 14) of the threads that own ``tag``."""
    return None if tag == UNTAGGED else (tag - 1) % USABLE_TAGS


class RaceKind(str, enum.Enum):
    DATA_RACE = "DataRace"
    READER_ILU = "ReaderILU"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class RaceReport:
    kind: RaceKind
    event_seq: int
    granule: GranuleId
    ref_tag: int
    granule_tag: int
    accessor: int
    prior_event_type: str
    prior_tid_residue: int | None

    @property
    def severity(self) -> str:
        return "error" if self.kind is RaceKind.DATA_RACE else "warning"

    def to_record(self) -> dict:
        return {
            "kind": self.kind.value,
            "event_seq": self.event_seq,
            "pointee": self.granule.pointee,
            "granule_index": self.granule.index,
            "ref_tag": self.ref_tag,
            "granule_tag": self.granule_tag,
            "accessor_tid": self.accessor,
            "prior_event_type": self.prior_event_type,
            "prior_tid_residue": self.prior_tid_residue,
        }

    @classmethod
    def from_record(cls, rec: dict) -> RaceReport:
        return cls(RaceKind(rec["kind"]), rec["event_seq"],
                   GranuleId(rec["pointee"], rec["granule_index"]), rec["ref_tag"],
                   rec["granule_tag"], rec["accessor_tid"], rec["prior_event_type"],
                   rec["prior_tid_residue"])


@dataclass(frozen=True)
class Tagging:
    """The access that last stored a tag into a granule."""

    etype: str
    tid: int
    lockset: Lockset


@dataclass(eq=False)
class Segment:
    thread: int
    ref: TaggedRef
    pointee: str
    state: LocksetState
    updated_refs: set = field(default_factory=set)
    open: bool = True

    @property
    def attribute(self) -> str:
        return "Shared" if self.state is LocksetState.SHARED else "Exclusive"

    def close(self) -> None:
        if not self.open:
            return
        for ref in self.updated_refs:
            update_tag_pointer(ref, UNTAGGED)
        self.open = False


@dataclass
class DetectorState:
    program: Program
    memory: TaggedMemory = field(default_factory=TaggedMemory)
    refs: dict[tuple[str, int], TaggedRef] = field(default_factory=dict)
    locksets: dict[int, Lockset] = field(default_factory=dict)
    metas: dict[str, PointeeMeta] = field(default_factory=dict)
    segments: dict[int, dict[str, Segment]] = field(default_factory=dict)
    exclusive_owner: dict[GranuleId, int] = field(default_factory=dict)
    last_tagging: dict[GranuleId, Tagging] = field(default_factory=dict)
    parent: dict[int, int] = field(default_factory=dict)
    reports: list[RaceReport] = field(default_factory=list)

    def ref(self, alias: str, tid: int) -> TaggedRef:
        ref = self.refs.get((alias, tid))
        if ref is None:
            ref = self.refs[(alias, tid)] = TaggedRef(alias, tid)
        return ref

    def lockset(self, tid: int) -> Lockset:
        return self.locksets.get(tid, EMPTY)

    def close_segments(self, tid: int) -> None:
        segs = self.segments.get(tid)
        if segs:
            for seg in segs.values():
                seg.close()
            segs.clear()


# --------------------------------------------------------------------------
# tag primitives


def update_tag_pointer(ref: TaggedRef, tag: int) -> None:
    ref.tag = check_tag(tag)


def update_tag_pointee(st: DetectorState, ref: TaggedRef) -> None:
    # STG analogue: the granule takes the reference's tag
    st.memory.set_granule_tag(ref.target, ref.tag)


def dummy_load(st: DetectorState, ref: TaggedRef, g: GranuleId, kind: str = "read") -> Fault | None:
    """Untagged probe of ``g``; faults iff the granule currently carries a tag."""
    probe = TaggedRef(ref.ref_id, ref.owner, g, UNTAGGED)
    return st.memory.access(probe, kind)


def _claim(st: DetectorState, ref: TaggedRef, e: Event) -> None:
    """Store the thread's tag into the reference and the granule it targets."""
    update_tag_pointer(ref, tag_of_thread(e.tid))
    update_tag_pointee(st, ref)
    g = ref.target
    st.exclusive_owner[g] = e.tid
    st.last_tagging[g] = Tagging(e.etype, e.tid, st.lockset(e.tid))


# --------------------------------------------------------------------------
# fault classification


def classify_fault(st: DetectorState, fault: Fault, e: Event) -> RaceReport | None:
    """Turn a tag-check fault at event ``e`` into a report, or None if benign.

    A fault is benign when the live tag belongs to the accessing thread itself
    or when the access that stored it shares a mutually exclusive lock with
    the current access, and when the granule is untagged: a spawn hands the
    spawner's granules back untagged while another thread's reference may still
    carry its own tag.
    """
    if fault.granule_tag == UNTAGGED:
        return None
    prior = st.last_tagging.get(fault.granule)
    if prior is None:
        raise ProtocolError(f"granule {fault.granule} carries tag {fault.granule_tag} "
                            f"with no recorded tagging access")
    if prior.tid == e.tid:
        return None
    if mutually_exclusive(prior.lockset, st.lockset(e.tid)):
        return None
    if prior.etype == WR or e.etype == WR:
        kind = RaceKind.DATA_RACE
    else:
        kind = RaceKind.READER_ILU
    return RaceReport(kind, e.seq, fault.granule, fault.ref_tag, fault.granule_tag,
                      e.tid, prior.etype, tid_residue(fault.granule_tag))


def _report(st: DetectorState, fault: Fault | None, e: Event) -> RaceReport | None:
    if fault is None:
        return None
    report = classify_fault(st, fault, e)
    if report is not None:
        st.reports.append(report)
    return report


# --------------------------------------------------------------------------
# segment handling


def _tag_granule(st: DetectorState, seg: Segment, ref: TaggedRef, g: GranuleId,
                 e: Event) -> RaceReport | None:
    """Dummy load (if inconclusive) and tag update for ``ref`` now targeting ``g``."""
    if not st.memory.is_live(g):
        raise DeadGranuleError(f"granule {g} is not live")
    ref.target = g
    report = None
    if seg.state is LocksetState.INCONCLUSIVE:
        report = _report(st, dummy_load(st, ref, g), e)
    if seg.state is LocksetState.SHARED and e.etype == RD:
        # inherit the granule's tag; the granule keeps its owner
        update_tag_pointer(ref, st.memory.granule_tag(g))
    else:
        _claim(st, ref, e)
    seg.updated_refs.add(ref)
    return report


def handle_read_write_segment(st: DetectorState, e: Event) -> RaceReport | None:
    tid = e.tid
    alias = e.ref_id
    g = GranuleId(e.pointee, e.offset // GRANULE_SIZE)
    ref = st.ref(alias, tid)
    segs = st.segments.setdefault(tid, {})

    # lock-free segments end when the thread moves on to another pointee
    lock_free = not st.lockset(tid)
    for a in [a for a, s in segs.items()
              if s.pointee != e.pointee and (lock_free or a == alias)]:
        segs.pop(a).close()

    seg = segs.get(alias)
    if seg is None:
        state = handle_lockset_check(st.lockset(tid), st.metas[e.pointee], g)
        seg = segs[alias] = Segment(tid, ref, e.pointee, state)
        return _tag_granule(st, seg, ref, g, e)
    if ref.target != g:
        return on_granule_retarget(st, ref, g, e)

    fault = st.memory.access(ref, "write" if e.etype == WR else "read")
    if fault is not None:
        # log and resume with the tags the access would have produced
        report = _report(st, fault, e)
        if seg.state is LocksetState.SHARED and e.etype == RD:
            update_tag_pointer(ref, st.memory.granule_tag(g))
        else:
            _claim(st, ref, e)
        return report
    if e.etype == WR and ref.tag == tag_of_thread(tid):
        prior = st.last_tagging.get(g)
        if prior is not None and prior.tid == tid and prior.etype != WR:
            st.last_tagging[g] = Tagging(WR, tid, prior.lockset)
    return None


def on_granule_retarget(st: DetectorState, ref: TaggedRef, new_g: GranuleId,
                        e: Event) -> RaceReport | None:
    """Re-run the tag update (and dummy load, if inconclusive) for a new granule.

    The segment's lockset state from setup is reused; no lockset check runs.
    """
    if ref.target == new_g:
        return None
    seg = st.segments.get(ref.owner, {}).get(ref.ref_id)
    if seg is None or not seg.open:
        raise ProtocolError(f"retarget of {ref.ref_id!r} outside an open segment")
    return _tag_granule(st, seg, ref, new_g, e)


def on_thread_terminate(st: DetectorState, tid: int) -> None:
    """Close the thread's segments and hand its granules to the parent."""
    if st.lockset(tid):
        raise ProtocolError(f"thread {tid} terminated holding {sorted(st.lockset(tid))}")
    st.close_segments(tid)
    parent = st.parent.get(tid)
    if parent is None:
        return
    parent_tag = tag_of_thread(parent)
    for g in [g for g, owner in st.exclusive_owner.items() if owner == tid]:
        st.exclusive_owner[g] = parent
        st.memory.set_granule_tag(g, parent_tag)
        prior = st.last_tagging[g]
        st.last_tagging[g] = Tagging(prior.etype, parent, prior.lockset)


def _release_owned(st: DetectorState, tid: int) -> None:
    # at spawn: everything the parent tagged so far happens-before the child
    for g in [g for g, owner in st.exclusive_owner.items() if owner == tid]:
        del st.exclusive_owner[g]
        del st.last_tagging[g]
        st.memory.set_granule_tag(g, UNTAGGED)


# --------------------------------------------------------------------------
# driver


def new_state(program: Program) -> DetectorState:
    return DetectorState(program, parent={})


def process_event(st: DetectorState, e: Event) -> RaceReport | None:
    et = e.etype
    if et == RD or et == WR:
        return handle_read_write_segment(st, e)
    tid = e.tid
    if et == LA:
        st.close_segments(tid)
        st.locksets[tid] = handle_lock_event(st.lockset(tid), e.lock, e.mode)
    elif et == LR:
        segs = st.segments.get(tid, {})
        st.locksets[tid] = handle_unlock_event(st.lockset(tid), e.lock, segs.values())
        segs.clear()
    elif et == SPAWN:
        st.close_segments(tid)
        st.parent[e.child] = tid
        _release_owned(st, tid)
    elif et == JOIN:
        st.close_segments(tid)
        on_thread_terminate(st, e.child)
    elif et == ALLOC:
        st.memory.alloc(e.pointee, st.program.pointee_sizes[e.pointee])
        st.metas[e.pointee] = PointeeMeta()
    elif et == FREE:
        for g in st.memory.granules_of(e.pointee):
            st.exclusive_owner.pop(g, None)
            st.last_tagging.pop(g, None)
        st.memory.free(e.pointee)
        del st.metas[e.pointee]
    else:
        raise TraceValidationError(f"unknown event type {et!r}")
    return None


def run_detector(trace: Sequence[Event], program: Program, validate: bool = True) -> list[RaceReport]:
    """Replay ``trace`` in seq order and return every report, in emission order."""
    if validate:
        check_trace(trace, program)
    st = new_state(program)
    for e in trace:
        process_event(st, e)
    return st.reports


def snapshot(st: DetectorState) -> tuple:
    """Capture everything ``process_event`` can mutate.

    Mutable objects (references, segments, pointee metadata) are recorded by
    identity plus field values so ``restore`` can rewind them in place.
    """
    return (
        {k: (r, r.target, r.tag) for k, r in st.refs.items()},
        {t: {a: (seg, seg.open, frozenset(seg.updated_refs)) for a, seg in segs.items()}
         for t, segs in st.segments.items()},
        {p: (m, m.ls, m.spa) for p, m in st.metas.items()},
        dict(st.memory.granule_tags), dict(st.memory.layouts),
        dict(st.locksets), dict(st.exclusive_owner), dict(st.last_tagging),
        dict(st.parent), len(st.reports),
    )


def restore(st: DetectorState, snap: tuple) -> None:
    refs, segments, metas, tags, layouts, locksets, owner, tagging, parent, n = snap
    st.refs = {}
    for k, (r, target, tag) in refs.items():
        r.target, r.tag = target, tag
        st.refs[k] = r
    st.segments = {}
    for t, segs in segments.items():
        st.segments[t] = {}
        for a, (seg, is_open, updated) in segs.items():
            seg.open, seg.updated_refs = is_open, set(updated)
            st.segments[t][a] = seg
    st.metas = {}
    for p, (m, ls, spa) in metas.items():
        m.ls, m.spa = ls, spa
        st.metas[p] = m
    st.memory.granule_tags = dict(tags)
    st.memory.layouts = dict(layouts)
    st.locksets = dict(locksets)
    st.exclusive_owner = dict(owner)
    st.last_tagging = dict(tagging)
    st.parent = dict(parent)
    del st.reports[n:]


class PrefixReplayer:
    """Runs the detector over many traces of one program, sharing common prefixes.

    Traces from ``enumerate_interleavings`` arrive in DFS order and reuse the
    same Event objects for identical prefixes, so only the differing suffix is
    replayed.  Results equal ``run_detector(trace, program, validate=False)``.
    """

    def __init__(self, program: Program):
        self.program = program
        self._state = new_state(program)
        self._trace: Sequence[Event] = ()
        self._snaps: list[tuple] = []  # _snaps[i]: state before event i

    def run(self, trace: Sequence[Event]) -> list[RaceReport]:
        prev = self._trace
        k, n = 0, min(len(prev), len(trace))
        while k < n and prev[k] is trace[k]:
            k += 1
        st = self._state
        if k < len(self._snaps):
            restore(st, self._snaps[k])
            del self._snaps[k:]
        self._trace = ()
        for e in trace[k:]:
            self._snaps.append(snapshot(st))
            process_event(st, e)
        self._trace = trace
        return list(st.reports)


def data_races(reports: Iterable[RaceReport]) -> list[RaceReport]:
    return [r for r in reports if r.kind is RaceKind.DATA_RACE]
