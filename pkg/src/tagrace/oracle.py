"""Exact happens-before + lockset race oracle.

Vector clocks are advanced by one tick per event of the issuing thread and
exchanged along release->acquire, spawn->child and child->join edges.  Two
accesses race when neither happens before the other, no lock orders them, they
target the same granule and at least one writes.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import TooLargeError
from .lockset import Lockset, mutually_exclusive
from .program import (
    JOIN, LA, LR, MAX_EVENTS, RD, READER, SPAWN, WR,
    Event, Program, enumerate_interleavings,
)
from .tagged_memory import GRANULE_SIZE, GranuleId

VectorClock = tuple  # tuple[int, ...], index == thread id

SHADOW_SLOTS = 4


def vc_join(a: Sequence[int], b: Sequence[int]) -> VectorClock:
    if len(a) < len(b):
        a, b = b, a
    return tuple(max(x, y) for x, y in zip(a, b)) + tuple(a[len(b):])


def vc_leq(a: Sequence[int], b: Sequence[int]) -> bool:
    for i, x in enumerate(a):
        if x > (b[i] if i < len(b) else 0):
            return False
    return True


@dataclass(frozen=True)
class AccessRecord:
    etype: str
    tid: int
    granule: GranuleId
    clock: VectorClock
    lockset: Lockset
    seq: int

    @property
    def is_write(self) -> bool:
        return self.etype == WR


@dataclass(frozen=True, order=True)
class RacyPair:
    first_seq: int
    second_seq: int
    granule: GranuleId
    first_tid: int
    second_tid: int

    @property
    def tids(self) -> frozenset[int]:
        return frozenset((self.first_tid, self.second_tid))


def hb_precedes(x: AccessRecord, y: AccessRecord) -> bool:
    """x happens before y; irreflexive, and only ever true for x.seq < y.seq."""
    return x.seq < y.seq and (x.tid == y.tid or vc_leq(x.clock, y.clock))


def replay(trace: Sequence[Event]) -> list[AccessRecord]:
    """Replay a trace, folding sync edges into per-access clock snapshots."""
    n = 1 + max((max(e.tid, e.child or 0) for e in trace), default=0)
    clocks = [[0] * n for _ in range(n)]
    held: list[dict[str, str]] = [{} for _ in range(n)]
    writer_release: dict[str, list[int]] = {}
    reader_release: dict[str, list[int]] = {}
    records = []

    def absorb(c: list[int], other: Sequence[int] | None) -> None:
        if other is not None:
            for i, v in enumerate(other):
                if v > c[i]:
                    c[i] = v

    for e in trace:
        t = e.tid
        c = clocks[t]
        c[t] += 1
        et = e.etype
        if et == RD or et == WR:
            records.append(AccessRecord(
                et, t, GranuleId(e.pointee, e.offset // GRANULE_SIZE), tuple(c),
                frozenset(held[t].items()), e.seq))
        elif et == LA:
            absorb(c, writer_release.get(e.lock))
            if e.mode != READER:
                absorb(c, reader_release.get(e.lock))
            held[t][e.lock] = e.mode
        elif et == LR:
            mode = held[t].pop(e.lock)
            if mode == READER:
                acc = reader_release.setdefault(e.lock, [0] * n)
                absorb(acc, c)
            else:
                writer_release[e.lock] = list(c)
        elif et == SPAWN:
            absorb(clocks[e.child], c)
        elif et == JOIN:
            absorb(c, clocks[e.child])
    return records


def _conflict(x: AccessRecord, y: AccessRecord) -> bool:
    return (x.tid != y.tid
            and (x.etype == WR or y.etype == WR)
            and not mutually_exclusive(x.lockset, y.lockset)
            and not hb_precedes(x, y))


def _guard(trace: Sequence[Event], max_events: int) -> None:
    if len(trace) > max_events:
        raise TooLargeError(f"trace has {len(trace)} events; oracle guard is {max_events}")


def exact_race_check(trace: Sequence[Event], max_events: int = MAX_EVENTS) -> list[RacyPair]:
    """Every racy access pair in the trace, using the full access history."""
    _guard(trace, max_events)
    by_granule: dict[GranuleId, list[AccessRecord]] = {}
    pairs = []
    for y in replay(trace):
        history = by_granule.setdefault(y.granule, [])
        for x in history:
            if _conflict(x, y):
                pairs.append(RacyPair(x.seq, y.seq, y.granule, x.tid, y.tid))
        history.append(y)
    return pairs


def shadow_race_check(trace: Sequence[Event], slots: int = SHADOW_SLOTS,
                      max_events: int = MAX_EVENTS) -> list[RacyPair]:
    """Bounded-history variant: each granule remembers only its last ``slots`` accesses.

    Older accesses are evicted first-in first-out, so races against them are lost.
    """
    _guard(trace, max_events)
    cells: dict[GranuleId, deque] = {}
    pairs = []
    for y in replay(trace):
        cell = cells.setdefault(y.granule, deque(maxlen=slots))
        for x in cell:
            if _conflict(x, y):
                pairs.append(RacyPair(x.seq, y.seq, y.granule, x.tid, y.tid))
        cell.append(y)
    return pairs


def ground_truth(program: Program, max_traces: int | None = None) -> bool:
    """True iff some interleaving of ``program`` contains a racy pair."""
    return any(exact_race_check(t) for t in enumerate_interleavings(program, max_traces))


def racy_participants(pairs: Iterable[RacyPair]) -> set[tuple[GranuleId, int]]:
    """(granule, thread) combinations that take part in at least one racy pair."""
    out = set()
    for p in pairs:
        out.add((p.granule, p.first_tid))
        out.add((p.granule, p.second_tid))
    return out

