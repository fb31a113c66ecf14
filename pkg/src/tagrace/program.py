"""Concurrency DSL, program model and interleaving machinery.

A program declares pointees, locks and threads::

    pointee A size 32
    lock m kind mutex
    thread t1 {
        acquire m
        write A+16
        release m
    }

Thread ``main`` (tid 0) is implicit unless declared.  Other threads get ids
1, 2, ... in declaration order.  Without explicit ``spawn``/``join``
statements, main spawns every thread at start and joins them all at the end.
"""

from __future__ import annotations

import json
import random
import re
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

from .errors import (
    DeadlockError,
    DslSyntaxError,
    OffsetOutOfRangeError,
    ProgramValidationError,
    TooLargeError,
    TraceValidationError,
    UnmatchedAcquireError,
    UnmatchedReleaseError,
)
from .tagged_memory import GRANULE_SIZE, GranuleId, TaggedRef

MAIN = "main"
MAX_EVENTS = 64

RD, WR, LA, LR, SPAWN, JOIN, ALLOC, FREE = (
    "RD", "WR", "LA", "LR", "SPAWN", "JOIN", "ALLOC", "FREE")
EVENT_TYPES = (RD, WR, LA, LR, SPAWN, JOIN, ALLOC, FREE)
EXCLUSIVE, READER = "exclusive", "reader"


def default_alias(pointee: str) -> str:
    return "&" + pointee


# --------------------------------------------------------------------------
# statements and program


@dataclass(frozen=True)
class Acquire:
    lock: str
    mode: str = EXCLUSIVE
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Release:
    lock: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Access:
    op: str  # RD or WR
    pointee: str
    offset: int = 0
    alias: str | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Spawn:
    thread: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Join:
    thread: str
    line: int = field(default=0, compare=False)


Stmt = Acquire | Release | Access | Spawn | Join


@dataclass(frozen=True)
class ThreadDecl:
    name: str
    tid: int
    body: tuple[Stmt, ...]


@dataclass(frozen=True, slots=True)
class Event:
    etype: str
    tid: int
    seq: int = -1
    pointee: str | None = None
    offset: int | None = None
    alias: str | None = None
    lock: str | None = None
    mode: str | None = None
    child: int | None = None

    @property
    def target(self) -> GranuleId | None:
        if self.etype not in (RD, WR):
            return None
        return GranuleId(self.pointee, self.offset // GRANULE_SIZE)

    @property
    def ref_id(self) -> str | None:
        if self.etype not in (RD, WR):
            return None
        return self.alias if self.alias is not None else default_alias(self.pointee)

    def at(self, seq: int) -> Event:
        return Event(self.etype, self.tid, seq, self.pointee, self.offset,
                     self.alias, self.lock, self.mode, self.child)


Trace = tuple  # tuple[Event, ...] with dense seq 0..n-1


@dataclass(frozen=True)
class Program:
    pointees: tuple[tuple[str, int], ...]
    locks: tuple[tuple[str, str], ...]
    threads: tuple[ThreadDecl, ...]  # index == tid, threads[0] is main
    explicit_spawn: bool = False
    name: str = "program"
    # per-thread scheduling steps; a step is an atomic tuple of events
    steps: tuple[tuple[tuple[Event, ...], ...], ...] = field(default=(), repr=False)
    parent: dict[int, int] = field(default_factory=dict, repr=False)

    @property
    def pointee_sizes(self) -> dict[str, int]:
        return dict(self.pointees)

    @property
    def lock_kinds(self) -> dict[str, str]:
        return dict(self.locks)

    @property
    def thread_names(self) -> list[str]:
        return [t.name for t in self.threads]

    def tid_of(self, name: str) -> int:
        for t in self.threads:
            if t.name == name:
                return t.tid
        raise KeyError(name)

    @property
    def event_count(self) -> int:
        return sum(len(s) for steps in self.steps for s in steps)

    @property
    def child_threads(self) -> list[ThreadDecl]:
        return list(self.threads[1:])


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<punct>[{};+])
  | (?P<word>[A-Za-z_][A-Za-z0-9_.\-]*)
  | (?P<num>[0-9]+)
  | (?P<bad>.)
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind == "bad":
            raise DslSyntaxError(f"unexpected character {m.group()!r}", line, col)
        if kind == "nl":
            toks.append(_Tok("nl", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "punct":
            toks.append(_Tok(m.group(), m.group(), line, col))
        elif kind in ("word", "num"):
            toks.append(_Tok(kind, m.group(), line, col))
    toks.append(_Tok("eof", "", line, 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise DslSyntaxError(msg, tok.line, tok.col)

    def expect(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            got = tok.text or tok.kind
            self.error(f"expected {want!r}, got {got!r}", tok)
        return tok

    def skip_separators(self):
        while self.peek().kind in ("nl", ";"):
            self.i += 1

    def end_of_statement(self):
        if self.peek().kind in ("nl", ";", "eof", "}"):
            return
        self.error(f"unexpected {self.peek().text!r}")

    def parse(self):
        pointees, locks, threads = [], [], []
        self.skip_separators()
        while self.peek().kind != "eof":
            tok = self.expect("word")
            if tok.text == "pointee":
                name = self.expect("word").text
                self.expect("word", "size")
                size = int(self.expect("num").text)
                pointees.append((name, size, tok.line))
            elif tok.text == "lock":
                name = self.expect("word").text
                self.expect("word", "kind")
                kind_tok = self.expect("word")
                if kind_tok.text not in ("mutex", "rwlock"):
                    self.error("lock kind must be mutex or rwlock", kind_tok)
                locks.append((name, kind_tok.text, tok.line))
            elif tok.text == "thread":
                name = self.expect("word").text
                self.expect("{")
                threads.append((name, self.parse_body(), tok.line))
            else:
                self.error(f"unknown declaration {tok.text!r}", tok)
            self.end_of_statement()
            self.skip_separators()
        return pointees, locks, threads

    def parse_body(self) -> list[Stmt]:
        body = []
        self.skip_separators()
        while self.peek().kind != "}":
            if self.peek().kind == "eof":
                self.error("unterminated thread body")
            body.append(self.parse_stmt())
            self.end_of_statement()
            self.skip_separators()
        self.expect("}")
        return body

    def parse_stmt(self) -> Stmt:
        tok = self.expect("word")
        line = tok.line
        if tok.text == "acquire":
            lock = self.expect("word").text
            mode = None
            if self.peek().kind == "word" and self.peek().text in ("read", "write"):
                mode = READER if self.next().text == "read" else EXCLUSIVE
            return Acquire(lock, mode, line)  # mode None resolved during validation
        if tok.text == "release":
            return Release(self.expect("word").text, line)
        if tok.text in ("read", "write"):
            pointee = self.expect("word").text
            offset = 0
            if self.peek().kind == "+":
                self.next()
                offset = int(self.expect("num").text)
            alias = None
            if self.peek().kind == "word" and self.peek().text == "via":
                self.next()
                alias = self.expect("word").text
            return Access(RD if tok.text == "read" else WR, pointee, offset, alias, line)
        if tok.text == "spawn":
            return Spawn(self.expect("word").text, line)
        if tok.text == "join":
            return Join(self.expect("word").text, line)
        self.error(f"unknown statement {tok.text!r}", tok)


def parse_program(text: str, name: str = "program") -> Program:
    """Parse and validate DSL text."""
    raw_pointees, raw_locks, raw_threads = _Parser(text).parse()

    pointees: dict[str, int] = {}
    for pname, size, line in raw_pointees:
        if pname in pointees:
            raise ProgramValidationError(f"line {line}: pointee {pname!r} declared twice")
        if size < 1:
            raise ProgramValidationError(f"line {line}: pointee {pname!r} has size 0")
        pointees[pname] = size
    locks: dict[str, str] = {}
    for lname, kind, line in raw_locks:
        if lname in locks:
            raise ProgramValidationError(f"line {line}: lock {lname!r} declared twice")
        locks[lname] = kind

    bodies: dict[str, list[Stmt]] = {}
    for tname, body, line in raw_threads:
        if tname in bodies:
            raise ProgramValidationError(f"line {line}: thread {tname!r} declared twice")
        bodies[tname] = body
    names = [MAIN] + [t for t in bodies if t != MAIN]
    tids = {n: i for i, n in enumerate(names)}

    threads = []
    for tname in names:
        body = tuple(_resolve_stmt(s, pointees, locks, tids, tname)
                     for s in bodies.get(tname, []))
        threads.append(ThreadDecl(tname, tids[tname], body))
    for t in threads:
        _check_locking(t, locks)

    explicit = any(isinstance(s, (Spawn, Join)) for t in threads for s in t.body)
    parent = _spawn_tree(threads, explicit)
    steps = _compile_steps(threads, pointees, parent, explicit)
    return Program(tuple(pointees.items()), tuple(locks.items()), tuple(threads),
                   explicit, name, steps, parent)


def _resolve_stmt(s: Stmt, pointees, locks, tids, tname) -> Stmt:
    where = f"line {s.line} (thread {tname})"
    if isinstance(s, Acquire):
        if s.lock not in locks:
            raise ProgramValidationError(f"{where}: undeclared lock {s.lock!r}")
        mode = s.mode or EXCLUSIVE
        if mode == READER and locks[s.lock] != "rwlock":
            raise ProgramValidationError(f"{where}: mutex {s.lock!r} has no read mode")
        return Acquire(s.lock, mode, s.line)
    if isinstance(s, Release):
        if s.lock not in locks:
            raise ProgramValidationError(f"{where}: undeclared lock {s.lock!r}")
        return s
    if isinstance(s, Access):
        if s.pointee not in pointees:
            raise ProgramValidationError(f"{where}: undeclared pointee {s.pointee!r}")
        if s.offset >= pointees[s.pointee]:
            raise OffsetOutOfRangeError(
                f"{where}: offset {s.offset} out of range for {s.pointee!r} "
                f"of size {pointees[s.pointee]}")
        return s
    if s.thread not in tids or s.thread == MAIN:
        raise ProgramValidationError(f"{where}: unknown thread {s.thread!r}")
    if s.thread == tname:
        raise ProgramValidationError(f"{where}: thread cannot {type(s).__name__.lower()} itself")
    return s


def _check_locking(t: ThreadDecl, locks) -> None:
    held: list[str] = []
    for s in t.body:
        if isinstance(s, Acquire):
            if s.lock in held:
                raise ProgramValidationError(
                    f"line {s.line} (thread {t.name}): recursive acquire of {s.lock!r}")
            held.append(s.lock)
        elif isinstance(s, Release):
            if s.lock not in held:
                raise UnmatchedReleaseError(
                    f"line {s.line} (thread {t.name}): release of {s.lock!r} without acquire")
            if held[-1] != s.lock:
                raise ProgramValidationError(
                    f"line {s.line} (thread {t.name}): release of {s.lock!r} "
                    f"is not properly nested (innermost is {held[-1]!r})")
            held.pop()
        elif isinstance(s, (Spawn, Join)) and held:
            raise ProgramValidationError(
                f"line {s.line} (thread {t.name}): {type(s).__name__.lower()} while holding locks")
    if held:
        raise UnmatchedAcquireError(f"thread {t.name}: lock(s) {held} never released")


def _spawn_tree(threads: list[ThreadDecl], explicit: bool) -> dict[int, int]:
    tids = {t.name: t.tid for t in threads}
    if not explicit:
        return {t.tid: 0 for t in threads[1:]}
    parent: dict[int, int] = {}
    for t in threads:
        spawned: set[str] = set()
        for s in t.body:
            if isinstance(s, Spawn):
                child = tids[s.thread]
                if child in parent:
                    raise ProgramValidationError(f"line {s.line}: thread {s.thread!r} spawned twice")
                parent[child] = t.tid
                spawned.add(s.thread)
            elif isinstance(s, Join):
                if s.thread not in spawned:
                    raise ProgramValidationError(
                        f"line {s.line}: thread {t.name!r} joins {s.thread!r} "
                        f"which it has not spawned")
                spawned.discard(s.thread)
    for t in threads[1:]:
        if t.tid not in parent:
            raise ProgramValidationError(f"thread {t.name!r} is never spawned")
    # every thread must be reachable from main (no spawn cycles)
    for t in threads[1:]:
        seen, cur = set(), t.tid
        while cur != 0:
            if cur in seen:
                raise ProgramValidationError(f"spawn cycle involving thread {t.name!r}")
            seen.add(cur)
            cur = parent[cur]
    return parent


def _stmt_event(s: Stmt, tid: int, tids: dict[str, int]) -> Event:
    if isinstance(s, Acquire):
        return Event(LA, tid, lock=s.lock, mode=s.mode)
    if isinstance(s, Release):
        return Event(LR, tid, lock=s.lock)
    if isinstance(s, Access):
        return Event(s.op, tid, pointee=s.pointee, offset=s.offset, alias=s.alias)
    if isinstance(s, Spawn):
        return Event(SPAWN, tid, child=tids[s.thread])
    return Event(JOIN, tid, child=tids[s.thread])


def _compile_steps(threads, pointees, parent, explicit):
    tids = {t.name: t.tid for t in threads}
    children = {t.tid: [c for c, p in sorted(parent.items()) if p == t.tid] for t in threads}
    allocs = tuple(Event(ALLOC, 0, pointee=p) for p in pointees)
    frees = tuple(Event(FREE, 0, pointee=p) for p in pointees)
    all_steps = []
    for t in threads:
        steps = []
        if not explicit and t.tid == 0:
            spawns = tuple(Event(SPAWN, 0, child=c) for c in children[0])
            if allocs or spawns:
                steps.append(allocs + spawns)
        elif t.tid == 0 and allocs:
            steps.append(allocs)
        steps.extend((_stmt_event(s, t.tid, tids),) for s in t.body)
        joined = {tids[s.thread] for s in t.body if isinstance(s, Join)}
        tail = tuple(Event(JOIN, t.tid, child=c) for c in children[t.tid] if c not in joined)
        if t.tid == 0:
            tail += frees
        if tail:
            steps.append(tail)
        all_steps.append(tuple(steps))
    return tuple(all_steps)


# --------------------------------------------------------------------------
# scheduling


class _Scheduler:
    """Mutable scheduling state shared by enumeration and random walks."""

    def __init__(self, program: Program):
        self.steps = program.steps
        n = len(self.steps)
        self.n = n
        self.pc = [0] * n
        self.started = [False] * n
        self.started[0] = True
        self.finished = [False] * n
        self.finished[0] = len(self.steps[0]) == 0
        self.owner: dict[str, int | None] = {l: None for l, _ in program.locks}
        self.readers: dict[str, int] = {l: 0 for l, _ in program.locks}
        # mode of the acquire matched by each release step
        self.release_mode: list[dict[int, str]] = []
        for steps in self.steps:
            modes, held = {}, {}
            for i, step in enumerate(steps):
                e = step[0]
                if e.etype == LA:
                    held[e.lock] = e.mode
                elif e.etype == LR:
                    modes[i] = held.pop(e.lock)
            self.release_mode.append(modes)

    def enabled(self, tid: int) -> bool:
        if not self.started[tid] or self.finished[tid]:
            return False
        step = self.steps[tid][self.pc[tid]]
        ev = step[0]
        if ev.etype == LA:
            if self.owner[ev.lock] is not None:
                return False
            return ev.mode == READER or self.readers[ev.lock] == 0
        for e in step:
            if e.etype == JOIN and not self.finished[e.child]:
                return False
        return True

    def runnable(self) -> list[int]:
        return [t for t in range(self.n) if self.enabled(t)]

    def done(self) -> bool:
        return all(self.finished)

    def apply(self, tid: int) -> tuple[Event, ...]:
        step = self.steps[tid][self.pc[tid]]
        for e in step:
            et = e.etype
            if et == LA:
                if e.mode == READER:
                    self.readers[e.lock] += 1
                else:
                    self.owner[e.lock] = tid
            elif et == LR:
                if self.release_mode[tid][self.pc[tid]] == READER:
                    self.readers[e.lock] -= 1
                else:
                    self.owner[e.lock] = None
            elif et == SPAWN:
                self.started[e.child] = True
                self.finished[e.child] = len(self.steps[e.child]) == 0
        self.pc[tid] += 1
        if self.pc[tid] == len(self.steps[tid]):
            self.finished[tid] = True
        return step

    def undo(self, tid: int) -> None:
        self.pc[tid] -= 1
        self.finished[tid] = False
        step = self.steps[tid][self.pc[tid]]
        for e in reversed(step):
            et = e.etype
            if et == LA:
                if e.mode == READER:
                    self.readers[e.lock] -= 1
                else:
                    self.owner[e.lock] = None
            elif et == LR:
                if self.release_mode[tid][self.pc[tid]] == READER:
                    self.readers[e.lock] += 1
                else:
                    self.owner[e.lock] = tid
            elif et == SPAWN:
                self.started[e.child] = False
                self.finished[e.child] = False


def _check_size(program: Program) -> None:
    n = program.event_count
    if n > MAX_EVENTS:
        raise TooLargeError(f"program has {n} events; enumeration guard is {MAX_EVENTS}")


def _stamp(path: Iterable[tuple[Event, ...]], cache: dict) -> Trace:
    out = []
    seq = 0
    for step in path:
        for e in step:
            key = (id(e), seq)
            ev = cache.get(key)
            if ev is None:
                ev = cache[key] = e.at(seq)
            out.append(ev)
            seq += 1
    return tuple(out)


def iter_schedules(program: Program, max_traces: int | None = None,
                   check_size: bool = True) -> Iterator[list[tuple[int, tuple[Event, ...]]]]:
    """Depth-first over all interleavings, yielding the (shared, mutable) step path.

    The yielded list is reused; copy it if it must outlive the iteration step.
    """
    if check_size:
        _check_size(program)
    if max_traces is not None and max_traces <= 0:
        return
    sched = _Scheduler(program)
    path: list[tuple[int, tuple[Event, ...]]] = []
    stack = [(sched.runnable(), 0)]
    yielded = 0
    while stack:
        choices, i = stack[-1]
        if i > 0:
            sched.undo(path.pop()[0])
        if i == len(choices):
            stack.pop()
            continue
        stack[-1] = (choices, i + 1)
        tid = choices[i]
        path.append((tid, sched.apply(tid)))
        if sched.done():
            yield path
            yielded += 1
            if max_traces is not None and yielded >= max_traces:
                return
            stack.append(((), 0))  # leaf frame: undoes the step on the next pass
            continue
        stack.append((sched.runnable(), 0))
    if yielded == 0:
        raise DeadlockError(f"every completion of {program.name!r} deadlocks")


def enumerate_interleavings(program: Program, max_traces: int | None = 10000) -> Iterator[Trace]:
    """Yield every distinct valid interleaving in lexicographic thread-id order."""
    cache: dict = {}
    for path in iter_schedules(program, max_traces):
        yield _stamp((step for _, step in path), cache)


def random_schedule(program: Program, seed: int, attempts: int = 1000) -> Trace:
    """One interleaving chosen by seeded uniform choice among runnable threads."""
    rng = random.Random(seed)
    for _ in range(attempts):
        sched = _Scheduler(program)
        path = []
        while not sched.done():
            runnable = sched.runnable()
            if not runnable:
                break
            path.append(sched.apply(rng.choice(runnable)))
        else:
            return _stamp(path, {})
    raise DeadlockError(f"no deadlock-free schedule of {program.name!r} found")


def instantiate_aliases(program: Program) -> dict[tuple[str, int], TaggedRef]:
    """One thread-private TaggedRef per (alias, thread) that uses the alias."""
    refs: dict[tuple[str, int], TaggedRef] = {}
    for t in program.threads:
        for s in t.body:
            if isinstance(s, Access):
                alias = s.alias if s.alias is not None else default_alias(s.pointee)
                if (alias, t.tid) not in refs:
                    refs[(alias, t.tid)] = TaggedRef(alias, t.tid)
    return refs


# --------------------------------------------------------------------------
# trace validation and serialization


def check_trace(trace: Sequence[Event], program: Program) -> None:
    """Raise TraceValidationError unless ``trace`` is a valid interleaving of ``program``."""
    sched = _Scheduler(program)
    expected_seq = 0
    i = 0
    while i < len(trace):
        e = trace[i]
        tid = e.tid
        if not 0 <= tid < sched.n:
            raise TraceValidationError(f"seq {e.seq}: unknown thread {tid}")
        if sched.finished[tid] or not sched.started[tid]:
            raise TraceValidationError(f"seq {e.seq}: thread {tid} is not running")
        step = sched.steps[tid][sched.pc[tid]]
        got = trace[i:i + len(step)]
        for want, ev in zip(step, got):
            if ev.seq != expected_seq:
                raise TraceValidationError(f"expected seq {expected_seq}, got {ev.seq}")
            expected_seq += 1
            if ev.at(-1) != want:
                raise TraceValidationError(
                    f"seq {ev.seq}: event does not follow program order of thread {tid}")
        if len(got) < len(step):
            raise TraceValidationError(f"trace ends inside an atomic step of thread {tid}")
        if not sched.enabled(tid):
            raise TraceValidationError(f"seq {e.seq}: thread {tid} is blocked here")
        sched.apply(tid)
        i += len(step)
    if not sched.done():
        raise TraceValidationError("trace is incomplete")


_FIELDS = ("seq", "tid", "op", "pointee", "offset", "alias", "lock", "mode", "child")


def event_to_record(e: Event) -> dict:
    rec = {"seq": e.seq, "tid": e.tid, "op": e.etype}
    for key, value in (("pointee", e.pointee), ("offset", e.offset), ("alias", e.alias),
                       ("lock", e.lock), ("mode", e.mode), ("child", e.child)):
        if value is not None:
            rec[key] = value
    return rec


def event_from_record(rec: dict) -> Event:
    unknown = set(rec) - set(_FIELDS)
    if unknown:
        raise TraceValidationError(f"unknown event fields {sorted(unknown)}")
    if rec.get("op") not in EVENT_TYPES:
        raise TraceValidationError(f"bad op {rec.get('op')!r}")
    return Event(rec["op"], rec["tid"], rec["seq"], rec.get("pointee"), rec.get("offset"),
                 rec.get("alias"), rec.get("lock"), rec.get("mode"), rec.get("child"))


def trace_to_json(trace: Sequence[Event]) -> str:
    return json.dumps([event_to_record(e) for e in trace])


def trace_from_json(text: str) -> Trace:
    data = json.loads(text)
    if not isinstance(data, list):
        raise TraceValidationError("trace file must hold a JSON array")
    return tuple(event_from_record(r) for r in data)


def format_program(program: Program) -> str:
    """Render a Program back to DSL text (round-trips through parse_program)."""
    lines = [f"pointee {p} size {s}" for p, s in program.pointees]
    lines += [f"lock {l} kind {k}" for l, k in program.locks]
    for t in program.threads:
        if t.tid == 0 and not t.body:
            continue
        lines.append(f"thread {t.name} {{")
        for s in t.body:
            lines.append("    " + _format_stmt(s))
        lines.append("}")
    return "\n".join(lines) + "\n"


def _format_stmt(s: Stmt) -> str:
    if isinstance(s, Acquire):
        return f"acquire {s.lock} {'read' if s.mode == READER else 'write'}"
    if isinstance(s, Release):
        return f"release {s.lock}"
    if isinstance(s, Access):
        text = f"{'read' if s.op == RD else 'write'} {s.pointee}"
        if s.offset:
            text += f"+{s.offset}"
        if s.alias is not None:
            text += f" via {s.alias}"
        return text
    if isinstance(s, Spawn):
        return f"spawn {s.thread}"
    return f"join {s.thread}"
