"""Random program generation and the no-false-positive campaign."""

from __future__ import annotations

import json
import random
from collections.abc import Iterator
from dataclasses import asdict, dataclass, field

from .engine import PrefixReplayer, RaceKind, RaceReport
from .oracle import exact_race_check, racy_participants
from .program import (
    EXCLUSIVE, MAIN, RD, READER, WR,
    Access, Acquire, Join, Program, Release, Spawn, Trace,
    _format_stmt, enumerate_interleavings, format_program, parse_program, trace_to_json,
)
from .tagged_memory import GranuleId

POINTEE_SIZES = (4, 8, 16, 24, 32, 48)


@dataclass(frozen=True)
class FuzzConfig:
    max_threads: int = 3
    max_events: int = 8
    max_pointees: int = 2
    max_locks: int = 2
    explicit_spawn_rate: float = 0.25
    alias_rate: float = 0.2


def _accesses(rng: random.Random, cfg: FuzzConfig, pointees, n: int) -> list:
    out = []
    for _ in range(n):
        name, size = rng.choice(pointees)
        alias = "p" if rng.random() < cfg.alias_rate else None
        out.append(Access(rng.choice((RD, WR)), name, rng.randrange(size), alias))
    return out


def _body(rng: random.Random, cfg: FuzzConfig, pointees, locks, budget: int) -> list:
    """Straight-line statements using at most ``budget`` events, locks properly nested."""
    body: list = []
    while budget > 0:
        if locks and budget >= 3 and rng.random() < 0.45:
            lock, kind = rng.choice(locks)
            mode = rng.choice((READER, EXCLUSIVE)) if kind == "rwlock" else EXCLUSIVE
            inner_budget = rng.randint(1, budget - 2)
            inner_locks = [l for l in locks if l[0] != lock]
            inner = _body(rng, cfg, pointees, inner_locks if rng.random() < 0.3 else [],
                          inner_budget)
            body += [Acquire(lock, mode), *inner, Release(lock)]
            budget -= 2 + len(inner)
        else:
            body += _accesses(rng, cfg, pointees, 1)
            budget -= 1
    return body


def random_program(rng: random.Random, cfg: FuzzConfig = FuzzConfig(), name: str = "fuzz") -> Program:
    n_threads = rng.randint(min(2, cfg.max_threads), cfg.max_threads)
    pointees = [(f"P{i}", rng.choice(POINTEE_SIZES))
                for i in range(rng.randint(1, cfg.max_pointees))]
    locks = [(f"L{i}", rng.choice(("mutex", "rwlock")))
             for i in range(rng.randint(0, cfg.max_locks))]
    children = [f"t{i}" for i in range(1, n_threads)]
    bodies = {c: _body(rng, cfg, pointees, locks, rng.randint(1, cfg.max_events))
              for c in children}

    explicit = bool(children) and rng.random() < cfg.explicit_spawn_rate
    if explicit:
        budget = rng.randint(len(children), cfg.max_events)
        pending = list(children)
        spawned: list[str] = []
        main: list = []
        # keep one slot per still-unspawned child
        while budget > len(pending):
            r = rng.random()
            if pending and r < 0.4:
                main.append(Spawn(pending.pop(0)))
                spawned.append(main[-1].thread)
            elif spawned and r < 0.6:
                main.append(Join(spawned.pop(rng.randrange(len(spawned)))))
            else:
                main += _accesses(rng, cfg, pointees, 1)
            budget -= 1
        main += [Spawn(c) for c in pending]
    elif rng.random() < 0.3:
        main = _body(rng, cfg, pointees, locks, rng.randint(1, max(1, cfg.max_events // 2)))
    else:
        main = []

    lines = [f"pointee {p} size {s}" for p, s in pointees]
    lines += [f"lock {l} kind {k}" for l, k in locks]
    for tname, body in [(MAIN, main)] + [(c, bodies[c]) for c in children]:
        if tname == MAIN and not body:
            continue
        lines.append(f"thread {tname} {{")
        lines += ["    " + _format_stmt(s) for s in body]
        lines.append("}")
    return parse_program("\n".join(lines) + "\n", name)


class RaceConfirmer:
    """Looks for an interleaving in which a reported (granule, thread) really races.

    The trace the report came from is checked first; only if that fails does
    the search fall back to exhaustive enumeration of the program.
    """

    def __init__(self, program: Program):
        self.program = program
        self.known: set[tuple[GranuleId, int]] = set()
        self._checked: set[Trace] = set()
        self._search: Iterator[Trace] | None = None

    def _absorb(self, trace: Trace) -> None:
        if trace not in self._checked:
            self._checked.add(trace)
            self.known |= racy_participants(exact_race_check(trace))

    def confirm(self, report: RaceReport, trace: Trace | None = None) -> bool:
        key = (report.granule, report.accessor)
        if key in self.known:
            return True
        if trace is not None:
            self._absorb(trace)
            if key in self.known:
                return True
        if self._search is None:
            self._search = enumerate_interleavings(self.program, None)
        for t in self._search:
            self._absorb(t)
            if key in self.known:
                return True
        return False


@dataclass
class FuzzSummary:
    count: int
    seed: int
    programs: int = 0
    traces: int = 0
    reports: int = 0
    ilu_reports: int = 0
    confirmed: int = 0
    unconfirmed: int = 0
    counterexamples: list = field(default_factory=list, repr=False)

    def to_record(self) -> dict:
        rec = asdict(self)
        del rec["counterexamples"]
        return rec


def run_campaign(count: int, seed: int, cfg: FuzzConfig = FuzzConfig(),
                 max_traces: int | None = 10000) -> FuzzSummary:
    rng = random.Random(seed)
    summary = FuzzSummary(count, seed)
    for i in range(count):
        program = random_program(random.Random(rng.getrandbits(64)), cfg, f"fuzz-{seed}-{i}")
        summary.programs += 1
        confirmer = RaceConfirmer(program)
        replayer = PrefixReplayer(program)
        for trace in enumerate_interleavings(program, max_traces):
            summary.traces += 1
            for report in replayer.run(trace):
                if report.kind is not RaceKind.DATA_RACE:
                    summary.ilu_reports += 1
                    continue
                summary.reports += 1
                if confirmer.confirm(report, trace):
                    summary.confirmed += 1
                else:
                    summary.unconfirmed += 1
                    summary.counterexamples.append({
                        "program": program.name,
                        "text": format_program(program),
                        "trace": json.loads(trace_to_json(trace)),
                        "report": report.to_record(),
                    })
    return summary
