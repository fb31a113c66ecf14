"""Command-line front end.

    tagrace run PROGRAM [--engine tbri|hb|both] [--schedule enumerate|seed] [--trace FILE]
    tagrace fuzz COUNT [--max-threads N] [--max-events N] [--out FILE]
    tagrace cases list|run [NAME...] [--manifest FILE] [--reports FILE]
    tagrace metrics MANIFEST REPORTS [--executions 1|5|20|all]

Global flags (before or after the command): --format json|text, --seed,
--max-traces, --quiet.  Exit status: 0 no findings, 1 findings or mismatch,
2 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Iterator, Sequence
from pathlib import Path

from . import __version__
from .corpus import CASES_DIR, MANIFEST, CorpusCase, load_cases, load_manifest
from .engine import PrefixReplayer, RaceKind, RaceReport
from .errors import JoinError, TagRaceError, UnknownCaseError
from .fuzz import FuzzConfig, run_campaign
from .metrics import ConfusionCounts, compute_metrics
from .oracle import RacyPair, exact_race_check
from .program import (
    Program, check_trace, enumerate_interleavings, parse_program, random_schedule,
    trace_from_json,
)

EXIT_CLEAN, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2


class Output:
    """Line-delimited JSON or plain text, honouring --quiet for non-summary lines."""

    def __init__(self, fmt: str, quiet: bool, stream=None):
        self.json = fmt == "json"
        self.quiet = quiet
        self.stream = stream or sys.stdout

    def emit(self, record: dict, text: str, summary: bool = False) -> None:
        if self.quiet and not summary:
            return
        line = json.dumps(record, sort_keys=True) if self.json else text
        print(line, file=self.stream)


def pair_record(p: RacyPair) -> dict:
    return {"first_seq": p.first_seq, "second_seq": p.second_seq,
            "pointee": p.granule.pointee, "granule_index": p.granule.index,
            "first_tid": p.first_tid, "second_tid": p.second_tid}


def _report_text(r: RaceReport) -> str:
    residue = "?" if r.prior_tid_residue is None else r.prior_tid_residue
    return (f"{r.kind.value} at seq {r.event_seq} on {r.granule}: thread {r.accessor} "
            f"(ref tag {r.ref_tag}) vs granule tag {r.granule_tag} "
            f"[prior {r.prior_event_type}, tid%14={residue}]")


# --------------------------------------------------------------------------
# run


def _traces(program: Program, args) -> Iterator[tuple[int, tuple]]:
    if args.trace:
        trace = trace_from_json(Path(args.trace).read_text())
        check_trace(trace, program)
        yield 0, trace
    elif args.schedule == "seed":
        yield 0, random_schedule(program, args.seed)
    else:
        yield from enumerate(enumerate_interleavings(program, args.max_traces))


def cmd_run(args, out: Output) -> int:
    program = parse_program(Path(args.program).read_text(), Path(args.program).stem)
    engines = ("tbri", "hb") if args.engine == "both" else (args.engine,)
    findings = 0
    traces = 0
    replayer = PrefixReplayer(program)
    for index, trace in _traces(program, args):
        traces += 1
        if "tbri" in engines:
            reports = replayer.run(trace)
            findings += len(reports)
            out.emit({"record": "trace", "program": program.name, "trace_index": index,
                      "engine": "tbri", "reports": [r.to_record() for r in reports]},
                     "\n".join([f"trace {index} [tbri]: {len(reports)} report(s)"]
                               + ["  " + _report_text(r) for r in reports]))
        if "hb" in engines:
            pairs = exact_race_check(trace)
            findings += len(pairs)
            out.emit({"record": "trace", "program": program.name, "trace_index": index,
                      "engine": "hb", "pairs": [pair_record(p) for p in pairs]},
                     "\n".join([f"trace {index} [hb]: {len(pairs)} racy pair(s)"]
                               + [f"  seq {p.first_seq} (t{p.first_tid}) / seq {p.second_seq} "
                                  f"(t{p.second_tid}) on {p.granule}" for p in pairs]))
    out.emit({"record": "summary", "program": program.name, "traces": traces,
              "findings": findings},
             f"{program.name}: {traces} trace(s), {findings} finding(s)", summary=True)
    return EXIT_FINDINGS if findings else EXIT_CLEAN


# --------------------------------------------------------------------------
# fuzz


def cmd_fuzz(args, out: Output) -> int:
    cfg = FuzzConfig(max_threads=args.max_threads, max_events=args.max_events,
                     max_pointees=args.max_pointees, max_locks=args.max_locks)
    summary = run_campaign(args.count, args.seed, cfg, args.max_traces)
    if summary.counterexamples:
        with open(args.out, "w") as fh:
            for c in summary.counterexamples:
                fh.write(json.dumps(c, sort_keys=True) + "\n")
    rec = {"record": "fuzz_summary", **summary.to_record()}
    out.emit(rec, " ".join(f"{k}={v}" for k, v in summary.to_record().items()), summary=True)
    if summary.unconfirmed:
        print(f"{summary.unconfirmed} unconfirmed report(s); counterexamples in {args.out}",
              file=sys.stderr)
        return EXIT_FINDINGS
    return EXIT_CLEAN


# --------------------------------------------------------------------------
# cases


def observe_case(case: CorpusCase, max_traces: int | None = 10000,
                 report_sink=None) -> dict:
    """Run TBRI over every interleaving of ``case``; returns observed labels.

    ``report_sink(trace_index, report)`` is called for every report, in order.
    """
    program = case.program
    replayer = PrefixReplayer(program)
    race = ilu = False
    traces = 0
    for index, trace in enumerate(enumerate_interleavings(program, max_traces)):
        traces += 1
        for r in replayer.run(trace):
            race |= r.kind is RaceKind.DATA_RACE
            ilu |= r.kind is RaceKind.READER_ILU
            if report_sink is not None:
                report_sink(index, r)
    return {"race": race, "ilu": ilu, "traces": traces}


def cmd_cases(args, out: Output) -> int:
    cases = load_cases(args.manifest, args.cases_dir)
    if args.names:
        known = {c.name for c in cases}
        for n in args.names:
            if n not in known:
                raise UnknownCaseError(f"unknown corpus case {n!r}")
        cases = [c for c in cases if c.name in args.names]
    if args.action == "list":
        for c in cases:
            out.emit({"record": "case", "name": c.name, "category": c.category, **c.expected},
                     f"{c.name:32} {c.category:7} race={c.race} ilu={c.ilu}")
        return EXIT_CLEAN

    sink = open(args.reports, "w") if args.reports else None
    failed = 0
    try:
        for c in cases:
            def record(index, r, name=c.name):
                sink.write(json.dumps({"case": name, "trace_index": index, **r.to_record()},
                                      sort_keys=True) + "\n")
            seen = observe_case(c, args.max_traces, record if sink else None)
            ok = seen["race"] == c.race and seen["ilu"] == c.ilu
            failed += not ok
            out.emit({"record": "case_result", "name": c.name, "pass": ok,
                      "expected": c.expected, "observed": seen},
                     f"{'PASS' if ok else 'FAIL'} {c.name:32} expected race={c.race} ilu={c.ilu}"
                     f"  observed race={seen['race']} ilu={seen['ilu']} ({seen['traces']} traces)")
    finally:
        if sink:
            sink.close()
    out.emit({"record": "cases_summary", "cases": len(cases), "failed": failed},
             f"{len(cases) - failed}/{len(cases)} cases pass", summary=True)
    return EXIT_FINDINGS if failed else EXIT_CLEAN


# --------------------------------------------------------------------------
# metrics


def join_labels(manifest: Sequence[dict], reports: Sequence[dict],
                executions: int | None = None) -> ConfusionCounts:
    """Confusion counts from expected labels and observed report records.

    A case is positive when some trace with index < ``executions`` reported a
    DataRace; ReaderILU findings are ignored.  Cases with no records are negative.
    """
    names = {row["name"] for row in manifest}
    unknown = sorted({r["case"] for r in reports} - names)
    if unknown:
        raise JoinError(f"reports name cases missing from the manifest: {unknown}")
    positive = {r["case"] for r in reports
                if r["kind"] == RaceKind.DATA_RACE.value
                and (executions is None or r["trace_index"] < executions)}
    counts = ConfusionCounts()
    for row in manifest:
        counts = counts.add(bool(row["race"]), row["name"] in positive)
    return counts


def cmd_metrics(args, out: Output) -> int:
    manifest = load_manifest(args.manifest)
    lines = Path(args.reports).read_text().splitlines()
    reports = [json.loads(line) for line in lines if line.strip()]
    executions = None if args.executions == "all" else int(args.executions)
    counts = join_labels(manifest, reports, executions)
    m = compute_metrics(counts)

    def fmt(v):
        return "undefined" if v is None else f"{v:.4f}"

    out.emit({"record": "metrics", "executions": args.executions,
              "tp": counts.tp, "fp": counts.fp, "fn": counts.fn, "tn": counts.tn,
              **m.to_record()},
             f"TP={counts.tp} FP={counts.fp} FN={counts.fn} TN={counts.tn}  "
             f"precision={fmt(m.precision)} accuracy={fmt(m.accuracy)} f1={fmt(m.f1)} "
             f"recall={fmt(m.recall)}", summary=True)
    return EXIT_CLEAN


# --------------------------------------------------------------------------
# argument parsing


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # defaults are suppressed on the subcommand copy so a flag given before the
    # command is not clobbered by the subparser's default
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("json", "text"), default=d("text"))
    p.add_argument("--seed", type=int, default=d(0), help="u64 seed")
    p.add_argument("--max-traces", type=int, default=d(10000))
    p.add_argument("--quiet", action="store_true", default=d(False))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tagrace", parents=[_global_flags(False)],
                                     description="Tag-based race inference lab.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _global_flags(True)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run detectors over a program")
    run.add_argument("program")
    run.add_argument("--engine", choices=("tbri", "hb", "both"), default="both")
    run.add_argument("--schedule", choices=("enumerate", "seed"), default="enumerate")
    run.add_argument("--trace", help="JSON trace file to check instead of scheduling")

    fuzz = sub.add_parser("fuzz", parents=[common], help="no-false-positive campaign")
    fuzz.add_argument("count", type=int)
    fuzz.add_argument("--max-threads", type=int, default=3)
    fuzz.add_argument("--max-events", type=int, default=8)
    fuzz.add_argument("--max-pointees", type=int, default=2)
    fuzz.add_argument("--max-locks", type=int, default=2)
    fuzz.add_argument("--out", default="fuzz_counterexamples.jsonl")

    cases = sub.add_parser("cases", parents=[common], help="list or run the corpus")
    cases.add_argument("action", choices=("list", "run"))
    cases.add_argument("names", nargs="*")
    cases.add_argument("--manifest", default=str(MANIFEST))
    cases.add_argument("--cases-dir", default=str(CASES_DIR))
    cases.add_argument("--reports", help="write TBRI report records (JSON lines) here")

    metrics = sub.add_parser("metrics", parents=[common], help="confusion counts and scores")
    metrics.add_argument("manifest")
    metrics.add_argument("reports")
    metrics.add_argument("--executions", choices=("1", "5", "20", "all"), default="all")
    return parser


COMMANDS = {"run": cmd_run, "fuzz": cmd_fuzz, "cases": cmd_cases, "metrics": cmd_metrics}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_CLEAN
    if args.max_traces is not None and args.max_traces < 1:
        print("tagrace: error: --max-traces must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    out = Output(args.format, args.quiet)
    try:
        return COMMANDS[args.command](args, out)
    except (TagRaceError, OSError, ValueError, KeyError) as exc:
        print(f"tagrace: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
