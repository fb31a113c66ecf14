"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (lines print live) or
``python3 tests/test_acceptance.py`` for just the summary lines.
"""

from __future__ import annotations

import contextlib
import io
import json
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from closure_oracle import closure_race_pairs  # noqa: E402
from tagrace.cli import main as cli_main  # noqa: E402
from tagrace.corpus import get_case, load_cases  # noqa: E402
from tagrace.engine import RaceKind, new_state, process_event, run_detector, tag_of_thread  # noqa: E402
from tagrace.errors import ReservedTagError  # noqa: E402
from tagrace.fuzz import random_program  # noqa: E402
from tagrace.lockset import LocksetState, PointeeMeta, handle_lockset_check  # noqa: E402
from tagrace.metrics import ConfusionCounts, compute_metrics  # noqa: E402
from tagrace.oracle import exact_race_check, shadow_race_check  # noqa: E402
from tagrace.program import EXCLUSIVE, LR, READER, enumerate_interleavings  # noqa: E402
from tagrace.tagged_memory import GranuleId, TaggedMemory, TaggedRef  # noqa: E402

TOL = 0.005

# published single-execution confusion counts (tp, fp, fn, tn) per tool, with the
# precision / accuracy / F1 printed next to them
PUBLISHED = {
    "TSan": ((89, 64, 15, 40), (0.5806, 0.6202, 0.6950)),
    "Archer": ((76, 2, 27, 102), (0.975, 0.8654, 0.8478)),
    "tag-based": ((69, 0, 34, 104), (1.0, 0.8365, 0.8023)),
}


def emit(name: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'} {name}: {detail}", flush=True)


@pytest.fixture
def say(capsys):
    """emit() that bypasses pytest's output capture so every line shows in -v runs."""
    def _say(name, ok, detail):
        with capsys.disabled():
            print()
            emit(name, ok, detail)
    return _say


def _cli(*argv: str) -> tuple[int, str]:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(list(argv))
    return code, buf.getvalue()


# --------------------------------------------------------------------------
# checks; each returns (ok, detail)


def check_reference_cases():
    expect = {"a": "none", "b": "none", "c": "none", "d": "ilu",
              "e": "race", "f": "race", "g": "race"}
    start = time.perf_counter()
    bad = []
    total = 0
    for letter, want in expect.items():
        p = get_case(f"case_{letter}").program
        for i, t in enumerate(enumerate_interleavings(p)):
            total += 1
            kinds = {r.kind for r in run_detector(t, p)}
            ok = {"none": kinds == set(),
                  "ilu": kinds == {RaceKind.READER_ILU},
                  "race": RaceKind.DATA_RACE in kinds}[want]
            if not ok:
                bad.append(f"case_{letter}#{i}")
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 5.0
    return ok, f"{total} interleavings, mismatches={bad or 0}, {elapsed:.2f}s (limit 5s)"


def check_no_false_positives(tmp_dir: Path):
    out = tmp_dir / "counterexamples.jsonl"
    start = time.perf_counter()
    code, text = _cli("--format", "json", "--seed", "42", "fuzz", "1000",
                      "--max-threads", "3", "--max-events", "8", "--max-pointees", "2",
                      "--max-locks", "2", "--out", str(out))
    elapsed = time.perf_counter() - start
    summary = json.loads(text.strip().splitlines()[-1])
    ok = code == 0 and summary["unconfirmed"] == 0 and elapsed < 300
    detail = ", ".join(f"{k}={summary[k]}" for k in
                       ("programs", "traces", "reports", "confirmed", "unconfirmed"))
    return ok, f"{detail}, {elapsed:.0f}s (limit 300s)"


def _corpus_traces():
    for case in load_cases():
        for t in enumerate_interleavings(case.program):
            yield case.name, t


def check_oracle_soundness():
    corpus = mismatched = 0
    for _, t in _corpus_traces():
        corpus += 1
        mine = {(p.first_seq, p.second_seq) for p in exact_race_check(t)}
        mismatched += mine != closure_race_pairs(t)
    rng = random.Random(42)
    fuzzed = 0
    while fuzzed < 200:
        p = random_program(random.Random(rng.getrandbits(64)))
        for t in enumerate_interleavings(p, max_traces=2):
            fuzzed += 1
            mine = {(q.first_seq, q.second_seq) for q in exact_race_check(t)}
            mismatched += mine != closure_race_pairs(t)
    return mismatched == 0, f"{corpus} corpus + {fuzzed} fuzzed traces, {mismatched} disagreements"


def metric_checks():
    """Nine (label, ok, detail) triples: three tools by precision / accuracy / F1."""
    out = []
    for tool, (counts, printed) in PUBLISHED.items():
        m = compute_metrics(ConfusionCounts(*counts))
        for name, got, want in zip(("precision", "accuracy", "f1"),
                                   (m.precision, m.accuracy, m.f1), printed):
            ok = got is not None and abs(got - want) <= TOL
            out.append((f"{tool} {name}", ok,
                        f"computed {got:.4f} vs published {want:.4f} (|d|={abs(got - want):.4f}, "
                        f"tol {TOL})"))
    return out


def check_tag_sweep():
    mem = TaggedMemory()
    mem.alloc("A", 16)
    g = GranuleId("A", 0)
    for gt in range(16):
        try:
            mem.set_granule_tag(g, gt)
        except ReservedTagError:
            if gt != 15:
                return False, f"tag {gt} wrongly rejected"
            continue
        if gt == 15:
            return False, "tag 15 stored"
        for rt in range(16):
            if (mem.access(TaggedRef("a", 0, g, rt), "read") is None) != (rt == gt):
                return False, f"access/tag_check disagree at ref {rt} granule {gt}"
    bad = [t for t in range(101) if not 1 <= tag_of_thread(t) <= 14]
    return not bad, "16x16 tag-pair sweep ok, tag_of_thread(0..100) within 1..14"


def check_lockset_monotonicity():
    rng = random.Random(2024)
    locks = "abcd"
    for _ in range(10_000):
        meta = PointeeMeta()
        for _ in range(rng.randint(1, 12)):
            held = {l: rng.choice((EXCLUSIVE, READER)) for l in rng.sample(locks, rng.randint(0, 3))}
            ls_tau = frozenset(held.items())
            before = {l for l, _ in meta.ls}
            had = bool(meta.ls)
            state = handle_lockset_check(ls_tau, meta)
            if meta.spa and meta.ls:
                return False, "spa set with non-empty ls"
            if had:
                after = {l for l, _ in meta.ls}
                if not after or not after <= before:
                    return False, f"ls grew or emptied: {before} -> {after}"
                if state is not LocksetState.INCONCLUSIVE and not before & set(held):
                    return False, "conclusive state without a common lock"
    return True, "10000 random sequences, ls never grows once set"


def check_unlock_hygiene_and_synchrony():
    traces = unlocks = reports = 0
    for case in load_cases():
        p = case.program
        for t in enumerate_interleavings(p):
            traces += 1
            st = new_state(p)
            for e in t:
                segs = list(st.segments.get(e.tid, {}).values()) if e.etype == LR else []
                updated = [r for s in segs for r in s.updated_refs]
                rep = process_event(st, e)
                if rep is not None:
                    reports += 1
                    if rep.event_seq != e.seq:
                        return (False, False), f"{case.name}: report seq {rep.event_seq} at event {e.seq}"
                if e.etype == LR:
                    unlocks += 1
                    if any(r.tag != 0 for r in updated):
                        return (False, True), f"{case.name}: tagged ref survives release at {e.seq}"
    return (True, True), f"{traces} traces, {unlocks} releases, {reports} reports"


def check_determinism():
    outputs = set()
    codes = set()
    for _ in range(10):
        code, text = _cli("--format", "json", "--seed", "7", "fuzz", "5")
        codes.add(("fuzz", code))
        outputs.add(text)
        code, text = _cli("--format", "json", "--seed", "7", "run", str(_case_path("case_g")),
                          "--engine", "both", "--schedule", "seed")
        codes.add(("run", code))
        outputs.add("run:" + text)
    ok = len(outputs) == 2 and codes == {("fuzz", 0), ("run", 1)}
    return ok, (f"10 repetitions each of seeded fuzz and run, {len(outputs)} distinct outputs "
                f"(want 2), exit codes {sorted(codes)}")


def _case_path(name: str) -> Path:
    from tagrace.corpus import CASES_DIR
    return CASES_DIR / f"{name}.race"


def check_bounded_subset():
    traces = removed = 0
    for _, t in _corpus_traces():
        traces += 1
        exact, bounded = set(exact_race_check(t)), set(shadow_race_check(t))
        if not bounded <= exact:
            return False, f"bounded mode added {sorted(bounded - exact)[:1]}"
        removed += len(exact - bounded)
    return True, f"{traces} corpus traces, bounded subset of exact ({removed} pairs dropped)"


# --------------------------------------------------------------------------
# pytest entry points


def test_reference_case_suite(say):
    ok, detail = check_reference_cases()
    say("reference-cases-a-g", ok, detail)
    assert ok, detail


def test_zero_false_positives(tmp_path, say):
    ok, detail = check_no_false_positives(tmp_path)
    say("zero-false-positives", ok, detail)
    assert ok, detail


def test_oracle_soundness(say):
    ok, detail = check_oracle_soundness()
    say("oracle-soundness", ok, detail)
    assert ok, detail


@pytest.mark.parametrize("label, ok, detail", metric_checks(), ids=lambda v: str(v))
def test_metric_reproduction(label, ok, detail, say):
    say(f"metric {label}", ok, detail)
    assert ok, detail


def test_invariant_tag_range(say):
    ok, detail = check_tag_sweep()
    say("invariant tag-range", ok, detail)
    assert ok, detail


def test_invariant_lockset_monotonicity(say):
    ok, detail = check_lockset_monotonicity()
    say("invariant lockset-monotonicity", ok, detail)
    assert ok, detail


def test_invariant_unlock_hygiene_and_report_synchrony(say):
    (hygiene, synchrony), detail = check_unlock_hygiene_and_synchrony()
    say("invariant unlock-hygiene", hygiene, detail)
    say("invariant report-synchrony", synchrony, detail)
    assert hygiene and synchrony, detail


def test_invariant_determinism(say):
    ok, detail = check_determinism()
    say("invariant determinism", ok, detail)
    assert ok, detail


def test_bounded_shadow_subset(say):
    ok, detail = check_bounded_subset()
    say("bounded-shadow-subset", ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import tempfile
    with tempfile.TemporaryDirectory() as d:
        results = [
            ("reference-cases-a-g", *check_reference_cases()),
            ("zero-false-positives", *check_no_false_positives(Path(d))),
            ("oracle-soundness", *check_oracle_soundness()),
            *[(f"metric {label}", ok, detail) for label, ok, detail in metric_checks()],
            ("invariant tag-range", *check_tag_sweep()),
            ("invariant lockset-monotonicity", *check_lockset_monotonicity()),
        ]
        (hyg, syn), detail = check_unlock_hygiene_and_synchrony()
        results += [("invariant unlock-hygiene", hyg, detail),
                    ("invariant report-synchrony", syn, detail),
                    ("invariant determinism", *check_determinism()),
                    ("bounded-shadow-subset", *check_bounded_subset())]
    for name, ok, detail in results:
        emit(name, ok, detail)
    sys.exit(0 if all(ok for _, ok, _ in results) else 1)
