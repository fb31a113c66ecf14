"""Built-in programs with expected race/ILU labels.

Programs live in ``cases/<name>.race``; labels in the sidecar ``manifest.json``
as ``{name, category, race, ilu}`` records.  The leading ``#`` comment block of
each program is its notes field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import UnknownCaseError
from ..program import Program, parse_program

CORPUS_DIR = Path(__file__).parent
CASES_DIR = CORPUS_DIR / "cases"
MANIFEST = CORPUS_DIR / "manifest.json"

CATEGORIES = ("LD", "SYN", "EB", "SH", "TS",
              "CASE_A", "CASE_B", "CASE_C", "CASE_D", "CASE_E", "CASE_F", "CASE_G")


@dataclass(frozen=True)
class CorpusCase:
    name: str
    category: str
    text: str
    race: bool
    ilu: bool
    notes: str = ""

    @property
    def expected(self) -> dict[str, bool]:
        return {"race": self.race, "ilu": self.ilu}

    @property
    def program(self) -> Program:
        return parse_program(self.text, self.name)


def load_manifest(path: str | Path = MANIFEST) -> list[dict]:
    data = json.loads(Path(path).read_text())
    if not isinstance(data, list):
        raise ValueError(f"{path}: manifest must be a JSON array")
    for row in data:
        missing = {"name", "category", "race", "ilu"} - set(row)
        if missing:
            raise ValueError(f"{path}: record {row!r} lacks {sorted(missing)}")
        if row["category"] not in CATEGORIES:
            raise ValueError(f"{path}: unknown category {row['category']!r}")
    return data


def _notes(text: str) -> str:
    lines = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        lines.append(line.lstrip("# ").rstrip())
    return " ".join(lines)


def load_cases(manifest: str | Path = MANIFEST, cases_dir: str | Path = CASES_DIR) -> list[CorpusCase]:
    out = []
    for row in load_manifest(manifest):
        path = Path(cases_dir) / f"{row['name']}.race"
        if not path.exists():
            raise UnknownCaseError(f"no program file for case {row['name']!r}")
        text = path.read_text()
        out.append(CorpusCase(row["name"], row["category"], text, bool(row["race"]),
                              bool(row["ilu"]), _notes(text)))
    return out


def list_cases() -> list[str]:
    return [c.name for c in load_cases()]


def get_case(name: str) -> CorpusCase:
    for case in load_cases():
        if case.name == name:
            return case
    raise UnknownCaseError(f"unknown corpus case {name!r}")
