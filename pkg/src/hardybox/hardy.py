"""Hardy-type patterns: entries forced to zero plus one target entry."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .behavior import (
    Behavior,
    BoxFormatError,
    DimensionError,
    Scenario,
    _as_scenario,
    block_to_index,
    decode_index,
    deterministic_box,
    encode_index,
    enumerate_assignments,
)

FLOAT_ZERO_TOL = 1e-10


class Entry(NamedTuple):
    settings: tuple
    outcomes: tuple


@dataclass(frozen=True)
class HardyPattern:
    scenario: Scenario
    zero_entries: tuple
    target_entry: Entry
    name: str = "custom"

    def __post_init__(self):
        zeros = tuple(Entry(tuple(e[0]), tuple(e[1])) for e in self.zero_entries)
        target = Entry(tuple(self.target_entry[0]), tuple(self.target_entry[1]))
        for e in zeros + (target,):
            encode_index(self.scenario, e.settings, e.outcomes)  # validates shape
        if target in zeros:
            raise ValueError("target entry is also listed as a zero entry")
        object.__setattr__(self, "zero_entries", zeros)
        object.__setattr__(self, "target_entry", target)

    @property
    def zero_indices(self) -> list[int]:
        return [encode_index(self.scenario, *e) for e in self.zero_entries]

    @property
    def target_index(self) -> int:
        return encode_index(self.scenario, *self.target_entry)

    @classmethod
    def from_indices(cls, scenario, zeros, target, name="custom"):
        scenario = _as_scenario(scenario)
        return cls(scenario, tuple(decode_index(scenario, i) for i in zeros), decode_index(scenario, target), name)


def standard_pattern(n: int) -> HardyPattern:
    """One zero per party for "that party measures D and gets +1, everyone
    else measures U and gets +1", one zero for "all measure D and get -1";
    the target is "all measure U and get +1"."""
    if n < 2:
        raise DimensionError(f"a Hardy argument needs at least two parties, got {n}")
    scenario = Scenario(n)
    zeros = []
    for party in range(n):
        settings = tuple(1 if p == party else 0 for p in range(n))
        zeros.append((settings, (0,) * n))
    zeros.append(((1,) * n, (1,) * n))
    return HardyPattern(scenario, tuple(zeros), ((0,) * n, (0,) * n), "standard")


def footnote_alt_pattern() -> HardyPattern:
    """Two-party variant with target P(A=+1, B=-1) and zeros P(A=+1, B'=-1),
    P(A'=-1, B=-1), P(A'=+1, B'=+1)."""
    zeros = [block_to_index(k) for k in (10, 8, 13)]
    return HardyPattern.from_indices(2, zeros, block_to_index(2), "footnote-alt")


PATTERNS = {"standard": standard_pattern, "footnote-alt": lambda n: footnote_alt_pattern()}


def named_pattern(name: str, n: int) -> HardyPattern:
    if name not in PATTERNS:
        raise LookupError(f"unknown pattern {name!r}; choose from {sorted(PATTERNS)}")
    pattern = PATTERNS[name](n)
    if pattern.scenario.n_parties != n:
        raise DimensionError(f"pattern {name!r} is defined for {pattern.scenario.n_parties} parties only")
    return pattern


@dataclass
class HardyReport:
    zeros_satisfied: bool
    residuals: dict = field(default_factory=dict)  # zero index -> value
    q: object = 0
    target_index: int = 0
    tol: float = 0

    @property
    def passed(self) -> bool:
        """Zeros hold and the target is strictly positive."""
        return self.zeros_satisfied and self.q > self.tol


def hardy_check(behavior: Behavior, pattern: HardyPattern, tol=None) -> HardyReport:
    if behavior.scenario != pattern.scenario:
        raise DimensionError(
            f"pattern is for {pattern.scenario.n_parties} parties, box has {behavior.n_parties}"
        )
    if tol is None:
        tol = 0 if behavior.is_exact else FLOAT_ZERO_TOL
    residuals = {i: behavior.table[i] for i in pattern.zero_indices}
    ok = all(abs(v) <= tol for v in residuals.values())
    return HardyReport(ok, residuals, behavior.table[pattern.target_index], pattern.target_index, tol)


@dataclass
class ScanResult:
    max_q: int
    witness: tuple | None
    witness_box: Behavior | None
    consistent: int
    total: int


def local_realism_scan(scenario, pattern: HardyPattern) -> ScanResult:
    """Maximum Hardy probability over all deterministic local boxes that
    respect the pattern's zeros.

    A deterministic box puts unit mass on ``assignment[party][setting]`` in
    every context, so each entry is read off the assignment directly.
    """
    scenario = _as_scenario(scenario)
    if pattern.scenario != scenario:
        raise DimensionError("pattern and scenario disagree on the number of parties")

    def hits(assignment, entry):
        return all(assignment[p][s] == o for p, (s, o) in enumerate(zip(*entry)))

    best, witness, consistent, total = -1, None, 0, 0
    for assignment in enumerate_assignments(scenario.n_parties):
        total += 1
        if any(hits(assignment, e) for e in pattern.zero_entries):
            continue
        consistent += 1
        q = int(hits(assignment, pattern.target_entry))
        if q > best:
            best, witness = q, assignment
    if witness is None:
        return ScanResult(0, None, None, 0, total)
    return ScanResult(best, witness, deterministic_box(witness), consistent, total)


# -- pattern files ----------------------------------------------------------


def pattern_to_dict(pattern: HardyPattern) -> dict:
    def entry(e):
        return {"settings": list(e.settings), "outcomes": list(e.outcomes)}

    return {
        "parties": pattern.scenario.n_parties,
        "zero_entries": [entry(e) for e in pattern.zero_entries],
        "target_entry": entry(pattern.target_entry),
    }


def pattern_from_dict(data) -> HardyPattern:
    try:
        zeros = [(tuple(e["settings"]), tuple(e["outcomes"])) for e in data["zero_entries"]]
        t = data["target_entry"]
        target = (tuple(t["settings"]), tuple(t["outcomes"]))
        n = data.get("parties", len(target[0]))
        return HardyPattern(Scenario(n), tuple(zeros), target)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise BoxFormatError(f"malformed pattern document: {exc}") from exc


def load_pattern(path) -> HardyPattern:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise BoxFormatError(f"cannot read pattern {path}: {exc}") from exc
    return pattern_from_dict(data)


def save_pattern(path, pattern: HardyPattern) -> None:
    Path(path).write_text(json.dumps(pattern_to_dict(pattern), indent=1) + "\n")
