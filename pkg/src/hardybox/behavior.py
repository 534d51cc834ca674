"""Boxes: joint conditional probability tables for n parties with two
binary-outcome measurements each.

A box is stored as a flat table of 4**n entries. Each party contributes two
bits to the flat index, setting first and outcome second, with party 1 in the
most significant position. For three parties this is the familiar
``32*i + 16*s1 + 8*j + 4*s2 + 2*k + s3`` numbering.

Setting bit 0 is the "U"/X measurement and bit 1 the "D"/Y measurement.
Outcome bit 0 means +1 and bit 1 means -1.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

MAX_PARTIES = 6
FLOAT_TOL = 1e-12
ENCODING = "interleaved-setting-outcome-msb-party1"
FORMAT_VERSION = 1


class BoxError(ValueError):
    """Base class for invalid boxes and box operations."""


class DimensionError(BoxError):
    pass


class RangeError(BoxError):
    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = list(indices)


class NormalizationError(BoxError):
    def __init__(self, message, contexts=()):
        super().__init__(message)
        self.contexts = list(contexts)


class IllDefinedMarginalError(BoxError):
    pass


class BoxFormatError(BoxError):
    """A box file could not be parsed."""


@dataclass(frozen=True)
class Scenario:
    n_parties: int
    settings_per_party: int = 2
    outcomes_per_setting: int = 2

    def __post_init__(self):
        if not isinstance(self.n_parties, int) or not 2 <= self.n_parties <= MAX_PARTIES:
            raise DimensionError(f"n_parties must be in [2, {MAX_PARTIES}], got {self.n_parties!r}")
        if self.settings_per_party != 2 or self.outcomes_per_setting != 2:
            raise DimensionError("only two settings and two outcomes per party are supported")

    @property
    def n_contexts(self) -> int:
        return 2**self.n_parties

    @property
    def size(self) -> int:
        return 4**self.n_parties

    def contexts(self) -> Iterator[tuple[int, ...]]:
        return itertools.product((0, 1), repeat=self.n_parties)

    def outcome_tuples(self) -> Iterator[tuple[int, ...]]:
        return itertools.product((0, 1), repeat=self.n_parties)


def _as_scenario(scenario) -> Scenario:
    return scenario if isinstance(scenario, Scenario) else Scenario(int(scenario))


def encode_index(scenario, settings: Sequence[int], outcomes: Sequence[int]) -> int:
    scenario = _as_scenario(scenario)
    n = scenario.n_parties
    if len(settings) != n or len(outcomes) != n:
        raise DimensionError(f"expected {n} settings and {n} outcomes")
    index = 0
    for s, o in zip(settings, outcomes):
        if s not in (0, 1) or o not in (0, 1):
            raise DimensionError(f"bits must be 0 or 1, got setting={s!r} outcome={o!r}")
        index = 4 * index + 2 * s + o
    return index


def decode_index(scenario, index: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    scenario = _as_scenario(scenario)
    if not 0 <= index < scenario.size:
        raise DimensionError(f"index {index} out of range for {scenario.n_parties} parties")
    settings, outcomes = [], []
    for shift in range(2 * scenario.n_parties - 2, -1, -2):
        pair = (index >> shift) & 3
        settings.append(pair >> 1)
        outcomes.append(pair & 1)
    return tuple(settings), tuple(outcomes)


def context_indices(scenario, settings: Sequence[int]) -> list[int]:
    """Flat indices of one context, outcome tuples in lexicographic order."""
    scenario = _as_scenario(scenario)
    return [encode_index(scenario, settings, o) for o in scenario.outcome_tuples()]


@dataclass(frozen=True)
class Behavior:
    scenario: Scenario
    table: tuple
    numeric: str = "rational"

    @property
    def n_parties(self) -> int:
        return self.scenario.n_parties

    @property
    def is_exact(self) -> bool:
        return self.numeric == "rational"

    @property
    def default_tol(self) -> float:
        return 0 if self.is_exact else FLOAT_TOL

    def __getitem__(self, index: int):
        return self.table[index]

    def __len__(self) -> int:
        return len(self.table)

    def prob(self, settings, outcomes):
        return self.table[encode_index(self.scenario, settings, outcomes)]

    def context(self, settings) -> list:
        return [self.table[i] for i in context_indices(self.scenario, settings)]


def _coerce(values, numeric):
    if numeric == "rational":
        out = []
        for v in values:
            if isinstance(v, float):
                raise BoxError(f"float value {v!r} in a rational box")
            out.append(Fraction(v))
        return tuple(out)
    return tuple(float(v) for v in values)


def _infer_numeric(values) -> str:
    return "float" if any(isinstance(v, float) for v in values) else "rational"


def behavior_from_table(scenario, values: Sequence, numeric: str | None = None, tol=None) -> Behavior:
    """Validate a flat table and wrap it as a Behavior.

    Raises RangeError for entries outside [0, 1] and NormalizationError
    (carrying the offending contexts) when a context does not sum to one.
    """
    scenario = _as_scenario(scenario)
    values = list(values)
    if len(values) != scenario.size:
        raise DimensionError(f"expected {scenario.size} values, got {len(values)}")
    numeric = numeric or _infer_numeric(values)
    if numeric not in ("rational", "float"):
        raise BoxError(f"unknown numeric mode {numeric!r}")
    table = _coerce(values, numeric)
    if tol is None:
        tol = 0 if numeric == "rational" else FLOAT_TOL

    bad = [i for i, v in enumerate(table) if not (-tol <= v <= 1 + tol) or v != v]
    if bad:
        raise RangeError(f"entries outside [0, 1] at indices {bad}", bad)

    unnormalized = []
    for settings in scenario.contexts():
        total = sum(table[i] for i in context_indices(scenario, settings))
        if abs(total - 1) > tol:
            unnormalized.append(settings)
    if unnormalized:
        raise NormalizationError(
            f"{len(unnormalized)} context(s) do not sum to 1, first {unnormalized[0]}", unnormalized
        )
    return Behavior(scenario, table, numeric)


# -- no-signaling ---------------------------------------------------------


@dataclass(frozen=True)
class SignalingEquation:
    """sum(table[lhs]) == sum(table[rhs]) for one party switching its setting."""

    party: int
    lhs: tuple[int, ...]
    rhs: tuple[int, ...]

    def describe(self, scenario) -> str:
        """Render with p-labels, e.g. ``p1 + p2 = p9 + p10``."""
        sides = sorted(sorted(label_order(scenario, i) for i in side) for side in (self.lhs, self.rhs))
        n = _as_scenario(scenario).n_parties
        prefix = "p" if n in (2, 3) else "x"
        return " = ".join(" + ".join(f"{prefix}{k}" for k in side) for side in sides)


def no_signaling_equations(scenario) -> list[SignalingEquation]:
    """Every equality stating that the marginal of the other n-1 parties does
    not depend on one party's setting. There are n * 4**(n-1) of them."""
    scenario = _as_scenario(scenario)
    n = scenario.n_parties
    equations = []
    for party in reversed(range(n)):
        for rest_settings in itertools.product((0, 1), repeat=n - 1):
            for rest_outcomes in itertools.product((0, 1), repeat=n - 1):
                sides = []
                for s in (0, 1):
                    settings = rest_settings[:party] + (s,) + rest_settings[party:]
                    sides.append(
                        tuple(
                            encode_index(scenario, settings, rest_outcomes[:party] + (o,) + rest_outcomes[party:])
                            for o in (0, 1)
                        )
                    )
                equations.append(SignalingEquation(party, sides[0], sides[1]))
    return equations


@dataclass
class NoSignalingReport:
    passed: bool
    checked: int
    violations: list = field(default_factory=list)  # (equation, lhs value, rhs value)

    def describe(self, scenario) -> list[str]:
        return [
            f"party {eq.party + 1}: {eq.describe(scenario)} ({_fmt(a)} != {_fmt(b)})"
            for eq, a, b in self.violations
        ]


def no_signaling_check(behavior: Behavior, tol=None) -> NoSignalingReport:
    tol = behavior.default_tol if tol is None else tol
    table = behavior.table
    equations = no_signaling_equations(behavior.scenario)
    violations = []
    for eq in equations:
        a = sum(table[i] for i in eq.lhs)
        b = sum(table[i] for i in eq.rhs)
        if abs(a - b) > tol:
            violations.append((eq, a, b))
    return NoSignalingReport(not violations, len(equations), violations)


# -- marginals ------------------------------------------------------------


@dataclass(frozen=True)
class Marginal:
    parties: tuple[int, ...]
    settings: tuple[int, ...]
    probs: dict

    def __getitem__(self, outcomes):
        return self.probs[tuple(outcomes)]


def marginal(behavior: Behavior, parties: Sequence[int], settings: Sequence[int], tol=None) -> Marginal:
    """Outcome distribution of a subset of parties (0-based) for fixed settings.

    Only defined for no-signaling boxes; the completing settings of the other
    parties are taken as all zeros.
    """
    scenario = behavior.scenario
    parties, settings = tuple(parties), tuple(settings)
    n = scenario.n_parties
    if len(parties) != len(settings) or len(set(parties)) != len(parties):
        raise DimensionError("parties and settings must have equal length without repeats")
    if any(not 0 <= p < n for p in parties):
        raise DimensionError(f"party index out of range for {n} parties")
    report = no_signaling_check(behavior, tol)
    if not report.passed:
        raise IllDefinedMarginalError(
            "marginal depends on the other parties' settings: " + "; ".join(report.describe(scenario)[:3])
        )
    full_settings = [0] * n
    for p, s in zip(parties, settings):
        full_settings[p] = s
    zero = Fraction(0) if behavior.is_exact else 0.0
    probs = {o: zero for o in itertools.product((0, 1), repeat=len(parties))}
    for outcomes in scenario.outcome_tuples():
        key = tuple(outcomes[p] for p in parties)
        probs[key] += behavior.prob(full_settings, outcomes)
    return Marginal(parties, settings, probs)


# -- deterministic boxes --------------------------------------------------


def deterministic_box(assignment: Sequence[Sequence[int]]) -> Behavior:
    """Box with outcome ``assignment[party][setting]`` in every context."""
    assignment = tuple(tuple(a) for a in assignment)
    scenario = Scenario(len(assignment))
    if any(len(a) != 2 or any(b not in (0, 1) for b in a) for a in assignment):
        raise DimensionError("each party needs one outcome bit per setting")
    table = [Fraction(0)] * scenario.size
    for settings in scenario.contexts():
        outcomes = [assignment[p][s] for p, s in enumerate(settings)]
        table[encode_index(scenario, settings, outcomes)] = Fraction(1)
    return Behavior(scenario, tuple(table), "rational")


def enumerate_assignments(n: int) -> Iterator[tuple[tuple[int, int], ...]]:
    for bits in itertools.product((0, 1), repeat=2 * n):
        yield tuple((bits[2 * p], bits[2 * p + 1]) for p in range(n))


def enumerate_deterministic(n: int) -> Iterator[Behavior]:
    for assignment in enumerate_assignments(n):
        yield deterministic_box(assignment)


def convex_combination(weights: Sequence, behaviors: Sequence[Behavior]) -> Behavior:
    if len(weights) != len(behaviors) or not behaviors:
        raise DimensionError("need one weight per behavior")
    scenario = behaviors[0].scenario
    if any(b.scenario != scenario for b in behaviors):
        raise DimensionError("behaviors belong to different scenarios")
    numeric = "rational" if all(b.is_exact for b in behaviors) and not any(
        isinstance(w, float) for w in weights) else "float"
    table = [sum(w * b.table[i] for w, b in zip(weights, behaviors)) for i in range(scenario.size)]
    return behavior_from_table(scenario, table, numeric)


# -- block labels and p-labels -------------------------------------------------
#
# Two-party tables are conventionally labelled p1..p16 in four blocks of four:
# contexts (A,B), (A',B), (A,B'), (A',B') with outcomes ++, +-, -+, -- inside
# each block. Those Hardy conditions (p1 = p6 = p11 = 0, target p13) coincide
# with the general n-party pattern only if the primed observables are setting
# 0 and the unprimed ones setting 1 with their +/-1 values reversed. Three-
# party labels p0..p63 are the flat indices themselves.

OBSERVABLES = {"A": (0, 1), "A'": (0, 0), "B": (1, 1), "B'": (1, 0)}
BLOCK_CONTEXTS = (("A", "B"), ("A'", "B"), ("A", "B'"), ("A'", "B'"))
_BLOCK_OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def outcome_bit(setting: int, value: int) -> int:
    """Flat-index outcome bit of the two-party observable value +/-1."""
    if value not in (1, -1):
        raise ValueError(f"outcome value must be +1 or -1, got {value!r}")
    plus_bit = 1 if setting == 1 else 0
    return plus_bit if value == 1 else 1 - plus_bit


def outcome_value(setting: int, bit: int) -> int:
    return 1 if bit == outcome_bit(setting, 1) else -1


def block_to_index(label: int) -> int:
    if not 1 <= label <= 16:
        raise DimensionError(f"two-party labels run from 1 to 16, got {label}")
    ctx, out = divmod(label - 1, 4)
    (x, y), (vx, vy) = BLOCK_CONTEXTS[ctx], _BLOCK_OUTCOMES[out]
    sx, sy = OBSERVABLES[x][1], OBSERVABLES[y][1]
    return encode_index(2, (sx, sy), (outcome_bit(sx, vx), outcome_bit(sy, vy)))


_INDEX_TO_BLOCK = {block_to_index(k): k for k in range(1, 17)}


def index_to_block(index: int) -> int:
    return _INDEX_TO_BLOCK[index]


def p_label(scenario, index: int) -> str:
    n = _as_scenario(scenario).n_parties
    if n == 2:
        return f"p{index_to_block(index)}"
    if n == 3:
        return f"p{index}"
    return f"x{index}"


def label_order(scenario, index: int) -> int:
    return index_to_block(index) if _as_scenario(scenario).n_parties == 2 else index


def from_p_labels(n: int, values: dict) -> Behavior:
    """Build a rational box from ``{p-label: value}``; unlisted entries are 0."""
    scenario = Scenario(n)
    table = [Fraction(0)] * scenario.size
    for label, v in values.items():
        index = block_to_index(label) if n == 2 else label
        table[index] = Fraction(v)
    return behavior_from_table(scenario, table, "rational")


def observable_assignment(values: dict) -> tuple[tuple[int, int], ...]:
    """Two-party deterministic assignment from ``{"A": +/-1, "A'": ..., "B": ..., "B'": ...}``."""
    assignment = [[0, 0], [0, 0]]
    for name, (party, setting) in OBSERVABLES.items():
        assignment[party][setting] = outcome_bit(setting, values[name])
    return tuple(tuple(a) for a in assignment)


# -- presets --------------------------------------------------------------

HALF = Fraction(1, 2)


def _eq32():
    return from_p_labels(2, {k: HALF for k in (2, 3, 5, 8, 9, 12, 13, 16)})


def _eq40():
    support = (0, 3, 12, 15, 17, 18, 29, 30, 33, 35, 45, 47, 48, 50, 60, 62)
    return from_p_labels(3, {k: HALF for k in support})


def _footnote_alt():
    # anticorrelated in (A,B), (A',B), (A',B'); correlated in (A,B')
    return from_p_labels(2, {k: HALF for k in (2, 3, 6, 7, 9, 12, 14, 15)})


PRESETS = {
    "eq32-max-hardy": _eq32,
    "eq40-max-hardy-3": _eq40,
    "footnote-alt-hardy": _footnote_alt,
}


def preset(name: str) -> Behavior:
    try:
        return PRESETS[name]()
    except KeyError:
        raise LookupError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# -- box files --------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return repr(float(v))


def box_to_dict(behavior: Behavior) -> dict:
    if behavior.is_exact:
        table = [f"{v.numerator}/{v.denominator}" for v in behavior.table]
    else:
        table = [float(v) for v in behavior.table]
    return {
        "format_version": FORMAT_VERSION,
        "parties": behavior.n_parties,
        "encoding": ENCODING,
        "numeric": behavior.numeric,
        "table": table,
    }


def _parse_value(v, numeric):
    if numeric == "rational":
        if isinstance(v, bool) or not isinstance(v, (str, int)):
            raise BoxFormatError(f"rational entries must be 'num/den' strings, got {v!r}")
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError) as exc:
            raise BoxFormatError(f"bad rational {v!r}") from exc
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise BoxFormatError(f"float entries must be numbers, got {v!r}")
    if not math.isfinite(v):
        raise BoxFormatError(f"non-finite entry {v!r}")
    return float(v)


def parse_box_dict(data) -> tuple[Scenario, list, str]:
    """Structural parse of a box document, without probability validation."""
    if not isinstance(data, dict):
        raise BoxFormatError("box document must be a JSON object")
    missing = {"format_version", "parties", "encoding", "numeric", "table"} - set(data)
    if missing:
        raise BoxFormatError(f"missing keys: {sorted(missing)}")
    if data["format_version"] != FORMAT_VERSION:
        raise BoxFormatError(f"unsupported format_version {data['format_version']!r}")
    if data["encoding"] != ENCODING:
        raise BoxFormatError(f"unsupported encoding {data['encoding']!r}")
    numeric = data["numeric"]
    if numeric not in ("rational", "float"):
        raise BoxFormatError(f"unknown numeric mode {numeric!r}")
    try:
        scenario = Scenario(data["parties"])
    except DimensionError as exc:
        raise BoxFormatError(str(exc)) from exc
    table = data["table"]
    if not isinstance(table, list) or len(table) != scenario.size:
        raise BoxFormatError(f"table must be a list of {scenario.size} entries")
    return scenario, [_parse_value(v, numeric) for v in table], numeric


def box_from_dict(data) -> Behavior:
    scenario, values, numeric = parse_box_dict(data)
    return behavior_from_table(scenario, values, numeric)


def dumps_box(behavior: Behavior) -> str:
    return json.dumps(box_to_dict(behavior), indent=1)


def save_box(path, behavior: Behavior) -> None:
    Path(path).write_text(dumps_box(behavior) + "\n")


def read_box_document(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError) as exc:
        raise BoxFormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BoxFormatError(f"{path} is not valid JSON: {exc}") from exc


def load_box(path) -> Behavior:
    return box_from_dict(read_box_document(path))


def format_value(v, digits: int = 10) -> str:
    """num/den for rationals, ``digits`` significant digits for floats."""
    if isinstance(v, Fraction):
        return str(v)
    return f"{float(v):.{digits}g}"


def support(behavior: Behavior) -> list[int]:
    return [i for i, v in enumerate(behavior.table) if v != 0]


def describe_entries(behavior: Behavior, indices: Iterable[int] | None = None) -> list[tuple[int, str, object]]:
    indices = support(behavior) if indices is None else indices
    return [(i, p_label(behavior.scenario, i), behavior.table[i]) for i in indices]
