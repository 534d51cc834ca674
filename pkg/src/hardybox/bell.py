"""CHSH evaluation of two-party boxes.

Correlators use the +/-1 values of the observables A, A', B, B' (see
``behavior.OBSERVABLES`` for how they sit in the flat index).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .behavior import OBSERVABLES, Behavior, DimensionError, encode_index, outcome_value

SIGN_TUPLES = tuple(itertools.product((0, 1), repeat=3))
CHSH_CONTEXTS = (("A'", "B"), ("A", "B'"), ("A'", "B'"), ("A", "B"))


def _require_two_parties(behavior):
    if behavior.n_parties != 2:
        raise DimensionError(f"CHSH needs a two-party box, got {behavior.n_parties} parties")


def _settings(context):
    x, y = context
    if isinstance(x, str):
        (px, sx), (py, sy) = OBSERVABLES[x], OBSERVABLES[y]
        if (px, py) != (0, 1):
            raise ValueError(f"context {context!r} must name one observable of each party")
        return sx, sy
    return int(x), int(y)


def correlator(behavior: Behavior, context):
    """E = P(++) - P(+-) - P(-+) + P(--) for a context given by observable
    names such as ``("A'", "B")`` or by setting bits."""
    _require_two_parties(behavior)
    sx, sy = _settings(context)
    total = 0
    for ox, oy in itertools.product((0, 1), repeat=2):
        sign = outcome_value(sx, ox) * outcome_value(sy, oy)
        total += sign * behavior.table[encode_index(2, (sx, sy), (ox, oy))]
    return total


@dataclass(frozen=True)
class ChshValue:
    signs: tuple
    value: object
    correlators: dict  # context -> E

    def row(self):
        return [*self.signs, *(self.correlators[c] for c in CHSH_CONTEXTS), self.value]


def chsh(behavior: Behavior, signs=(0, 0, 0)) -> ChshValue:
    """|(-1)^a E(A',B) + (-1)^b E(A,B') + (-1)^c E(A',B') + (-1)^(a+b+c+1) E(A,B)|"""
    _require_two_parties(behavior)
    if len(signs) != 3 or any(s not in (0, 1) for s in signs):
        raise ValueError(f"signs must be three bits, got {signs!r}")
    alpha, beta, gamma = signs
    e = {c: correlator(behavior, c) for c in CHSH_CONTEXTS}
    exponents = (alpha, beta, gamma, alpha + beta + gamma + 1)
    value = abs(sum((-1) ** k * e[c] for k, c in zip(exponents, CHSH_CONTEXTS)))
    return ChshValue(tuple(signs), value, e)


def chsh_max_over_signs(behavior: Behavior) -> ChshValue:
    """Largest CHSH value over all 8 sign tuples; first tuple wins ties."""
    best = None
    for signs in SIGN_TUPLES:
        v = chsh(behavior, signs)
        if best is None or v.value > best.value:
            best = v
    return best
