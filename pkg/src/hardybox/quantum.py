"""Pure n-qubit states that satisfy the Hardy conditions.

Each qubit j has two measurements, D_j and U_j. State vectors are written in
the product D-basis with qubit 1 the slowest index and |D=+1> = (1, 0),
|D=-1> = (0, 1). The U-basis is fixed by two amplitudes:

    |U=+1> = a|D=+1> + b|D=-1>,    |U=-1> = b*|D=+1> - a*|D=-1>

For given measurements the Hardy state is the unique vector orthogonal to
the n+1 product states that must have zero probability and to the
2**n - n - 2 product states orthogonal to all of those.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from .behavior import Behavior, Scenario, behavior_from_table, encode_index

MARGIN = 1e-3
NORM_TOL = 1e-12
RANK_RTOL = 1e-10
ZERO_TOL = 1e-10

D_PLUS = np.array([1.0, 0.0], dtype=complex)
D_MINUS = np.array([0.0, 1.0], dtype=complex)


class ParameterError(ValueError):
    pass


class DegeneracyError(ValueError):
    pass


@dataclass(frozen=True)
class ObservablePair:
    """Amplitudes of |U=+1> in the D-basis of one qubit."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if not all(math.isfinite(v) for v in (a.real, a.imag, b.real, b.imag)):
            raise ParameterError("amplitudes must be finite")
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > NORM_TOL:
            raise ParameterError(f"|a|^2 + |b|^2 = {abs(a) ** 2 + abs(b) ** 2!r}, expected 1")
        for name, v in (("a", a), ("b", b)):
            if not MARGIN - NORM_TOL <= abs(v) ** 2 <= 1 - MARGIN + NORM_TOL:
                raise ParameterError(f"|{name}|^2 = {abs(v) ** 2:.3g} too close to 0 or 1; U and D would commute")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_beta(cls, beta: float, x: float = 0.0, y: float = 0.0) -> "ObservablePair":
        """|b|^2 = beta, a = sqrt(1 - beta) e^{ix}, b = sqrt(beta) e^{iy}."""
        if not 0 < beta < 1:
            raise ParameterError(f"beta must lie in (0, 1), got {beta!r}")
        return cls(math.sqrt(1 - beta) * np.exp(1j * x), math.sqrt(beta) * np.exp(1j * y))

    @property
    def beta(self) -> float:
        return abs(self.b) ** 2


def u_basis(pair: ObservablePair) -> tuple[np.ndarray, np.ndarray]:
    u_plus = np.array([pair.a, pair.b], dtype=complex)
    u_minus = np.array([np.conj(pair.b), -np.conj(pair.a)], dtype=complex)
    return u_plus, u_minus


def product_state(factors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors)


def s1_states(observables: Sequence[ObservablePair]) -> list[np.ndarray]:
    """The n states with a single |D_m=+1> factor among |U=+1> factors,
    followed by |D=-1, ..., D=-1>."""
    n = len(observables)
    if n < 2:
        raise ParameterError("need at least two qubits")
    u_plus = [u_basis(p)[0] for p in observables]
    states = [product_state([D_PLUS if j == m else u_plus[j] for j in range(n)]) for m in range(n)]
    states.append(product_state([D_MINUS] * n))
    return states


def s2_states(observables: Sequence[ObservablePair]) -> list[np.ndarray]:
    """Product states built from |D=+1> and |U=-1> factors with between 1
    and n-2 factors equal to |D=+1>."""
    n = len(observables)
    if n < 2:
        raise ParameterError("need at least two qubits")
    u_minus = [u_basis(p)[1] for p in observables]
    states = []
    for k in range(1, n - 1):
        for chosen in itertools.combinations(range(n), k):
            states.append(product_state([D_PLUS if j in chosen else u_minus[j] for j in range(n)]))
    return states


def null_space(vectors: Sequence[np.ndarray], dim: int, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (as rows) of the orthogonal complement of span(vectors)."""
    if len(vectors) == 0:
        return np.eye(dim, dtype=complex)
    m = np.asarray(vectors, dtype=complex).reshape(len(vectors), dim)
    # x is orthogonal to every row v iff conj(v) . x = 0
    _, s, vh = np.linalg.svd(m.conj(), full_matrices=True)
    rank = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return vh[rank:].conj()


def target_state(observables: Sequence[ObservablePair]) -> np.ndarray:
    return product_state([u_basis(p)[0] for p in observables])


def hardy_state(observables: Sequence[ObservablePair]) -> np.ndarray:
    n = len(observables)
    complement = null_space(s1_states(observables) + s2_states(observables), 2**n)
    if complement.shape[0] != 1:
        raise DegeneracyError(f"orthogonal complement has dimension {complement.shape[0]}, expected 1")
    psi = complement[0]
    overlap = np.vdot(target_state(observables), psi)
    if abs(overlap) > 0:
        psi = psi * (abs(overlap) / overlap)
    return psi / np.linalg.norm(psi)


def success_probability(state: np.ndarray, observables: Sequence[ObservablePair]) -> float:
    return float(abs(np.vdot(target_state(observables), state)) ** 2)


def closed_form_p3(beta1: float, beta2: float, beta3: float) -> float:
    """Hardy probability of the three-qubit Hardy state for |b_j|^2 = beta_j."""
    for b in (beta1, beta2, beta3):
        if not 0 < b < 1:
            raise ParameterError(f"beta must lie in (0, 1), got {b!r}")
    n = beta1 * beta2 + beta2 * beta3 + beta3 * beta1 - 2 * beta1 * beta2 * beta3
    return beta1 * beta2 * beta3 * (1 - n) / n


def symmetric_p3(k: float) -> float:
    if not 0 < k < 1:
        raise ParameterError(f"k must lie in (0, 1), got {k!r}")
    return k / (3 - 2 * k) - k**3


def hardy_probability(betas: Sequence[float], phases=None) -> float:
    """Numeric Hardy probability for the given |b_j|^2 (phases default to 0)."""
    phases = phases if phases is not None else [(0.0, 0.0)] * len(betas)
    obs = [ObservablePair.from_beta(b, x, y) for b, (x, y) in zip(betas, phases)]
    return success_probability(hardy_state(obs), obs)


# -- optimization -----------------------------------------------------------


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-10):
    """Maximize a unimodal f on [lo, hi]; returns (x, f(x))."""
    invphi = (math.sqrt(5) - 1) / 2
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    x = (lo + hi) / 2
    return x, f(x)


def coordinate_ascent(f, x0, step, lo, hi, min_step=1e-10):
    """Derivative-free local refinement: probe +/-step along each axis,
    halve the step when no probe improves."""
    x = list(x0)
    fx = f(x)
    while step > min_step:
        improved = False
        for i in range(len(x)):
            for delta in (step, -step):
                y = list(x)
                y[i] = min(hi, max(lo, y[i] + delta))
                if y[i] == x[i]:
                    continue
                fy = f(y)
                if fy > fx:
                    x, fx, improved = y, fy, True
                    break
        if not improved:
            step /= 2
    return x, fx


@dataclass
class HardyQuantumResult:
    n: int
    mode: str
    betas: list
    phases: list
    state: np.ndarray
    p: float
    evaluations: int = 0

    @property
    def observables(self) -> list[ObservablePair]:
        return [ObservablePair.from_beta(b, x, y) for b, (x, y) in zip(self.betas, self.phases)]


def optimize_hardy(n: int, mode: str = "symmetric", grid: int = 9, margin: float = MARGIN) -> HardyQuantumResult:
    """Maximize the Hardy probability of the Hardy state over |b_j|^2.

    ``symmetric`` uses one shared value k for all qubits and a golden-section
    search; ``full`` scans a grid of ``grid**n`` points and refines the best
    one by coordinate ascent. Phases are held at zero.
    """
    if n not in (2, 3, 4):
        raise ParameterError(f"optimization supports 2 to 4 qubits, got {n}")
    lo, hi = margin, 1 - margin
    calls = 0

    def p_of(betas):
        nonlocal calls
        calls += 1
        return hardy_probability(betas)

    if mode == "symmetric":
        k, _ = golden_section_max(lambda k: p_of([k] * n), lo, hi)
        betas = [k] * n
    elif mode == "full":
        axis = np.linspace(lo, hi, grid)
        best, best_x = -1.0, None
        for point in itertools.product(axis, repeat=n):  # lexicographic: first max wins ties
            v = p_of(list(point))
            if v > best:
                best, best_x = v, list(point)
        betas, _ = coordinate_ascent(p_of, best_x, (hi - lo) / (grid - 1), lo, hi)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    betas = [float(b) for b in betas]
    obs = [ObservablePair.from_beta(b) for b in betas]
    state = hardy_state(obs)
    return HardyQuantumResult(n, mode, betas, [(0.0, 0.0)] * n, state, success_probability(state, obs), calls)


# -- quantum boxes ----------------------------------------------------------


def behavior_from_state(state: np.ndarray, observables: Sequence[ObservablePair]) -> Behavior:
    """Float box of the state: setting 0 measures U, setting 1 measures D,
    outcome bit 0 is +1."""
    n = len(observables)
    state = np.asarray(state, dtype=complex)
    if state.shape != (2**n,):
        raise ValueError(f"state has shape {state.shape}, expected ({2 ** n},)")
    # rows are the bra vectors of (outcome +1, outcome -1) per setting
    bases = []
    for pair in observables:
        up, um = u_basis(pair)
        bases.append((np.array([up, um]).conj(), np.array([D_PLUS, D_MINUS]).conj()))
    scenario = Scenario(n)
    table = [0.0] * scenario.size
    psi = state.reshape((2,) * n)
    for settings in scenario.contexts():
        amp = psi
        for j, s in enumerate(settings):
            amp = np.tensordot(bases[j][s], amp, axes=([1], [j]))
            amp = np.moveaxis(amp, 0, j)
        probs = np.abs(amp) ** 2
        for outcomes in scenario.outcome_tuples():
            table[encode_index(scenario, settings, outcomes)] = float(probs[outcomes])
    return behavior_from_table(scenario, table, "float", tol=1e-9)


@dataclass
class StateHardyReport:
    zero_probabilities: list
    target_probability: float
    tol: float

    @property
    def passed(self) -> bool:
        return all(p <= self.tol for p in self.zero_probabilities) and self.target_probability > self.tol


def check_state_hardy(state: np.ndarray, observables: Sequence[ObservablePair], tol: float = ZERO_TOL) -> StateHardyReport:
    zeros = [float(abs(np.vdot(phi, state)) ** 2) for phi in s1_states(observables)]
    return StateHardyReport(zeros, success_probability(state, observables), tol)


def result_to_dict(result: HardyQuantumResult) -> dict:
    from .behavior import box_to_dict

    box = behavior_from_state(result.state, result.observables)
    return {
        "parties": result.n,
        "mode": result.mode,
        "parameters": {
            "beta": result.betas,
            "phases": [list(p) for p in result.phases],
        },
        "basis_order": "product D-basis, qubit 1 slowest, |D=+1> first",
        "amplitudes": [[float(z.real), float(z.imag)] for z in result.state],
        "p": result.p,
        "box": box_to_dict(box),
    }
