"""Grover comparator: iteration counts, circuit depths, full-state simulation.

Under a uniform start every good element shares one amplitude and every bad
element shares another, so the counting loop tracks just those two numbers
and is O(1) in memory for any register width.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import statevec as sv
from .circuit import Circuit, CircuitError, Gate, mcx_ladder, simulate
from .statevec import StateVector

MAX_ITERATIONS = 10**8
CYCLE_TOL = 1e-12
TABLE_N = (2, 8, 14, 20, 26)
TABLE_HEADER = ("n", "vqs_depth", "ng_p50", "grover_depth_p50", "ng_p90", "grover_depth_p90")
FULL_STATE_MAX_N = 12


class ThresholdUnreachable(RuntimeError):
    pass


@dataclass(frozen=True)
class GroverCount:
    n: int
    k_good: int
    p_s: float
    n_G: int
    total_depth: int


def _step(good: float, bad: float, k: int, size: int) -> tuple[float, float]:
    """Oracle sign flip followed by inversion about the mean."""
    good = -good
    mean = (k * good + (size - k) * bad) / size
    return 2.0 * mean - good, 2.0 * mean - bad


def count_iterations(n: int, k_good: int, p_s: float, criterion: str = "element") -> GroverCount:
    """Iterations until the good probability first reaches ``p_s``.

    ``criterion="element"`` tests one good element's probability (the loop as
    usually stated); ``"total"`` tests the summed probability of all goods.
    The two agree for a single good element.
    """
    size = 1 << n
    if not 1 <= k_good < size:
        raise ValueError(f"k_good must lie in [1, {size}), got {k_good}")
    if not 0.0 < p_s < 1.0:
        raise ValueError(f"p_s must lie in (0, 1), got {p_s}")
    if criterion not in ("element", "total"):
        raise ValueError(f"unknown criterion {criterion!r}")
    weight = 1 if criterion == "element" else k_good
    start = good = bad = 1.0 / math.sqrt(size)
    i = 0
    while i < MAX_ITERATIONS:
        good, bad = _step(good, bad, k_good, size)
        i += 1
        if weight * good * good >= p_s:
            return GroverCount(n, k_good, p_s, i, iteration_depth(n) * i)
        # the iteration is a fixed rotation; back at the start means it cycles below p_s
        if abs(good - start) < CYCLE_TOL and abs(bad - start) < CYCLE_TOL:
            raise ThresholdUnreachable(f"p_s={p_s} unreachable: amplitudes cycle with period {i}")
    raise ThresholdUnreachable(f"p_s={p_s} not reached within {MAX_ITERATIONS} iterations")


def amplitude_trajectory(n: int, k_good: int, iterations: int) -> list[tuple[float, float]]:
    """(good, bad) amplitudes after 0..iterations steps of the two-scalar recurrence."""
    size = 1 << n
    good = bad = 1.0 / math.sqrt(size)
    out = [(good, bad)]
    for _ in range(iterations):
        good, bad = _step(good, bad, k_good, size)
        out.append((good, bad))
    return out


def full_vector_recurrence(n: int, good_indices: Iterable[int], iterations: int) -> np.ndarray:
    """The per-element loop on all 2^n amplitudes; for cross-checking the two-scalar form."""
    size = 1 << n
    goods = np.asarray(sorted(set(good_indices)), dtype=np.int64)
    alpha = np.full(size, 1.0 / math.sqrt(size))
    for _ in range(iterations):
        alpha[goods] = -alpha[goods]
        alpha = 2.0 * alpha.mean() - alpha
    return alpha


def iteration_depth(n: int) -> int:
    """Depth of one Grover iteration.

    2n+1 in general: 2n-3 for the C^(n-1)(X) ladder plus two layers on each
    side. For n = 2, 3 the Hadamards around the ladder cannot share a layer
    with a neighbouring Toffoli, which adds 2.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    return 2 * n + 3 if n <= 3 else 2 * n + 1


def grover_depth(n: int, p_s: float) -> int:
    return count_iterations(n, 1, p_s).total_depth


def vqs_depth(n: int) -> int:
    """Deepest VQS circuit (controlled-U Hadamard test with label Z, 3-layer type-I)."""
    return 8 * n + 4


# -- circuits --------------------------------------------------------------------

def diffusion_circuit(n: int, ancillas: Sequence[int] = ()) -> Circuit:
    """H^n X^n [H . C^(n-1)(X) . H on the last wire] X^n H^n.

    Up to a global sign this is the inversion about the mean. With ``ancillas``
    (n-2 wires above the register) the C^(n-1)(X) is expanded into a ladder.
    """
    if n < 2:
        raise CircuitError(f"diffusion needs n >= 2, got {n}")
    wires = list(range(n))
    target, controls = wires[-1], wires[:-1]
    hs = [Gate("h", (q,)) for q in wires]
    xs = [Gate("x", (q,)) for q in wires]
    if len(controls) == 1:
        core = [Gate("cnot", (controls[0], target))]
    elif ancillas:
        core = mcx_ladder(controls[::-1], target, ancillas)
    else:
        core = [Gate("mcx", (*controls[::-1], target))]
    gates = hs + xs + [Gate("h", (target,))] + core + [Gate("h", (target,))] + xs + hs
    return Circuit(max([n, *[a + 1 for a in ancillas]]), tuple(gates))


def phase_oracle(state: StateVector, good_indices: Iterable[int]) -> None:
    idx = np.asarray(sorted(set(good_indices)), dtype=np.int64)
    state.amplitudes[idx] = -state.amplitudes[idx]


def simulate_grover(n: int, good_indices: Iterable[int], iterations: int) -> StateVector:
    """H^n|0>, then ``iterations`` rounds of phase oracle + diffusion circuit."""
    if n > FULL_STATE_MAX_N:
        raise ValueError(f"full-state Grover path supports n <= {FULL_STATE_MAX_N}, got {n}")
    goods = sorted(set(good_indices))
    state = sv.new_basis(n, 0)
    for q in range(n):
        sv.apply_h(state, q)
    diffusion = diffusion_circuit(n)
    for _ in range(iterations):
        phase_oracle(state, goods)
        simulate(diffusion, state)
    return state


def closed_form_probability(n: int, k_good: int, t: int) -> float:
    theta = math.asin(math.sqrt(k_good / (1 << n)))
    return math.sin((2 * t + 1) * theta) ** 2


# -- table -----------------------------------------------------------------------

def table_s1_rows(ns: Sequence[int] = TABLE_N) -> list[dict[str, int]]:
    rows = []
    for n in ns:
        half = count_iterations(n, 1, 0.5)
        ninety = count_iterations(n, 1, 0.9)
        rows.append({
            "n": n,
            "vqs_depth": vqs_depth(n),
            "ng_p50": half.n_G,
            "grover_depth_p50": half.total_depth,
            "ng_p90": ninety.n_G,
            "grover_depth_p90": ninety.total_depth,
        })
    return rows


def table_s1_report(ns: Sequence[int] = TABLE_N) -> str:
    """Depth comparison table as CSV text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TABLE_HEADER, lineterminator="\n")
    writer.writeheader()
    writer.writerows(table_s1_rows(ns))
    return buf.getvalue()
