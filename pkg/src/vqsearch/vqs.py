"""Variational search loop: expectations, objective, gradients, ADAM, termination.

The search state after the oracle is ``psi1``; the Ansatz ``U(theta)`` maps it
to ``psi2``. The objective is ``f = -0.5 (<Z1> - <Z2>)``, which reduces to
minus the overlap of the label-1 halves of ``psi1`` and ``psi2``.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as _k
from . import statevec as sv
from .circuit import (
    AnsatzSpec,
    Circuit,
    CircuitError,
    OracleSpec,
    apply_gate,
    apply_oracle_semantic,
    build_ansatz,
    hadamard_test,
)
from .statevec import StateVector

DIV_GUARD = 1e-12


class Method(str, enum.Enum):
    DIRECT = "direct"
    HADAMARD_TEST = "hadamard"


class TerminationReason(str, enum.Enum):
    MAX_ITERS = "max_iters"
    SMALL_CHANGE = "small_change"


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not 0 < b < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {b}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class TerminationConfig:
    max_iterations: int = 300
    small_change_threshold: float = 1e-4
    patience: int = 5

    def __post_init__(self):
        if self.max_iterations < 1 or self.patience < 1 or not self.small_change_threshold > 0:
            raise ValueError(f"termination settings must be positive: {self}")


@dataclass
class VqsRun:
    seed: int
    objective_trace: np.ndarray
    final_theta: np.ndarray
    iterations_used: int
    final_good_probability: float
    termination_reason: TerminationReason
    per_good_probabilities: np.ndarray = field(default_factory=lambda: np.zeros(0))
    analytic_minimum: float = float("nan")

    @property
    def final_objective(self) -> float:
        return float(self.objective_trace[-1])

    @property
    def objective_gap(self) -> float:
        return self.final_objective - self.analytic_minimum


# -- states ----------------------------------------------------------------------

def prepare_psi1(psi0: StateVector, oracle: OracleSpec) -> StateVector:
    """|psi1> = O_r |0, psi0>: good amplitudes move to the label-1 half."""
    if psi0.num_qubits != oracle.n:
        raise CircuitError(f"psi0 has {psi0.num_qubits} qubits, oracle expects {oracle.n}")
    amps = np.zeros(2 << oracle.n)
    amps[: 1 << oracle.n] = psi0.amplitudes
    psi1 = StateVector(oracle.n + 1, amps)
    apply_oracle_semantic(psi1, oracle)
    return psi1


def good_output_indices(oracle: OracleSpec) -> np.ndarray:
    return (1 << oracle.n) + np.asarray(oracle.good_indices, dtype=np.int64)


@functools.lru_cache(maxsize=32)
def _ansatz(spec: AnsatzSpec) -> Circuit:
    return build_ansatz(spec)


@functools.lru_cache(maxsize=32)
def _hadamard(spec: AnsatzSpec, with_label_z: bool) -> Circuit:
    return hadamard_test(spec, with_label_z)


def _check(theta, psi1: StateVector, ansatz: AnsatzSpec) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if psi1.num_qubits != ansatz.wires:
        raise CircuitError(f"psi1 has {psi1.num_qubits} qubits, Ansatz spans {ansatz.wires}")
    if theta.shape != (ansatz.num_params,):
        raise CircuitError(f"theta has shape {theta.shape}, expected ({ansatz.num_params},)")
    if not np.all(np.isfinite(theta)):
        raise ValueError("theta contains non-finite entries")
    return theta


def apply_ansatz(theta, psi1: StateVector, ansatz: AnsatzSpec) -> StateVector:
    """|psi2> = U(theta)|psi1>, leaving ``psi1`` untouched."""
    theta = _check(theta, psi1, ansatz)
    out = psi1.copy()
    for g in _ansatz(ansatz).gates:
        apply_gate(out.amplitudes, out.num_qubits, g, theta)
    return out


def _hadamard_expectation(theta, psi1: StateVector, ansatz: AnsatzSpec, with_label_z: bool) -> float:
    circ = _hadamard(ansatz, with_label_z)
    amps = np.zeros(2 * len(psi1))
    amps[: len(psi1)] = psi1.amplitudes
    state = StateVector(psi1.num_qubits + 1, amps)
    for g in circ.gates:
        apply_gate(state.amplitudes, state.num_qubits, g, theta)
    return sv.expect_z(state, ansatz.wires)


def expectation_z1(theta, psi1: StateVector, ansatz: AnsatzSpec, method: Method | str = Method.DIRECT) -> float:
    """<psi1|U(theta)|psi1>."""
    theta = _check(theta, psi1, ansatz)
    if Method(method) is Method.HADAMARD_TEST:
        return _hadamard_expectation(theta, psi1, ansatz, with_label_z=False)
    return sv.inner(psi1, apply_ansatz(theta, psi1, ansatz))


def expectation_z2(theta, psi1: StateVector, ansatz: AnsatzSpec, method: Method | str = Method.DIRECT) -> float:
    """<psi1|(Z x I)U(theta)|psi1> with Z on the label qubit."""
    theta = _check(theta, psi1, ansatz)
    if Method(method) is Method.HADAMARD_TEST:
        return _hadamard_expectation(theta, psi1, ansatz, with_label_z=True)
    psi2 = apply_ansatz(theta, psi1, ansatz)
    half = len(psi1) // 2
    return float(np.dot(psi1.amplitudes[:half], psi2.amplitudes[:half])
                 - np.dot(psi1.amplitudes[half:], psi2.amplitudes[half:]))


def objective(theta, psi1: StateVector, ansatz: AnsatzSpec, method: Method | str = Method.DIRECT) -> float:
    if Method(method) is Method.HADAMARD_TEST:
        z1 = expectation_z1(theta, psi1, ansatz, method)
        z2 = expectation_z2(theta, psi1, ansatz, method)
        return -0.5 * (z1 - z2)
    psi2 = apply_ansatz(theta, psi1, ansatz)
    half = len(psi1) // 2
    return -float(np.dot(psi1.amplitudes[half:], psi2.amplitudes[half:]))


def analytic_minimum(psi0: StateVector, oracle: OracleSpec) -> tuple[float, np.ndarray]:
    """Global minimum of the objective and the optimal output state.

    The objective is linear in the output amplitudes under a unit-norm
    constraint, so the optimum puts all weight on the good slots of the label-1
    half, proportional to the input good amplitudes.
    """
    if psi0.num_qubits != oracle.n:
        raise CircuitError(f"psi0 has {psi0.num_qubits} qubits, oracle expects {oracle.n}")
    goods = np.asarray(oracle.good_indices, dtype=np.int64)
    alpha = psi0.amplitudes[goods]
    weight = math.sqrt(float(np.dot(alpha, alpha)))
    if weight == 0.0:
        raise ValueError("every good element has zero amplitude; the minimum is degenerate")
    beta = np.zeros(2 << oracle.n)
    beta[(1 << oracle.n) + goods] = alpha / weight
    return -weight, beta


# -- gradients -------------------------------------------------------------------

def gradient(theta, psi1: StateVector, ansatz: AnsatzSpec, shift: float = 0.5 * math.pi) -> np.ndarray:
    """Two-term parameter-shift gradient of the objective.

    The objective is an overlap <phi|U|psi1>, linear in each Ry matrix, so in
    one angle it has the form A cos(t/2) + B sin(t/2). The exact rule for that
    spectrum is (f(t + s) - f(t - s)) / (4 sin(s/2)); the familiar divisor 2 at
    s = pi/2 only holds for objectives quadratic in U and would be off by sqrt 2.
    """
    theta = _check(theta, psi1, ansatz)
    denom = 4.0 * math.sin(0.5 * shift)
    if abs(denom) < 1e-12:
        raise ValueError(f"shift {shift} gives a singular shift rule")
    grad = np.empty_like(theta)
    shifted = theta.copy()
    for j in range(theta.size):
        shifted[j] = theta[j] + shift
        plus = objective(shifted, psi1, ansatz)
        shifted[j] = theta[j] - shift
        minus = objective(shifted, psi1, ansatz)
        shifted[j] = theta[j]
        grad[j] = (plus - minus) / denom
    return grad


def value_and_grad(theta, psi1: StateVector, ansatz: AnsatzSpec) -> tuple[float, np.ndarray]:
    """Objective and its exact gradient by one forward and one reverse sweep.

    Same values as :func:`gradient` (both are exact for Ry generators) at the
    cost of roughly three circuit passes instead of ``2 * num_params``.
    """
    theta = _check(theta, psi1, ansatz)
    circ = _ansatz(ansatz)
    q = psi1.num_qubits
    half = len(psi1) // 2
    state = psi1.amplitudes.copy()
    for g in circ.gates:
        apply_gate(state, q, g, theta)
    target = psi1.amplitudes[half:]
    value = -float(np.dot(target, state[half:]))

    lam = np.zeros_like(state)
    lam[half:] = target
    grad = np.zeros_like(theta)
    for g in reversed(circ.gates):
        if g.param is not None:
            # dRy/dtheta = Ry(pi) Ry(theta) / 2 and Ry(pi)(a, b) = (-b, a)
            mask = sv.control_mask(g.wires[:-1])
            grad[g.param] -= 0.5 * _k.rotation_derivative_overlap(lam, state, g.wires[-1], mask)
        apply_gate(state, q, g, theta, inverse=True)
        apply_gate(lam, q, g, theta, inverse=True)
    return value, grad


# -- ADAM ------------------------------------------------------------------------

class Adam:
    """ADAM with bias-corrected first and second moment estimates."""

    def __init__(self, num_params: int, config: AdamConfig = AdamConfig()):
        self.config = config
        self.m = np.zeros(num_params)
        self.v = np.zeros(num_params)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != self.m.shape:
            raise ValueError(f"gradient has shape {grad.shape}, expected {self.m.shape}")
        if np.any(np.isnan(grad)):
            raise ValueError("NaN in gradient")
        c = self.config
        self.t += 1
        self.m = c.beta1 * self.m + (1.0 - c.beta1) * grad
        self.v = c.beta2 * self.v + (1.0 - c.beta2) * grad * grad
        m_hat = self.m / (1.0 - c.beta1 ** self.t)
        v_hat = self.v / (1.0 - c.beta2 ** self.t)
        return theta - c.learning_rate * m_hat / (np.sqrt(v_hat) + c.epsilon)


def adam_step(state: Adam, grad: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return state.step(theta, grad)


# -- the loop --------------------------------------------------------------------

def initial_theta(num_params: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 2.0 * math.pi, num_params)


def is_small_change(current: float, previous: float, threshold: float) -> bool:
    return abs(current - previous) / max(abs(previous), DIV_GUARD) < threshold


def run_vqs(
    psi0: StateVector,
    oracle: OracleSpec,
    ansatz: AnsatzSpec,
    adam: AdamConfig = AdamConfig(),
    term: TerminationConfig = TerminationConfig(),
    seed: int = 0,
    method: Method | str = Method.DIRECT,
    gradient_method: str = "adjoint",
) -> VqsRun:
    """One training run from a seeded uniform(0, 2pi) start.

    Each iteration evaluates the objective, checks termination, and only then
    takes an ADAM step, so ``final_theta`` is the point whose objective ends the
    trace. The output good probability comes from simulating oracle + U once.
    """
    method = Method(method)
    if gradient_method not in ("adjoint", "shift"):
        raise ValueError(f"unknown gradient method {gradient_method!r}")
    psi1 = prepare_psi1(psi0, oracle)
    theta = initial_theta(ansatz.num_params, seed)
    opt = Adam(ansatz.num_params, adam)
    trace: list[float] = []
    small_changes = 0
    reason = TerminationReason.MAX_ITERS
    for it in range(1, term.max_iterations + 1):
        if gradient_method == "adjoint":
            f, grad = value_and_grad(theta, psi1, ansatz)
        else:
            f, grad = objective(theta, psi1, ansatz), gradient(theta, psi1, ansatz)
        if method is Method.HADAMARD_TEST:
            f = objective(theta, psi1, ansatz, method)
        if trace:
            small_changes = small_changes + 1 if is_small_change(f, trace[-1], term.small_change_threshold) else 0
        trace.append(f)
        if small_changes >= term.patience:
            reason = TerminationReason.SMALL_CHANGE
            break
        if it == term.max_iterations:
            break
        theta = opt.step(theta, grad)

    psi2 = apply_ansatz(theta, psi1, ansatz)
    per_good = psi2.amplitudes[good_output_indices(oracle)] ** 2
    f_min, _ = analytic_minimum(psi0, oracle)
    return VqsRun(
        seed=seed,
        objective_trace=np.asarray(trace),
        final_theta=theta,
        iterations_used=len(trace),
        final_good_probability=float(min(1.0, per_good.sum())),
        termination_reason=reason,
        per_good_probabilities=per_good,
        analytic_minimum=f_min,
    )
