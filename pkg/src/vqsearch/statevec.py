"""Real-amplitude statevector engine.

Every gate used by the search circuits (Ry, H, X, Z, CNOT, CZ, Toffoli,
CRy, multi-controlled X) has a real matrix, so a state is stored as one
float64 per basis state.

Qubit ``q`` is bit ``q`` of the basis index, so the highest qubit is the
most significant bit (the top wire of a circuit diagram). Kernels work in
place on the amplitude array, one pass per gate; no gate matrix is built.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as _k

NORM_TOL = 1e-10
INPUT_NORM_TOL = 1e-9
_SQRT1_2 = 1.0 / math.sqrt(2.0)


class StateVectorError(ValueError):
    """Invalid state construction or gate application."""


class StateVector:
    """Dense real statevector over ``num_qubits`` qubits."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: np.ndarray):
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.float64)
        if amplitudes.ndim != 1 or amplitudes.shape[0] != 1 << num_qubits:
            raise StateVectorError(
                f"expected {1 << num_qubits} amplitudes for {num_qubits} qubits, "
                f"got shape {amplitudes.shape}"
            )
        self.num_qubits = num_qubits
        self.amplitudes = amplitudes

    def __len__(self) -> int:
        return self.amplitudes.shape[0]

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"

    def copy(self) -> StateVector:
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm_squared(self) -> float:
        return float(np.dot(self.amplitudes, self.amplitudes))


def new_basis(num_qubits: int, basis_index: int) -> StateVector:
    if num_qubits < 0:
        raise StateVectorError(f"negative qubit count {num_qubits}")
    dim = 1 << num_qubits
    if not 0 <= basis_index < dim:
        raise StateVectorError(f"basis index {basis_index} out of range [0, {dim})")
    amps = np.zeros(dim)
    amps[basis_index] = 1.0
    return StateVector(num_qubits, amps)


def from_amplitudes(values: Sequence[float] | np.ndarray, tol: float = INPUT_NORM_TOL) -> StateVector:
    amps = np.array(values, dtype=np.float64).ravel()
    dim = amps.shape[0]
    if dim == 0 or dim & (dim - 1):
        raise StateVectorError(f"length {dim} is not a power of two")
    norm2 = float(np.dot(amps, amps))
    if abs(norm2 - 1.0) > tol:
        raise StateVectorError(f"amplitudes not normalized: sum of squares = {norm2!r}")
    return StateVector(dim.bit_length() - 1, amps)


def uniform(num_qubits: int) -> StateVector:
    """H on every qubit of |0...0>."""
    dim = 1 << num_qubits
    return StateVector(num_qubits, np.full(dim, 1.0 / math.sqrt(dim)))


# -- strided views ---------------------------------------------------------

def _check_wires(num_qubits: int, wires: Sequence[int]) -> None:
    for w in wires:
        if not 0 <= w < num_qubits:
            raise StateVectorError(f"qubit {w} out of range for {num_qubits} qubits")
    if len(set(wires)) != len(wires):
        raise StateVectorError(f"duplicate qubits in {tuple(wires)}")


def _split_view(amps: np.ndarray, num_qubits: int, bits: Iterable[int]):
    """Reshape ``amps`` so each listed bit gets its own axis of length 2.

    Returns the view and a dict bit -> axis position.
    """
    order = sorted(bits, reverse=True)
    shape = []
    axis_of = {}
    prev = num_qubits
    for b in order:
        # size-1 groups are dropped; they only slow numpy's inner loops
        if prev - 1 - b:
            shape.append(1 << (prev - 1 - b))
        axis_of[b] = len(shape)
        shape.append(2)
        prev = b
    if prev:
        shape.append(1 << prev)
    return amps.reshape(shape), axis_of


def _index(ndim: int, axis_of: dict, values: dict) -> tuple:
    idx = [slice(None)] * ndim
    for b, v in values.items():
        idx[axis_of[b]] = v
    return tuple(idx)


def _pair(amps: np.ndarray, num_qubits: int, target: int, controls: Sequence[int] = ()):
    """Views (a, b) of the target=0 / target=1 halves restricted to controls all 1."""
    view, axis_of = _split_view(amps, num_qubits, (target, *controls))
    fixed = {c: 1 for c in controls}
    a = view[_index(view.ndim, axis_of, {**fixed, target: 0})]
    b = view[_index(view.ndim, axis_of, {**fixed, target: 1})]
    return a, b


# -- raw array kernels (no validation; used by the circuit simulator) ------

def control_mask(controls: Iterable[int]) -> int:
    mask = 0
    for c in controls:
        mask |= 1 << c
    return mask


def kernel_ry(amps, num_qubits, qubit, angle, controls=()):
    _k.rotate(amps, qubit, control_mask(controls), math.cos(0.5 * angle), math.sin(0.5 * angle))


def kernel_h(amps, num_qubits, qubit):
    _k.hadamard(amps, qubit, _SQRT1_2)


def kernel_x(amps, num_qubits, qubit, controls=()):
    _k.flip(amps, qubit, control_mask(controls))


def kernel_z(amps, num_qubits, qubit, controls=()):
    _k.phase(amps, qubit, control_mask(controls))


# -- validated public gate API ---------------------------------------------

def apply_ry(state: StateVector, qubit: int, angle: float) -> None:
    _check_wires(state.num_qubits, (qubit,))
    kernel_ry(state.amplitudes, state.num_qubits, qubit, angle)


def apply_h(state: StateVector, qubit: int) -> None:
    _check_wires(state.num_qubits, (qubit,))
    kernel_h(state.amplitudes, state.num_qubits, qubit)


def apply_x(state: StateVector, qubit: int) -> None:
    _check_wires(state.num_qubits, (qubit,))
    kernel_x(state.amplitudes, state.num_qubits, qubit)


def apply_z(state: StateVector, qubit: int) -> None:
    _check_wires(state.num_qubits, (qubit,))
    kernel_z(state.amplitudes, state.num_qubits, qubit)


def apply_cnot(state: StateVector, control: int, target: int) -> None:
    _check_wires(state.num_qubits, (control, target))
    kernel_x(state.amplitudes, state.num_qubits, target, (control,))


def apply_cz(state: StateVector, control: int, target: int) -> None:
    _check_wires(state.num_qubits, (control, target))
    kernel_z(state.amplitudes, state.num_qubits, target, (control,))


def apply_toffoli(state: StateVector, c1: int, c2: int, target: int) -> None:
    _check_wires(state.num_qubits, (c1, c2, target))
    kernel_x(state.amplitudes, state.num_qubits, target, (c1, c2))


def apply_cry(state: StateVector, control: int, target: int, angle: float) -> None:
    _check_wires(state.num_qubits, (control, target))
    kernel_ry(state.amplitudes, state.num_qubits, target, angle, (control,))


def apply_mcx(state: StateVector, controls: Iterable[int], target: int) -> None:
    """Flip ``target`` on every basis state whose control bits are all 1."""
    controls = tuple(controls)
    if target in controls:
        raise StateVectorError(f"target {target} is also a control")
    _check_wires(state.num_qubits, (*controls, target))
    kernel_x(state.amplitudes, state.num_qubits, target, controls)


# -- measurements ----------------------------------------------------------

def inner(a: StateVector, b: StateVector) -> float:
    if a.num_qubits != b.num_qubits:
        raise StateVectorError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(np.dot(a.amplitudes, b.amplitudes))


def probability_over(state: StateVector, indices: Iterable[int]) -> float:
    idx = np.fromiter(indices, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= len(state)):
        raise StateVectorError(f"index out of range for {len(state)} amplitudes")
    idx = np.unique(idx)
    sel = state.amplitudes[idx]
    return float(np.dot(sel, sel))


def expect_z(state: StateVector, qubit: int) -> float:
    """<Z> on one qubit: P(bit=0) - P(bit=1)."""
    _check_wires(state.num_qubits, (qubit,))
    a, b = _pair(state.amplitudes, state.num_qubits, qubit)
    return float(np.vdot(a, a) - np.vdot(b, b))
