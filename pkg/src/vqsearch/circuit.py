"""Circuit builders, a gate-list simulator and depth accounting.

Wire numbering follows :mod:`vqsearch.statevec`: wire ``q`` is bit ``q`` of
the basis index. For an ``n``-input search register the inputs are wires
``0..n-1``, the label qubit is wire ``n`` and the Hadamard-test ancilla (when
present) is wire ``n+1``. Work ancillas needed by the decomposed
multi-controlled X are placed above all of these.

Layers of an Ansatz are separated by barriers so that structural depth is
reported per layer without letting neighbouring layers slide into each other.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import statevec as sv
from .statevec import StateVector


class CircuitError(ValueError):
    pass


class Family(str, enum.Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"


GATE_KINDS = ("ry", "cry", "h", "x", "z", "cz", "cnot", "toffoli", "mcx", "barrier")
_ARITY = {"ry": 1, "h": 1, "x": 1, "z": 1, "cry": 2, "cz": 2, "cnot": 2, "toffoli": 3}


@dataclass(frozen=True)
class Gate:
    """One gate. ``wires`` lists controls first and the target last."""

    kind: str
    wires: tuple[int, ...]
    param: int | None = None
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        if len(set(self.wires)) != len(self.wires):
            raise CircuitError(f"duplicate wires in {self.kind} {self.wires}")
        arity = _ARITY.get(self.kind)
        if arity is not None and len(self.wires) != arity:
            raise CircuitError(f"{self.kind} takes {arity} wires, got {self.wires}")
        if self.kind == "mcx" and len(self.wires) < 2:
            raise CircuitError("mcx needs at least one control")
        if self.kind in ("ry", "cry") and (self.param is None) == (self.angle is None):
            raise CircuitError(f"{self.kind} needs exactly one of param slot or fixed angle")

    @property
    def is_barrier(self) -> bool:
        return self.kind == "barrier"


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...]
    num_params: int = 0

    def __post_init__(self):
        for g in self.gates:
            for w in g.wires:
                if not 0 <= w < self.num_qubits:
                    raise CircuitError(f"{g.kind} wire {w} outside {self.num_qubits}-qubit circuit")
            if g.param is not None and not 0 <= g.param < self.num_params:
                raise CircuitError(f"param slot {g.param} >= num_params {self.num_params}")

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def __add__(self, other: Circuit) -> Circuit:
        """Sequential composition; parameter slots of ``other`` are shared, not shifted."""
        return Circuit(
            max(self.num_qubits, other.num_qubits),
            self.gates + other.gates,
            max(self.num_params, other.num_params),
        )


@dataclass(frozen=True)
class AnsatzSpec:
    family: Family
    layers: int
    wires: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.layers < 1:
            raise CircuitError(f"layers must be positive, got {self.layers}")
        if self.wires < 2:
            raise CircuitError(f"an Ansatz needs at least 2 wires, got {self.wires}")

    @property
    def n(self) -> int:
        """Input-register width when the Ansatz spans label + inputs."""
        return self.wires - 1

    @property
    def params_per_layer(self) -> int:
        return self.wires if self.family is Family.TYPE1 else 3 * self.wires

    @property
    def num_params(self) -> int:
        return self.layers * self.params_per_layer


@dataclass(frozen=True)
class OracleSpec:
    n: int
    good_indices: tuple[int, ...] = field(default=())

    def __post_init__(self):
        goods = tuple(sorted(set(int(g) for g in self.good_indices)))
        object.__setattr__(self, "good_indices", goods)
        if self.n < 1:
            raise CircuitError(f"n must be positive, got {self.n}")
        if not goods:
            raise CircuitError("oracle needs at least one good index")
        size = 1 << self.n
        if goods[0] < 0 or goods[-1] >= size:
            raise CircuitError(f"good indices must lie in [0, {size})")
        if len(goods) >= size:
            raise CircuitError("at least one element must be bad")

    @property
    def label(self) -> int:
        return self.n

    def is_good(self, x: int) -> bool:
        return x in self.good_indices


# -- Ansatz builders ---------------------------------------------------------

def _top_down(spec: AnsatzSpec) -> list[int]:
    # w0 is the top wire (most significant bit)
    return list(range(spec.wires - 1, -1, -1))


def _ry_column(wires: Sequence[int], slot: int) -> tuple[list[Gate], int]:
    gates = [Gate("ry", (w,), param=slot + i) for i, w in enumerate(wires)]
    return gates, slot + len(wires)


def build_type1_ansatz(spec: AnsatzSpec) -> Circuit:
    """Per layer: Ry on every wire, then a CNOT ladder w0->w1, w1->w2, ..."""
    if spec.family is not Family.TYPE1:
        raise CircuitError(f"expected type1 spec, got {spec.family.value}")
    w = _top_down(spec)
    gates: list[Gate] = []
    slot = 0
    for layer in range(spec.layers):
        if layer:
            gates.append(Gate("barrier", tuple(w)))
        col, slot = _ry_column(w, slot)
        gates += col
        gates += [Gate("cnot", (w[i], w[i + 1])) for i in range(len(w) - 1)]
    return Circuit(spec.wires, tuple(gates), slot)


def build_type2_ansatz(spec: AnsatzSpec) -> Circuit:
    """Per layer: Ry | CNOT on even pairs | Ry | CNOT on odd pairs | Ry."""
    if spec.family is not Family.TYPE2:
        raise CircuitError(f"expected type2 spec, got {spec.family.value}")
    w = _top_down(spec)
    even = [Gate("cnot", (w[i], w[i + 1])) for i in range(0, len(w) - 1, 2)]
    odd = [Gate("cnot", (w[i], w[i + 1])) for i in range(1, len(w) - 1, 2)]
    gates: list[Gate] = []
    slot = 0
    for layer in range(spec.layers):
        if layer:
            gates.append(Gate("barrier", tuple(w)))
        for block in (even, odd, None):
            col, slot = _ry_column(w, slot)
            gates += col
            if block:
                gates += block
    return Circuit(spec.wires, tuple(gates), slot)


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    if spec.family is Family.TYPE1:
        return build_type1_ansatz(spec)
    return build_type2_ansatz(spec)


def controlled(circuit: Circuit, control: int | None = None) -> Circuit:
    """Add one control wire to every gate (Ry->CRy, CNOT->Toffoli, X->CNOT, Z->CZ)."""
    if control is None:
        control = circuit.num_qubits
    promote = {"ry": "cry", "cnot": "toffoli", "x": "cnot", "z": "cz"}
    gates = []
    for g in circuit.gates:
        if control in g.wires:
            raise CircuitError(f"control wire {control} already used by {g.kind}")
        if g.is_barrier:
            gates.append(Gate("barrier", (control, *g.wires)))
        elif g.kind in promote:
            gates.append(Gate(promote[g.kind], (control, *g.wires), g.param, g.angle))
        elif g.kind in ("toffoli", "mcx"):
            gates.append(Gate("mcx", (control, *g.wires)))
        else:
            raise CircuitError(f"cannot add a control to {g.kind}")
    return Circuit(max(circuit.num_qubits, control + 1), tuple(gates), circuit.num_params)


def build_controlled_ansatz(spec: AnsatzSpec) -> Circuit:
    """The Ansatz controlled by an extra most significant wire (index ``spec.wires``)."""
    return controlled(build_ansatz(spec), spec.wires)


# -- oracle --------------------------------------------------------------------

def mcx_ladder(controls: Sequence[int], target: int, ancillas: Sequence[int]) -> list[Gate]:
    """V-shaped Toffoli ladder realising MCX with ``len(controls) - 1`` clean ancillas."""
    n = len(controls)
    if n < 2:
        raise CircuitError(f"decomposition needs at least 2 controls, got {n}")
    if len(ancillas) < n - 1:
        raise CircuitError(f"need {n - 1} ancillas, got {len(ancillas)}")
    compute = [Gate("toffoli", (controls[0], controls[1], ancillas[0]))]
    for i in range(2, n):
        compute.append(Gate("toffoli", (controls[i], ancillas[i - 2], ancillas[i - 1])))
    return compute + [Gate("cnot", (ancillas[n - 2], target))] + compute[::-1]


def decompose_mcx(n: int) -> Circuit:
    """C^n(X) on controls 0..n-1, target n, work ancillas n+1..2n-1."""
    if n < 2:
        raise CircuitError(f"decompose_mcx needs n >= 2, got {n}")
    gates = mcx_ladder(list(range(n)), n, list(range(n + 1, 2 * n)))
    return Circuit(2 * n, tuple(gates))


def build_oracle(spec: OracleSpec, decomposed: bool = False, ancilla_base: int | None = None) -> Circuit:
    """Label flip for every good input pattern.

    Each good index gets its own MCX conjugated by X on the input wires where
    the index has a 0 bit. With ``decomposed`` the MCX is expanded into the
    Toffoli ladder using work ancillas starting at ``ancilla_base``
    (default: just above the label).
    """
    n = spec.n
    inputs = list(range(n))
    num_qubits = n + 1
    ancillas: list[int] = []
    if decomposed and n >= 2:
        base = n + 1 if ancilla_base is None else ancilla_base
        ancillas = list(range(base, base + n - 1))
        num_qubits = max(num_qubits, base + n - 1)
    gates: list[Gate] = []
    for g in spec.good_indices:
        flips = [Gate("x", (q,)) for q in inputs if not (g >> q) & 1]
        gates += flips
        if ancillas:
            gates += mcx_ladder(inputs[::-1], spec.label, ancillas)
        elif n == 1:
            gates.append(Gate("cnot", (0, spec.label)))
        else:
            gates.append(Gate("mcx", (*inputs[::-1], spec.label)))
        gates += flips
    return Circuit(num_qubits, tuple(gates))


def apply_oracle_semantic(state: StateVector, spec: OracleSpec) -> None:
    """Index-permutation fast path of the oracle on a label-|0> state."""
    if state.num_qubits != spec.n + 1:
        raise CircuitError(f"state has {state.num_qubits} qubits, oracle needs {spec.n + 1}")
    half = 1 << spec.n
    amps = state.amplitudes
    if np.any(amps[half:] != 0.0):
        raise CircuitError("label qubit is not |0>")
    goods = np.asarray(spec.good_indices, dtype=np.int64)
    amps[half + goods] = amps[goods]
    amps[goods] = 0.0


# -- composite circuits --------------------------------------------------------

def _check_compat(oracle: OracleSpec, ansatz: AnsatzSpec) -> None:
    if ansatz.wires != oracle.n + 1:
        raise CircuitError(
            f"Ansatz spans {ansatz.wires} wires but label + inputs is {oracle.n + 1}"
        )


def state_prep_uniform(n: int) -> Circuit:
    return Circuit(n, tuple(Gate("h", (q,)) for q in range(n)))


def hadamard_test(ansatz: AnsatzSpec, with_label_z: bool = False) -> Circuit:
    """H(anc) . controlled-U [. CZ(anc, label)] . H(anc) on ancilla wire ``ansatz.wires``."""
    anc = ansatz.wires
    label = ansatz.wires - 1
    cu = build_controlled_ansatz(ansatz)
    everything = tuple(range(anc + 1))
    gates = [Gate("h", (anc,)), Gate("barrier", everything), *cu.gates]
    if with_label_z:
        gates.append(Gate("cz", (anc, label)))
    gates.append(Gate("h", (anc,)))
    return Circuit(anc + 1, tuple(gates), cu.num_params)


def _front(oracle: OracleSpec, extra_wires: int, decomposed: bool, prep: bool) -> list[Gate]:
    gates: list[Gate] = []
    if prep:
        gates += state_prep_uniform(oracle.n).gates
        gates.append(Gate("barrier", tuple(range(oracle.n))))
    base = oracle.n + 1 + extra_wires
    gates += build_oracle(oracle, decomposed, ancilla_base=base).gates
    return gates


def _num_qubits(oracle: OracleSpec, extra_wires: int, decomposed: bool) -> int:
    q = oracle.n + 1 + extra_wires
    if decomposed and oracle.n >= 2:
        q += oracle.n - 1
    return q


def _fig1ab(oracle, ansatz, decomposed, prep, with_label_z) -> Circuit:
    _check_compat(oracle, ansatz)
    q = _num_qubits(oracle, 1, decomposed)
    test = hadamard_test(ansatz, with_label_z)
    # ancilla Hadamard shares the first layer with the oracle
    gates = [test.gates[0], *_front(oracle, 1, decomposed, prep),
             Gate("barrier", tuple(range(q))), *test.gates[2:]]
    return Circuit(q, tuple(gates), test.num_params)


def build_fig1a(oracle: OracleSpec, ansatz: AnsatzSpec, decomposed: bool = False,
                prep: bool = False) -> Circuit:
    """Hadamard test for <Z1> = <psi1|U|psi1>, Z measured on wire n+1."""
    return _fig1ab(oracle, ansatz, decomposed, prep, with_label_z=False)


def build_fig1b(oracle: OracleSpec, ansatz: AnsatzSpec, decomposed: bool = False,
                prep: bool = False) -> Circuit:
    """As :func:`build_fig1a` with a CZ(ancilla, label) after controlled-U."""
    return _fig1ab(oracle, ansatz, decomposed, prep, with_label_z=True)


def build_fig1c(oracle: OracleSpec, ansatz: AnsatzSpec, decomposed: bool = False,
                prep: bool = False) -> Circuit:
    """Oracle followed by U(theta) on label + inputs."""
    _check_compat(oracle, ansatz)
    q = _num_qubits(oracle, 0, decomposed)
    u = build_ansatz(ansatz)
    gates = [*_front(oracle, 0, decomposed, prep), Gate("barrier", tuple(range(q))), *u.gates]
    return Circuit(q, tuple(gates), u.num_params)


# -- simulation ----------------------------------------------------------------

def _angle(g: Gate, theta) -> float:
    if g.param is not None:
        return float(theta[g.param])
    return g.angle


def apply_gate(amps: np.ndarray, num_qubits: int, g: Gate, theta=None, inverse: bool = False) -> None:
    k = g.kind
    if k == "barrier":
        return
    if k in ("ry", "cry"):
        a = _angle(g, theta)
        sv.kernel_ry(amps, num_qubits, g.wires[-1], -a if inverse else a, g.wires[:-1])
    elif k == "h":
        sv.kernel_h(amps, num_qubits, g.wires[0])
    elif k in ("z", "cz"):
        sv.kernel_z(amps, num_qubits, g.wires[-1], g.wires[:-1])
    else:
        sv.kernel_x(amps, num_qubits, g.wires[-1], g.wires[:-1])


def simulate(circuit: Circuit, state: StateVector, theta: Sequence[float] | None = None) -> StateVector:
    """Apply ``circuit`` to ``state`` in place and return it."""
    if state.num_qubits != circuit.num_qubits:
        raise CircuitError(
            f"circuit has {circuit.num_qubits} qubits, state has {state.num_qubits}"
        )
    if circuit.num_params and (theta is None or len(theta) != circuit.num_params):
        raise CircuitError(f"circuit needs {circuit.num_params} parameters")
    for g in circuit.gates:
        apply_gate(state.amplitudes, state.num_qubits, g, theta)
    return state


def simulate_inverse(circuit: Circuit, state: StateVector, theta=None) -> StateVector:
    for g in reversed(circuit.gates):
        apply_gate(state.amplitudes, state.num_qubits, g, theta, inverse=True)
    return state


# -- depth ---------------------------------------------------------------------

def structural_depth(circuit: Circuit) -> int:
    """Greedy as-soon-as-possible layering; barriers synchronise their wires."""
    finish = [0] * circuit.num_qubits
    for g in circuit.gates:
        t = max((finish[w] for w in g.wires), default=0)
        if not g.is_barrier:
            t += 1
        for w in g.wires:
            finish[w] = t
    return max(finish, default=0)


class DepthKind(str, enum.Enum):
    TYPE1_LAYER = "type1_layer"
    TYPE2_LAYER = "type2_layer"
    CONTROLLED_TYPE1_LAYER = "controlled_type1_layer"
    ANSATZ = "ansatz"
    CONTROLLED_ANSATZ = "controlled_ansatz"
    ORACLE = "oracle"
    FIG1A = "fig1a"
    FIG1B = "fig1b"
    FIG1C = "fig1c"
    GROVER_ITERATION = "grover_iteration"


def _ansatz_depth(n: int, spec: AnsatzSpec) -> int:
    if spec.family is Family.TYPE1:
        return spec.layers * (n + 1)
    return spec.layers * 5


def _controlled_ansatz_depth(n: int, spec: AnsatzSpec) -> int:
    if spec.family is Family.TYPE1:
        return spec.layers * (2 * n + 1)
    # tabulated total is 6n+6 for two layers; no per-gate derivation exists
    return spec.layers * (3 * n + 3)


def formula_depth(kind: DepthKind | str, n: int, ansatz: AnsatzSpec | None = None) -> int:
    """Closed-form depths for an ``n``-input search (default Ansatz: 3-layer type-I)."""
    kind = DepthKind(kind)
    if n < 1:
        raise CircuitError(f"n must be positive, got {n}")
    if ansatz is None:
        ansatz = AnsatzSpec(Family.TYPE1, 3, n + 1)
    oracle = 2 * n - 1
    if kind is DepthKind.TYPE1_LAYER:
        return n + 1
    if kind is DepthKind.TYPE2_LAYER:
        return 5
    if kind is DepthKind.CONTROLLED_TYPE1_LAYER:
        return 2 * n + 1
    if kind is DepthKind.ANSATZ:
        return _ansatz_depth(n, ansatz)
    if kind is DepthKind.CONTROLLED_ANSATZ:
        return _controlled_ansatz_depth(n, ansatz)
    if kind is DepthKind.ORACLE:
        return oracle
    if kind is DepthKind.FIG1A:
        return oracle + _controlled_ansatz_depth(n, ansatz) + 1
    if kind is DepthKind.FIG1B:
        return oracle + _controlled_ansatz_depth(n, ansatz) + 2
    if kind is DepthKind.FIG1C:
        return oracle + _ansatz_depth(n, ansatz)
    if kind is DepthKind.GROVER_ITERATION:
        return 2 * n + 1
    raise CircuitError(f"unknown depth kind {kind}")  # pragma: no cover


def dump(circuit: Circuit, formula: int | None = None) -> str:
    """Text listing ``gate wires [param_slot]`` plus a depth report line."""
    lines = []
    for g in circuit.gates:
        parts = [g.kind, ",".join(str(w) for w in g.wires)]
        if g.param is not None:
            parts.append(f"[{g.param}]")
        elif g.angle is not None:
            parts.append(f"{g.angle:.17g}")
        lines.append(" ".join(parts))
    lines.append(f"structural={structural_depth(circuit)} "
                 f"formula={'n/a' if formula is None else formula}")
    return "\n".join(lines) + "\n"


def gate_counts(circuit: Circuit, kinds: Iterable[str] = GATE_KINDS) -> dict[str, int]:
    return {k: circuit.count(k) for k in kinds if circuit.count(k)}


def nonzero_halves(state: StateVector) -> tuple[np.ndarray, np.ndarray]:
    """First-half / second-half views split on the most significant qubit."""
    half = len(state) // 2
    return state.amplitudes[:half], state.amplitudes[half:]

