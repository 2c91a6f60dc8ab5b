import math
import re

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vqsearch import statevec as sv
from vqsearch.circuit import (
    AnsatzSpec, Circuit, CircuitError, DepthKind, Family, Gate, OracleSpec,
    apply_oracle_semantic, build_ansatz, build_controlled_ansatz, build_fig1a, build_fig1b,
    build_fig1c, build_oracle, build_type1_ansatz, build_type2_ansatz, decompose_mcx, dump,
    formula_depth, gate_counts, simulate, simulate_inverse, structural_depth,
)

T1, T2 = Family.TYPE1, Family.TYPE2


def extend(psi0):
    """|0, psi0>: label qubit on top, zero upper half."""
    return sv.StateVector(psi0.num_qubits + 1, np.concatenate([psi0.amplitudes, np.zeros(len(psi0))]))


def random_state(rng, n):
    v = rng.normal(size=1 << n)
    return sv.from_amplitudes(v / np.linalg.norm(v))


# -- Ansatz builders ----------------------------------------------------------

@pytest.mark.parametrize("wires,layers,depth,ry,cnot", [(3, 1, 3, 3, 2), (3, 3, 9, 9, 6), (2, 1, 2, 2, 1)])
def test_type1_examples(wires, layers, depth, ry, cnot):
    c = build_type1_ansatz(AnsatzSpec(T1, layers, wires))
    assert structural_depth(c) == depth
    assert (c.count("ry"), c.count("cnot"), c.num_params) == (ry, cnot, ry)


def test_type1_ladder_order_is_top_down():
    c = build_type1_ansatz(AnsatzSpec(T1, 1, 4))
    assert [g.wires for g in c.gates if g.kind == "cnot"] == [(3, 2), (2, 1), (1, 0)]


@pytest.mark.parametrize("n", range(2, 11))
def test_type1_structural_depth(n):
    for layers in (1, 2, 3):
        assert structural_depth(build_type1_ansatz(AnsatzSpec(T1, layers, n + 1))) == layers * (n + 1)
    assert structural_depth(build_controlled_ansatz(AnsatzSpec(T1, 1, n + 1))) == 2 * n + 1


def test_type2_examples():
    c2 = build_type2_ansatz(AnsatzSpec(T2, 2, 3))
    assert structural_depth(c2) == 10
    assert formula_depth(DepthKind.ANSATZ, 2, AnsatzSpec(T2, 2, 3)) == 10
    assert structural_depth(build_type2_ansatz(AnsatzSpec(T2, 1, 3))) == 5
    small = build_type2_ansatz(AnsatzSpec(T2, 1, 2))
    assert gate_counts(small) == {"ry": 6, "cnot": 1}


@pytest.mark.parametrize("family,per", [(T1, 1), (T2, 3)])
def test_param_counts(family, per):
    for n in (2, 5):
        for layers in (1, 3):
            spec = AnsatzSpec(family, layers, n + 1)
            assert spec.num_params == build_ansatz(spec).num_params == layers * per * (n + 1)


def test_builder_family_mismatch_and_width():
    with pytest.raises(CircuitError):
        build_type1_ansatz(AnsatzSpec(T2, 1, 3))
    with pytest.raises((CircuitError, ValueError)):
        AnsatzSpec(T1, 1, 1)


def test_controlled_examples():
    assert structural_depth(build_controlled_ansatz(AnsatzSpec(T1, 1, 3))) == 5
    assert structural_depth(build_controlled_ansatz(AnsatzSpec(T1, 3, 9))) == 51
    assert formula_depth(DepthKind.CONTROLLED_ANSATZ, 8) == 51
    assert formula_depth(DepthKind.CONTROLLED_ANSATZ, 8, AnsatzSpec(T2, 2, 9)) == 54
    c = build_controlled_ansatz(AnsatzSpec(T1, 1, 3))
    assert gate_counts(c) == {"cry": 3, "toffoli": 2}
    assert all(g.wires[0] == 3 for g in c.gates if not g.is_barrier)


@pytest.mark.parametrize("family", [T1, T2])
def test_controlled_ansatz_action(family):
    rng = np.random.default_rng(0)
    spec = AnsatzSpec(family, 2, 3)
    theta = rng.uniform(0, 2 * math.pi, spec.num_params)
    psi = random_state(rng, 3)
    u_psi = simulate(build_ansatz(spec), psi.copy(), theta)
    for anc in (0, 1):
        s = sv.StateVector(4, np.concatenate([psi.amplitudes * (1 - anc), psi.amplitudes * anc]))
        out = simulate(build_controlled_ansatz(spec), s, theta)
        half = out.amplitudes[8:] if anc else out.amplitudes[:8]
        np.testing.assert_allclose(half, u_psi.amplitudes if anc else psi.amplitudes, atol=1e-13)


def test_simulate_inverse_undoes():
    rng = np.random.default_rng(1)
    spec = AnsatzSpec(T2, 2, 4)
    theta = rng.uniform(0, 6, spec.num_params)
    psi = random_state(rng, 4)
    out = simulate_inverse(build_ansatz(spec), simulate(build_ansatz(spec), psi.copy(), theta), theta)
    np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-13)


# -- oracle -------------------------------------------------------------------

def test_oracle_examples():
    c = build_oracle(OracleSpec(2, [3]))
    assert [g.kind for g in c.gates] == ["mcx"]
    out = simulate(c, sv.new_basis(3, 0b011))
    assert out.amplitudes[0b111] == 1.0

    c = build_oracle(OracleSpec(2, [0]))
    assert gate_counts(c) == {"x": 4, "mcx": 1}
    assert simulate(c, sv.new_basis(3, 0)).amplitudes[0b100] == 1.0

    spec = OracleSpec(3, [5, 6])
    out = simulate(build_oracle(spec), extend(sv.uniform(3)))
    lo, hi = out.amplitudes[:8], out.amplitudes[8:]
    for x in range(8):
        good = x in (5, 6)
        assert (lo[x], hi[x]) == ((0.0, 1 / math.sqrt(8)) if good else (1 / math.sqrt(8), 0.0))


def test_oracle_spec_invariants():
    with pytest.raises((CircuitError, ValueError)):
        OracleSpec(2, [])
    with pytest.raises((CircuitError, ValueError)):
        OracleSpec(2, [0, 1, 2, 3])
    with pytest.raises((CircuitError, ValueError)):
        OracleSpec(2, [4])


def test_semantic_oracle_examples():
    s = extend(sv.uniform(2))
    apply_oracle_semantic(s, OracleSpec(2, [3]))
    np.testing.assert_array_equal(s.amplitudes, [.5, .5, .5, 0, 0, 0, 0, .5])
    s = extend(sv.uniform(3))
    apply_oracle_semantic(s, OracleSpec(3, [0, 1, 2, 3, 4, 6, 7]))
    assert np.count_nonzero(s.amplitudes[:8]) == 1
    bad = sv.uniform(3)
    with pytest.raises((CircuitError, ValueError)):
        apply_oracle_semantic(bad, OracleSpec(2, [1]))


@pytest.mark.parametrize("n", range(1, 7))
def test_oracle_circuit_matches_semantic(n):
    rng = np.random.default_rng(n)
    for _ in range(100):
        k = int(rng.integers(1, 1 << n))
        spec = OracleSpec(n, rng.choice(1 << n, size=k, replace=False).tolist())
        s = extend(random_state(rng, n))
        got = simulate(build_oracle(spec), s.copy())
        apply_oracle_semantic(s, spec)
        assert np.max(np.abs(got.amplitudes - s.amplitudes)) < 1e-12


@pytest.mark.parametrize("n", range(2, 7))
def test_decompose_mcx_brute_force(n):
    c = decompose_mcx(n)
    assert c.num_qubits == 2 * n
    assert gate_counts(c) == {"toffoli": 2 * n - 2, "cnot": 1}
    assert structural_depth(c) == 2 * n - 1
    for x in range(1 << (n + 1)):
        out = simulate(c, sv.new_basis(2 * n, x))
        want = x ^ (1 << n) if x & ((1 << n) - 1) == (1 << n) - 1 else x
        # a permutation: exactly one amplitude 1, ancillas (bits above n) back at 0
        assert out.amplitudes[want] == 1.0


def test_decompose_mcx_fig_s3_case():
    c = decompose_mcx(5)
    assert (c.count("toffoli"), c.count("cnot"), structural_depth(c)) == (8, 1, 9)
    with pytest.raises(CircuitError):
        decompose_mcx(1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_decomposed_oracle_matches(n):
    rng = np.random.default_rng(n)
    spec = OracleSpec(n, rng.choice(1 << n, size=2, replace=False).tolist())
    c = build_oracle(spec, decomposed=True)
    for _ in range(10):
        psi = extend(random_state(rng, n))
        wide = np.zeros(1 << c.num_qubits)
        wide[: len(psi)] = psi.amplitudes
        out = simulate(c, sv.StateVector(c.num_qubits, wide))
        apply_oracle_semantic(psi, spec)
        assert np.max(np.abs(out.amplitudes[: len(psi)] - psi.amplitudes)) < 1e-12
        assert np.max(np.abs(out.amplitudes[len(psi):])) == 0.0


# -- composites and depth -------------------------------------------------------

def test_fig1c_depth_56():
    c = build_fig1c(OracleSpec(26, [(1 << 26) - 1]), AnsatzSpec(T2, 1, 27), decomposed=True)
    assert structural_depth(c) == 56


@pytest.mark.parametrize("n", [2, 8, 14, 20, 26])
def test_formula_depths(n):
    assert formula_depth("fig1a", n) == 8 * n + 3
    assert formula_depth("fig1b", n) == 8 * n + 4
    assert formula_depth("fig1c", n) == 5 * n + 2
    assert formula_depth("controlled_ansatz", n) == 6 * n + 3
    assert formula_depth("type1_layer", n) == n + 1
    assert formula_depth("controlled_type1_layer", n) == 2 * n + 1
    assert formula_depth("oracle", n) == 2 * n - 1
    assert formula_depth("grover_iteration", n) == 2 * n + 1


def test_formula_depth_table_values():
    assert formula_depth(DepthKind.FIG1B, 26) == 212
    assert formula_depth(DepthKind.FIG1B, 8) == 68
    with pytest.raises(ValueError):
        formula_depth("nope", 3)


@pytest.mark.parametrize("n", [2, 5, 8])
def test_structural_matches_formula_for_type1_composites(n):
    oracle, spec = OracleSpec(n, [(1 << n) - 1]), AnsatzSpec(T1, 3, n + 1)
    assert structural_depth(build_fig1a(oracle, spec, decomposed=True)) == 8 * n + 3
    assert structural_depth(build_fig1b(oracle, spec, decomposed=True)) == 8 * n + 4
    assert structural_depth(build_fig1c(oracle, spec, decomposed=True)) == 5 * n + 2


def test_fig1_wire_mismatch():
    with pytest.raises(CircuitError):
        build_fig1c(OracleSpec(3, [1]), AnsatzSpec(T1, 1, 3))


def test_fig1c_staged_halves():
    """After the oracle stage goods sit in the label-1 half, bads in the label-0 half."""
    n, goods = 3, [2, 7]
    spec = AnsatzSpec(T1, 1, n + 1)
    c = build_fig1c(OracleSpec(n, goods), spec, prep=True)
    first_barrier = next(i for i, g in enumerate(c.gates) if g.is_barrier)
    oracle_end = max(i for i, g in enumerate(c.gates) if g.is_barrier)
    staged = Circuit(c.num_qubits, c.gates[:oracle_end])
    s = simulate(staged, sv.new_basis(n + 1, 0))
    assert first_barrier < oracle_end
    lo, hi = s.amplitudes[:8], s.amplitudes[8:]
    assert np.count_nonzero(hi) == 2 and np.count_nonzero(lo) == 6
    np.testing.assert_allclose(hi[goods], 1 / math.sqrt(8))


def test_structural_depth_trivial():
    assert structural_depth(Circuit(3, ())) == 0
    assert structural_depth(Circuit(2, (Gate("barrier", (0, 1)),))) == 0
    c = Circuit(3, (Gate("h", (0,)), Gate("h", (1,)), Gate("cnot", (0, 2)), Gate("x", (1,))))
    assert structural_depth(c) == 2


def test_gate_and_circuit_validation():
    with pytest.raises(CircuitError):
        Gate("cnot", (1, 1))
    with pytest.raises(CircuitError):
        Gate("swap", (0, 1))
    with pytest.raises(CircuitError):
        Circuit(2, (Gate("h", (2,)),))
    with pytest.raises(CircuitError):
        Circuit(2, (Gate("ry", (0,), param=3),), num_params=2)


def test_dump_format():
    spec = AnsatzSpec(T1, 1, 3)
    text = dump(build_ansatz(spec), formula_depth("ansatz", 2, spec))
    lines = text.splitlines()
    assert lines[0] == "ry 2 [0]"
    assert "cnot 2,1" in lines
    assert lines[-1] == "structural=3 formula=3"
    assert re.fullmatch(r"structural=0 formula=n/a", dump(Circuit(1, ())).strip())


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.data())
def test_oracle_preserves_norm_and_support(n, data):
    goods = data.draw(st.sets(st.integers(0, (1 << n) - 1), min_size=1, max_size=(1 << n) - 1))
    seed = data.draw(st.integers(0, 10**6))
    psi = extend(random_state(np.random.default_rng(seed), n))
    out = simulate(build_oracle(OracleSpec(n, sorted(goods))), psi)
    assert abs(out.norm_squared() - 1) < 1e-12
    nz_hi = set(np.flatnonzero(out.amplitudes[1 << n:]).tolist())
    assert nz_hi <= goods
