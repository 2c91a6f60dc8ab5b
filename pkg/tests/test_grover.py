import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vqsearch import statevec as sv
from vqsearch.circuit import simulate, structural_depth
from vqsearch.grover import (
    TABLE_HEADER, ThresholdUnreachable, amplitude_trajectory, closed_form_probability, count_iterations,
    diffusion_circuit, full_vector_recurrence, grover_depth, iteration_depth, simulate_grover,
    table_s1_report, table_s1_rows, vqs_depth,
)


def first_crossing_closed_form(n, k, p):
    """Smallest t with sin^2((2t+1) asin(sqrt(k/N))) >= p, from the rotation picture."""
    th = math.asin(math.sqrt(k / (1 << n)))
    t = max(1, math.ceil((math.asin(math.sqrt(p)) / th - 1) / 2) - 1)
    while math.sin((2 * t + 1) * th) ** 2 < p:
        t += 1
    return t


def test_hand_run_n2():
    good, bad = amplitude_trajectory(2, 1, 1)[1]
    assert good == pytest.approx(1.0, abs=1e-15) and bad == pytest.approx(0.0, abs=1e-15)
    assert count_iterations(2, 1, 0.5).n_G == 1
    s = simulate_grover(2, [3], 1)
    assert abs(s.amplitudes[3] ** 2 - 1) < 1e-12


@pytest.mark.parametrize("n,p,ng,depth", [
    (2, 0.5, 1, 7), (8, 0.5, 6, 102), (14, 0.5, 50, 1450),
    (2, 0.9, 1, 7), (8, 0.9, 10, 170), (14, 0.9, 80, 2320),
])
def test_table_rows_small_n(n, p, ng, depth):
    c = count_iterations(n, 1, p)
    assert (c.n_G, c.total_depth, grover_depth(n, p)) == (ng, depth, depth)


@pytest.mark.parametrize("n", [2, 8, 14, 20, 26])
@pytest.mark.parametrize("p", [0.5, 0.9])
def test_count_matches_closed_form_crossing(n, p):
    assert count_iterations(n, 1, p).n_G == first_crossing_closed_form(n, 1, p)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 18), st.data(), st.floats(0.05, 0.95))
def test_first_crossing_property(n, data, p):
    k = data.draw(st.integers(1, min(8, (1 << n) - 1)))
    try:
        c = count_iterations(n, k, p, criterion="total")
    except ThresholdUnreachable:
        return
    assert closed_form_probability(n, k, c.n_G) >= p - 1e-12
    if c.n_G > 1:
        assert closed_form_probability(n, k, c.n_G - 1) < p + 1e-12


def test_element_vs_total_criterion():
    assert count_iterations(10, 1, 0.7).n_G == count_iterations(10, 1, 0.7, criterion="total").n_G
    assert count_iterations(10, 4, 0.2).n_G >= count_iterations(10, 4, 0.2, criterion="total").n_G


def test_count_errors():
    with pytest.raises(ValueError):
        count_iterations(2, 0, 0.5)
    with pytest.raises(ValueError):
        count_iterations(2, 1, 1.0)
    with pytest.raises(ValueError):
        count_iterations(2, 1, 0.5, criterion="median")
    # n=2, k=3: the angle is pi/3, so the total good probability cycles 0.75, 0, 0.75, ...
    with pytest.raises(ThresholdUnreachable, match="cycle"):
        count_iterations(2, 3, 0.8, criterion="total")


def test_iteration_cap(monkeypatch):
    import vqsearch.grover as g

    monkeypatch.setattr(g, "MAX_ITERATIONS", 5)
    with pytest.raises(ThresholdUnreachable, match="within 5"):
        g.count_iterations(14, 1, 0.9)


@pytest.mark.parametrize("n", range(2, 11))
def test_two_scalar_matches_full_vector(n):
    for k in (1, 2, 3):
        goods = list(range(1 << n))[-k:]
        full = full_vector_recurrence(n, goods, 50)
        good, bad = amplitude_trajectory(n, k, 50)[-1]
        assert np.max(np.abs(full[goods] - good)) < 1e-12
        assert np.max(np.abs(np.delete(full, goods) - bad)) < 1e-12


@pytest.mark.parametrize("n", range(2, 11))
def test_simulate_grover_closed_form(n):
    rng = np.random.default_rng(n)
    for k in (1, 2, 3):
        goods = rng.choice(1 << n, size=k, replace=False).tolist()
        for t in (0, 1, 2, 5, 13, 50):
            s = simulate_grover(n, goods, t)
            assert abs(sv.probability_over(s, goods) - closed_form_probability(n, k, t)) < 1e-10
            assert abs(s.norm_squared() - 1) < 1e-12


def test_simulate_grover_matches_recurrence():
    n, goods = 6, [9, 40]
    traj = amplitude_trajectory(n, 2, 12)
    for t in (3, 12):
        amps = simulate_grover(n, goods, t).amplitudes
        good, bad = traj[t]
        # diffusion circuit equals inversion about the mean up to a global sign
        sign = np.sign(amps[goods[0]] * good) if good else np.sign(amps[0] * bad)
        np.testing.assert_allclose(sign * amps[goods], good, atol=1e-12)
        np.testing.assert_allclose(np.delete(sign * amps, goods), bad, atol=1e-12)


def test_simulate_grover_size_limit():
    with pytest.raises(ValueError):
        simulate_grover(13, [0], 1)


@pytest.mark.parametrize("n", [4, 5, 8, 12])
def test_diffusion_depth_matches_iteration_depth(n):
    c = diffusion_circuit(n, ancillas=tuple(range(n, 2 * n - 2)))
    assert structural_depth(c) == iteration_depth(n) == 2 * n + 1


def test_small_n_iteration_depth():
    assert iteration_depth(2) == 7 and iteration_depth(3) == 9
    with pytest.raises(ValueError):
        iteration_depth(1)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_diffusion_is_inversion_about_mean(n):
    rng = np.random.default_rng(n)
    v = rng.normal(size=1 << n)
    v /= np.linalg.norm(v)
    anc = tuple(range(n, 2 * n - 2)) if n > 2 else ()
    c = diffusion_circuit(n, anc)
    wide = np.zeros(1 << c.num_qubits)
    wide[: 1 << n] = v
    out = simulate(c, sv.StateVector(c.num_qubits, wide)).amplitudes
    want = 2 * v.mean() - v
    sign = np.sign(out[0] / want[0])
    np.testing.assert_allclose(sign * out[: 1 << n], want, atol=1e-12)


def test_vqs_depth_row():
    assert [vqs_depth(n) for n in (2, 8, 14, 20, 26)] == [20, 68, 116, 164, 212]


def test_table_report_format():
    text = table_s1_report((2, 8, 14))
    lines = text.split("\n")
    assert lines[0] == ",".join(TABLE_HEADER)
    assert lines[1:4] == ["2,20,1,7,1,7", "8,68,6,102,10,170", "14,116,50,1450,80,2320"]
    assert text.endswith("\n") and "\r" not in text
    assert len(table_s1_rows()) == 5
