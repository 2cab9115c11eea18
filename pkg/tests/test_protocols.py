import math

import numpy as np
import pytest

from laqcc import amplifier as amp
from laqcc import numbersys as ns
from laqcc import program as pr
from laqcc import protocols as pt
from laqcc import sparse_state as ss


def run_out(prog, target, policy=None):
    state, _ = pr.execute(prog, policy or pr.SeededPolicy(0))
    sub, rest = ss.split_register(state, prog.registers["out"].qubits)
    assert rest == 0  # every helper register back to |0>
    return ss.fidelity(sub, target)


def all_branches_out(prog, target):
    branches = pr.enumerate_branches(prog)
    for b in branches:
        sub, rest = ss.split_register(b.state, prog.registers["out"].qubits)
        assert rest == 0
        assert ss.fidelity(sub, target) == pytest.approx(1.0, abs=1e-9)
    return branches


# ----------------------------------------------------- uniform superposition


@pytest.mark.parametrize("q", range(1, 17))
def test_uniform_all_ranges(q):
    prog, target = pt.uniform_superposition(q)
    all_branches_out(prog, target)


def test_uniform_frozen_q3():
    prog, target = pt.uniform_superposition(3)
    assert target.amplitudes[0] == pytest.approx(1 / math.sqrt(3))
    assert 3 not in target.amplitudes
    assert run_out(prog, target) == pytest.approx(1.0, abs=1e-9)


def test_uniform_single_iteration_when_half_full():
    for q in range(1, 17):
        n = pt.index_width(q)
        p = amp.plan(1 << n, q)
        if q / (1 << n) >= 0.5:
            assert p.J <= 1


def test_uniform_has_no_rounds():
    for q in (3, 5, 11):
        prog, _ = pt.uniform_superposition(q)
        assert pr.resources(prog).rounds == 0


# ------------------------------------------------------------------ W state


def test_w2_frozen():
    prog, target = pt.w_state(2)
    amp_val = 1 / math.sqrt(2)
    assert target.amplitudes == pytest.approx(
        {0b01: amp_val, 0b10: amp_val}
    )
    assert run_out(prog, target) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n", range(2, 7))
def test_w_state_exact(n):
    prog, target = pt.w_state(n)
    assert run_out(prog, target) == pytest.approx(1.0, abs=1e-9)


def test_w_rounds_constant_in_n():
    rounds = {pr.resources(pt.w_state(n)[0]).rounds for n in range(2, 8)}
    assert rounds == {0}


def test_w_layout_is_valid_grid():
    for n in (3, 5):
        prog, _ = pt.w_state(n)
        layout = pt.w_layout(n)
        assert set(layout.coords) == set(range(prog.num_qubits))
        pr.validate_layout(prog, layout)


def test_uncompress_compress_are_involutions():
    g = pt.uncompress_gate(3, 2)
    for v in range(1 << g.num_bits):
        assert g.fn(g.fn(v)) == v


# ------------------------------------------------------------- Dicke states


def test_dicke_target_frozen_4_2():
    t = pt.dicke_target(4, 2)
    amp_val = 1 / math.sqrt(6)
    assert sorted(t.amplitudes) == [0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]
    assert all(a == pytest.approx(amp_val) for a in t.amplitudes.values())


def test_dicke_k1_is_w_state():
    _, d = pt.dicke_small_k(4, 1)
    _, w = pt.w_target(4), pt.w_target(4)
    assert ss.fidelity(d, pt.w_target(4)) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (4, 1), (4, 2), (5, 2)])
def test_dicke_small_k_all_branches(n, k):
    prog, target = pt.dicke_small_k(n, k)
    branches = all_branches_out(prog, target)
    if k > 1:
        # one feed-forward round over the k! rank assignments
        assert len(branches) == math.factorial(k)
        assert pr.resources(prog).rounds == 1


def test_dicke_small_k_policy_rejects_large_k():
    with pytest.raises(ValueError):
        pt.dicke_small_k(4, 3)  # ceil(sqrt(4)) = 2


def test_filtering_start_probability_frozen():
    assert pt.filtering_start_probability(4, 2) == pytest.approx(0.75)
    assert pt.filtering_start_probability(8, 2) == pytest.approx(7 / 8)
    # collision-free probability dominates the birthday floor
    assert pt.filtering_start_probability(8, 2) > math.exp(-2 * 4 / 8)


def test_cleaning_gate_zeroes_sorted_registers():
    n, k, b = 4, 2, 2
    g = pt.cleaning_gate(n, k, b)
    from itertools import combinations

    for pos in combinations(range(n), k):
        s = sum(1 << (n - 1 - p) for p in pos)
        regs = 0
        for p in pos:
            regs = (regs << b) | p
        assert g.fn((regs << n) | s) == s


def test_cleaning_gadget_matches_basis_map():
    n, k, b = 4, 2, 2
    from itertools import combinations

    # qubit i holds value bit i; list registers msb-first
    system = tuple(range(n - 1, -1, -1))
    indexes = [
        tuple(range(n + (l + 1) * b - 1, n + l * b - 1, -1))
        for l in range(k)
    ]
    total = n + k * b
    norm = 1 / math.sqrt(math.comb(n, k))
    entries = []
    for pos in combinations(range(n), k):
        s = sum(1 << (n - 1 - p) for p in pos)
        v = s
        for l, p in enumerate(pos):
            v |= p << (n + l * b)
        entries.append((v, norm))
    state = ss.from_amplitudes(total, entries)
    ref = pt.cleaning_gate(n, k, b).apply(
        state, indexes[0] + indexes[1] + system
    )
    out = state
    for layer in pt.cleaning_gadget_layers(indexes, system, n):
        for app in layer.apps:
            out = app.gate.apply(out, app.qubits)
    assert ss.fidelity(out, ref) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n", range(1, 6))
def test_dicke_factoradic_all_k(n):
    for k in range(n + 1):
        prog, target = pt.dicke_factoradic(n, k)
        assert run_out(prog, target) == pytest.approx(1.0, abs=1e-9)


def test_dicke_factoradic_no_rounds():
    for n, k in [(3, 1), (4, 2), (5, 3)]:
        prog, _ = pt.dicke_factoradic(n, k)
        assert pr.resources(prog).rounds == 0


def test_dicke_protocols_agree():
    for n, k in [(4, 2), (5, 2), (6, 2)]:
        prog_a, t_a = pt.dicke_small_k(n, k)
        prog_b, t_b = pt.dicke_factoradic(n, k)
        assert ss.fidelity(t_a, t_b) == pytest.approx(1.0, abs=1e-9)
        assert run_out(prog_b, t_a) == pytest.approx(1.0, abs=1e-9)
        all_branches_out(prog_a, t_b)


def test_factoradic_support_tracking():
    prog, _ = pt.dicke_factoradic(4, 2)
    peak = pt.max_support(prog)
    assert peak == math.factorial(4)


# ------------------------------------------------------------ IQP embedding


CZ = np.diag([1, 1, 1, -1]).astype(complex)
T = np.diag([1.0, np.exp(1j * math.pi / 4)])


def tv_distance(p, q, n):
    return 0.5 * sum(abs(p.get(v, 0.0) - q.get(v, 0.0)) for v in range(1 << n))


def test_iqp_embedding_matches_direct():
    gates = [(CZ, (2, 1)), (T, (0,)), (CZ, (1, 0))]
    n = 3
    prog = pt.iqp_to_laqcc(gates, n)
    ref = pt.iqp_direct_distribution(gates, n)
    probs = {}
    for b in pr.enumerate_branches(prog):
        out = b.record[-1].outcome
        probs[out] = probs.get(out, 0.0) + b.probability
    assert tv_distance(probs, ref, n) < 1e-9


def test_iqp_no_gates_is_identity_distribution():
    prog = pt.iqp_to_laqcc([], 2)
    branches = pr.enumerate_branches(prog)
    probs = {b.record[-1].outcome: b.probability for b in branches}
    assert probs == pytest.approx({0: 1.0})


def test_iqp_rejects_non_diagonal():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    with pytest.raises(ValueError):
        pt.iqp_to_laqcc([(x, (0,))], 2)
