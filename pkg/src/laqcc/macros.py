"""Gate macro library: fanout, logic, arithmetic, counting, QFT,
permutations, and commuting-gate parallelization.

Classical-reversible macros run as basis-permutation gates whose extra
ancilla cost is charged analytically (see :mod:`laqcc.charges`); fanout
and commuting-gate parallelization additionally ship a measurement-based
gadget backend built from flattened Clifford ladders, so the two routes
can be compared branch by branch.

Bit conventions: a gate's qubit list is most-significant-first, and
registers passed as qubit tuples follow the same order.
"""
from __future__ import annotations

import cmath
import math
from typing import Callable, List, Sequence, Tuple

import numpy as np

from . import charges, clifford as cl, program as pr
from .program import BasisMapGate, DiagonalGate, GateApp, MatrixGate


def _bits(value: int, width: int) -> Tuple[int, ...]:
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


# --------------------------------------------------------------------------
# Fanout
# --------------------------------------------------------------------------


def fanout(num_targets: int) -> BasisMapGate:
    """|x>|y_1..y_m> -> |x>|y_1^x .. y_m^x>; control is the first qubit."""
    if num_targets < 1:
        raise ValueError("need at least one target")
    m = num_targets

    def fn(v: int) -> int:
        if (v >> m) & 1:
            v ^= (1 << m) - 1
        return v

    return BasisMapGate(
        name=f"fanout{m}",
        num_bits=m + 1,
        fn=fn,
        inverse_fn=fn,
        charge=charges.charge("fanout", m + 1),
        spec={"name": "fanout", "params": {"num_targets": m}},
    )


def fanout_gadget(num_targets: int) -> pr.LaqccProgram:
    """Measurement-based fanout: a flattened ladder of CNOT+SWAP steps.

    Wire 0 carries the control; wires 1..m the targets.  After the
    cyclic hand-off the program's ``fanout_out`` register lists the
    output carriers as (control, target_1, ..., target_m).
    """
    m = num_targets
    gates: List[cl.CliffordGate] = []
    for i in range(m):
        gates.append(cl.CliffordGate("CNOT", (i, i + 1)))  # control low wire
        gates.append(cl.CliffordGate("SWAP", (i, i + 1)))
    circuit = cl.CliffordCircuit("ladder", m + 1, 1, tuple(gates))
    program = cl.flatten_ladder(circuit)
    outs = program.registers["outputs"].qubits
    # wire w < m ends holding target w+1; wire m ends holding the control
    reordered = (outs[m],) + tuple(outs[:m])
    program.registers["fanout_out"] = pr.Register(reordered, "system")
    del program.registers["outputs"]
    program.registers["workspace"] = pr.Register(
        tuple(
            q for q in range(program.num_qubits) if q not in set(reordered)
        ),
        "ancilla",
    )
    return program


# --------------------------------------------------------------------------
# Boolean logic
# --------------------------------------------------------------------------


def _flag_gate(
    name: str,
    num_inputs: int,
    predicate: Callable[[int], bool],
    charge_name: str,
    spec_params: dict,
) -> BasisMapGate:
    """Flip the trailing flag qubit iff predicate(inputs)."""

    def fn(v: int) -> int:
        return v ^ 1 if predicate(v >> 1) else v

    return BasisMapGate(
        name=name,
        num_bits=num_inputs + 1,
        fn=fn,
        inverse_fn=fn,
        charge=charges.charge(charge_name, num_inputs),
        spec={"name": charge_name, "params": spec_params},
    )


def or_n(n: int) -> BasisMapGate:
    return _flag_gate(f"or{n}", n, lambda x: x != 0, "or", {"n": n})


def and_n(n: int) -> BasisMapGate:
    return _flag_gate(
        f"and{n}", n, lambda x: x == (1 << n) - 1, "and", {"n": n}
    )


def equal_i(n: int, j: int) -> BasisMapGate:
    return _flag_gate(
        f"equal{n}[{j}]", n, lambda x: x == j, "equal", {"n": n, "j": j}
    )


# --------------------------------------------------------------------------
# Arithmetic
# --------------------------------------------------------------------------


def add_n(n: int) -> BasisMapGate:
    """|x>|y> -> |x>|y + x mod 2^n>; x is the leading register."""
    mask = (1 << n) - 1

    def fn(v: int) -> int:
        x, y = v >> n, v & mask
        return (x << n) | ((y + x) & mask)

    def inv(v: int) -> int:
        x, y = v >> n, v & mask
        return (x << n) | ((y - x) & mask)

    return BasisMapGate(
        name=f"add{n}",
        num_bits=2 * n,
        fn=fn,
        inverse_fn=inv,
        charge=charges.charge("add", n),
        spec={"name": "add", "params": {"n": n}},
    )


def equality(n: int) -> BasisMapGate:
    """|x>|y>|f> -> flip f iff x = y."""
    mask = (1 << n) - 1

    def fn(v: int) -> int:
        x, y = (v >> (n + 1)) & mask, (v >> 1) & mask
        return v ^ 1 if x == y else v

    return BasisMapGate(
        name=f"equality{n}",
        num_bits=2 * n + 1,
        fn=fn,
        inverse_fn=fn,
        charge=charges.charge("equality", n),
        spec={"name": "equality", "params": {"n": n}},
    )


def less_than(n: int, q: int) -> BasisMapGate:
    """|v>|f> -> flip f iff v < q; the comparator behind bounded-range
    uniform loads."""
    gate = _flag_gate(
        f"lessthan{n}[{q}]", n, lambda x: x < q, "greaterthan", {"n": n, "q": q}
    )
    gate.charge = charges.charge("greaterthan", n + 1)
    gate.spec = {"name": "lessthan", "params": {"n": n, "q": q}}
    return gate


def greaterthan(n: int) -> BasisMapGate:
    """|x>|y>|f> -> flip f iff x > y (one extra sign bit charged)."""
    mask = (1 << n) - 1

    def fn(v: int) -> int:
        x, y = (v >> (n + 1)) & mask, (v >> 1) & mask
        return v ^ 1 if x > y else v

    return BasisMapGate(
        name=f"greaterthan{n}",
        num_bits=2 * n + 1,
        fn=fn,
        inverse_fn=fn,
        charge=charges.charge("greaterthan", n + 1),
        spec={"name": "greaterthan", "params": {"n": n}},
    )


# --------------------------------------------------------------------------
# Counting
# --------------------------------------------------------------------------


def count_register_width(n: int) -> int:
    return max(1, math.ceil(math.log2(n + 1)))


def hammingweight(n: int) -> BasisMapGate:
    """|x>|c> -> |x>|c xor wt(x)> with a ceil(log2(n+1))-bit counter."""
    w = count_register_width(n)

    def fn(v: int) -> int:
        x, c = v >> w, v & ((1 << w) - 1)
        return (x << w) | (c ^ x.bit_count())

    return BasisMapGate(
        name=f"hammingweight{n}",
        num_bits=n + w,
        fn=fn,
        inverse_fn=fn,
        charge=charges.charge("hammingweight", n),
        spec={"name": "hammingweight", "params": {"n": n}},
    )


def exact_t(n: int, t: int) -> BasisMapGate:
    return _flag_gate(
        f"exact{n}[{t}]",
        n,
        lambda x: x.bit_count() == t,
        "exact",
        {"n": n, "t": t},
    )


def threshold_t(n: int, t: int) -> BasisMapGate:
    gate = _flag_gate(
        f"threshold{n}[{t}]",
        n,
        lambda x: x.bit_count() >= t,
        "exact",
        {"n": n, "t": t},
    )
    gate.charge = charges.charge("threshold", n, t)
    gate.spec = {"name": "threshold", "params": {"n": n, "t": t}}
    return gate


def weighted_threshold(weights: Sequence[int], t: int) -> BasisMapGate:
    """Flip the flag iff sum of w_i x_i >= t; integer weights only."""
    if any(not isinstance(w, int) for w in weights):
        raise ValueError("weights must be integers")
    n = len(weights)

    def total(x: int) -> int:
        return sum(
            w for i, w in enumerate(weights) if (x >> (n - 1 - i)) & 1
        )

    gate = _flag_gate(
        f"wthreshold{n}[{t}]",
        n,
        lambda x: total(x) >= t,
        "threshold",
        {"n": n, "t": t, "weights": list(weights)},
    )
    gate.charge = charges.charge("threshold", n, t)
    return gate


# --------------------------------------------------------------------------
# QFT
# --------------------------------------------------------------------------


def qft(n: int) -> MatrixGate:
    dim = 1 << n
    omega = np.exp(2j * np.pi / dim)
    matrix = np.array(
        [[omega ** (j * k) for k in range(dim)] for j in range(dim)]
    ) / math.sqrt(dim)
    gate = MatrixGate(f"qft{n}", matrix)
    gate.charge = charges.charge("qft", n)
    gate.spec = {"name": "qft", "params": {"n": n}}
    return gate


# --------------------------------------------------------------------------
# Permutation
# --------------------------------------------------------------------------


def permutation(perm: Sequence[int]) -> BasisMapGate:
    """Relabel wires: output bit i (msb-first) takes input bit perm[i]."""
    n = len(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError("not a permutation")
    inv = [0] * n
    for i, p in enumerate(perm):
        inv[p] = i

    def apply(p: Sequence[int]) -> Callable[[int], int]:
        def fn(v: int) -> int:
            bits = _bits(v, n)
            out = 0
            for i in range(n):
                out = (out << 1) | bits[p[i]]
            return out

        return fn

    return BasisMapGate(
        name=f"perm{tuple(perm)}",
        num_bits=n,
        fn=apply(perm),
        inverse_fn=apply(inv),
        charge=charges.charge("permutation", n),
        spec={"name": "permutation", "params": {"perm": list(perm)}},
    )


# --------------------------------------------------------------------------
# Commuting-gate parallelization
# --------------------------------------------------------------------------


def product_diagonal(
    diagonals: Sequence[np.ndarray], k: int
) -> DiagonalGate:
    """Single diagonal gate equal to the product of commuting diagonals."""
    total = np.ones(1 << k, dtype=complex)
    for d in diagonals:
        total = total * d
    return DiagonalGate(
        name="diag_product",
        num_bits=k,
        phase_fn=lambda v: total[v],
        charge=charges.charge("parallelize", k * max(1, len(diagonals))),
    )


def parallelize_commuting(
    gates: Sequence[np.ndarray],
    diagonalizer: np.ndarray | None = None,
) -> Tuple[List[object], int]:
    """Fragment layers equal to the product of pairwise-commuting gates
    on a shared k-qubit register, built from fanout copies.

    Returns (layers, total_qubits).  Qubits 0..k-1 (listed most
    significant first as (k-1..0)) form the shared register; qubits
    k..k + (m-1)k - 1 are the copy ancillas, restored to zero.  If
    ``diagonalizer`` is None the gates must already be diagonal.
    """
    gates = [np.asarray(g, dtype=complex) for g in gates]
    k = int(round(math.log2(gates[0].shape[0])))
    m = len(gates)
    t = (
        np.eye(1 << k, dtype=complex)
        if diagonalizer is None
        else np.asarray(diagonalizer, dtype=complex)
    )
    diagonals = []
    for g in gates:
        d = t @ g @ t.conj().T
        if not np.allclose(d, np.diag(np.diag(d)), atol=1e-9):
            raise ValueError("gates are not commuting under the "
                             "given diagonalizer")
        diagonals.append(np.diag(d))
    layers: List[object] = []
    shared = tuple(range(k - 1, -1, -1))  # msb-first
    total = k + (m - 1) * k
    copies = [shared] + [
        tuple(range(k + (c - 1) * k + k - 1, k + (c - 1) * k - 1, -1))
        for c in range(1, m)
    ]
    if diagonalizer is not None:
        layers.append(
            pr.QuantumLayer((GateApp(MatrixGate("T", t), shared),))
        )
    fan = fanout(m - 1) if m > 1 else None
    if fan is not None:
        # copy shared bit b into the b-th bit of every ancilla block
        apps = []
        for b in range(k):
            qubits = (shared[b],) + tuple(copies[c][b] for c in range(1, m))
            apps.append(GateApp(fan, qubits))
        layers.append(pr.QuantumLayer(tuple(apps)))
    diag_apps = []
    for c in range(m):
        d = diagonals[c]
        gate = DiagonalGate(
            name=f"diag{c}", num_bits=k,
            phase_fn=(lambda dd: lambda v: dd[v])(d),
        )
        diag_apps.append(GateApp(gate, copies[c]))
    layers.append(pr.QuantumLayer(tuple(diag_apps)))
    if fan is not None:
        apps = []
        for b in range(k):
            qubits = (shared[b],) + tuple(copies[c][b] for c in range(1, m))
            apps.append(GateApp(fan, qubits))
        layers.append(pr.QuantumLayer(tuple(apps)))
    if diagonalizer is not None:
        layers.append(
            pr.QuantumLayer(
                (GateApp(MatrixGate("Tinv", t.conj().T), shared),)
            )
        )
    return layers, total


# --------------------------------------------------------------------------
# Serialization factories
# --------------------------------------------------------------------------

pr.register_gate("fanout")(fanout)
pr.register_gate("or")(or_n)
pr.register_gate("and")(and_n)
pr.register_gate("equal")(equal_i)
pr.register_gate("add")(add_n)
pr.register_gate("equality")(equality)
pr.register_gate("lessthan")(less_than)
pr.register_gate("greaterthan")(greaterthan)
pr.register_gate("hammingweight")(hammingweight)
pr.register_gate("exact")(exact_t)
pr.register_gate("qft")(qft)
pr.register_gate("permutation")(permutation)


@pr.register_gate("threshold")
def _threshold_factory(n: int, t: int, weights=None) -> BasisMapGate:
    if weights is not None:
        return weighted_threshold([int(w) for w in weights], t)
    return threshold_t(n, t)
