"""Pauli strings, Clifford conjugation, gate-teleportation flattening of
ladder/grid Clifford circuits, and the line-shaped GHZ preparation.

A Pauli string is stored as exponent bitmasks: ``P = phase * prod_q
Z_q^{z_q} X_q^{x_q}``.  Flattening replaces wire hand-offs between
consecutive gates by Bell pairs plus Bell measurements, and precomputes
the linear outcome-to-correction map by pushing unit errors through the
remaining gates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import program as pr

I2 = np.eye(2)
XM = np.array([[0, 1], [1, 0]], dtype=complex)
ZM = np.array([[1, 0], [0, -1]], dtype=complex)
HM = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
SM = np.array([[1, 0], [0, 1j]], dtype=complex)
CNOTM = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)  # control is the first (most significant) qubit

GENERATORS: Dict[str, np.ndarray] = {
    "H": HM,
    "S": SM,
    "X": XM,
    "Z": ZM,
    "CNOT": CNOTM,
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
        dtype=complex,
    ),
}

PHASES = (1 + 0j, 1j, -1 + 0j, -1j)


@dataclass(frozen=True)
class PauliString:
    num_qubits: int
    z: int  # bitmask, bit q = Z exponent on qubit q
    x: int
    phase: complex = 1 + 0j

    def single_matrix(self, q: int) -> np.ndarray:
        m = I2
        if (self.z >> q) & 1:
            m = ZM @ m if m is not I2 else ZM
        if (self.x >> q) & 1:
            m = m @ XM
        return m

    def matrix(self) -> np.ndarray:
        out = np.array([[self.phase]], dtype=complex)
        for q in range(self.num_qubits - 1, -1, -1):
            out = np.kron(out, self.single_matrix(q))
        return out


def _local_pauli(z_bits: Sequence[int], x_bits: Sequence[int]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for zb, xb in zip(z_bits, x_bits):
        m = I2
        if zb:
            m = ZM
        if xb:
            m = m @ XM
        out = np.kron(out, m)
    return out


def _match_pauli(
    m: np.ndarray, k: int
) -> Tuple[Tuple[int, ...], Tuple[int, ...], complex]:
    """Decompose a 2^k-dim matrix as phase * tensor of Z^z X^x factors."""
    for z_bits in product((0, 1), repeat=k):
        for x_bits in product((0, 1), repeat=k):
            t = _local_pauli(z_bits, x_bits)
            r, c = np.unravel_index(np.argmax(np.abs(t)), t.shape)
            if abs(m[r, c]) < 1e-9:
                continue
            phase = m[r, c] / t[r, c]
            if min(abs(phase - p) for p in PHASES) > 1e-9:
                continue
            if np.allclose(m, phase * t, atol=1e-9):
                snapped = min(PHASES, key=lambda p: abs(phase - p))
                return z_bits, x_bits, snapped
    raise ValueError("matrix is not a Pauli string; gate is not Clifford")


def conjugate_gate(
    matrix: np.ndarray, wires: Sequence[int], p: PauliString
) -> PauliString:
    """P' with U P = P' U, for a gate U acting on ``wires``.

    wires[0] is the gate matrix's most significant qubit.
    """
    k = len(wires)
    z_bits = [(p.z >> w) & 1 for w in wires]
    x_bits = [(p.x >> w) & 1 for w in wires]
    sub = _local_pauli(z_bits, x_bits)
    m = matrix @ sub @ matrix.conj().T
    new_z, new_x, local_phase = _match_pauli(m, k)
    z, x = p.z, p.x
    for w, zb, xb in zip(wires, new_z, new_x):
        z = (z & ~(1 << w)) | (zb << w)
        x = (x & ~(1 << w)) | (xb << w)
    return PauliString(p.num_qubits, z, x, p.phase * local_phase)


# --------------------------------------------------------------------------
# Clifford circuits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CliffordGate:
    name: str
    qubits: Tuple[int, ...]

    def matrix(self) -> np.ndarray:
        try:
            m = GENERATORS[self.name]
        except KeyError:
            raise ValueError(f"non-generator gate {self.name!r}")
        if m.shape[0] != 1 << len(self.qubits):
            raise ValueError(f"{self.name} arity mismatch")
        return m


@dataclass(frozen=True)
class CliffordCircuit:
    shape: str  # "ladder" | "grid"
    n: int  # wire count
    depth: int  # grid layer count (1 for ladder)
    gates: Tuple[CliffordGate, ...]

    def __post_init__(self):
        if self.shape not in {"ladder", "grid"}:
            raise ValueError(f"unknown shape {self.shape!r}")
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n:
                    raise ValueError("gate qubit out of range")
        self._group_steps()

    def _slot_order(self) -> List[Tuple[int, int]]:
        """Wire pairs of the circuit's steps in temporal order."""
        if self.shape == "ladder":
            return [(i, i + 1) for i in range(self.n - 1)]
        order = []
        for t in range(self.depth):
            start = 0 if t % 2 == 0 else 1
            for i in range(start, self.n - 1, 2):
                order.append((i, i + 1))
        return order

    def _group_steps(self) -> List[Tuple[np.ndarray, Tuple[int, int]]]:
        """Assign the slot-major gate word to its steps greedily.

        Gates are listed in temporal order; each gate goes to the
        earliest not-yet-passed slot whose wire pair contains it.
        """
        order = self._slot_order()
        mats = [np.eye(4, dtype=complex) for _ in order]
        pos = 0
        for g in self.gates:
            qs = set(g.qubits)
            while pos < len(order) and not qs <= set(order[pos]):
                pos += 1
            if pos == len(order):
                raise ValueError(
                    f"gate {g.name} on {g.qubits} does not fit the "
                    f"{self.shape} step order"
                )
            mats[pos] = _embed(g, order[pos]) @ mats[pos]
        return list(zip(mats, order))

    def steps(self) -> List[Tuple[np.ndarray, Tuple[int, int]]]:
        return self._group_steps()

    def unitary(self) -> np.ndarray:
        """Dense matrix on all n wires (desk scale only)."""
        dim = 1 << self.n
        u = np.eye(dim, dtype=complex)
        for m, wires in self.steps():
            u = _expand(m, wires, self.n) @ u
        return u

    def to_json(self) -> dict:
        return {
            "shape": self.shape,
            "n": self.n,
            "depth": self.depth,
            "gates": [
                {"name": g.name, "qubits": list(g.qubits)}
                for g in self.gates
            ],
        }

    @staticmethod
    def from_json(doc: dict) -> "CliffordCircuit":
        return CliffordCircuit(
            doc["shape"],
            doc["n"],
            doc.get("depth", 1),
            tuple(
                CliffordGate(g["name"], tuple(g["qubits"]))
                for g in doc["gates"]
            ),
        )


def _embed(g: CliffordGate, pair: Tuple[int, int]) -> np.ndarray:
    """4x4 matrix of a 1- or 2-qubit gate inside the (low, high) pair,
    with the higher wire as the most significant bit."""
    m = g.matrix()
    lo, hi = pair
    if len(g.qubits) == 2:
        if g.qubits == (hi, lo):
            return m
        if g.qubits == (lo, hi):
            swap = GENERATORS["SWAP"]
            return swap @ m @ swap
        raise ValueError("gate outside its ladder step")
    q = g.qubits[0]
    if q == hi:
        return np.kron(m, I2)
    if q == lo:
        return np.kron(I2, m)
    raise ValueError("gate outside its ladder step")


def _expand(m: np.ndarray, wires: Tuple[int, int], n: int) -> np.ndarray:
    """Embed a pair gate (high wire = msb of m) into the n-wire space
    where wire 0 is the least significant bit."""
    lo, hi = wires
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        b_hi, b_lo = (col >> hi) & 1, (col >> lo) & 1
        sub_col = (b_hi << 1) | b_lo
        base = col & ~((1 << hi) | (1 << lo))
        for sub_row in range(4):
            a = m[sub_row, sub_col]
            if a == 0:
                continue
            row = base | ((sub_row >> 1) << hi) | ((sub_row & 1) << lo)
            out[row, col] += a
    return out


def conjugate(circuit: CliffordCircuit, p: PauliString) -> PauliString:
    for matrix, wires in circuit.steps():
        p = conjugate_gate(matrix, (wires[1], wires[0]), p)
    return p


# --------------------------------------------------------------------------
# Correction map and flattening
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrectionMap:
    """Binary linear map from Bell outcome bits to Pauli exponents.

    Column ``2j`` is the propagated image of a Z error (phase bit) at
    junction j; column ``2j+1`` the image of an X error.  Rows are
    (z_0..z_{n-1}, x_0..x_{n-1}) wire exponents.
    """

    num_wires: int
    columns: Tuple[Tuple[int, int], ...]  # (z mask, x mask) per input bit

    def correct(self, outcome_bits: Sequence[int]) -> Tuple[int, int]:
        z = x = 0
        for bit, (cz, cx) in zip(outcome_bits, self.columns):
            if bit:
                z ^= cz
                x ^= cx
        return z, x

    def matrix(self) -> List[List[int]]:
        rows = []
        for r in range(2 * self.num_wires):
            row = []
            for cz, cx in self.columns:
                mask = cz if r < self.num_wires else cx
                bit = (mask >> (r % self.num_wires)) & 1
                row.append(bit)
            rows.append(row)
        return rows


@dataclass(frozen=True)
class Junction:
    wire: int
    gate_index: int  # error sits just before this temporal gate index


def _propagate_unit_errors(
    steps: List[Tuple[np.ndarray, Tuple[int, int]]],
    junctions: Sequence[Junction],
    n: int,
) -> CorrectionMap:
    columns: List[Tuple[int, int]] = []
    for j in junctions:
        for z0, x0 in ((1, 0), (0, 1)):
            p = PauliString(n, z0 << j.wire, x0 << j.wire)
            for matrix, wires in steps[j.gate_index:]:
                p = conjugate_gate(matrix, (wires[1], wires[0]), p)
            columns.append((p.z, p.x))
    return CorrectionMap(n, tuple(columns))


def build_correction_map(circuit: CliffordCircuit) -> CorrectionMap:
    """Correction map for the canonical flattening of ``circuit``."""
    _, _, _, junctions, cmap = _flatten_plan(circuit)
    return cmap


def _flatten_plan(circuit: CliffordCircuit):
    """Assign physical carriers, junctions, and the correction map."""
    steps = circuit.steps()
    n = circuit.n
    carrier = list(range(n))
    consumed = [False] * n
    next_qubit = n
    junctions: List[Junction] = []
    bell_pairs: List[Tuple[int, int]] = []
    measure_pairs: List[Tuple[int, int]] = []  # (old carrier, bell half a)
    placements: List[Tuple[np.ndarray, Tuple[int, int], Tuple[int, int]]] = []
    for gi, (matrix, wires) in enumerate(steps):
        for w in wires:
            if consumed[w]:
                a, b = next_qubit, next_qubit + 1
                next_qubit += 2
                bell_pairs.append((a, b))
                measure_pairs.append((carrier[w], a))
                junctions.append(Junction(w, gi))
                carrier[w] = b
        lo, hi = wires
        placements.append((matrix, wires, (carrier[lo], carrier[hi])))
        consumed[lo] = consumed[hi] = True
    outputs = tuple(carrier)
    cmap = _propagate_unit_errors(steps, junctions, n)
    return placements, bell_pairs, measure_pairs, outputs, cmap


@pr.register_classical("bell_correct")
def bell_correct_layer(num_wires, columns, outputs) -> pr.ClassicalLayer:
    """Classical layer turning Bell outcome bits into per-carrier Pauli
    exponent flags (``z{q}``/``x{q}``) via the binary correction map."""
    cmap = CorrectionMap(
        num_wires, tuple((int(z), int(x)) for z, x in columns)
    )
    nbits = len(cmap.columns)

    def correction(outcomes):
        raw = outcomes["bell"]
        bits = [(raw >> (nbits - 1 - i)) & 1 for i in range(nbits)]
        z, x = cmap.correct(bits)
        out = {}
        for w, q in enumerate(outputs):
            out[f"z{q}"] = (z >> w) & 1
            out[f"x{q}"] = (x >> w) & 1
        return out

    return pr.ClassicalLayer(
        "correct",
        correction,
        reads=("bell",),
        spec={
            "function_name": "bell_correct",
            "params": {
                "num_wires": num_wires,
                "columns": [list(col) for col in columns],
                "outputs": list(outputs),
            },
        },
    )


def _flatten(circuit: CliffordCircuit) -> pr.LaqccProgram:
    placements, bell_pairs, measure_pairs, outputs, cmap = _flatten_plan(
        circuit
    )
    n = circuit.n
    num_qubits = n + 2 * len(bell_pairs)

    h = pr.MatrixGate("H", HM)
    cnot = pr.MatrixGate("CNOT", CNOTM)
    layers: List[object] = []
    if bell_pairs:
        layers.append(
            pr.QuantumLayer(
                tuple(pr.GateApp(h, (a,)) for a, _ in bell_pairs)
            )
        )
        layers.append(
            pr.QuantumLayer(
                tuple(pr.GateApp(cnot, (a, b)) for a, b in bell_pairs)
            )
        )
    gate_apps = []
    for idx, (matrix, wires, phys) in enumerate(placements):
        gate_apps.append(
            pr.GateApp(
                pr.MatrixGate(f"U{idx}", matrix), (phys[1], phys[0])
            )
        )
    layers.append(pr.QuantumLayer(tuple(gate_apps)))
    if measure_pairs:
        layers.append(
            pr.QuantumLayer(
                tuple(pr.GateApp(cnot, (q, a)) for q, a in measure_pairs)
            )
        )
        layers.append(
            pr.QuantumLayer(
                tuple(pr.GateApp(h, (q,)) for q, _ in measure_pairs)
            )
        )
        measured = tuple(q for pair in measure_pairs for q in pair)
        layers.append(pr.MeasureLayer(measured, "bell"))
        layers.append(
            bell_correct_layer(
                cmap.num_wires,
                [list(col) for col in cmap.columns],
                list(outputs),
            )
        )
        xg = pr.MatrixGate("X", XM)
        zg = pr.MatrixGate("Z", ZM)
        layers.append(
            pr.QuantumLayer(
                tuple(
                    pr.GateApp(xg, (q,), ("correct", f"x{q}"))
                    for q in outputs
                )
            )
        )
        layers.append(
            pr.QuantumLayer(
                tuple(
                    pr.GateApp(zg, (q,), ("correct", f"z{q}"))
                    for q in outputs
                )
            )
        )
    program = pr.LaqccProgram(
        num_qubits,
        registers={
            "outputs": pr.Register(outputs, "system"),
            "workspace": pr.Register(
                tuple(
                    q for q in range(num_qubits) if q not in set(outputs)
                ),
                "ancilla",
            ),
        },
        layers=layers,
    )
    program.validate()
    return program


def flatten_ladder(circuit: CliffordCircuit) -> pr.LaqccProgram:
    if circuit.shape != "ladder":
        raise ValueError("expected a ladder circuit")
    return _flatten(circuit)


def flatten_grid(circuit: CliffordCircuit) -> pr.LaqccProgram:
    if circuit.shape != "grid":
        raise ValueError("expected a grid circuit")
    return _flatten(circuit)


# --------------------------------------------------------------------------
# GHZ on a line
# --------------------------------------------------------------------------


@pr.register_classical("ghz_parity_fix")
def ghz_parity_layer(n: int) -> pr.ClassicalLayer:
    """Prefix-parity of the line measurement bits: flag ``flip{j}``
    tells carrier j whether to apply the X fix-up."""

    def prefix_parity(outcomes):
        raw = outcomes["parity"]
        bits = [(raw >> (n - 2 - i)) & 1 for i in range(n - 1)]
        out = {}
        acc = 0
        for j in range(1, n):
            acc ^= bits[j - 1]
            out[f"flip{j}"] = acc
        return out

    return pr.ClassicalLayer(
        "parity_fix",
        prefix_parity,
        reads=("parity",),
        spec={"function_name": "ghz_parity_fix", "params": {"n": n}},
    )


def ghz(n: int) -> pr.LaqccProgram:
    """GHZ state on the even qubits of a 2n-1 line, one round."""
    if n < 2:
        raise ValueError("need n >= 2")
    num = 2 * n - 1
    evens = tuple(range(0, num, 2))
    odds = tuple(range(1, num, 2))
    h = pr.MatrixGate("H", HM)
    cnot = pr.MatrixGate("CNOT", CNOTM)
    layers: List[object] = [
        pr.QuantumLayer(tuple(pr.GateApp(h, (q,)) for q in evens)),
        pr.QuantumLayer(
            tuple(pr.GateApp(cnot, (2 * i, 2 * i + 1)) for i in range(n - 1))
        ),
        pr.QuantumLayer(
            tuple(
                pr.GateApp(cnot, (2 * i + 2, 2 * i + 1))
                for i in range(n - 1)
            )
        ),
        pr.MeasureLayer(odds, "parity"),
    ]

    layers.append(ghz_parity_layer(n))
    x = pr.MatrixGate("X", XM)
    layers.append(
        pr.QuantumLayer(
            tuple(
                pr.GateApp(x, (2 * j,), ("parity_fix", f"flip{j}"))
                for j in range(1, n)
            )
        )
    )
    program = pr.LaqccProgram(
        num,
        registers={
            "ghz": pr.Register(evens, "system"),
            "line_ancilla": pr.Register(odds, "ancilla"),
        },
        layers=layers,
    )
    program.validate()
    return program
