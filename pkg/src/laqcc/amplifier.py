"""Zero-failure amplitude amplification.

Given an ambient superposition of N basis states containing m good
ones, a phase-matched Grover iterate reaches the good subspace with
probability exactly 1.  The matched phase is taken from the closed form
``phi = theta = 2 arcsin(sin(pi/(4J+2)) / sin(beta))`` and validated (or
refined) numerically on the two-dimensional invariant subspace before a
plan is accepted.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import charges
from .program import Builder, DiagonalGate, Gate, GateApp


@dataclass(frozen=True)
class AmplificationPlan:
    N: int
    m: int
    J: int
    phi: float
    theta: float

    @property
    def beta(self) -> float:
        return math.asin(math.sqrt(self.m / self.N))


def _success_amplitude(N: int, m: int, J: int, phi: float, theta: float) -> float:
    """|good amplitude| after J iterates, on the (good, bad) plane."""
    beta = math.asin(math.sqrt(m / N))
    psi0 = np.array([math.sin(beta), math.cos(beta)], dtype=complex)
    s_chi = np.diag([cmath.exp(1j * phi), 1.0])
    s_0 = np.eye(2, dtype=complex) + (
        cmath.exp(1j * theta) - 1.0
    ) * np.outer(psi0, psi0.conj())
    g = s_0 @ s_chi
    state = psi0.copy()
    for _ in range(J):
        state = g @ state
    return abs(state[0])


def plan(N: int, m: int) -> AmplificationPlan:
    if not 1 <= m <= N:
        raise ValueError("need 1 <= m <= N")
    if m == N:
        return AmplificationPlan(N, m, 0, 0.0, 0.0)
    beta = math.asin(math.sqrt(m / N))
    J = max(1, math.ceil((math.pi / 2 - beta) / (2 * beta)))
    phi = 2 * math.asin(math.sin(math.pi / (4 * J + 2)) / math.sin(beta))
    if 1.0 - _success_amplitude(N, m, J, phi, phi) > 1e-12:
        result = minimize_scalar(
            lambda p: 1.0 - _success_amplitude(N, m, J, p, p),
            bounds=(1e-9, 2 * math.pi - 1e-9),
            method="bounded",
            options={"xatol": 1e-14},
        )
        phi = float(result.x)
    if 1.0 - _success_amplitude(N, m, J, phi, phi) > 1e-9:
        raise ValueError(f"no matched phase found for N={N}, m={m}")
    return AmplificationPlan(N, m, J, phi, phi)


def amplify(
    builder: Builder,
    reflect_qubits: Sequence[int],
    flag: int,
    prep: Callable[[Builder], None],
    unprep: Callable[[Builder], None],
    oracle: Gate,
    oracle_qubits: Sequence[int],
    amp_plan: AmplificationPlan,
) -> None:
    """Append amplification iterations to ``builder``.

    ``prep``/``unprep`` append the (measurement-free) ambient
    preparation and its inverse; ``reflect_qubits`` are all qubits the
    preparation touches (the reflection phases their joint all-zero
    state); ``oracle`` flips ``flag`` exactly on the good set, reading
    ``oracle_qubits``.  After the appended layers the good subspace
    holds all amplitude and the flag is back to |0>.
    """
    reflect_qubits = tuple(reflect_qubits)
    oracle_qubits = tuple(oracle_qubits)
    phi, theta = amp_plan.phi, amp_plan.theta
    mark = DiagonalGate(
        "phase_flag", 1, lambda v: cmath.exp(1j * phi) if v else 1.0
    )
    zero_phase = DiagonalGate(
        "phase_all_zero",
        len(reflect_qubits),
        lambda v: cmath.exp(1j * theta) if v == 0 else 1.0,
        charge=charges.charge("equal", len(reflect_qubits)),
    )
    for _ in range(amp_plan.J):
        builder.gate(oracle, oracle_qubits + (flag,))
        builder.gate(mark, (flag,))
        builder.gate(oracle, oracle_qubits + (flag,))
        unprep(builder)
        builder.gate(zero_phase, reflect_qubits)
        prep(builder)
