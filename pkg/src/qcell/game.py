"""Quantum prisoner's dilemma: entangler, strategies, payoffs, and
execution on the cell fabric.

Moves are single-qubit gates applied to |00> = |CC> between the entangler
J(gamma) and its inverse; outcome probabilities weight the classical
payoff table. Alice is qubit 1. The default entangler convention is
J = exp(-i (gamma/2) X x Y), whose action on |CC> has real coefficients
cos(gamma/2)|CC> + sin(gamma/2)|DD>; the alternative convention
exp(i (gamma/2) X x X) produces the same moduli with an i on the |DD>
branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, CnotGate, SingleGate, StateVector
from .fabric import CellProgram, compile_circuit, program_to_unitary
from .linalg import (
    HADAMARD,
    SingleQubitParams,
    dagger,
    kron,
    pauli_string_exp,
    rx,
    rz,
    zyz_compose,
    zyz_decompose,
)

MOVES = ("cc", "cd", "dc", "dd")


@dataclass(frozen=True)
class PayoffMatrix:
    cc: tuple[float, float] = (3.0, 3.0)
    cd: tuple[float, float] = (0.0, 5.0)
    dc: tuple[float, float] = (5.0, 0.0)
    dd: tuple[float, float] = (1.0, 1.0)

    def rows(self) -> list[tuple[float, float]]:
        return [self.cc, self.cd, self.dc, self.dd]

    def swapped(self) -> "PayoffMatrix":
        """Payoffs with the players relabeled."""
        return PayoffMatrix(
            cc=(self.cc[1], self.cc[0]),
            cd=(self.dc[1], self.dc[0]),
            dc=(self.cd[1], self.cd[0]),
            dd=(self.dd[1], self.dd[0]),
        )


def payoffs_from_json(obj: dict) -> PayoffMatrix:
    """Override format: {"cc":[3,3],"cd":[0,5],"dc":[5,0],"dd":[1,1]}."""
    vals = {}
    for key in MOVES:
        if key not in obj:
            raise ValueError(f"payoff table missing {key!r}")
        pair = obj[key]
        if len(pair) != 2:
            raise ValueError(f"payoff entry {key!r} must be a [alice, bob] pair")
        vals[key] = (float(pair[0]), float(pair[1]))
    return PayoffMatrix(**vals)


def payoffs_to_json(p: PayoffMatrix) -> dict:
    return {k: list(v) for k, v in zip(MOVES, p.rows())}


@dataclass(frozen=True)
class GameConfig:
    gamma: float
    payoffs: PayoffMatrix = PayoffMatrix()
    j_convention: str = "paper"

    def __post_init__(self):
        if not 0.0 <= self.gamma <= math.pi:
            raise ValueError("gamma must lie in [0, pi]")
        if self.j_convention not in ("paper", "alternative"):
            raise ValueError(f"unknown convention {self.j_convention!r}")


@dataclass
class MoveRecord:
    u_a: SingleQubitParams
    u_b: SingleQubitParams
    outcome_probs: tuple[float, float, float, float]
    payoff_a: float
    payoff_b: float


@dataclass
class GameSession:
    id: str
    config: GameConfig
    history: list[MoveRecord] = field(default_factory=list)


@dataclass
class PlayResult:
    final_state: StateVector
    payoff_a: float
    payoff_b: float
    outcome_probs: tuple[float, float, float, float]


def j_gate(gamma: float, convention: str = "paper") -> np.ndarray:
    if convention == "paper":
        return pauli_string_exp([(-gamma / 2.0, "XY")])
    if convention == "alternative":
        return pauli_string_exp([(gamma / 2.0, "XX")])
    raise ValueError(f"unknown convention {convention!r}")


def _payoff(config: GameConfig, probs: np.ndarray) -> tuple[float, float]:
    rows = config.payoffs.rows()
    a = sum(p * r[0] for p, r in zip(probs, rows))
    b = sum(p * r[1] for p, r in zip(probs, rows))
    return float(a), float(b)


def play(
    config: GameConfig, u_a: SingleQubitParams, u_b: SingleQubitParams
) -> PlayResult:
    """Evaluate J† (U_A x U_B) J |CC> and score the outcome distribution."""
    j = j_gate(config.gamma, config.j_convention)
    moves = kron(zyz_compose(u_a), zyz_compose(u_b))
    state = dagger(j) @ moves @ j @ np.array([1, 0, 0, 0], dtype=complex)
    probs = np.abs(state) ** 2
    pa, pb = _payoff(config, probs)
    return PlayResult(StateVector(2, state), pa, pb, tuple(float(x) for x in probs))


# The entangler circuit uses one CNOT of each direction so that the round
# trip J, moves, J-inverse packs into exactly two cells: the identity
#
#   exp(-i (g/2) X x Y) = (I x A H) C21 (H x H Rz(g)) C12 (H x A†)
#
# with A = exp(i pi/4 X), and the X x X convention likewise with the
# y-axis conjugation replaced by a Hadamard.
_A_GATE = rx(-math.pi / 2)  # maps Z to Y under conjugation


def _entangler_gates(gamma: float, convention: str) -> list:
    h = zyz_decompose(HADAMARD)
    if convention == "paper":
        pre2 = zyz_decompose(dagger(_A_GATE))
        mid2 = zyz_decompose(HADAMARD @ rz(gamma))
        post2 = zyz_decompose(_A_GATE @ HADAMARD)
    else:
        pre2 = h
        mid2 = zyz_decompose(HADAMARD @ rz(-gamma))
        post2 = zyz_decompose(np.eye(2, dtype=complex))
    return [
        SingleGate(1, h),
        SingleGate(2, pre2),
        CnotGate(1, 2),
        SingleGate(1, h),
        SingleGate(2, mid2),
        CnotGate(2, 1),
        SingleGate(2, post2),
    ]


def game_circuit(
    config: GameConfig, u_a: SingleQubitParams, u_b: SingleQubitParams
) -> Circuit:
    """Entangler, both strategies, then the mirrored disentangler."""
    gates = list(_entangler_gates(config.gamma, config.j_convention))
    gates.append(SingleGate(1, u_a))
    gates.append(SingleGate(2, u_b))
    gates.extend(_entangler_gates(-config.gamma, config.j_convention))
    return Circuit(2, gates)


def build_game_program(
    config: GameConfig, u_a: SingleQubitParams, u_b: SingleQubitParams
) -> CellProgram:
    return compile_circuit(game_circuit(config, u_a, u_b))


def game_on_fabric(
    config: GameConfig, u_a: SingleQubitParams, u_b: SingleQubitParams
) -> tuple[PlayResult, CellProgram]:
    """Play the round by compiling the game circuit onto cells and
    evaluating the resulting program; always exactly two cells."""
    prog = build_game_program(config, u_a, u_b)
    u = program_to_unitary(prog)
    state = u @ np.array([1, 0, 0, 0], dtype=complex)
    probs = np.abs(state) ** 2
    pa, pb = _payoff(config, probs)
    return (
        PlayResult(StateVector(2, state), pa, pb, tuple(float(x) for x in probs)),
        prog,
    )


def best_response_scan(
    config: GameConfig, opponent: SingleQubitParams, grid_steps: int
) -> tuple[SingleQubitParams, float]:
    """Exhaustive grid over the responder's three angles; the responder is
    Alice. Ties break toward lexicographically smaller angles."""
    if grid_steps < 2:
        raise ValueError("grid_steps must be >= 2")
    t1_grid = np.linspace(0.0, 2 * math.pi, grid_steps, endpoint=False)
    t2_grid = np.linspace(0.0, math.pi, grid_steps)
    t3_grid = np.linspace(0.0, 2 * math.pi, grid_steps, endpoint=False)
    best: tuple[SingleQubitParams, float] | None = None
    for t1 in t1_grid:
        for t2 in t2_grid:
            for t3 in t3_grid:
                cand = SingleQubitParams(0.0, float(t1), float(t2), float(t3))
                result = play(config, cand, opponent)
                if best is None or result.payoff_a > best[1] + 1e-12:
                    best = (cand, result.payoff_a)
    assert best is not None
    return best


IDENTITY_STRATEGY = SingleQubitParams(0.0, 0.0, 0.0, 0.0)
FLIP_STRATEGY = SingleQubitParams(0.0, 0.0, math.pi, 0.0)
