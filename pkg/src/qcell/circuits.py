"""Gate-level circuit representation with exact evaluation.

Conventions (normative for the whole package):
  Qubit 1 is the leftmost tensor factor and the most significant bit, so
  the basis index of |b1 ... bn> is sum_k b_k 2^(n-k). Gates are listed
  in temporal order: the first gate in the list is applied to the state
  first, which makes it the rightmost factor of the circuit's matrix.

Text format, one item per line:
  qubits N
  sq <wire> <theta1> <theta2> <theta3> [<theta0>]   # theta0 defaults to 0
  cnot <control> <target>
  '#' starts a comment; angles are radians in decimal.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DimensionError,
    SingleQubitParams,
    kron,
    zyz_compose,
)


@dataclass(frozen=True)
class SingleGate:
    wire: int  # 1-based
    params: SingleQubitParams


@dataclass(frozen=True)
class CnotGate:
    control: int  # 1-based
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValueError("cnot control and target must differ")


Gate = SingleGate | CnotGate


@dataclass
class Circuit:
    n: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("circuit needs at least one qubit")
        for g in self.gates:
            _check_gate(self.n, g)

    def add(self, gate: Gate) -> None:
        _check_gate(self.n, gate)
        self.gates.append(gate)


def _check_gate(n: int, g: Gate) -> None:
    if isinstance(g, SingleGate):
        if not 1 <= g.wire <= n:
            raise DimensionError(f"wire {g.wire} outside 1..{n}")
    else:
        if not (1 <= g.control <= n and 1 <= g.target <= n):
            raise DimensionError(f"cnot ({g.control},{g.target}) outside 1..{n}")


@dataclass
class StateVector:
    n: int
    amps: np.ndarray

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=complex).reshape(-1)
        if self.amps.shape[0] != 2**self.n:
            raise DimensionError(
                f"state for {self.n} qubits needs {2**self.n} amplitudes"
            )

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


def basis_state(n: int, bits: str | int) -> StateVector:
    """|b1 ... bn> with qubit 1 as the most significant bit."""
    if isinstance(bits, str):
        if len(bits) != n or any(c not in "01" for c in bits):
            raise ValueError(f"expected {n} bits, got {bits!r}")
        index = int(bits, 2)
    else:
        index = int(bits)
        if not 0 <= index < 2**n:
            raise ValueError(f"basis index {index} outside 0..{2**n - 1}")
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def bitstring(n: int, index: int) -> str:
    return format(index, f"0{n}b")


def embed_single(n: int, wire: int, u: np.ndarray) -> np.ndarray:
    """I x ... x u x ... x I with u at tensor position `wire`."""
    if not 1 <= wire <= n:
        raise DimensionError(f"wire {wire} outside 1..{n}")
    out = np.eye(1, dtype=complex)
    for k in range(1, n + 1):
        out = kron(out, u if k == wire else np.eye(2))
    return out


def cnot_matrix(n: int, control: int, target: int) -> np.ndarray:
    """Permutation flipping the target bit where the control bit is 1."""
    if control == target or not (1 <= control <= n and 1 <= target <= n):
        raise DimensionError(f"bad cnot indices ({control},{target}) for n={n}")
    dim = 2**n
    cbit = n - control
    tbit = n - target
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        row = col ^ (1 << tbit) if (col >> cbit) & 1 else col
        out[row, col] = 1.0
    return out


def gate_matrix(n: int, g: Gate) -> np.ndarray:
    if isinstance(g, SingleGate):
        return embed_single(n, g.wire, zyz_compose(g.params))
    return cnot_matrix(n, g.control, g.target)


def circuit_to_unitary(c: Circuit) -> np.ndarray:
    """Ordered product of the gate matrices; later gates multiply on the left."""
    out = np.eye(2**c.n, dtype=complex)
    for g in c.gates:
        out = gate_matrix(c.n, g) @ out
    return out


def _apply_single(amps: np.ndarray, n: int, wire: int, u: np.ndarray) -> np.ndarray:
    axis = wire - 1
    t = amps.reshape((2,) * n)
    t = np.tensordot(u, t, axes=([1], [axis]))
    return np.moveaxis(t, 0, axis).reshape(-1)


def _apply_cnot(amps: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    t = amps.reshape((2,) * n).copy()
    sel: list = [slice(None)] * n
    sel[control - 1] = 1
    block = t[tuple(sel)]
    t[tuple(sel)] = np.flip(block, axis=target - 1 - (1 if target > control else 0))
    return t.reshape(-1)


def apply_to_state(c: Circuit, s: StateVector) -> StateVector:
    """Gate-by-gate application; never materializes the full matrix."""
    if s.n != c.n:
        raise DimensionError(f"state has {s.n} qubits, circuit {c.n}")
    amps = s.amps.copy()
    for g in c.gates:
        if isinstance(g, SingleGate):
            amps = _apply_single(amps, c.n, g.wire, zyz_compose(g.params))
        else:
            amps = _apply_cnot(amps, c.n, g.control, g.target)
    return StateVector(c.n, amps)


def format_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.n}"]
    for g in c.gates:
        if isinstance(g, SingleGate):
            p = g.params
            lines.append(
                f"sq {g.wire} {float(p.theta1)!r} {float(p.theta2)!r} "
                f"{float(p.theta3)!r} {float(p.theta0)!r}"
            )
        else:
            lines.append(f"cnot {g.control} {g.target}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    n = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "qubits":
                if n is not None:
                    raise ValueError("duplicate qubits header")
                n = int(parts[1])
            elif kind == "sq":
                if n is None:
                    raise ValueError("sq before qubits header")
                if len(parts) not in (5, 6):
                    raise ValueError("sq needs wire and 3 or 4 angles")
                wire = int(parts[1])
                t1, t2, t3 = (float(x) for x in parts[2:5])
                t0 = float(parts[5]) if len(parts) == 6 else 0.0
                gates.append(SingleGate(wire, SingleQubitParams(t0, t1, t2, t3)))
            elif kind == "cnot":
                if n is None:
                    raise ValueError("cnot before qubits header")
                if len(parts) != 3:
                    raise ValueError("cnot needs control and target")
                gates.append(CnotGate(int(parts[1]), int(parts[2])))
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    if n is None:
        raise ValueError("missing qubits header")
    return Circuit(n, gates)
