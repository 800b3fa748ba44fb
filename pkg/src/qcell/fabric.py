"""Programmable cell fabric: parameterized single-qubit slots and
enable-switchable CNOT slots, with a greedy circuit packer.

Canonical cell layout on n wires, in temporal order:

    L0, G1, L1, G2, L2, ..., Gn, Ln

where layer Lk holds one three-angle single-qubit slot per wire (no
per-slot phase; accumulated phase lives on the program) and gap Gg holds
one enable-switchable CNOT slot per ordered pair (control g, target j)
with targets ascending. A cell therefore has n(n+1) single-qubit slots,
n(n-1) CNOT slots and 3n(n+1) + n(n-1) free parameters. Disabled CNOT
slots act as the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import (
    Circuit,
    CnotGate,
    SingleGate,
    cnot_matrix,
    embed_single,
)
from .linalg import (
    DimensionError,
    HADAMARD,
    SingleQubitParams,
    phase_invariant_error,
    rz,
    zyz_compose,
    zyz_decompose,
)

_TWO_PI = 2.0 * math.pi


def cnot_slot_order(n: int) -> list[tuple[int, int]]:
    """Canonical (control, target) slot order: by gap, targets ascending."""
    return [(g, j) for g in range(1, n + 1) for j in range(1, n + 1) if j != g]


def single_slot_count(n: int) -> int:
    return n * (n + 1)


def cnot_slot_count(n: int) -> int:
    return n * (n - 1)


def parameter_count(n: int) -> int:
    return 3 * n * (n + 1) + n * (n - 1)


@dataclass
class Cell:
    n: int
    layers: np.ndarray  # (n+1, n, 3) angles (theta1, theta2, theta3)
    cnots: dict[tuple[int, int], bool]

    def slot_params(self, layer: int, wire: int) -> SingleQubitParams:
        t1, t2, t3 = self.layers[layer, wire - 1]
        return SingleQubitParams(0.0, float(t1), float(t2), float(t3))

    def set_slot(self, layer: int, wire: int, t1: float, t2: float, t3: float) -> None:
        self.layers[layer, wire - 1] = (t1, t2, t3)

    def copy(self) -> "Cell":
        return Cell(self.n, self.layers.copy(), dict(self.cnots))


def new_cell(n: int) -> Cell:
    """All single-qubit slots identity, all CNOT slots disabled."""
    if n < 1:
        raise DimensionError("cell needs at least one wire")
    layers = np.zeros((n + 1, n, 3))
    cnots = {slot: False for slot in cnot_slot_order(n)}
    return Cell(n, layers, cnots)


def cell_to_unitary(c: Cell) -> np.ndarray:
    """Evaluate layer L0, then for each gap its enabled CNOTs followed by
    the next layer, in temporal order."""
    dim = 2**c.n
    out = _layer_matrix(c, 0)
    for g in range(1, c.n + 1):
        for j in range(1, c.n + 1):
            if j != g and c.cnots[(g, j)]:
                out = cnot_matrix(c.n, g, j) @ out
        out = _layer_matrix(c, g) @ out
    assert out.shape == (dim, dim)
    return out


def _layer_matrix(c: Cell, layer: int) -> np.ndarray:
    out = np.eye(2**c.n, dtype=complex)
    for wire in range(1, c.n + 1):
        t1, t2, t3 = c.layers[layer, wire - 1]
        if t1 == 0.0 and t2 == 0.0 and t3 == 0.0:
            continue
        u = zyz_compose(SingleQubitParams(0.0, t1, t2, t3))
        out = embed_single(c.n, wire, u) @ out
    return out


@dataclass
class CellProgram:
    n: int
    global_phase: float = 0.0
    cells: list[Cell] = field(default_factory=list)

    def copy(self) -> "CellProgram":
        return CellProgram(self.n, self.global_phase, [c.copy() for c in self.cells])


def program_to_unitary(p: CellProgram) -> np.ndarray:
    out = np.eye(2**p.n, dtype=complex)
    for c in p.cells:
        if c.n != p.n:
            raise DimensionError("cell width does not match program")
        out = cell_to_unitary(c) @ out
    return np.exp(1j * p.global_phase) * out


def flatten_program(p: CellProgram) -> Circuit:
    """Expand a program back to a plain gate list (global phase dropped)."""
    gates: list = []
    for c in p.cells:
        for wire in range(1, p.n + 1):
            if np.any(c.layers[0, wire - 1] != 0.0):
                gates.append(SingleGate(wire, c.slot_params(0, wire)))
        for g in range(1, p.n + 1):
            for j in range(1, p.n + 1):
                if j != g and c.cnots[(g, j)]:
                    gates.append(CnotGate(g, j))
            for wire in range(1, p.n + 1):
                if np.any(c.layers[g, wire - 1] != 0.0):
                    gates.append(SingleGate(wire, c.slot_params(g, wire)))
    return Circuit(p.n, gates)


class _Packer:
    """Greedy left-to-right packer.

    Per-wire frontiers point at the earliest layer slot that can still
    absorb a single-qubit gate. A CNOT consumes the matching slot in the
    earliest gap lying at or after both frontiers, opening a new cell only
    when none remains, so the packer never emits more cells than gates.
    """

    def __init__(self, n: int):
        self.n = n
        self.cells: list[Cell] = []
        self.phase = 0.0
        self.frontier = {w: (0, 0) for w in range(1, n + 1)}  # wire -> (cell, layer)

    def _ensure(self, k: int) -> None:
        while len(self.cells) <= k:
            self.cells.append(new_cell(self.n))

    def add_single(self, wire: int, params: SingleQubitParams) -> None:
        ci, li = self.frontier[wire]
        self._ensure(ci)
        cell = self.cells[ci]
        fused = zyz_compose(params) @ zyz_compose(cell.slot_params(li, wire))
        p = zyz_decompose(fused)
        cell.set_slot(li, wire, p.theta1, p.theta2, p.theta3)
        self.phase = math.fmod(self.phase + p.theta0, _TWO_PI)

    def add_cnot(self, control: int, target: int) -> None:
        start = 0
        for w in (control, target):
            ci, li = self.frontier[w]
            start = max(start, ci if li < control else ci + 1)
        k = start
        while True:
            self._ensure(k)
            if not self.cells[k].cnots[(control, target)]:
                break
            k += 1
        self.cells[k].cnots[(control, target)] = True
        self.frontier[control] = (k, control)
        self.frontier[target] = (k, control)

    def finish(self) -> CellProgram:
        return CellProgram(self.n, self.phase, self.cells)


def compile_circuit(c: Circuit) -> CellProgram:
    """Pack a circuit onto cells; the result reproduces the circuit's
    unitary exactly, with single-gate phases accumulated on the program."""
    packer = _Packer(c.n)
    for g in c.gates:
        if isinstance(g, SingleGate):
            packer.add_single(g.wire, g.params)
        else:
            packer.add_cnot(g.control, g.target)
    return packer.finish()


def compile_unitary2q(u: np.ndarray) -> CellProgram:
    """Decompose a two-qubit unitary and pack its three-CNOT circuit;
    always yields exactly two cells."""
    from .decompose import kak_decompose, vidal_dawson_circuit

    d, _ = kak_decompose(np.asarray(u, dtype=complex))
    return compile_circuit(vidal_dawson_circuit(d))


# Two-cell doubly-controlled-NOT: a diagonal phase-gadget core conjugated
# by H on the target wire. The enabled CNOT slots route wire parities so
# that every parity term of the doubly-controlled phase polynomial appears
# on some wire segment; the slot angles below apply +pi/4 to each single
# parity and the triple parity and -pi/4 to each pair parity. Found by
# exhaustive search over the 4096 enable patterns of two cells; verified
# against the exact 8x8 matrix.
_TOFFOLI_ENABLES = [
    (0, (1, 2)),
    (0, (2, 1)),
    (0, (2, 3)),
    (0, (3, 1)),
    (1, (1, 2)),
    (1, (1, 3)),
    (1, (2, 3)),
    (1, (3, 1)),
    (1, (3, 2)),
]
# (cell, layer, wire) -> phase coefficient of the hosted parity term
_TOFFOLI_PHASES = [
    (0, 0, 1, math.pi / 4),   # c1
    (0, 0, 2, math.pi / 4),   # c2
    (0, 0, 3, math.pi / 4),   # c3 (slot also carries the opening H)
    (0, 1, 2, -math.pi / 4),  # c1+c2
    (0, 2, 3, math.pi / 4),   # c1+c2+c3
    (0, 3, 1, -math.pi / 4),  # c1+c3
    (1, 1, 2, -math.pi / 4),  # c2+c3
]


def toffoli_matrix(level: int) -> np.ndarray:
    """8x8 doubly-controlled NOT; level 1 fires on |11>, level 0 on |00>."""
    out = np.eye(8, dtype=complex)
    if level == 1:
        out[6, 6] = out[7, 7] = 0.0
        out[6, 7] = out[7, 6] = 1.0
    elif level == 0:
        out[0, 0] = out[1, 1] = 0.0
        out[0, 1] = out[1, 0] = 1.0
    else:
        raise ValueError("level must be 0 or 1")
    return out


def _set_slot_matrix(cell: Cell, layer: int, wire: int, m: np.ndarray) -> float:
    """Install a matrix into a slot; returns the phase moved off the slot."""
    p = zyz_decompose(m)
    cell.set_slot(layer, wire, p.theta1, p.theta2, p.theta3)
    return p.theta0


def toffoli_program(level: int) -> CellProgram:
    """Two-cell program realizing the doubly-controlled NOT exactly.

    The level-0 program differs from level-1 only in the four outermost
    single-qubit slots of the control wires (the ends conjugated by X);
    every CNOT enable flag is identical.
    """
    if level not in (0, 1):
        raise ValueError("level must be 0 or 1")
    prog = CellProgram(3, 0.0, [new_cell(3), new_cell(3)])
    for cell_idx, slot in _TOFFOLI_ENABLES:
        prog.cells[cell_idx].cnots[slot] = True

    phase = 0.0
    for cell_idx, layer, wire, coeff in _TOFFOLI_PHASES:
        m = rz(coeff)
        if (cell_idx, layer, wire) == (0, 0, 3):
            m = m @ HADAMARD  # opening basis change on the target wire
        if level == 0 and (cell_idx, layer, wire) == (0, 0, 1):
            m = m @ _X
        if level == 0 and (cell_idx, layer, wire) == (0, 0, 2):
            m = m @ _X
        phase += _set_slot_matrix(prog.cells[cell_idx], layer, wire, m)
    # closing basis change on the target wire
    phase += _set_slot_matrix(prog.cells[1], 3, 3, HADAMARD)
    if level == 0:
        phase += _set_slot_matrix(prog.cells[1], 3, 1, _X)
        phase += _set_slot_matrix(prog.cells[1], 3, 2, _X)
    prog.global_phase = math.fmod(phase, _TWO_PI)

    # pin the exact global phase against the reference matrix
    built = program_to_unitary(prog)
    target = toffoli_matrix(level)
    overlap = np.trace(built.conj().T @ target) / 8.0
    prog.global_phase = math.fmod(
        prog.global_phase + float(np.angle(overlap)), _TWO_PI
    )
    return prog


_X = np.array([[0, 1], [1, 0]], dtype=complex)


def program_to_json(p: CellProgram) -> dict:
    cells = []
    for c in p.cells:
        layers = [
            [[float(a) for a in c.layers[k, w]] for w in range(p.n)]
            for k in range(p.n + 1)
        ]
        cnots = [
            {"control": g, "target": j, "enabled": bool(c.cnots[(g, j)])}
            for (g, j) in cnot_slot_order(p.n)
        ]
        cells.append({"layers": layers, "cnots": cnots})
    return {
        "version": 1,
        "n": p.n,
        "global_phase": float(p.global_phase),
        "cells": cells,
    }


def program_from_json(obj: dict) -> CellProgram:
    """Parse and validate; CNOT slot entries must be in canonical order."""
    if not isinstance(obj, dict):
        raise ValueError("program JSON must be an object")
    if obj.get("version") != 1:
        raise ValueError(f"unsupported program version {obj.get('version')!r}")
    try:
        n = int(obj["n"])
        phase = float(obj["global_phase"])
        raw_cells = obj["cells"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError("program JSON missing n/global_phase/cells") from exc
    if n < 1:
        raise ValueError("n must be >= 1")
    order = cnot_slot_order(n)
    cells = []
    for ci, rc in enumerate(raw_cells):
        layers = rc.get("layers")
        cnots = rc.get("cnots")
        if layers is None or cnots is None:
            raise ValueError(f"cell {ci}: missing layers or cnots")
        arr = np.asarray(layers, dtype=float)
        if arr.shape != (n + 1, n, 3):
            raise ValueError(
                f"cell {ci}: layers must have shape ({n + 1}, {n}, 3), got {arr.shape}"
            )
        if len(cnots) != len(order):
            raise ValueError(f"cell {ci}: expected {len(order)} cnot slots")
        enables = {}
        for slot, entry in zip(order, cnots):
            got = (int(entry["control"]), int(entry["target"]))
            if got != slot:
                raise ValueError(
                    f"cell {ci}: cnot slots out of canonical order: "
                    f"expected {slot}, got {got}"
                )
            enables[slot] = bool(entry["enabled"])
        cells.append(Cell(n, arr, enables))
    return CellProgram(n, phase, cells)


def program_error(p: CellProgram, target: np.ndarray) -> float:
    return phase_invariant_error(program_to_unitary(p), target)
