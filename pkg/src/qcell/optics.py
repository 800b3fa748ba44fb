"""Second-quantized simulation of the post-selected optical CNOT.

Modes are (path, polarization) pairs over four paths:

    path 1: control photon in / control out
    path 2: ancilla photon 1 (detector arm, measured in the +/- basis)
    path 3: ancilla photon 2 (detector arm, measured in the H/V basis)
    path 4: target photon in / target out

The control photon and ancilla 1 interfere on a PBS in the H/V basis;
the target photon and ancilla 2 interfere on a PBS in the diagonal basis.
A coincidence (exactly one photon in each detector arm) heralds success;
with the entangled ancilla pair the post-selected map is a CNOT after the
feed-forward corrections, and with the product ancilla it is the identity.

States are sparse maps from occupation vectors (8 modes, at most 4
photons) to amplitudes in the normalized number basis. Polarization H is
logical 0, V is logical 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import StateVector

N_PATHS = 4
N_MODES = 2 * N_PATHS
_SQRT2 = math.sqrt(2.0)

PLUS = "plus"
MINUS = "minus"
H = "H"
V = "V"


class OpticsError(ValueError):
    pass


def _mode(path: int, pol: int) -> int:
    if not 1 <= path <= N_PATHS:
        raise OpticsError(f"path {path} outside 1..{N_PATHS}")
    return 2 * (path - 1) + pol


@dataclass
class ModeState:
    """Sparse second-quantized state: occupation tuple -> amplitude."""

    terms: dict[tuple[int, ...], complex]

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    def cleaned(self, eps: float = 1e-15) -> "ModeState":
        return ModeState({k: v for k, v in self.terms.items() if abs(v) > eps})


@dataclass
class PhotonQubit:
    """Single-photon polarization qubit with amplitudes on H and V."""

    a_h: complex
    a_v: complex

    def validate(self, tol: float = 1e-10) -> "PhotonQubit":
        norm = abs(self.a_h) ** 2 + abs(self.a_v) ** 2
        if abs(norm - 1.0) > tol:
            raise OpticsError(f"photon amplitudes not normalized (norm^2={norm})")
        return self


@dataclass
class DetectionOutcome:
    control_side: str  # PLUS (detector 1) or MINUS (detector 2)
    target_side: str  # H (detector 3) or V (detector 4)
    probability: float
    post_state: StateVector  # two qubits (control, target), H=0 / V=1


def _factorials(k: int) -> float:
    return math.gamma(k + 1)


def _to_monomial(occ: tuple[int, ...], amp: complex) -> complex:
    # amplitude in the normalized basis -> coefficient of the raw
    # creation-operator monomial
    scale = 1.0
    for k in occ:
        scale *= _factorials(k)
    return amp / math.sqrt(scale)


def _from_monomial(occ: tuple[int, ...], coeff: complex) -> complex:
    scale = 1.0
    for k in occ:
        scale *= _factorials(k)
    return coeff * math.sqrt(scale)


def apply_mode_map(state: ModeState, transform: np.ndarray) -> ModeState:
    """Apply a linear map on creation operators: a†_m -> sum_k T[k, m] a†_k.

    Expands each occupation monomial and recollects terms, so bosonic
    amplitudes of multiply occupied modes are handled exactly.
    """
    if transform.shape != (N_MODES, N_MODES):
        raise OpticsError("mode transform must be 8x8")
    out: dict[tuple[int, ...], complex] = {}
    for occ, amp in state.terms.items():
        poly: dict[tuple[int, ...], complex] = {(0,) * N_MODES: _to_monomial(occ, amp)}
        for mode, count in enumerate(occ):
            column = transform[:, mode]
            for _ in range(count):
                nxt: dict[tuple[int, ...], complex] = {}
                for mono, coeff in poly.items():
                    for k in range(N_MODES):
                        t = column[k]
                        if t == 0:
                            continue
                        grown = list(mono)
                        grown[k] += 1
                        key = tuple(grown)
                        nxt[key] = nxt.get(key, 0.0) + coeff * t
                poly = nxt
        for mono, coeff in poly.items():
            out[mono] = out.get(mono, 0.0) + _from_monomial(mono, coeff)
    return ModeState(out).cleaned()


def _embed_pair_map(block: np.ndarray, p: int, q: int) -> np.ndarray:
    """Embed a 4x4 map on modes (Hp, Vp, Hq, Vq) into the full mode space."""
    t = np.eye(N_MODES, dtype=complex)
    idx = [_mode(p, 0), _mode(p, 1), _mode(q, 0), _mode(q, 1)]
    for a in range(4):
        for b in range(4):
            t[idx[a], idx[b]] = block[a, b]
    return t


def pbs_transform(basis: str, path_in1: int, path_in2: int) -> np.ndarray:
    """Mode map of a polarizing beam splitter on two paths.

    In its eigenbasis the PBS transmits one polarization (same path) and
    reflects the other (swapped path); the diagonal variant is the H/V map
    conjugated by the 45-degree polarization rotation on both paths.
    """
    if basis == "hv":
        block = np.zeros((4, 4), dtype=complex)
        block[0, 0] = 1.0  # H stays on path 1
        block[2, 2] = 1.0  # H stays on path 2
        block[3, 1] = 1.0  # V of path 1 -> path 2
        block[1, 3] = 1.0  # V of path 2 -> path 1
    elif basis == "diagonal":
        c = np.array([[1, 1], [1, -1]], dtype=complex) / _SQRT2
        basis_change = np.kron(np.eye(2), c)  # per-path H/V <-> +/-!
        perm = np.zeros((4, 4), dtype=complex)
        perm[0, 0] = 1.0  # + stays on path 1
        perm[2, 2] = 1.0  # + stays on path 2
        perm[3, 1] = 1.0  # - of path 1 -> path 2
        perm[1, 3] = 1.0  # - of path 2 -> path 1
        block = basis_change @ perm @ basis_change.conj().T
    else:
        raise OpticsError(f"unknown PBS basis {basis!r}")
    return _embed_pair_map(block, path_in1, path_in2)


def pbs_apply(state: ModeState, basis: str, path_in1: int, path_in2: int) -> ModeState:
    return apply_mode_map(state, pbs_transform(basis, path_in1, path_in2))


def make_ancilla(kind: str) -> ModeState:
    """Two-photon ancilla on paths 2 and 3: entangled (HH+VV)/sqrt(2) or
    the product state (HH+VH)/sqrt(2)."""
    def occ(pol2: int, pol3: int) -> tuple[int, ...]:
        v = [0] * N_MODES
        v[_mode(2, pol2)] += 1
        v[_mode(3, pol3)] += 1
        return tuple(v)

    if kind == "bell":
        return ModeState({occ(0, 0): 1 / _SQRT2, occ(1, 1): 1 / _SQRT2})
    if kind == "product":
        return ModeState({occ(0, 0): 1 / _SQRT2, occ(1, 0): 1 / _SQRT2})
    raise OpticsError(f"unknown ancilla kind {kind!r}")


def _input_state(control: PhotonQubit, target: PhotonQubit, ancilla: str) -> ModeState:
    control.validate()
    target.validate()
    anc = make_ancilla(ancilla)
    terms: dict[tuple[int, ...], complex] = {}
    for (c_pol, c_amp) in ((0, control.a_h), (1, control.a_v)):
        if c_amp == 0:
            continue
        for (t_pol, t_amp) in ((0, target.a_h), (1, target.a_v)):
            if t_amp == 0:
                continue
            for occ, a_amp in anc.terms.items():
                v = list(occ)
                v[_mode(1, c_pol)] += 1
                v[_mode(4, t_pol)] += 1
                key = tuple(v)
                terms[key] = terms.get(key, 0.0) + c_amp * t_amp * a_amp
    return ModeState(terms)


# Detector arm conventions: |+> = (|H>+|V>)/sqrt(2) and |-> = (|V>-|H>)/sqrt(2).
# The sign of the minus mode makes the heralded corrections restore the
# reference output state exactly, not just up to a branch phase.
_PM_BASIS = np.array([[1, 1], [-1, 1]], dtype=complex) / _SQRT2


def _detector_projection(state: ModeState) -> dict[tuple[str, str], np.ndarray]:
    """Amplitude vectors over (control-out pol, target-out pol) for each
    coincidence pattern, reading path 2 in the +/- basis and path 3 in H/V."""
    # express path-2 modes in the +/- basis: substitute a†_H2, a†_V2
    t = np.eye(N_MODES, dtype=complex)
    h2, v2 = _mode(2, 0), _mode(2, 1)
    t[h2, h2] = _PM_BASIS[0, 0]
    t[v2, h2] = _PM_BASIS[1, 0]
    t[h2, v2] = _PM_BASIS[0, 1]
    t[v2, v2] = _PM_BASIS[1, 1]
    rotated = apply_mode_map(state, t)

    out: dict[tuple[str, str], np.ndarray] = {
        (c, d): np.zeros(4, dtype=complex) for c in (PLUS, MINUS) for d in (H, V)
    }
    for occ, amp in rotated.terms.items():
        path2 = (occ[_mode(2, 0)], occ[_mode(2, 1)])  # counts in (+, -)
        path3 = (occ[_mode(3, 0)], occ[_mode(3, 1)])  # counts in (H, V)
        if sum(path2) != 1 or sum(path3) != 1:
            continue
        c1 = occ[_mode(1, 0)] + occ[_mode(1, 1)]
        c4 = occ[_mode(4, 0)] + occ[_mode(4, 1)]
        if c1 != 1 or c4 != 1:
            continue
        control_pol = occ[_mode(1, 1)]  # 1 if the control-out photon is V
        target_pol = occ[_mode(4, 1)]
        key = (PLUS if path2[0] else MINUS, H if path3[0] else V)
        out[key][2 * control_pol + target_pol] += amp
    return out


def simulate_cnot_setup(
    control: PhotonQubit, target: PhotonQubit, ancilla: str = "bell"
) -> tuple[list[DetectionOutcome], float]:
    """Run the interferometer analytically.

    Returns the four coincidence outcomes (normalized post-selected states
    with their exact probabilities) and the failure probability carried by
    every non-coincidence term.
    """
    state = _input_state(control, target, ancilla)
    state = pbs_apply(state, "hv", 1, 2)
    state = pbs_apply(state, "diagonal", 3, 4)
    vectors = _detector_projection(state)

    outcomes = []
    total = 0.0
    for (c_side, t_side), vec in vectors.items():
        prob = float(np.sum(np.abs(vec) ** 2))
        total += prob
        if prob > 0:
            post = StateVector(2, vec / math.sqrt(prob))
        else:
            post = StateVector(2, np.array([1, 0, 0, 0], dtype=complex))
        outcomes.append(DetectionOutcome(c_side, t_side, prob, post))
    failure = max(0.0, 1.0 - total)
    return outcomes, failure


_CORR_CONTROL = np.array([[-1, 0], [0, 1]], dtype=complex)  # X Z X
_CORR_TARGET = np.array([[0, 1], [1, 0]], dtype=complex)  # X


def feed_forward_correct(outcome: DetectionOutcome) -> StateVector:
    """Apply the heralded single-qubit corrections: XZX on the control for
    a '-' detection, X on the target for a 'V' detection."""
    amps = outcome.post_state.amps.reshape(2, 2)
    if outcome.control_side == MINUS:
        amps = _CORR_CONTROL @ amps
    if outcome.target_side == V:
        amps = amps @ _CORR_TARGET.T
    return StateVector(2, amps.reshape(-1))


def corrected_channel(ancilla: str = "bell") -> np.ndarray:
    """Reconstruct the post-selected, corrected map from basis inputs,
    averaged over the four coincidence outcomes and rescaled by the
    success amplitude. Equals the CNOT matrix for the entangled ancilla
    and the identity for the product ancilla."""
    basis = [(1, 0), (0, 1)]
    channel = np.zeros((4, 4), dtype=complex)
    for j in range(4):
        c = PhotonQubit(*[complex(x) for x in basis[j >> 1]])
        t = PhotonQubit(*[complex(x) for x in basis[j & 1]])
        outcomes, _ = simulate_cnot_setup(c, t, ancilla)
        cols = []
        for o in outcomes:
            corrected = feed_forward_correct(o)
            cols.append(corrected.amps * math.sqrt(o.probability) * 4.0)
        channel[:, j] = np.mean(cols, axis=0)
    return channel


def sample_run(
    control: PhotonQubit,
    target: PhotonQubit,
    ancilla: str,
    seed: int,
    shots: int,
) -> dict[str, int]:
    """Multinomial sampling from the analytic outcome distribution."""
    if shots < 1:
        raise OpticsError("shots must be >= 1")
    outcomes, failure = simulate_cnot_setup(control, target, ancilla)
    labels = [f"{o.control_side},{o.target_side}" for o in outcomes]
    probs = np.array([o.probability for o in outcomes] + [failure])
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    tally = {label: int(c) for label, c in zip(labels, counts[:-1])}
    tally["failure"] = int(counts[-1])
    return tally


def parse_photon(text: str) -> PhotonQubit:
    """Parse 'aH,aV' with complex components in Python syntax (re+imj)."""
    parts = text.split(",")
    if len(parts) != 2:
        raise OpticsError("expected two comma-separated amplitudes")
    try:
        a_h, a_v = complex(parts[0]), complex(parts[1])
    except ValueError as exc:
        raise OpticsError(f"bad complex amplitude: {exc}") from exc
    return PhotonQubit(a_h, a_v).validate()
