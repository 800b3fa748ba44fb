"""Dense complex linear algebra for gate synthesis.

Conventions:
  Matrices are numpy complex128 arrays. Single-qubit rotations follow the
  ZYZ factorization U = e^{i t0} Rz(t1) Ry(t2) Rz(t3) with
  Rz(t) = diag(e^{-it/2}, e^{it/2}) and Ry(t) the real rotation by t/2.
  Pauli strings are written over the alphabet I, X, Y, Z with the first
  letter acting on qubit 1 (the leftmost tensor factor).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

_PAULI_BY_NAME = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


class DimensionError(ValueError):
    """Operands have incompatible or unsupported dimensions."""


class NonUnitaryError(ValueError):
    """A matrix required to be unitary is not, within tolerance."""


class NotFactorableError(ValueError):
    """A matrix is not a tensor product of two unitaries within tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class NonCommutingTermsError(ValueError):
    """Two Pauli strings in an exponential do not commute."""

    def __init__(self, first: str, second: str):
        super().__init__(f"pauli strings do not commute: {first!r}, {second!r}")
        self.pair = (first, second)


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; dimensions multiply."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def is_unitary(m: np.ndarray, tol: float = 1e-12) -> bool:
    """True iff the max-abs entry of m†m - I is at most tol."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    d = m.shape[0]
    return float(np.max(np.abs(dagger(m) @ m - np.eye(d)))) <= tol


def require_unitary(m: np.ndarray, tol: float, what: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if not is_unitary(m, tol):
        raise NonUnitaryError(f"{what} is not unitary within {tol}")
    return m


def phase_invariant_error(u: np.ndarray, v: np.ndarray) -> float:
    """Distance between unitaries that ignores a global phase.

    Equals sqrt(max(0, 1 - |tr(u†v)|^2 / d^2)); zero exactly when
    u = e^{i phi} v for some real phi. Evaluated through the
    phase-aligned Frobenius distance 2d - 2|tr| so that near-zero values
    are not lost to cancellation: 1 - |tr|/d computed directly cannot
    resolve below the square root of machine epsilon.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"shape mismatch: {u.shape} vs {v.shape}")
    d = u.shape[0]
    t = complex(np.trace(dagger(u) @ v))
    mu = np.conj(t) / abs(t) if abs(t) > 1e-300 else 1.0
    aligned = float(np.sum(np.abs(u - mu * v) ** 2))  # = 2d - 2|t|
    q = min(max(aligned / (2.0 * d), 0.0), 1.0)  # = 1 - |t|/d
    return math.sqrt(max(0.0, q * (2.0 - q)))


def haar_random_unitary(dim: int, seed: int) -> np.ndarray:
    """Haar-distributed unitary, deterministic for a fixed seed.

    Complex-normal matrix, QR orthonormalization, then each column is
    scaled by the phase of the corresponding diagonal entry of R so the
    triangular factor has a positive diagonal.
    """
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return q


def pauli_string_matrix(s: str) -> np.ndarray:
    """Dense matrix of a Pauli string such as "XY" or "IZZ"."""
    if not s:
        raise ValueError("pauli string must be nonempty")
    m = _PAULI_BY_NAME.get(s[0])
    if m is None:
        raise ValueError(f"invalid pauli letter {s[0]!r}")
    for ch in s[1:]:
        nxt = _PAULI_BY_NAME.get(ch)
        if nxt is None:
            raise ValueError(f"invalid pauli letter {ch!r}")
        m = np.kron(m, nxt)
    return m


def pauli_strings_commute(a: str, b: str) -> bool:
    """Two Pauli strings commute iff they differ on an even number of
    positions where both are non-identity."""
    clashes = sum(1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y)
    return clashes % 2 == 0


def pauli_string_exp(terms: list[tuple[float, str]], n: int | None = None) -> np.ndarray:
    """exp(i * sum_j coeff_j P_j) for pairwise-commuting Pauli strings.

    Each factor is evaluated in closed form as cos(c) I + i sin(c) P,
    which is exact because every Pauli string squares to the identity.
    An empty term list yields the identity (on n qubits, default 1).
    """
    if not terms:
        return np.eye(2 ** (n or 1), dtype=complex)
    width = len(terms[0][1])
    if n is not None and n != width:
        raise DimensionError(f"strings act on {width} qubits, expected {n}")
    for _, s in terms:
        if len(s) != width:
            raise DimensionError("all pauli strings must have the same length")
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            if not pauli_strings_commute(terms[i][1], terms[j][1]):
                raise NonCommutingTermsError(terms[i][1], terms[j][1])
    dim = 2**width
    out = np.eye(dim, dtype=complex)
    for coeff, s in terms:
        p = pauli_string_matrix(s)
        out = (math.cos(coeff) * np.eye(dim) + 1j * math.sin(coeff) * p) @ out
    return out


@dataclass(frozen=True)
class SingleQubitParams:
    """Angles (t0, t1, t2, t3) of U = e^{i t0} Rz(t1) Ry(t2) Rz(t3).

    Canonical form: t2 in [0, pi]; t0, t1, t3 in [0, 2*pi); and t3 = 0
    whenever t2 is 0 or pi (only one z-angle is then determined).
    """

    theta0: float
    theta1: float
    theta2: float
    theta3: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.theta0, self.theta1, self.theta2, self.theta3)


IDENTITY_PARAMS = SingleQubitParams(0.0, 0.0, 0.0, 0.0)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def zyz_compose(p: SingleQubitParams) -> np.ndarray:
    """Multiply out the ZYZ factors, global phase included."""
    return np.exp(1j * p.theta0) * (rz(p.theta1) @ ry(p.theta2) @ rz(p.theta3))


_TWO_PI = 2 * math.pi


def _mod_2pi(x: float) -> float:
    y = math.fmod(x, _TWO_PI)
    if y < 0:
        y += _TWO_PI
    if y >= _TWO_PI:  # guards fmod rounding at the boundary
        y -= _TWO_PI
    return y


def zyz_decompose(u: np.ndarray, tol: float = 1e-10) -> SingleQubitParams:
    """Canonical ZYZ angles of a 2x2 unitary.

    The y-angle comes from the moduli of the first column, the z-angles
    from phase-invariant entry ratios, and the global phase from the
    trace against the reconstructed rotation, so the round trip is exact
    to machine precision.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DimensionError(f"expected 2x2, got {u.shape}")
    require_unitary(u, tol, "input")

    a, b = abs(u[0, 0]), abs(u[1, 0])
    theta2 = 2.0 * math.atan2(b, a)
    deg = 1e-12
    if b <= deg:
        theta1 = np.angle(u[1, 1]) - np.angle(u[0, 0])
        theta3 = 0.0
        theta2 = 0.0
    elif a <= deg:
        theta1 = np.angle(u[1, 0]) - np.angle(-u[0, 1])
        theta3 = 0.0
        theta2 = math.pi
    else:
        # Cross-entry phase ratios give each z-angle directly mod 2pi, with
        # no half-angle branch to resolve: u10/u00 carries theta1 and
        # u11/u10 carries theta3, independent of the global phase.
        theta1 = np.angle(u[1, 0]) - np.angle(u[0, 0])
        theta3 = np.angle(u[1, 1]) - np.angle(u[1, 0])
    theta1 = _mod_2pi(theta1)
    theta3 = _mod_2pi(theta3)
    theta2 = min(max(theta2, 0.0), math.pi)

    w = rz(theta1) @ ry(theta2) @ rz(theta3)
    phase = np.trace(dagger(w) @ u) / 2.0
    theta0 = _mod_2pi(float(np.angle(phase)))
    return SingleQubitParams(theta0, theta1, theta2, theta3)


def _polar_unitary(m: np.ndarray) -> np.ndarray:
    w, _, vh = np.linalg.svd(m)
    return w @ vh


def nearest_kron_factor(u: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Split a 4x4 unitary that is a tensor product into its 2x2 factors.

    Works by rearranging u into the block-vectorized form whose rank-one
    structure encodes the product, taking the dominant singular triple,
    and projecting both factors back to unitaries. The phase split is
    canonical: the largest-magnitude entry of the first factor is made
    real nonnegative and the remaining phase lives in the second factor.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise DimensionError(f"expected 4x4, got {u.shape}")
    r = np.empty((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    r[2 * i + j, 2 * k + l] = u[2 * i + k, 2 * j + l]
    w, sing, vh = np.linalg.svd(r)
    a = _polar_unitary((w[:, 0] * math.sqrt(sing[0])).reshape(2, 2))
    b = _polar_unitary((vh[0, :] * math.sqrt(sing[0])).reshape(2, 2))
    overlap = np.trace(dagger(np.kron(a, b)) @ u) / 4.0
    b = b * (overlap / abs(overlap))
    # first entry of maximal magnitude, with magnitudes rounded so the
    # guaranteed |a00| = |a11| ties of a unitary break deterministically
    idx = int(np.argmax(np.round(np.abs(a), 12)))
    mu = a.flat[idx]
    mu = mu / abs(mu)
    a = a * np.conj(mu)
    b = b * mu
    residual = float(np.max(np.abs(np.kron(a, b) - u)))
    if residual > tol:
        raise NotFactorableError(
            f"matrix is not a tensor product within {tol} (residual {residual:.3e})",
            residual,
        )
    return a, b


def unitary_to_json(u: np.ndarray) -> dict:
    """Unitary JSON: {"dim": d, "entries": [[[re, im], ...] per row]}."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"expected square matrix, got {u.shape}")
    entries = [[[float(z.real), float(z.imag)] for z in row] for row in u]
    return {"dim": int(u.shape[0]), "entries": entries}


def unitary_from_json(obj: dict) -> np.ndarray:
    try:
        dim = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError("unitary JSON must have 'dim' and 'entries'") from exc
    if dim < 1 or len(entries) != dim:
        raise ValueError(f"expected {dim} rows, got {len(entries)}")
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(entries):
        if len(row) != dim:
            raise ValueError(f"row {i} has {len(row)} entries, expected {dim}")
        for j, pair in enumerate(row):
            if len(pair) != 2:
                raise ValueError("each entry must be a [re, im] pair")
            out[i, j] = float(pair[0]) + 1j * float(pair[1])
    if not np.all(np.isfinite(out.view(float))):
        raise ValueError("unitary JSON contains non-finite values")
    return out
