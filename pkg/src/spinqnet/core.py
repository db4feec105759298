"""Electron registers as dense state vectors.

Every electron carries two qubits, its spin and its mode (which wire it
travels in). Qubit ``2*e`` is the spin of electron ``e`` and qubit
``2*e + 1`` its mode. Basis index bit ``j`` holds qubit ``j``
(little-endian), spin up and mode 0 are bit value 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import (
    DimensionMismatchError,
    InvalidRegisterError,
    InvalidStateError,
    InvalidTargetError,
    NonUnitaryError,
)

NORM_TOL = 1e-12
MATRIX_TOL = 1e-10
MAX_ELECTRONS = 10


class Dof(enum.Enum):
    SPIN = 0
    MODE = 1

    def __str__(self):
        return "s" if self is Dof.SPIN else "k"


@dataclass(frozen=True, order=True)
class QubitRef:
    electron: int
    dof: Dof

    def __post_init__(self):
        if not isinstance(self.electron, (int, np.integer)) or self.electron < 0:
            raise InvalidTargetError(f"electron index must be a non-negative int, got {self.electron!r}")
        if not isinstance(self.dof, Dof):
            raise InvalidTargetError(f"dof must be a Dof, got {self.dof!r}")

    @property
    def flat(self) -> int:
        return 2 * self.electron + self.dof.value

    @classmethod
    def from_flat(cls, index: int) -> "QubitRef":
        return cls(index // 2, Dof(index % 2))

    def __str__(self):
        return f"{self.dof}{self.electron}"


def spin(electron: int) -> QubitRef:
    return QubitRef(electron, Dof.SPIN)


def mode(electron: int) -> QubitRef:
    return QubitRef(electron, Dof.MODE)


def _as_readonly(arr):
    arr = np.array(arr, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PureState:
    n_electrons: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_electrons < 1:
            raise InvalidRegisterError("a register needs at least one electron")
        amps = _as_readonly(self.amplitudes).reshape(-1)
        if amps.shape[0] != 4 ** self.n_electrons:
            raise DimensionMismatchError(
                f"{self.n_electrons} electrons need {4 ** self.n_electrons} amplitudes, got {amps.shape[0]}"
            )
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL * max(1, amps.shape[0] ** 0.5):
            raise InvalidStateError(f"state is not normalised (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(cls, amplitudes, normalize: bool = False) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        n_qubits = amps.shape[0].bit_length() - 1
        if amps.shape[0] != 1 << n_qubits or n_qubits % 2:
            raise DimensionMismatchError(f"length {amps.shape[0]} is not a power of 4")
        if normalize:
            nrm = np.linalg.norm(amps)
            if nrm == 0:
                raise InvalidStateError("cannot normalise the zero vector")
            amps = amps / nrm
        return cls(n_qubits // 2, amps)

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_electrons

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def fidelity(self, other: "PureState") -> float:
        _check_same_register(self, other)
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.n_electrons == other.n_electrons and np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash((self.n_electrons, self.amplitudes.tobytes()))

    def __str__(self):
        return format_state(self)


def _check_same_register(a, b):
    if a.n_electrons != b.n_electrons:
        raise DimensionMismatchError("states live on registers of different size")


def _check_n_electrons(n_electrons):
    if not isinstance(n_electrons, (int, np.integer)) or n_electrons < 1:
        raise InvalidRegisterError(f"n_electrons must be >= 1, got {n_electrons!r}")
    if n_electrons > MAX_ELECTRONS:
        raise InvalidRegisterError(f"dense registers are capped at {MAX_ELECTRONS} electrons")


def new_register(n_electrons: int) -> PureState:
    """Every electron in spin up, mode 0."""
    _check_n_electrons(n_electrons)
    amps = np.zeros(4 ** n_electrons, dtype=np.complex128)
    amps[0] = 1.0
    return PureState(n_electrons, amps)


def basis_label(index: int, n_electrons: int) -> str:
    """``u0,d1``-style label of a basis index (spin u/d, then mode)."""
    parts = []
    for e in range(n_electrons):
        s = (index >> (2 * e)) & 1
        k = (index >> (2 * e + 1)) & 1
        parts.append(("d" if s else "u") + str(k))
    return ",".join(parts)


def parse_basis_label(label: str, n_electrons: int | None = None) -> int:
    if not label.strip():
        raise InvalidStateError("empty state label")
    parts = [p.strip() for p in label.split(",")]
    if n_electrons is not None and len(parts) != n_electrons:
        raise InvalidStateError(f"state label has {len(parts)} electrons, register has {n_electrons}")
    index = 0
    for e, part in enumerate(parts):
        if len(part) != 2 or part[0] not in "ud" or part[1] not in "01":
            raise InvalidStateError(f"bad electron state {part!r}; expected u0, u1, d0 or d1")
        index |= (part[0] == "d") << (2 * e)
        index |= int(part[1]) << (2 * e + 1)
    return index


def basis_state(n_electrons: int, index: int | str) -> PureState:
    _check_n_electrons(n_electrons)
    if isinstance(index, str):
        index = parse_basis_label(index, n_electrons)
    if not 0 <= index < 4 ** n_electrons:
        raise InvalidStateError(f"basis index {index} out of range")
    amps = np.zeros(4 ** n_electrons, dtype=np.complex128)
    amps[index] = 1.0
    return PureState(n_electrons, amps)


def format_state(state: PureState, tol: float = 1e-12) -> str:
    terms = []
    for i in np.flatnonzero(np.abs(state.amplitudes) > tol):
        a = state.amplitudes[i]
        terms.append(f"({a.real:+.6f}{a.imag:+.6f}j)|{basis_label(int(i), state.n_electrons)}>")
    return " ".join(terms) if terms else "0"


# ---------------------------------------------------------------------------
# unitaries

def is_unitary(u, tol: float = MATRIX_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))) <= tol)


def check_unitary(u, tol: float = MATRIX_TOL) -> np.ndarray:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {u.shape}")
    dim = u.shape[0]
    if dim & (dim - 1):
        raise DimensionMismatchError(f"matrix dimension {dim} is not a power of two")
    if not is_unitary(u, tol):
        raise NonUnitaryError("matrix is not unitary within tolerance")
    return u


def _flat_targets(targets, n_electrons) -> list[int]:
    flats = []
    for t in targets:
        if not isinstance(t, QubitRef):
            raise InvalidTargetError(f"targets must be QubitRef, got {t!r}")
        if t.electron >= n_electrons:
            raise InvalidTargetError(f"{t} is outside a {n_electrons}-electron register")
        flats.append(t.flat)
    if len(set(flats)) != len(flats):
        raise InvalidTargetError(f"duplicate targets {[str(t) for t in targets]}")
    return flats


def _apply_inplace(buf, gate, flats, kernels=None):
    """Apply ``gate`` to the rows of ``buf`` (shape (dim, ncols)) in place."""
    k = kernels or _kernels.active
    if len(flats) == 1:
        k.apply_1q(buf, gate, flats[0])
    else:
        k.apply_2q(buf, gate, flats[0], flats[1])


def apply_gate(state: PureState, gate, targets: Sequence[QubitRef]) -> PureState:
    """Return ``gate`` applied to ``state`` on ``targets``.

    The first target is the least significant bit of the gate's own basis.
    """
    gate = check_unitary(gate)
    m = gate.shape[0].bit_length() - 1
    if m not in (1, 2):
        raise DimensionMismatchError(f"only 1- and 2-qubit gates are supported, got {m} qubits")
    targets = list(targets)
    if len(targets) != m:
        raise InvalidTargetError(f"{m}-qubit gate needs {m} targets, got {len(targets)}")
    flats = _flat_targets(targets, state.n_electrons)
    buf = np.array(state.amplitudes, dtype=np.complex128).reshape(-1, 1)
    _apply_inplace(buf, np.ascontiguousarray(gate), flats)
    return PureState(state.n_electrons, buf[:, 0])


def embed(gate, targets: Sequence[QubitRef], n_electrons: int) -> np.ndarray:
    """Full-register matrix of ``gate`` acting on ``targets``."""
    gate = check_unitary(gate)
    flats = _flat_targets(targets, n_electrons)
    if gate.shape[0] != 1 << len(flats):
        raise DimensionMismatchError("gate size does not match number of targets")
    dim = 4 ** n_electrons
    buf = np.eye(dim, dtype=np.complex128)
    _apply_inplace(buf, np.ascontiguousarray(gate), flats)
    return buf


def apply_unitary(state: PureState, u) -> PureState:
    """Apply a full-register matrix."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (state.dim, state.dim):
        raise DimensionMismatchError(f"unitary shape {u.shape} does not match state dim {state.dim}")
    return PureState(state.n_electrons, u @ state.amplitudes)


# ---------------------------------------------------------------------------
# measurement

@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    measured: tuple[QubitRef, ...]
    outcome: str
    probability: float
    post_state: PureState
    seed: int

    def bit(self, target: QubitRef) -> int:
        return int(self.outcome[self.measured.index(target)])


def outcome_probabilities(state: PureState, targets: Sequence[QubitRef]) -> np.ndarray:
    """Born probabilities of every outcome; entry ``o`` has bit ``i`` = targets[i]."""
    targets = list(targets)
    if not targets:
        raise InvalidTargetError("measurement needs at least one target")
    flats = np.array(_flat_targets(targets, state.n_electrons), dtype=np.int64)
    buf = np.ascontiguousarray(state.amplitudes.reshape(-1, 1))
    return _kernels.active.marginal(buf, flats)


def outcome_string(index: int, n_bits: int) -> str:
    return "".join(str((index >> i) & 1) for i in range(n_bits))


def draw_outcome(probs: np.ndarray, seed: int) -> int:
    """Pick an outcome index with one uniform draw from the seeded generator."""
    u = np.random.default_rng(seed).random()
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = int(np.searchsorted(cdf, u, side="right"))
    idx = min(idx, len(probs) - 1)
    while probs[idx] <= 0.0 and idx > 0:
        idx -= 1
    return idx


def project(state: PureState, targets: Sequence[QubitRef], outcome: int | str):
    """Projected, renormalised state and the Born probability of ``outcome``."""
    targets = list(targets)
    if isinstance(outcome, str):
        outcome = sum(int(b) << i for i, b in enumerate(outcome))
    flats = np.array(_flat_targets(targets, state.n_electrons), dtype=np.int64)
    buf = np.array(state.amplitudes, dtype=np.complex128).reshape(-1, 1)
    _kernels.active.project(buf, flats, int(outcome))
    p = float(np.vdot(buf[:, 0], buf[:, 0]).real)
    if p <= 0.0:
        raise InvalidStateError("outcome has zero probability")
    return PureState(state.n_electrons, buf[:, 0] / np.sqrt(p)), p


def measure(state: PureState, targets: Sequence[QubitRef], seed: int) -> MeasurementRecord:
    """Projective computational-basis measurement of ``targets``.

    Unmeasured qubits keep their coherence; measuring only a mode leaves
    each branch's spin superposition intact.
    """
    targets = tuple(targets)
    probs = outcome_probabilities(state, targets)
    idx = draw_outcome(probs, seed)
    post, p = project(state, targets, idx)
    return MeasurementRecord(targets, outcome_string(idx, len(targets)), p, post, int(seed))


# ---------------------------------------------------------------------------
# comparison and partial trace

def global_phase(u, v, tol: float = MATRIX_TOL):
    """Angle λ with ``u ≈ exp(iλ) v`` (max-abs entry), or None."""
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shapes differ: {u.shape} vs {v.shape}")
    flat = np.argmax(np.abs(v))
    ref_v = v.flat[flat]
    ref_u = u.flat[flat]
    if abs(ref_v) == 0.0:
        return 0.0 if np.max(np.abs(u)) <= tol else None
    if abs(ref_u) == 0.0:
        return None
    lam = float(np.angle(ref_u / ref_v))
    if np.max(np.abs(u - np.exp(1j * lam) * v)) <= tol:
        return lam
    return None


def equiv_global_phase(u, v, tol: float = MATRIX_TOL) -> bool:
    return global_phase(u, v, tol) is not None


def _keep_flats(state, keep):
    keep = list(keep)
    if not keep:
        raise InvalidTargetError("keep must name at least one qubit")
    flats = _flat_targets(keep, state.n_electrons)
    if len(flats) >= state.n_qubits:
        raise InvalidTargetError("keep must be a proper subset of the register")
    return flats


def reduced_density(state: PureState, keep: Sequence[QubitRef]) -> np.ndarray:
    """Partial trace onto ``keep``; result basis bit ``i`` is ``keep[i]``."""
    flats = _keep_flats(state, keep)
    n = state.n_qubits
    tensor = state.amplitudes.reshape((2,) * n)
    # numpy axis a holds qubit n-1-a; MSB of the result is keep[-1]
    kept_axes = [n - 1 - q for q in reversed(flats)]
    rest_axes = [a for a in range(n) if a not in kept_axes]
    mat = np.transpose(tensor, kept_axes + rest_axes).reshape(1 << len(flats), -1)
    return mat @ mat.conj().T
