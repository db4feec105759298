"""Abstract gate set, circuits and the gate identity suite.

Rotation convention (used everywhere in this package)::

    Rx(θ) = exp(+iθσx) = cos θ·1 + i sin θ·σx
    Rz(θ) = exp(+iθσz) = cos θ·1 + i sin θ·σz

This is not the common exp(-iθσ/2): a 50/50 beam splitter is Rx(π/4) and
NOT = -i·Rx(π/2).

Two-qubit matrices are written in the usual ``|x y⟩`` order with ``x`` the
first listed qubit (the control for CNOT/Cphase): CNOT = diag(1, 1, σx).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import core
from .core import QubitRef
from .errors import InvalidGateError, InvalidTargetError

I2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


class GateKind(enum.Enum):
    P = "p"
    H = "h"
    RX = "rx"
    RZ = "rz"
    NOT = "not"
    IDENTITY = "id"
    CPHASE = "cphase"
    CNOT = "cnot"
    SWAP = "swap"

    @property
    def arity(self) -> int:
        return 2 if self in _TWO_QUBIT else 1

    @property
    def has_angle(self) -> bool:
        return self in _ANGLED


_TWO_QUBIT = frozenset({GateKind.CPHASE, GateKind.CNOT, GateKind.SWAP})
_ANGLED = frozenset({GateKind.P, GateKind.RX, GateKind.RZ, GateKind.CPHASE})


def rx(theta: float) -> np.ndarray:
    return math.cos(theta) * I2 + 1j * math.sin(theta) * SIGMA_X


def rz(theta: float) -> np.ndarray:
    return math.cos(theta) * I2 + 1j * math.sin(theta) * SIGMA_Z


def phase(phi: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * phi)]).astype(np.complex128)


def cphase(phi: float) -> np.ndarray:
    return np.diag([1.0, 1.0, 1.0, np.exp(1j * phi)]).astype(np.complex128)


HADAMARD = (SIGMA_X + SIGMA_Z) / math.sqrt(2)
CNOT = np.block([[I2, np.zeros((2, 2))], [np.zeros((2, 2)), SIGMA_X]]).astype(np.complex128)
SWAP = np.eye(4, dtype=np.complex128)[[0, 2, 1, 3]]


def gate_unitary(kind: GateKind | str, angle: float | None = None) -> np.ndarray:
    kind = GateKind(kind)
    if kind.has_angle:
        if angle is None:
            raise InvalidGateError(f"{kind.name} needs an angle")
        if not math.isfinite(angle):
            raise InvalidGateError(f"{kind.name} angle must be finite")
    elif angle is not None:
        raise InvalidGateError(f"{kind.name} takes no angle")

    if kind is GateKind.P:
        return phase(angle)
    if kind is GateKind.H:
        return HADAMARD.copy()
    if kind is GateKind.RX:
        return rx(angle)
    if kind is GateKind.RZ:
        return rz(angle)
    if kind is GateKind.NOT:
        return SIGMA_X.copy()
    if kind is GateKind.IDENTITY:
        return I2.copy()
    if kind is GateKind.CPHASE:
        return cphase(angle)
    if kind is GateKind.CNOT:
        return CNOT.copy()
    return SWAP.copy()


@dataclass(frozen=True)
class GateOp:
    kind: GateKind
    targets: tuple[QubitRef, ...]
    angle: float | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        targets = tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        if len(targets) != kind.arity:
            raise InvalidGateError(f"{kind.name} acts on {kind.arity} qubit(s), got {len(targets)}")
        if any(not isinstance(t, QubitRef) for t in targets):
            raise InvalidGateError("gate targets must be QubitRef instances")
        if len(set(targets)) != len(targets):
            raise InvalidTargetError(f"{kind.name} targets must be distinct")
        if kind.has_angle:
            if self.angle is None or not math.isfinite(self.angle):
                raise InvalidGateError(f"{kind.name} needs a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise InvalidGateError(f"{kind.name} takes no angle")

    def matrix(self) -> np.ndarray:
        return gate_unitary(self.kind, self.angle)

    def lsb_targets(self) -> tuple[QubitRef, ...]:
        """Targets ordered for :func:`core.apply_gate` (least significant first)."""
        return self.targets[::-1]

    def __str__(self):
        args = " ".join(str(t) for t in self.targets)
        if self.angle is None:
            return f"{self.kind.value} {args}"
        return f"{self.kind.value} {args} {self.angle:.6g}"


def op(kind, *targets, angle=None) -> GateOp:
    return GateOp(GateKind(kind), tuple(targets), angle)


@dataclass(frozen=True)
class Circuit:
    n_electrons: int
    ops: tuple[GateOp, ...] = ()

    def __post_init__(self):
        core._check_n_electrons(self.n_electrons)
        ops = tuple(self.ops)
        object.__setattr__(self, "ops", ops)
        for g in ops:
            for t in g.targets:
                if t.electron >= self.n_electrons:
                    raise InvalidTargetError(f"{g} targets {t} outside a {self.n_electrons}-electron register")

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def then(self, other: "Circuit | Iterable[GateOp]") -> "Circuit":
        extra = other.ops if isinstance(other, Circuit) else tuple(other)
        return Circuit(self.n_electrons, self.ops + extra)


def apply_op(state: core.PureState, g: GateOp) -> core.PureState:
    return core.apply_gate(state, g.matrix(), g.lsb_targets())


def run_circuit(state: core.PureState, circuit: Circuit) -> core.PureState:
    if circuit.n_electrons != state.n_electrons:
        raise InvalidTargetError("circuit and state have different register sizes")
    buf = np.array(state.amplitudes, dtype=np.complex128).reshape(-1, 1)
    for g in circuit.ops:
        core._apply_inplace(buf, np.ascontiguousarray(g.matrix()), [t.flat for t in g.lsb_targets()])
    return core.PureState(state.n_electrons, buf[:, 0])


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Product of the embedded gates, first op rightmost."""
    dim = 4 ** circuit.n_electrons
    buf = np.eye(dim, dtype=np.complex128)
    for g in circuit.ops:
        core._apply_inplace(buf, np.ascontiguousarray(g.matrix()), [t.flat for t in g.lsb_targets()])
    return buf


def kron(*mats) -> np.ndarray:
    out = np.eye(1, dtype=np.complex128)
    for m in mats:
        out = np.kron(out, m)
    return out


# ---------------------------------------------------------------------------
# identity suite

IDENTITY_THETA_GRID = (0.0, math.pi / 7, math.pi / 4, 1.0, math.pi / 2)
IDENTITY_SEED = 20240611


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    statement: str
    max_error: float
    passed: bool


@dataclass(frozen=True)
class IdentityReport:
    checks: tuple[IdentityCheck, ...]
    tol: float

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> IdentityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def identity_thetas(n_random: int = 10, seed: int = IDENTITY_SEED) -> tuple[float, ...]:
    rng = np.random.default_rng(seed)
    return IDENTITY_THETA_GRID + tuple(float(x) for x in rng.uniform(-math.pi, math.pi, n_random))


def _err(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _cnot_reversed() -> np.ndarray:
    # CNOT with the second qubit as control, in |x y> order
    return SWAP @ CNOT @ SWAP


def verify_identities(tol: float = 1e-10, thetas: Sequence[float] | None = None) -> IdentityReport:
    """Check the six gate identities with exact phases (not up to global phase)."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    thetas = identity_thetas() if thetas is None else tuple(thetas)
    checks = []

    def add(name, statement, err):
        checks.append(IdentityCheck(name, statement, err, err <= tol))

    add("a", "P(phi) = exp(i phi/2) Rz(-phi/2)",
        max(_err(phase(t), np.exp(1j * t / 2) * rz(-t / 2)) for t in thetas))
    add("b", "H = -i Rz(pi/4) Rx(pi/4) Rz(pi/4)",
        _err(HADAMARD, -1j * rz(math.pi / 4) @ rx(math.pi / 4) @ rz(math.pi / 4)))
    add("c", "exp(i theta sx) = H exp(i theta sz) H",
        max(_err(rx(t), HADAMARD @ rz(t) @ HADAMARD) for t in thetas))
    add("d", "sx = -i Rx(pi/2)", _err(SIGMA_X, -1j * rx(math.pi / 2)))
    one_h = kron(I2, HADAMARD)
    add("e", "CNOT = (1 x H) C(pi) (1 x H)", _err(CNOT, one_h @ cphase(math.pi) @ one_h))
    rev = _cnot_reversed()
    add("f", "SWAP = CNOT(i,j)CNOT(j,i)CNOT(i,j) = CNOT(j,i)CNOT(i,j)CNOT(j,i)",
        max(_err(SWAP, CNOT @ rev @ CNOT), _err(SWAP, rev @ CNOT @ rev)))
    return IdentityReport(tuple(checks), tol)
