"""Gate-level to hardware-level compiler.

``lower_to_netlist`` maps every gate to a fixed element block. Several
blocks reproduce their gate only up to a diagonal phase (the mode-1-only
spin flip, the polarizing beam splitter). In exact mode those leftover
phases are tracked per electron as a *phase frame*: a diagonal matrix that
is pushed through later permutation-like gates for free and is only turned
into extra diagonal elements (Rashba z, AB phase) when a non-monomial gate
or the end of the circuit forces it. Structural mode skips that step and
emits exactly one block per gate, which is how device element counts are
usually quoted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import core, gates, hardware as hw
from .core import Dof, QubitRef, mode, spin
from .errors import (
    InvalidRuleError,
    NonTerminatingRulesError,
    NonUnitaryError,
    SpinqnetError,
    UnsupportedGateError,
)
from .gates import Circuit, GateKind, GateOp

EULER_TOL = 1e-10
_DEGENERATE = 1e-12


def _wrap(angle: float) -> float:
    """Map to (-π, π]."""
    a = math.remainder(angle, 2 * math.pi)
    return math.pi if a == -math.pi else a


# ---------------------------------------------------------------------------
# single-qubit Euler decomposition

class EulerZXZ(NamedTuple):
    global_phase: float
    theta1: float
    theta2: float
    theta3: float

    def matrix(self) -> np.ndarray:
        return (np.exp(1j * self.global_phase) * gates.rz(self.theta1)
                @ gates.rx(self.theta2) @ gates.rz(self.theta3))


def _zxz_branch(v):
    # v in SU(2): v = [[a, b], [-b*, a*]] with a = e^{i(t1+t3)} cos t2,
    # b = i sin t2 e^{i(t1-t3)}
    a, b = v[0, 0], v[0, 1]
    theta2 = math.atan2(abs(b), abs(a))
    if abs(b) < _DEGENERATE:
        return float(np.angle(a)), 0.0, 0.0
    if abs(a) < _DEGENERATE:
        return float(np.angle(-1j * b)), theta2, 0.0
    total = float(np.angle(a))
    diff = float(np.angle(-1j * b))
    return (total + diff) / 2, theta2, (total - diff) / 2


def euler_zxz(u) -> EulerZXZ:
    """Angles with ``u = e^{iλ} Rz(θ1) Rx(θ2) Rz(θ3)`` (rotation convention of gates).

    θ2 is returned in [0, π/2]. On the degenerate families (diagonal or
    anti-diagonal ``u``) θ3 is set to 0. Of the two valid global-phase
    branches, the one with the smaller total rotation is returned.
    """
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2, 2) or not core.is_unitary(u, EULER_TOL):
        raise NonUnitaryError("euler_zxz needs a 2x2 unitary")
    lam0 = float(np.angle(np.linalg.det(u))) / 2
    candidates = []
    for lam in (lam0, lam0 + math.pi):
        t1, t2, t3 = _zxz_branch(np.exp(-1j * lam) * u)
        cand = EulerZXZ(_wrap(lam), _wrap(t1), t2, _wrap(t3))
        key = (round(abs(cand.theta1) + abs(cand.theta3), 9), round(abs(cand.global_phase), 9), -cand.global_phase)
        candidates.append((key, cand))
    return min(candidates, key=lambda kc: kc[0])[1]


def synthesize_1q(u, qubit: QubitRef) -> list[GateOp]:
    """Gate list (first acts first) realising ``u`` up to global phase."""
    e = euler_zxz(u)
    ops = [GateOp(GateKind.RZ, (qubit,), e.theta3),
           GateOp(GateKind.RX, (qubit,), e.theta2),
           GateOp(GateKind.RZ, (qubit,), e.theta1)]
    return [g for g in ops if abs(g.angle) > 0.0]


# ---------------------------------------------------------------------------
# SWAP(spin, mode)

SWAP_VARIANTS = ("pbs_heavy", "not_heavy")


def swap_sigma_k_circuit(variant: str, electron: int = 0, n_electrons: int | None = None) -> Circuit:
    """Three-CNOT SWAP between an electron's spin and mode.

    ``pbs_heavy`` uses the spin-controlled CNOT (a PBS) twice,
    ``not_heavy`` uses the mode-controlled spin flip twice.
    """
    s, k = spin(electron), mode(electron)
    sk = GateOp(GateKind.CNOT, (s, k))
    ks = GateOp(GateKind.CNOT, (k, s))
    if variant == "pbs_heavy":
        ops = (sk, ks, sk)
    elif variant == "not_heavy":
        ops = (ks, sk, ks)
    else:
        raise ValueError(f"unknown SWAP variant {variant!r}; expected one of {SWAP_VARIANTS}")
    return Circuit(electron + 1 if n_electrons is None else n_electrons, ops)


# ---------------------------------------------------------------------------
# rewrite rules

AngleSpec = float | str | Callable[[dict], float] | None


@dataclass(frozen=True)
class OpTemplate:
    """A gate with placeholder qubits (slot numbers) and an angle spec.

    In a pattern, a ``str`` angle binds a symbol and a float must match.
    In a replacement, a ``str`` copies a bound symbol and a callable is
    evaluated on the symbol bindings.
    """

    kind: GateKind
    slots: tuple[int, ...]
    angle: AngleSpec = None


def T(kind, *slots, angle=None) -> OpTemplate:
    return OpTemplate(GateKind(kind), tuple(slots), angle)


_RULE_SAMPLE_SEED = 7


@dataclass(frozen=True)
class RewriteRule:
    name: str
    pattern: tuple[OpTemplate, ...]
    replacement: tuple[OpTemplate, ...]
    guard: Callable[[dict], bool] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(self.pattern))
        object.__setattr__(self, "replacement", tuple(self.replacement))
        if not self.pattern:
            raise InvalidRuleError(f"rule {self.name!r} has an empty pattern")
        pslots = {s for t in self.pattern for s in t.slots}
        rslots = {s for t in self.replacement for s in t.slots}
        if not rslots <= pslots:
            raise InvalidRuleError(f"rule {self.name!r} uses unbound qubit slots {sorted(rslots - pslots)}")
        self._validate()

    def _symbols(self):
        return sorted({t.angle for t in self.pattern if isinstance(t.angle, str)})

    def _validate(self):
        # the identity must hold for any qubit assignment and any angles
        slots = sorted({s for t in self.pattern for s in t.slots})
        qubits = {s: QubitRef.from_flat(i) for i, s in enumerate(slots)}
        n = max(1, (len(slots) + 1) // 2)
        rng = np.random.default_rng(_RULE_SAMPLE_SEED)
        symbols = self._symbols()
        for _ in range(3):
            angles = {name: float(rng.uniform(-math.pi, math.pi)) for name in symbols}
            try:
                lhs = Circuit(n, self._build(self.pattern, qubits, angles))
                rhs = Circuit(n, self._build(self.replacement, qubits, angles))
            except SpinqnetError as exc:
                raise InvalidRuleError(f"rule {self.name!r} cannot be instantiated: {exc}") from exc
            if not core.equiv_global_phase(gates.circuit_unitary(lhs), gates.circuit_unitary(rhs), 1e-9):
                raise InvalidRuleError(f"rule {self.name!r} changes the circuit unitary")

    @staticmethod
    def _build(templates, qubits, angles):
        ops = []
        for t in templates:
            if t.angle is None:
                angle = None
            elif isinstance(t.angle, str):
                angle = angles[t.angle]
            elif callable(t.angle):
                angle = float(t.angle(angles))
            else:
                angle = float(t.angle)
            ops.append(GateOp(t.kind, tuple(qubits[s] for s in t.slots), angle))
        return ops

    def match(self, ops: Sequence[GateOp], start: int):
        """Bindings ``(qubits, angles)`` if the pattern matches at ``start``."""
        if start + len(self.pattern) > len(ops):
            return None
        qubits: dict[int, QubitRef] = {}
        angles: dict[str, float] = {}
        for t, g in zip(self.pattern, ops[start:start + len(self.pattern)]):
            if g.kind is not t.kind:
                return None
            for s, q in zip(t.slots, g.targets):
                bound = qubits.get(s)
                if bound is None:
                    if q in qubits.values():
                        return None
                    qubits[s] = q
                elif bound != q:
                    return None
            if isinstance(t.angle, str):
                if t.angle in angles:
                    if abs(angles[t.angle] - g.angle) > 1e-12:
                        return None
                else:
                    angles[t.angle] = g.angle
            elif t.angle is not None and abs(float(t.angle) - g.angle) > 1e-12:
                return None
        if self.guard is not None and not self.guard({**qubits, **angles}):
            return None
        return qubits, angles

    def instantiate(self, bindings) -> list[GateOp]:
        qubits, angles = bindings
        return self._build(self.replacement, qubits, angles)


MAX_REWRITE_ITERATIONS = 1000


def peephole_rewrite(circuit: Circuit, rules: Sequence[RewriteRule],
                     max_iterations: int = MAX_REWRITE_ITERATIONS, debug: bool = False) -> Circuit:
    """Left-to-right replacement passes until nothing changes.

    With ``debug`` every individual rule application is checked for
    unitary equivalence.
    """
    ops = list(circuit.ops)
    n = circuit.n_electrons
    for _ in range(max_iterations):
        out: list[GateOp] = []
        changed = False
        i = 0
        while i < len(ops):
            for rule in rules:
                bindings = rule.match(ops, i)
                if bindings is None:
                    continue
                repl = rule.instantiate(bindings)
                if debug:
                    before = gates.circuit_unitary(Circuit(n, ops[i:i + len(rule.pattern)]))
                    after = gates.circuit_unitary(Circuit(n, repl))
                    if not core.equiv_global_phase(before, after, 1e-9):
                        raise SpinqnetError(f"rule {rule.name!r} changed the unitary at op {i}")
                out.extend(repl)
                i += len(rule.pattern)
                changed = True
                break
            else:
                out.append(ops[i])
                i += 1
        ops = out
        if not changed:
            return Circuit(n, ops)
    raise NonTerminatingRulesError(f"rules did not reach a fixpoint within {max_iterations} passes")


def _same_electron(a, b, da, db):
    return a.electron == b.electron and a.dof is da and b.dof is db


def _is_mode(q):
    return q.dof is Dof.MODE


QUARTER = math.pi / 4

# identities between the two gate sets
IDENTITY_RULES = (
    RewriteRule("p-to-rz", (T("p", 0, angle="a"),), (T("rz", 0, angle=lambda b: -b["a"] / 2),)),
    RewriteRule("h-to-zxz", (T("h", 0),), (T("rz", 0, angle=QUARTER), T("rx", 0, angle=QUARTER),
                                          T("rz", 0, angle=QUARTER))),
    RewriteRule("rx-via-h", (T("rx", 0, angle="a"),), (T("h", 0), T("rz", 0, angle="a"), T("h", 0))),
    RewriteRule("not-to-rx", (T("not", 0),), (T("rx", 0, angle=math.pi / 2),)),
    RewriteRule("cnot-via-cphase", (T("cnot", 0, 1),), (T("h", 1), T("cphase", 0, 1, angle=math.pi), T("h", 1))),
    RewriteRule("swap-to-cnots", (T("swap", 0, 1),), (T("cnot", 0, 1), T("cnot", 1, 0), T("cnot", 0, 1))),
)

# cancellations and merges
SIMPLIFY_RULES = (
    RewriteRule("drop-identity", (T("id", 0),), ()),
    RewriteRule("h-h", (T("h", 0), T("h", 0)), ()),
    RewriteRule("not-not", (T("not", 0), T("not", 0)), ()),
    RewriteRule("cnot-cnot", (T("cnot", 0, 1), T("cnot", 0, 1)), ()),
    RewriteRule("swap-swap", (T("swap", 0, 1), T("swap", 0, 1)), ()),
    RewriteRule("swap-swap-rev", (T("swap", 0, 1), T("swap", 1, 0)), ()),
    RewriteRule("rx-merge", (T("rx", 0, angle="a"), T("rx", 0, angle="b")),
                (T("rx", 0, angle=lambda b: b["a"] + b["b"]),)),
    RewriteRule("rz-merge", (T("rz", 0, angle="a"), T("rz", 0, angle="b")),
                (T("rz", 0, angle=lambda b: b["a"] + b["b"]),)),
    RewriteRule("p-merge", (T("p", 0, angle="a"), T("p", 0, angle="b")),
                (T("p", 0, angle=lambda b: b["a"] + b["b"]),)),
    RewriteRule("cphase-merge", (T("cphase", 0, 1, angle="a"), T("cphase", 0, 1, angle="b")),
                (T("cphase", 0, 1, angle=lambda b: b["a"] + b["b"]),)),
    RewriteRule("rx-zero", (T("rx", 0, angle=0.0),), ()),
    RewriteRule("rz-zero", (T("rz", 0, angle=0.0),), ()),
    RewriteRule("p-zero", (T("p", 0, angle=0.0),), ()),
)

# bring a circuit into the directly lowerable gate subset
LOWERING_RULES = (
    RewriteRule("swap-spin-mode", (T("swap", 0, 1),), (T("cnot", 1, 0), T("cnot", 0, 1), T("cnot", 1, 0)),
                guard=lambda b: _same_electron(b[0], b[1], Dof.SPIN, Dof.MODE)),
    RewriteRule("swap-mode-spin", (T("swap", 0, 1),), (T("cnot", 0, 1), T("cnot", 1, 0), T("cnot", 0, 1)),
                guard=lambda b: _same_electron(b[0], b[1], Dof.MODE, Dof.SPIN)),
    RewriteRule("swap-mode-mode", (T("swap", 0, 1),), (T("cnot", 0, 1), T("cnot", 1, 0), T("cnot", 0, 1)),
                guard=lambda b: _is_mode(b[0]) and _is_mode(b[1]) and b[0].electron != b[1].electron),
    RewriteRule("cnot-mode-mode", (T("cnot", 0, 1),),
                (T("h", 1), T("cphase", 0, 1, angle=math.pi), T("h", 1)),
                guard=lambda b: _is_mode(b[0]) and _is_mode(b[1]) and b[0].electron != b[1].electron),
    RewriteRule("mode-h", (T("h", 0),), (T("rz", 0, angle=QUARTER), T("rx", 0, angle=QUARTER),
                                       T("rz", 0, angle=QUARTER)),
                guard=lambda b: _is_mode(b[0])),
    RewriteRule("mode-rz", (T("rz", 0, angle="a"),), (T("p", 0, angle=lambda b: -2 * b["a"]),),
                guard=lambda b: _is_mode(b[0])),
)


# ---------------------------------------------------------------------------
# lowering

def _block(g: GateOp) -> list[hw.HardwareElement]:
    """Hardware block for a gate of the directly lowerable subset."""
    kind = g.kind
    if kind.arity == 1:
        q = g.targets[0]
        e = q.electron
        if kind is GateKind.IDENTITY:
            return []
        if q.dof is Dof.SPIN:
            if kind is GateKind.RX:
                return [hw.rashba(e, "x", g.angle)]
            if kind is GateKind.RZ:
                return [hw.rashba(e, "z", g.angle)]
            if kind is GateKind.P:
                return [hw.rashba(e, "z", -g.angle / 2)]
            if kind is GateKind.NOT:
                return [hw.rashba(e, "x", math.pi / 2)]
            if kind is GateKind.H:
                return [hw.rashba(e, "z", QUARTER), hw.rashba(e, "x", QUARTER), hw.rashba(e, "z", QUARTER)]
        else:
            if kind is GateKind.RX:
                return [hw.beam_splitter(e, g.angle)]
            if kind is GateKind.P:
                return [hw.ab_phase(e, g.angle)]
            if kind is GateKind.NOT:
                return [hw.beam_splitter(e, math.pi / 2)]
            if kind is GateKind.RZ:
                return [hw.ab_phase(e, -2 * g.angle)]
            if kind is GateKind.H:
                return [hw.ab_phase(e, -math.pi / 2), hw.beam_splitter(e, QUARTER), hw.ab_phase(e, -math.pi / 2)]
    else:
        a, b = g.targets
        if a.electron == b.electron:
            e = a.electron
            if kind is GateKind.CNOT and a.dof is Dof.MODE:
                # spin flip on wire 1 only; leaves -i on that wire
                return [hw.rashba(e, "x", -math.pi / 2, mask="1")]
            if kind is GateKind.CNOT and a.dof is Dof.SPIN:
                return list(hw.pbs_hardware_netlist(e, e + 1).elements)
            if kind is GateKind.CPHASE:
                return [hw.rashba(e, "z", -g.angle / 2, mask="1")]
        elif a.dof is Dof.MODE and b.dof is Dof.MODE and kind is GateKind.CPHASE:
            return [hw.coulomb(a.electron, b.electron, g.angle)]
    raise UnsupportedGateError(f"no hardware element realises '{g}'", op=g)


def _local_gate(g: GateOp) -> np.ndarray:
    """4x4 matrix of a single-electron gate in that electron's register basis."""
    local = [QubitRef(0, t.dof) for t in g.lsb_targets()]
    return core.embed(g.matrix(), local, 1)


def _local_block(elements) -> np.ndarray:
    shifted = [hw.HardwareElement(el.kind, (0,), el.angle, el.axis, el.mask, el.target) for el in elements]
    return hw.netlist_unitary(hw.Netlist(1, shifted))


def _is_monomial(u, tol=1e-12) -> bool:
    nz = np.abs(u) > tol
    return bool(np.all(nz.sum(axis=0) == 1) and np.all(nz.sum(axis=1) == 1))


def diagonal_elements(electron: int, d) -> list[hw.HardwareElement]:
    """Elements realising diag(d) (single-electron basis s + 2k) up to global phase."""
    ph = hw.DiagonalPhase.from_diagonal(d)
    out = []
    # wire-1 Rashba z(t) adds t to the mode phase and -2t to the conditional phase
    theta_m = -_wrap(ph.conditional_phase) / 2
    if abs(theta_m) > 1e-12:
        out.append(hw.rashba(electron, "z", theta_m, mask="1"))
    phi = _wrap(ph.mode_phase - theta_m)
    if abs(phi) > 1e-12:
        out.append(hw.ab_phase(electron, phi))
    theta_b = -_wrap(ph.spin_phase) / 2
    if abs(math.remainder(theta_b, math.pi)) > 1e-12:
        out.append(hw.rashba(electron, "z", theta_b))
    return out


def lower_to_netlist(circuit: Circuit, exact: bool = True, rules: Sequence[RewriteRule] = LOWERING_RULES) -> hw.Netlist:
    """Compile a gate circuit to a hardware netlist.

    With ``exact`` the result equals the circuit up to a global phase.
    Without it, each gate becomes exactly one block and the result equals
    the circuit only up to diagonal phases.
    """
    prepared = peephole_rewrite(circuit, rules)
    n = circuit.n_electrons
    ident = np.ones(4, dtype=np.complex128)
    frame = {e: ident.copy() for e in range(n)}
    out: list[hw.HardwareElement] = []

    def flush(e):
        if exact:
            out.extend(diagonal_elements(e, 1.0 / frame[e]))
        frame[e] = ident.copy()

    for g in prepared.ops:
        block = _block(g)
        electrons = {t.electron for t in g.targets}
        if len(electrons) > 1:
            # only the Coulomb coupler survives preparation; it is diagonal and
            # commutes with every frame
            out.extend(block)
            continue
        (e,) = electrons
        u = _local_gate(g)
        v = _local_block(block)
        resid = v @ u.conj().T
        d = np.diag(resid)
        if np.max(np.abs(resid - np.diag(d))) > 1e-9:
            raise SpinqnetError(f"internal: block for '{g}' is not diagonal-equivalent")
        if _is_monomial(u):
            frame[e] = d * np.diag(u @ np.diag(frame[e]) @ u.conj().T)
        else:
            flush(e)
            frame[e] = d
        out.extend(block)
    for e in range(n):
        flush(e)
    return hw.Netlist(n, out)


def lowering_residual(circuit: Circuit, netlist: hw.Netlist):
    """Diagonal ``D`` with ``netlist = D · circuit`` (global phase removed), or None."""
    u = gates.circuit_unitary(circuit)
    v = hw.netlist_unitary(netlist)
    r = v @ u.conj().T
    d = np.diag(r)
    if np.max(np.abs(r - np.diag(d))) > 1e-9:
        return None
    return d * np.exp(-1j * np.angle(d[0]))


def hardware_cost(netlist: hw.Netlist) -> int:
    """Number of physical (non-detector) elements."""
    return sum(1 for el in netlist.elements if not el.is_detector)
