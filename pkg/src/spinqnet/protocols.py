"""Entanglement protocols for flying-electron networks.

Every protocol that applies unitaries takes ``layer``: ``"gate"`` runs the
ideal gate circuit, ``"hardware"`` compiles it with
:func:`synthesis.lower_to_netlist` (exact mode) and runs the element list.
The two agree up to a global phase.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import core, gates, hardware as hw, metrics, synthesis
from .core import MeasurementRecord, PureState, QubitRef, mode, spin
from .errors import InvalidStateError, InvalidTargetError
from .gates import Circuit, GateKind, GateOp

LAYERS = ("gate", "hardware")

# Coulomb phase at which BS⊗BS, C(φ), BS₂ outputs i|Ψ+⟩ on the modes.
# Found by sweeping φ over [0, 2π) for maximal k1|k2 entropy; the output at
# π is exactly i(|01⟩+|10⟩)/√2 (see tests/test_protocols.py).
PHI_STAR = math.pi

HALF = 1 / math.sqrt(2)


def _check_layer(layer: str):
    if layer not in LAYERS:
        raise ValueError(f"layer must be one of {LAYERS}, got {layer!r}")


def run(state: PureState, circuit: Circuit, layer: str = "gate") -> PureState:
    """Apply ``circuit`` at the requested layer."""
    _check_layer(layer)
    if layer == "gate":
        return gates.run_circuit(state, circuit)
    netlist = synthesis.lower_to_netlist(circuit, exact=True)
    return hw.run_unitary_part(state, netlist.elements)


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    final_state: PureState
    records: list[MeasurementRecord] = field(default_factory=list)
    derived: dict[str, float] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Bell basis

class BellState(enum.Enum):
    PHI_PLUS = "PhiPlus"
    PHI_MINUS = "PhiMinus"
    PSI_PLUS = "PsiPlus"
    PSI_MINUS = "PsiMinus"

    @property
    def index(self) -> int:
        return list(BellState).index(self)

    def vector(self) -> np.ndarray:
        """Amplitudes in ``|x y⟩`` order (x first qubit, most significant)."""
        return BELL_VECTORS[self].copy()


BELL_VECTORS = {
    BellState.PHI_PLUS: np.array([1, 0, 0, 1], dtype=np.complex128) * HALF,
    BellState.PHI_MINUS: np.array([1, 0, 0, -1], dtype=np.complex128) * HALF,
    BellState.PSI_PLUS: np.array([0, 1, 1, 0], dtype=np.complex128) * HALF,
    BellState.PSI_MINUS: np.array([0, 1, -1, 0], dtype=np.complex128) * HALF,
}

# raw bits (q1 q2) after CNOT(q1, q2) then H(q1)
BELL_FROM_BITS = {
    "00": BellState.PHI_PLUS,
    "10": BellState.PHI_MINUS,
    "01": BellState.PSI_PLUS,
    "11": BellState.PSI_MINUS,
}


@dataclass(frozen=True)
class BellOutcome:
    which: BellState
    raw_bits: str
    probability: float


def bell_analyzer(q1: QubitRef, q2: QubitRef, n_electrons: int) -> Circuit:
    if q1 == q2:
        raise InvalidTargetError("Bell measurement needs two distinct qubits")
    return Circuit(n_electrons, (GateOp(GateKind.CNOT, (q1, q2)), GateOp(GateKind.H, (q1,))))


def bell_measure_record(state: PureState, q1: QubitRef, q2: QubitRef, seed: int,
                        layer: str = "gate") -> tuple[BellOutcome, MeasurementRecord]:
    rotated = run(state, bell_analyzer(q1, q2, state.n_electrons), layer)
    rec = core.measure(rotated, (q1, q2), seed)
    return BellOutcome(BELL_FROM_BITS[rec.outcome], rec.outcome, rec.probability), rec


def bell_measure(state: PureState, q1: QubitRef, q2: QubitRef, seed: int,
                 layer: str = "gate") -> tuple[BellOutcome, PureState]:
    """Bell-basis measurement of ``(q1, q2)``.

    The measured pair is left in the analyzer's computational basis state;
    the rest of the register carries the collapsed state.
    """
    outcome, rec = bell_measure_record(state, q1, q2, seed, layer)
    return outcome, rec.post_state


def two_qubit_vector(state: PureState, q1: QubitRef, q2: QubitRef) -> np.ndarray:
    """Pure state of ``(q1, q2)`` in ``|q1 q2⟩`` order; needs a product cut."""
    v = metrics.factor_out(state, (q1, q2))  # bit 0 is q1
    return v[[0, 2, 1, 3]]


def bell_fidelities(state: PureState, q1: QubitRef, q2: QubitRef) -> dict[BellState, float]:
    rho = core.reduced_density(state, (q2, q1))  # bit 0 = q2, so index = 2·q1 + q2
    return {b: float(np.real(np.vdot(v, rho @ v))) for b, v in BELL_VECTORS.items()}


# ---------------------------------------------------------------------------
# state preparation

def state_from_map(n_electrons: int, amplitudes: dict[str, complex], normalize: bool = True) -> PureState:
    """Build a state from basis labels such as ``{"u0,u0": 1, "d1,d1": 1j}``."""
    vec = np.zeros(4 ** n_electrons, dtype=np.complex128)
    for label, amp in amplitudes.items():
        vec[core.parse_basis_label(label, n_electrons)] += amp
    return PureState.from_amplitudes(vec, normalize=normalize)


def transfer_input() -> PureState:
    """Spins ↑↑ with modes (|00⟩+|11⟩)/√2."""
    return state_from_map(2, {"u0,u0": 1, "u1,u1": 1})


def transfer_target() -> PureState:
    """(|↑↑⟩+|↓↓⟩)/√2 with modes |00⟩."""
    return state_from_map(2, {"u0,u0": 1, "d0,d0": 1})


def hyper_input() -> PureState:
    """Each electron in (|↑;0⟩+i|↓;1⟩)/√2."""
    return state_from_map(2, {"u0,u0": 1, "u0,d1": 1j, "d1,u0": 1j, "d1,d1": -1})


def hyper_target() -> PureState:
    """(|↑↑⟩+i|↓↓⟩)(|00⟩+i|11⟩)/2."""
    return state_from_map(2, {"u0,u0": 1, "u1,u1": 1j, "d0,d0": 1j, "d1,d1": -1})


def spin_bell_state(which: BellState = BellState.PHI_PLUS) -> PureState:
    """Two electrons, spins in the given Bell state, both modes 0."""
    v = BELL_VECTORS[which]
    labels = {0: "u0,u0", 1: "u0,d0", 2: "d0,u0", 3: "d0,d0"}  # |s0 s1⟩
    return state_from_map(2, {labels[i]: v[i] for i in range(4) if v[i] != 0})


# ---------------------------------------------------------------------------
# single-electron and two-electron entanglers

def spin_mode_entangler_circuit(electron: int, n_electrons: int) -> Circuit:
    return Circuit(n_electrons, (
        GateOp(GateKind.RX, (mode(electron),), math.pi / 4),
        GateOp(GateKind.CNOT, (mode(electron), spin(electron))),
    ))


def spin_mode_entangler(state: PureState, electron: int, layer: str = "gate") -> PureState:
    """Beam splitter then mode-1 spin flip: |↑;0⟩ → (|↑;0⟩ + i|↓;1⟩)/√2."""
    if not 0 <= electron < state.n_electrons:
        raise InvalidTargetError(f"electron {electron} outside a {state.n_electrons}-electron register")
    return run(state, spin_mode_entangler_circuit(electron, state.n_electrons), layer)


def mode_mode_entangler_circuit(phi: float) -> Circuit:
    k1, k2 = mode(0), mode(1)
    return Circuit(2, (
        GateOp(GateKind.RX, (k1,), math.pi / 4),
        GateOp(GateKind.RX, (k2,), math.pi / 4),
        GateOp(GateKind.CPHASE, (k1, k2), phi),
        GateOp(GateKind.RX, (k2,), math.pi / 4),
    ))


def mode_mode_entangler(phi: float = PHI_STAR, layer: str = "gate") -> ProtocolResult:
    """Beam splitters on both modes, Coulomb coupler, beam splitter on electron 2."""
    out = run(core.new_register(2), mode_mode_entangler_circuit(phi), layer)
    k1, k2 = mode(0), mode(1)
    spins_up = float(core.outcome_probabilities(out, (spin(0), spin(1)))[0])
    derived = {
        "phi": float(phi),
        "mode_entropy": metrics.entanglement_entropy(out, (k1,)),
        "spins_up_probability": spins_up,
    }
    if spins_up > 1 - 1e-9:
        target = 1j * BELL_VECTORS[BellState.PSI_PLUS]
        derived["fidelity_i_psi_plus"] = float(abs(np.vdot(target, two_qubit_vector(out, k1, k2))) ** 2)
    return ProtocolResult(out, [], derived)


# ---------------------------------------------------------------------------
# entanglement swapping

def swapping_input(layer: str = "gate") -> PureState:
    state = core.new_register(2)
    state = spin_mode_entangler(state, 0, layer)
    return spin_mode_entangler(state, 1, layer)


def _spin_report(state: PureState) -> dict[str, float]:
    s1, s2 = spin(0), spin(1)
    fid = bell_fidelities(state, s1, s2)
    best = max(fid, key=fid.get)
    return {
        "spin_entropy": metrics.entanglement_entropy(state, (s1,)),
        "spin_concurrence": metrics.concurrence(core.reduced_density(state, (s1, s2))),
        "spin_bell_index": float(best.index),
        "spin_bell_fidelity": fid[best],
    }


def entanglement_swapping(seed: int, layer: str = "gate") -> ProtocolResult:
    """Entangle two spin-mode pairs, Bell-measure the modes, report the spins."""
    state = swapping_input(layer)
    outcome, rec = bell_measure_record(state, mode(0), mode(1), seed, layer)
    derived = {"outcome_index": float(outcome.which.index), "probability": outcome.probability}
    derived.update(_spin_report(rec.post_state))
    return ProtocolResult(rec.post_state, [rec], derived)


@dataclass(frozen=True)
class SwappingStatistics:
    shots: int
    counts: dict[BellState, int]
    min_concurrence: float
    min_spin_entropy: float

    def frequency(self, which: BellState) -> float:
        return self.counts[which] / self.shots


def entanglement_swapping_statistics(shots: int, seed: int, layer: str = "gate") -> SwappingStatistics:
    """Outcome counts for ``shots`` runs; shot ``i`` uses seed ``seed + i``.

    Each shot draws exactly as ``entanglement_swapping(seed + i)`` would; the
    post-measurement state is computed once per distinct outcome.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    rotated = run(swapping_input(layer), bell_analyzer(mode(0), mode(1), 2), layer)
    targets = (mode(0), mode(1))
    probs = core.outcome_probabilities(rotated, targets)
    counts = {b: 0 for b in BellState}
    seen = set()
    for i in range(shots):
        idx = core.draw_outcome(probs, seed + i)
        counts[BELL_FROM_BITS[core.outcome_string(idx, 2)]] += 1
        seen.add(idx)
    conc, ent = [], []
    for idx in sorted(seen):
        post, _ = core.project(rotated, targets, idx)
        rep = _spin_report(post)
        conc.append(rep["spin_concurrence"])
        ent.append(rep["spin_entropy"])
    return SwappingStatistics(shots, counts, min(conc), min(ent))


# ---------------------------------------------------------------------------
# entanglement transfer and hyper-entanglement

def swap_sk(electron: int) -> GateOp:
    return GateOp(GateKind.SWAP, (spin(electron), mode(electron)))


def entanglement_transfer(state: PureState, layer: str = "gate") -> PureState:
    """SWAP(σ1,k1)·SWAP(σ2,k2): moves mode entanglement onto the spins."""
    if state.n_electrons != 2:
        raise InvalidTargetError("entanglement transfer needs a 2-electron register")
    return run(state, Circuit(2, (swap_sk(0), swap_sk(1))), layer)


def hyper_entangler(state: PureState, layer: str = "gate") -> PureState:
    """SWAP(k1,k2) first, then SWAP(σ1,k1)."""
    if state.n_electrons != 2:
        raise InvalidTargetError("the hyper-entangler needs a 2-electron register")
    circuit = Circuit(2, (GateOp(GateKind.SWAP, (mode(0), mode(1))), swap_sk(0)))
    return run(state, circuit, layer)


def spin_and_mode_entropies(state: PureState) -> tuple[float, float]:
    """Entropy of spin 1 and of mode 1 against the rest of the register."""
    return (metrics.entanglement_entropy(state, (spin(0),)),
            metrics.entanglement_entropy(state, (mode(0),)))


# ---------------------------------------------------------------------------
# Stern-Gerlach analyser

def _axis_angle(theta: float, paper_angle: bool) -> float:
    return 2 * theta if paper_angle else theta


def polarized_spin(theta0: float, paper_angle: bool = False) -> tuple[complex, complex]:
    """Spin along n = (0, sin θ0, cos θ0): cos(θ0/2)|↑⟩ + i sin(θ0/2)|↓⟩.

    With ``paper_angle`` the argument is half the axis angle, so that
    p↑ reads cos²(θ - θ0).
    """
    t = _axis_angle(theta0, paper_angle)
    return complex(math.cos(t / 2)), 1j * math.sin(t / 2)


def analyser_circuit_ops(theta: float, electron: int = 0):
    """exp(-iθσx/2) on the spin, i.e. Rx(-θ/2) in this package's convention."""
    return GateOp(GateKind.RX, (spin(electron),), -theta / 2)


def stern_gerlach_p_up(theta: float, input_spin: Sequence[complex], paper_angle: bool = False,
                       layer: str = "gate") -> float:
    """Probability that the analyser routes the electron to spin-up's wire."""
    _check_layer(layer)
    alpha, beta = (complex(x) for x in input_spin)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > 1e-10:
        raise InvalidStateError("input spin is not normalised")
    t = _axis_angle(theta, paper_angle)
    state = PureState(1, np.array([alpha, beta, 0, 0], dtype=np.complex128))
    if layer == "gate":
        state = gates.apply_op(state, analyser_circuit_ops(t))
        state = core.apply_gate(state, hw.pbs_behavioral(), (spin(0), mode(0)))
    else:
        rot = hw.rashba(0, "x", -t / 2)
        state = hw.run_unitary_part(state, (rot,) + hw.pbs_hardware_netlist().elements)
    # the PBS sends spin up to the input wire (mode 0)
    return float(core.outcome_probabilities(state, (mode(0),))[0])


def unpolarized_p_up(theta: float, paper_angle: bool = False, layer: str = "gate") -> float:
    """Average over an antipodal pair of polarisations."""
    up = stern_gerlach_p_up(theta, (1, 0), paper_angle, layer)
    down = stern_gerlach_p_up(theta, (0, 1), paper_angle, layer)
    return 0.5 * (up + down)


def sweep_angles(points: int, paper_angle: bool = False) -> np.ndarray:
    """One full period of p↑: [0, 2π] in axis units, [0, π] in half-angle units."""
    if points < 2:
        raise ValueError("a sweep needs at least 2 points")
    return np.linspace(0.0, math.pi if paper_angle else 2 * math.pi, points)


def stern_gerlach_sweep(theta0: float, points: int, paper_angle: bool = False,
                        layer: str = "gate") -> tuple[np.ndarray, np.ndarray]:
    thetas = sweep_angles(points, paper_angle)
    spin_in = polarized_spin(theta0, paper_angle)
    p = np.array([stern_gerlach_p_up(t, spin_in, paper_angle, layer) for t in thetas])
    return thetas, p


# ---------------------------------------------------------------------------
# Bell-CHSH

def spin_observable(theta: float) -> np.ndarray:
    """σ·n for n = (0, sin θ, cos θ)."""
    return math.sin(theta) * gates.SIGMA_Y + math.cos(theta) * gates.SIGMA_Z


def chsh_correlation(state: PureState, theta1: float, theta2: float) -> float:
    """⟨(σ1·n1)(σ2·n2)⟩ on the spins of electrons 0 and 1, exactly."""
    if state.n_electrons < 2:
        raise InvalidTargetError("CHSH needs at least two electrons")
    out = core.apply_gate(state, spin_observable(theta1), (spin(0),))
    out_vec = core.embed(spin_observable(theta2), (spin(1),), state.n_electrons) @ out.amplitudes
    return float(np.vdot(state.amplitudes, out_vec).real)


# (a, a', b, b') reaching 2√2 on |Φ+⟩, where P(θ1, θ2) = cos(θ1 + θ2)
CHSH_ANGLES = (0.0, math.pi / 2, -math.pi / 4, -3 * math.pi / 4)


def chsh_terms(state: PureState, angles: Sequence[float] = CHSH_ANGLES) -> dict[str, float]:
    a, a2, b, b2 = angles
    terms = {
        "P_a_b": chsh_correlation(state, a, b),
        "P_a_bp": chsh_correlation(state, a, b2),
        "P_ap_b": chsh_correlation(state, a2, b),
        "P_ap_bp": chsh_correlation(state, a2, b2),
    }
    terms["S"] = terms["P_a_b"] - terms["P_a_bp"] + terms["P_ap_b"] + terms["P_ap_bp"]
    return terms


def chsh_S(state: PureState, angles: Sequence[float] = CHSH_ANGLES) -> float:
    return chsh_terms(state, angles)["S"]


def chsh_operator(angles: Sequence[float]) -> np.ndarray:
    """Two-spin CHSH operator in ``|s1 s2⟩`` order (s1 most significant)."""
    a, a2, b, b2 = angles
    A = spin_observable
    return (np.kron(A(a), A(b) - A(b2)) + np.kron(A(a2), A(b) + A(b2)))


def chsh_quantum_max(angles: Sequence[float]) -> float:
    """Largest S any two-spin state reaches at these angles."""
    return float(np.linalg.eigvalsh(chsh_operator(angles))[-1])


# ---------------------------------------------------------------------------
# named protocols (CLI surface)

PROTOCOL_NAMES = (
    "spin-mode-entangle",
    "mode-mode-entangle",
    "entanglement-swap",
    "entanglement-transfer",
    "hyper-entangle",
    "stern-gerlach",
    "chsh",
)


def run_protocol(name: str, seed: int = 0, shots: int = 0, layer: str = "gate") -> ProtocolResult:
    """Run a protocol by CLI name with its canonical input."""
    _check_layer(layer)
    if name == "spin-mode-entangle":
        out = spin_mode_entangler(core.new_register(1), 0, layer)
        target = state_from_map(1, {"u0": 1, "d1": 1j})
        return ProtocolResult(out, [], {
            "fidelity": out.fidelity(target),
            "spin_mode_entropy": metrics.entanglement_entropy(out, (spin(0),)),
        })
    if name == "mode-mode-entangle":
        return mode_mode_entangler(PHI_STAR, layer)
    if name == "entanglement-swap":
        result = entanglement_swapping(seed, layer)
        if shots > 0:
            stats = entanglement_swapping_statistics(shots, seed, layer)
            for b in BellState:
                result.derived[f"freq_{b.value}"] = stats.frequency(b)
            result.derived["min_spin_concurrence"] = stats.min_concurrence
        return result
    if name == "entanglement-transfer":
        before = transfer_input()
        after = entanglement_transfer(before, layer)
        s0, m0 = spin_and_mode_entropies(before)
        s1, m1 = spin_and_mode_entropies(after)
        return ProtocolResult(after, [], {
            "mode_entropy_before": m0, "mode_entropy_after": m1,
            "spin_entropy_before": s0, "spin_entropy_after": s1,
            "fidelity": after.fidelity(transfer_target()),
        })
    if name == "hyper-entangle":
        before = hyper_input()
        after = hyper_entangler(before, layer)
        return ProtocolResult(after, [], {
            "ebits_before": sum(metrics.entanglement_entropy(before, (spin(e),)) for e in (0, 1)),
            "ebits_after": sum(spin_and_mode_entropies(after)),
            "spins_modes_entropy": metrics.entanglement_entropy(after, (spin(0), spin(1))),
            "fidelity": after.fidelity(hyper_target()),
        })
    if name == "stern-gerlach":
        thetas, p = stern_gerlach_sweep(0.0, 37, layer=layer)
        fit = metrics.fit_polarization(list(zip(thetas / 2, p)))
        unpol = max(abs(unpolarized_p_up(t, layer=layer) - 0.5) for t in thetas)
        state = PureState(1, np.array([1, 0, 0, 0], dtype=np.complex128))
        return ProtocolResult(state, [], {
            "degree": fit.degree, "theta0": fit.theta0, "residual": fit.residual,
            "unpolarized_max_deviation": unpol,
        })
    if name == "chsh":
        state = entanglement_transfer(transfer_input(), layer)
        terms = chsh_terms(state)
        return ProtocolResult(state, [], {k: v for k, v in terms.items()})
    raise ValueError(f"unknown protocol {name!r}; expected one of {PROTOCOL_NAMES}")
