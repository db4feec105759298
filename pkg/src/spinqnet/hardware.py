"""Physical element set and the netlist IR.

Elements act on a single electron's qubits, except the Coulomb coupler,
which couples the mode qubits of two electrons:

================  ===========================================
BeamSplitter(θ)   Rx(θ) on the mode
ABPhase(φ)        P(φ) on the mode
Rashba            Rx/Rz(θ) on the spin, on both wires or only
                  on wire 1 (mode-controlled rotation)
CoulombCoupler    C(φ) on two mode qubits
Detector          projective measurement (mode only, or full)
================  ===========================================

Natural units throughout (ħ = e = c = 1); fluxes are given in flux quanta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import core, gates
from .core import PureState, mode, spin
from .errors import InvalidGateError, InvalidTargetError, SpinqnetError


class ElementKind(enum.Enum):
    BEAM_SPLITTER = "bs"
    AB_PHASE = "abphase"
    RASHBA = "rashba"
    COULOMB = "coulomb"
    DETECTOR = "detector"


class DetectorError(SpinqnetError):
    """Raised when a measurement element reaches a unitary-only code path."""


@dataclass(frozen=True)
class HardwareElement:
    kind: ElementKind
    electrons: tuple[int, ...]
    angle: float | None = None
    axis: str | None = None       # Rashba: "x" | "z"
    mask: str | None = None       # Rashba: "both" | "1"
    target: str | None = None     # Detector: "mode" | "full"

    def __post_init__(self):
        kind = ElementKind(self.kind)
        object.__setattr__(self, "kind", kind)
        electrons = tuple(int(e) for e in self.electrons)
        object.__setattr__(self, "electrons", electrons)
        if any(e < 0 for e in electrons):
            raise InvalidTargetError("electron indices must be non-negative")
        want = 2 if kind is ElementKind.COULOMB else 1
        if len(electrons) != want:
            raise InvalidGateError(f"{kind.value} acts on {want} electron(s), got {len(electrons)}")
        if kind is ElementKind.COULOMB and electrons[0] == electrons[1]:
            raise InvalidTargetError("coulomb coupler needs two distinct electrons")
        if kind is ElementKind.DETECTOR:
            if self.target not in ("mode", "full"):
                raise InvalidGateError(f"detector target must be 'mode' or 'full', got {self.target!r}")
            if self.angle is not None:
                raise InvalidGateError("detectors take no angle")
            return
        if self.angle is None or not math.isfinite(self.angle):
            raise InvalidGateError(f"{kind.value} needs a finite angle")
        object.__setattr__(self, "angle", float(self.angle))
        if kind is ElementKind.RASHBA:
            if self.axis not in ("x", "z"):
                raise InvalidGateError(f"rashba axis must be 'x' or 'z', got {self.axis!r}")
            if self.mask not in ("both", "1"):
                raise InvalidGateError(f"rashba mask must be 'both' or '1', got {self.mask!r}")
        elif self.axis is not None or self.mask is not None:
            raise InvalidGateError(f"{kind.value} takes no axis/mask")

    @property
    def is_detector(self) -> bool:
        return self.kind is ElementKind.DETECTOR

    def local(self):
        """(matrix, lsb-first qubit targets) for this element."""
        e = self.electrons[0]
        k = self.kind
        if k is ElementKind.BEAM_SPLITTER:
            return gates.rx(self.angle), (mode(e),)
        if k is ElementKind.AB_PHASE:
            return gates.phase(self.angle), (mode(e),)
        if k is ElementKind.RASHBA:
            rot = gates.rx(self.angle) if self.axis == "x" else gates.rz(self.angle)
            if self.mask == "both":
                return rot, (spin(e),)
            ctrl = np.eye(4, dtype=np.complex128)
            ctrl[2:, 2:] = rot
            # mode is the MSB (control), spin the LSB (target)
            return ctrl, (spin(e), mode(e))
        if k is ElementKind.COULOMB:
            return gates.cphase(self.angle), (mode(e), mode(self.electrons[1]))
        raise DetectorError("a detector has no unitary; run the netlist with simulate")

    def __str__(self):
        return format_element(self)


def beam_splitter(electron: int, theta: float) -> HardwareElement:
    return HardwareElement(ElementKind.BEAM_SPLITTER, (electron,), theta)


def ab_phase(electron: int, phi: float) -> HardwareElement:
    return HardwareElement(ElementKind.AB_PHASE, (electron,), phi)


def rashba(electron: int, axis: str, theta: float, mask: str = "both") -> HardwareElement:
    return HardwareElement(ElementKind.RASHBA, (electron,), theta, axis=axis, mask=mask)


def coulomb(e1: int, e2: int, phi: float) -> HardwareElement:
    return HardwareElement(ElementKind.COULOMB, (e1, e2), phi)


def detector(electron: int, target: str = "full") -> HardwareElement:
    return HardwareElement(ElementKind.DETECTOR, (electron,), target=target)


def format_element(el: HardwareElement) -> str:
    """One netlist line (angles printed with repr so they round-trip)."""
    k = el.kind
    e = el.electrons
    if k is ElementKind.BEAM_SPLITTER:
        return f"bs e{e[0]} theta={el.angle!r}"
    if k is ElementKind.AB_PHASE:
        return f"abphase e{e[0]} phi={el.angle!r}"
    if k is ElementKind.RASHBA:
        return f"rashba e{e[0]} axis={el.axis} theta={el.angle!r} mode={el.mask}"
    if k is ElementKind.COULOMB:
        return f"coulomb e{e[0]} e{e[1]} phi={el.angle!r}"
    return f"detector e{e[0]} target={el.target}"


@dataclass(frozen=True)
class Netlist:
    n_electrons: int
    elements: tuple[HardwareElement, ...] = field(default=())

    def __post_init__(self):
        core._check_n_electrons(self.n_electrons)
        elements = tuple(self.elements)
        object.__setattr__(self, "elements", elements)
        for el in elements:
            for e in el.electrons:
                if e >= self.n_electrons:
                    raise InvalidTargetError(f"element '{el}' addresses e{e} in a {self.n_electrons}-electron netlist")

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def then(self, other: "Netlist | Iterable[HardwareElement]") -> "Netlist":
        extra = other.elements if isinstance(other, Netlist) else tuple(other)
        return Netlist(self.n_electrons, self.elements + extra)

    def has_detectors(self) -> bool:
        return any(el.is_detector for el in self.elements)


# ---------------------------------------------------------------------------
# physical parameters

@dataclass(frozen=True)
class HardwareParams:
    """Device parameters in natural units.

    ``alpha`` is the lumped spin-orbit coupling constant, ``E`` the field
    magnitude, ``L`` the Rashba region length, ``flux`` the enclosed flux in
    flux quanta and ``tunneling_integral`` ∫τ(t)dt in units of ħ.
    """

    alpha: float = 0.0
    E: float = 0.0
    L: float = 0.0
    flux: float = 0.0
    tunneling_integral: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "E", "L", "flux", "tunneling_integral"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if self.L < 0:
            raise ValueError("L must be non-negative")


def physical_to_angle(params: HardwareParams, which: str) -> float:
    """Gate angle produced by a device.

    There is deliberately no velocity argument: the spin-orbit rotation
    angle depends only on region length and field.
    """
    which = which.upper()
    if which == "AB":
        return 2.0 * math.pi * params.flux
    if which == "BS":
        return -params.tunneling_integral
    if which == "RASHBA":
        return params.alpha * params.E * params.L
    raise ValueError(f"unknown device {which!r}; expected AB, BS or Rashba")


# ---------------------------------------------------------------------------
# unitaries

def element_unitary(elem: HardwareElement, n_electrons: int) -> np.ndarray:
    mat, targets = elem.local()
    return core.embed(mat, targets, n_electrons)


def _check_in_range(netlist_or_elem_electrons, n):
    for e in netlist_or_elem_electrons:
        if e >= n:
            raise InvalidTargetError(f"e{e} outside a {n}-electron register")


def netlist_unitary(netlist: Netlist) -> np.ndarray:
    """Ordered product of element unitaries (first element rightmost)."""
    if netlist.has_detectors():
        raise DetectorError("netlist contains detectors; use simulate() instead")
    buf = np.eye(4 ** netlist.n_electrons, dtype=np.complex128)
    for el in netlist.elements:
        mat, targets = el.local()
        core._apply_inplace(buf, np.ascontiguousarray(mat), [t.flat for t in targets])
    return buf


def apply_element(state: PureState, el: HardwareElement) -> PureState:
    _check_in_range(el.electrons, state.n_electrons)
    mat, targets = el.local()
    return core.apply_gate(state, mat, targets)


def run_unitary_part(state: PureState, elements: Sequence[HardwareElement]) -> PureState:
    buf = np.array(state.amplitudes, dtype=np.complex128).reshape(-1, 1)
    for el in elements:
        _check_in_range(el.electrons, state.n_electrons)
        mat, targets = el.local()
        core._apply_inplace(buf, np.ascontiguousarray(mat), [t.flat for t in targets])
    return PureState(state.n_electrons, buf[:, 0])


def detector_targets(el: HardwareElement):
    e = el.electrons[0]
    return (mode(e),) if el.target == "mode" else (spin(e), mode(e))


def simulate(state: PureState, netlist: Netlist, seed: int):
    """Run a netlist including detectors.

    Detector ``j`` draws with :func:`derive_seed` ``(seed, j)``. Returns the
    final state and the list of measurement records.
    """
    if state.n_electrons != netlist.n_electrons:
        raise InvalidTargetError("state and netlist have different register sizes")
    records = []
    pending = []
    for el in netlist.elements:
        if el.is_detector:
            state = run_unitary_part(state, pending)
            pending = []
            rec = core.measure(state, detector_targets(el), derive_seed(seed, len(records)))
            records.append(rec)
            state = rec.post_state
        else:
            pending.append(el)
    state = run_unitary_part(state, pending)
    return state, records


def sample_shots(state: PureState, netlist: Netlist, seed: int, shots: int) -> dict[tuple[str, ...], int]:
    """Detector outcome counts over ``shots`` runs; shot ``i`` uses seed ``seed + i``.

    Every shot draws exactly as ``simulate(state, netlist, seed + i)`` would,
    but the states between detectors are computed once per outcome prefix.
    """
    if state.n_electrons != netlist.n_electrons:
        raise InvalidTargetError("state and netlist have different register sizes")
    segments: list[list[HardwareElement]] = [[]]
    detectors = []
    for el in netlist.elements:
        if el.is_detector:
            detectors.append(detector_targets(el))
            segments.append([])
        else:
            segments[-1].append(el)
    # prefix of outcomes -> (state before the next detector, its outcome probabilities)
    cache: dict[tuple[int, ...], tuple[PureState, np.ndarray]] = {}

    def node(prefix):
        if prefix not in cache:
            if prefix:
                parent, _ = node(prefix[:-1])
                before, _ = core.project(parent, detectors[len(prefix) - 1], prefix[-1])
            else:
                before = state
            here = run_unitary_part(before, segments[len(prefix)])
            probs = core.outcome_probabilities(here, detectors[len(prefix)]) if len(prefix) < len(detectors) else None
            cache[prefix] = (here, probs)
        return cache[prefix]

    counts: dict[tuple[str, ...], int] = {}
    for shot in range(shots):
        prefix: tuple[int, ...] = ()
        for j, targets in enumerate(detectors):
            _, probs = node(prefix)
            prefix += (core.draw_outcome(probs, derive_seed(seed + shot, j)),)
        key = tuple(core.outcome_string(i, len(t)) for i, t in zip(prefix, detectors))
        counts[key] = counts.get(key, 0) + 1
    return counts


def derive_seed(seed: int, index: int) -> int:
    """Deterministic child seed for the ``index``-th draw of a run."""
    if index == 0:
        return int(seed)
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return int(ss.generate_state(1, np.uint32)[0])


# ---------------------------------------------------------------------------
# polarizing beam splitter
#
# The device is a Mach-Zehnder interferometer: splitter, spin rotation on
# wire 1 only, flux between the arms, splitter. On wire 1 the Rashba region
# gives spin up a phase +i and spin down -i, so the two spin species see
# interferometer phases φ+π/2 and φ-π/2. With both splitters at π/4:
#
#   Rx(π/4) P(α) Rx(π/4) = Z      for α = π     (spin up  -> same wire)
#                        = iσx    for α = 0     (spin down -> other wire)
#
# which fixes φ = π/2. No choice of the three free constants makes the
# device equal CNOT(spin -> mode) up to a global phase: in either spin
# branch the mode map is one of {1, Z} or {σx, Y} times a phase, and the
# leftover diagonal always contains a spin-mode controlled-Z. The routing
# is exact; the phases are reported by pbs_equivalence_report().
# This particular solution also makes the six-element SWAP exact.

PBS_SPLITTER_IN = math.pi / 4
PBS_RASHBA_ANGLE = math.pi / 2
PBS_AB_PHASE = math.pi / 2
PBS_SPLITTER_OUT = math.pi / 4


def pbs_behavioral() -> np.ndarray:
    """CNOT with spin control and mode target, in the one-electron register basis.

    Basis index is ``s + 2k`` (spin is the low bit), matching netlist_unitary.
    """
    u = np.zeros((4, 4), dtype=np.complex128)
    for s in (0, 1):
        for k in (0, 1):
            u[s + 2 * (k ^ s), s + 2 * k] = 1.0
    return u


def pbs_hardware_netlist(electron: int = 0, n_electrons: int | None = None) -> Netlist:
    n = electron + 1 if n_electrons is None else n_electrons
    return Netlist(n, (
        beam_splitter(electron, PBS_SPLITTER_IN),
        rashba(electron, "z", PBS_RASHBA_ANGLE, mask="1"),
        ab_phase(electron, PBS_AB_PHASE),
        beam_splitter(electron, PBS_SPLITTER_OUT),
    ))


@dataclass(frozen=True)
class DiagonalPhase:
    """d(s, k) = exp(i(global + spin·s + mode·k + conditional·s·k))."""

    global_phase: float
    spin_phase: float
    mode_phase: float
    conditional_phase: float

    @classmethod
    def from_diagonal(cls, d) -> "DiagonalPhase":
        d = np.asarray(d, dtype=np.complex128)
        d00, d10, d01, d11 = d[0], d[1], d[2], d[3]
        return cls(
            float(np.angle(d00)),
            float(np.angle(d10 / d00)),
            float(np.angle(d01 / d00)),
            float(np.angle(d11 * d00 / (d10 * d01))),
        )

    def diagonal(self) -> np.ndarray:
        s = np.array([0, 1, 0, 1])
        k = np.array([0, 0, 1, 1])
        return np.exp(1j * (self.global_phase + self.spin_phase * s + self.mode_phase * k
                            + self.conditional_phase * s * k))

    @property
    def is_local(self) -> bool:
        return bool(abs(np.angle(np.exp(1j * self.conditional_phase))) < 1e-9)


@dataclass(frozen=True)
class PBSReport:
    global_phase_equal: bool
    global_phase: float | None
    diagonal_equal: bool
    residual: DiagonalPhase | None
    routing: dict
    routing_ok: bool
    tol: float

    @property
    def residual_phases(self) -> tuple[float, ...]:
        """Per-output-basis phases of the residual, relative to |↑;0⟩."""
        if self.residual is None:
            return ()
        d = self.residual.diagonal() * np.exp(-1j * self.residual.global_phase)
        return tuple(float(a) for a in np.angle(d))


def routing_table(u: np.ndarray) -> dict:
    """For each input (s, k): probability that the electron leaves in wire k XOR s."""
    table = {}
    for s in (0, 1):
        for k in (0, 1):
            col = np.abs(u[:, s + 2 * k]) ** 2
            out_k = k ^ s
            table[(s, k)] = float(col[2 * out_k] + col[2 * out_k + 1])
    return table


def pbs_equivalence_report(tol: float = 1e-10) -> PBSReport:
    if not tol > 0:
        raise ValueError("tol must be positive")
    u_net = netlist_unitary(pbs_hardware_netlist())
    u_ref = pbs_behavioral()
    lam = core.global_phase(u_net, u_ref, tol)
    d_mat = u_net @ u_ref.conj().T
    off = d_mat - np.diag(np.diag(d_mat))
    diagonal_equal = bool(np.max(np.abs(off)) <= tol)
    residual = DiagonalPhase.from_diagonal(np.diag(d_mat)) if diagonal_equal else None
    routing = routing_table(u_net)
    routing_ok = all(abs(p - 1.0) <= tol for p in routing.values())
    return PBSReport(lam is not None, lam, diagonal_equal, residual, routing, routing_ok, tol)
