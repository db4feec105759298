"""State-vector simulation of flying-electron networks (spin + mode qubits)
and a compiler between abstract gates and spintronic hardware elements."""

from .core import (
    Dof,
    MeasurementRecord,
    PureState,
    QubitRef,
    apply_gate,
    basis_state,
    equiv_global_phase,
    global_phase,
    measure,
    mode,
    new_register,
    reduced_density,
    spin,
)
from .errors import (
    DegenerateSamplesError,
    InvalidGateError,
    InvalidStateError,
    InvalidTargetError,
    NonUnitaryError,
    ParseError,
    SpinqnetError,
    UnsupportedGateError,
)
from .gates import Circuit, GateKind, GateOp, verify_identities
from .hardware import HardwareElement, Netlist, netlist_unitary, pbs_equivalence_report, simulate
from .metrics import concurrence, entanglement_entropy, fit_polarization
from .synthesis import euler_zxz, lower_to_netlist, peephole_rewrite, swap_sigma_k_circuit

__version__ = "0.1.0"
