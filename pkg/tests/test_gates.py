import math

import numpy as np
import pytest

from oracles import I2, SX, SZ, kron_embed
from spinqnet import core, gates
from spinqnet.core import mode, spin
from spinqnet.errors import InvalidGateError, InvalidTargetError
from spinqnet.gates import Circuit, GateKind, GateOp, op


def test_rotation_convention_is_full_angle():
    # exp(+iθσ): Rx(π/4) is a 50/50 splitter with phase i on the crossed path
    h = 1 / math.sqrt(2)
    assert np.allclose(gates.rx(math.pi / 4), [[h, 1j * h], [1j * h, h]])
    assert np.allclose(gates.rz(0.3), np.diag([np.exp(0.3j), np.exp(-0.3j)]))
    assert np.allclose(gates.rx(0.4), np.cos(0.4) * I2 + 1j * np.sin(0.4) * SX)


def test_fixed_matrices():
    assert np.allclose(gates.HADAMARD, (SX + SZ) / math.sqrt(2))
    assert np.allclose(gates.CNOT, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    assert np.allclose(gates.SWAP, [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.allclose(gates.cphase(1.0), np.diag([1, 1, 1, np.exp(1j)]))
    assert np.allclose(gates.phase(1.0), np.diag([1, np.exp(1j)]))


@pytest.mark.parametrize("kind", list(GateKind))
def test_gate_unitaries_are_unitary(kind):
    u = gates.gate_unitary(kind, 0.9 if kind.has_angle else None)
    assert core.is_unitary(u)
    assert u.shape == (2 ** kind.arity,) * 2


def test_gate_angle_validation():
    with pytest.raises(InvalidGateError):
        gates.gate_unitary("rx")
    with pytest.raises(InvalidGateError):
        gates.gate_unitary("h", 0.1)
    with pytest.raises(InvalidGateError):
        gates.gate_unitary("p", float("nan"))
    with pytest.raises(InvalidGateError):
        op("cnot", spin(0))
    with pytest.raises(InvalidTargetError):
        op("cnot", spin(0), spin(0))
    with pytest.raises(InvalidGateError):
        op("rz", spin(0))


def test_circuit_rejects_out_of_range_target():
    with pytest.raises(InvalidTargetError):
        Circuit(1, (op("h", spin(1)),))


def test_first_target_is_control():
    # CNOT(s0 -> k1): |d0, u0> -> |d0, u1>
    s = core.basis_state(2, "d0,u0")
    out = gates.apply_op(s, op("cnot", spin(0), mode(1)))
    assert out == core.basis_state(2, "d0,u1")
    # control off: nothing happens
    s = core.basis_state(2, "u0,d0")
    assert gates.apply_op(s, op("cnot", spin(0), mode(1))) == s


def test_circuit_unitary_matches_kron_product():
    c = Circuit(2, (op("h", spin(0)), op("cnot", spin(0), mode(1)), op("rz", mode(0), angle=0.3)))
    expected = np.eye(16, dtype=complex)
    for g in c.ops:
        flats = [t.flat for t in g.lsb_targets()]
        expected = kron_embed(g.matrix(), flats, 4) @ expected
    assert np.max(np.abs(gates.circuit_unitary(c) - expected)) < 1e-14


def test_run_circuit_equals_unitary():
    rng = np.random.default_rng(2)
    c = Circuit(2, (op("rx", spin(1), angle=0.2), op("swap", spin(1), mode(0)), op("cphase", mode(0), mode(1), angle=1.1)))
    v = rng.normal(size=16) + 1j * rng.normal(size=16)
    s = core.PureState.from_amplitudes(v, normalize=True)
    assert np.allclose(gates.run_circuit(s, c).amplitudes, gates.circuit_unitary(c) @ s.amplitudes, atol=1e-14)


def test_identity_suite_all_pass():
    report = gates.verify_identities(1e-10)
    assert [c.name for c in report.checks] == list("abcdef")
    assert report.all_passed, report.failures()
    assert max(c.max_error for c in report.checks) < 1e-14


def test_identity_suite_detects_broken_tolerance():
    with pytest.raises(ValueError):
        gates.verify_identities(0.0)


def test_identity_thetas_frozen():
    thetas = gates.identity_thetas()
    assert len(thetas) == 15
    assert thetas[:5] == gates.IDENTITY_THETA_GRID
    again = gates.identity_thetas()
    assert thetas == again


def test_hadamard_identity_phase_is_minus_i():
    # the identity holds with exactly -i, not merely up to global phase
    rhs = gates.rz(math.pi / 4) @ gates.rx(math.pi / 4) @ gates.rz(math.pi / 4)
    assert core.global_phase(gates.HADAMARD, rhs) == pytest.approx(-math.pi / 2)


def test_gateop_str():
    assert str(op("cnot", spin(0), mode(1))) == "cnot s0 k1"
    assert str(op("p", mode(0), angle=0.5)) == "p k0 0.5"
