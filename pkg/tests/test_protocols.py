import math

import numpy as np
import pytest

from oracles import SX, SY, SZ, bell, entropy_bits, partial_trace, random_state
from spinqnet import core, gates, metrics, protocols as P
from spinqnet.core import PureState, mode, spin
from spinqnet.errors import InvalidStateError, InvalidTargetError
from spinqnet.protocols import BellState

H = 1 / math.sqrt(2)


def state(n, amps):
    return P.state_from_map(n, amps)


# --- spin-mode entangler ----------------------------------------------------------

def test_spin_mode_entangler_up():
    out = P.spin_mode_entangler(core.new_register(1), 0)
    assert np.max(np.abs(out.amplitudes - np.array([H, 0, 0, 1j * H]))) < 1e-12


def test_spin_mode_entangler_down():
    # hand expansion: BS|d0> = (|d0> + i|d1>)/√2, then flip spin on wire 1
    out = P.spin_mode_entangler(core.basis_state(1, "d0"), 0)
    expected = state(1, {"d0": 1, "u1": 1j}).amplitudes
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-12


def test_spin_mode_entangler_entropy():
    out = P.spin_mode_entangler(core.new_register(1), 0)
    assert abs(metrics.entanglement_entropy(out, [spin(0)]) - 1.0) < 1e-10


def test_spin_mode_entangler_hardware_layer_equivalent():
    gate = P.spin_mode_entangler(core.new_register(2), 1)
    hard = P.spin_mode_entangler(core.new_register(2), 1, layer="hardware")
    assert abs(gate.fidelity(hard) - 1) < 1e-12


def test_spin_mode_entangler_checks_electron():
    with pytest.raises(InvalidTargetError):
        P.spin_mode_entangler(core.new_register(1), 1)
    with pytest.raises(ValueError):
        P.spin_mode_entangler(core.new_register(1), 0, layer="optical")


# --- mode-mode entangler --------------------------------------------------------

def _mode_oracle(phi):
    """Modes only, |k1 k2> with k1 the left Kronecker factor."""
    bs = gates.rx(math.pi / 4)
    c = np.diag([1, 1, 1, np.exp(1j * phi)])
    v = np.array([1, 0, 0, 0], dtype=complex)
    v = np.kron(bs, bs) @ v
    v = c @ v
    return np.kron(np.eye(2), bs) @ v


def test_phi_star_from_brute_force_sweep():
    grid = np.linspace(0, 2 * math.pi, 721)
    ent = []
    for phi in grid:
        v = _mode_oracle(phi)
        rho = partial_trace(v, [1], 2)  # keep k1 (the high bit)
        ent.append(entropy_bits(rho))
    best = grid[int(np.argmax(ent))]
    assert best == pytest.approx(P.PHI_STAR, abs=1e-9)
    assert max(ent) == pytest.approx(1.0, abs=1e-12)


def test_mode_oracle_at_phi_star_is_i_psi_plus():
    assert np.max(np.abs(_mode_oracle(P.PHI_STAR) - 1j * bell("psi+"))) < 1e-12


@pytest.mark.parametrize("layer", P.LAYERS)
def test_mode_mode_entangler(layer):
    r = P.mode_mode_entangler(P.PHI_STAR, layer)
    assert r.derived["fidelity_i_psi_plus"] > 1 - 1e-10
    assert r.derived["spins_up_probability"] == pytest.approx(1.0, abs=1e-12)
    assert r.derived["mode_entropy"] == pytest.approx(1.0, abs=1e-10)


def test_mode_mode_entangler_gate_level_exact_amplitudes():
    out = P.mode_mode_entangler(P.PHI_STAR).final_state
    expected = state(2, {"u0,u1": 1j, "u1,u0": 1j}).amplitudes
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-12


def test_mode_mode_entangler_phi_zero_is_product():
    r = P.mode_mode_entangler(0.0)
    assert r.derived["mode_entropy"] < 1e-10


# --- Bell measurement -------------------------------------------------------------

@pytest.mark.parametrize("name,which", [("phi+", BellState.PHI_PLUS), ("phi-", BellState.PHI_MINUS),
                                        ("psi+", BellState.PSI_PLUS), ("psi-", BellState.PSI_MINUS)])
def test_bell_measure_identifies_each_bell_state(name, which):
    s = P.spin_bell_state(which)
    for seed in range(5):
        outcome, _ = P.bell_measure(s, spin(0), spin(1), seed)
        assert outcome.which is which
        assert outcome.probability == pytest.approx(1.0)
    assert np.allclose(which.vector(), bell(name))


def test_bell_measure_product_input_statistics():
    s = core.new_register(2)
    n = 10_000
    hits = {b: 0 for b in BellState}
    for seed in range(n):
        outcome, _ = P.bell_measure(s, spin(0), spin(1), seed)
        hits[outcome.which] += 1
    assert abs(hits[BellState.PHI_PLUS] / n - 0.5) < 0.02
    assert abs(hits[BellState.PHI_MINUS] / n - 0.5) < 0.02
    assert hits[BellState.PSI_PLUS] == hits[BellState.PSI_MINUS] == 0


def test_bell_measure_ignores_global_phase():
    s = core.new_register(2)
    t = PureState(2, np.exp(0.9j) * s.amplitudes)
    for seed in range(20):
        a, _ = P.bell_measure(s, spin(0), spin(1), seed)
        b, _ = P.bell_measure(t, spin(0), spin(1), seed)
        assert a.raw_bits == b.raw_bits and a.probability == pytest.approx(b.probability, abs=1e-14)


def test_bell_measure_needs_distinct_qubits():
    with pytest.raises(InvalidTargetError):
        P.bell_measure(core.new_register(2), spin(0), spin(0), 1)


# --- entanglement swapping ----------------------------------------------------------

def test_swapping_outcome_probabilities_by_expansion():
    # (1/2) Σ i^(x+y) |xy>_spins |xy>_modes: every mode Bell outcome has p = 1/4
    s = P.swapping_input()
    expected = state(2, {"u0,u0": 1, "d1,u0": 1j, "u0,d1": 1j, "d1,d1": -1})
    assert np.max(np.abs(s.amplitudes - expected.amplitudes)) < 1e-12
    rotated = P.run(s, P.bell_analyzer(mode(0), mode(1), 2))
    assert np.allclose(core.outcome_probabilities(rotated, [mode(0), mode(1)]), 0.25)


# spin state left behind for each mode outcome, from the expansion above
SWAP_TABLE = {
    BellState.PHI_PLUS: BellState.PHI_MINUS,
    BellState.PHI_MINUS: BellState.PHI_PLUS,
    BellState.PSI_PLUS: BellState.PSI_PLUS,
    BellState.PSI_MINUS: BellState.PSI_MINUS,
}


@pytest.mark.parametrize("seed", range(8))
def test_swapping_result_per_outcome(seed):
    r = P.entanglement_swapping(seed)
    which = list(BellState)[int(r.derived["outcome_index"])]
    assert int(r.derived["spin_bell_index"]) == SWAP_TABLE[which].index
    assert r.derived["spin_bell_fidelity"] == pytest.approx(1.0, abs=1e-12)
    assert abs(r.derived["spin_entropy"] - 1) < 1e-10
    assert r.derived["spin_concurrence"] > 1 - 1e-9
    assert r.records[0].post_state is r.final_state


def test_swapping_frozen_outcomes():
    # default_rng(seed).random() picks the outcome; all four are equally likely
    got = [int(P.entanglement_swapping(s).derived["outcome_index"]) for s in (3, 5)]
    expected = []
    for s in (3, 5):
        u = np.random.default_rng(s).random()
        bits = core.outcome_string(int(u * 4), 2)
        expected.append(P.BELL_FROM_BITS[bits].index)
    assert got == expected


def test_swapping_deterministic():
    a, b = P.entanglement_swapping(17), P.entanglement_swapping(17)
    assert a.final_state == b.final_state and a.derived == b.derived


def test_swapping_statistics_match_individual_runs():
    stats = P.entanglement_swapping_statistics(50, seed=200)
    for b in BellState:
        direct = sum(int(P.entanglement_swapping(200 + i).derived["outcome_index"]) == b.index for i in range(50))
        assert stats.counts[b] == direct


def test_swapping_hardware_layer():
    r = P.entanglement_swapping(3, layer="hardware")
    assert r.derived["spin_concurrence"] > 1 - 1e-9


# --- entanglement transfer -------------------------------------------------------

def test_transfer_maps_input_to_target():
    out = P.entanglement_transfer(P.transfer_input())
    assert np.max(np.abs(out.amplitudes - P.transfer_target().amplitudes)) < 1e-12


def test_transfer_entropy_bookkeeping():
    before, after = P.transfer_input(), P.entanglement_transfer(P.transfer_input())
    s0, m0 = P.spin_and_mode_entropies(before)
    s1, m1 = P.spin_and_mode_entropies(after)
    assert (s0, m0, s1, m1) == pytest.approx((0.0, 1.0, 1.0, 0.0), abs=1e-10)
    assert s0 + m0 == pytest.approx(s1 + m1, abs=1e-10)


def test_transfer_is_involution():
    rng = np.random.default_rng(12)
    s = PureState(2, random_state(rng, 16))
    assert abs(P.entanglement_transfer(P.entanglement_transfer(s)).fidelity(s) - 1) < 1e-12


def test_transfer_needs_two_electrons():
    with pytest.raises(InvalidTargetError):
        P.entanglement_transfer(core.new_register(1))


# --- hyper-entangler ---------------------------------------------------------

def test_hyper_input_is_product_of_entangler_outputs():
    assert np.max(np.abs(P.swapping_input().amplitudes - P.hyper_input().amplitudes)) < 1e-12


def test_hyper_entangler_output():
    out = P.hyper_entangler(P.hyper_input())
    assert np.max(np.abs(out.amplitudes - P.hyper_target().amplitudes)) < 1e-12


def test_hyper_entangler_ebits():
    before = P.hyper_input()
    out = P.hyper_entangler(before)
    assert metrics.schmidt_rank(out, [spin(0), spin(1)]) == 1
    assert metrics.entanglement_entropy(out, [spin(0), spin(1)]) < 1e-10
    total_before = sum(metrics.entanglement_entropy(before, [spin(e)]) for e in (0, 1))
    total_after = sum(P.spin_and_mode_entropies(out))
    assert total_before == pytest.approx(2.0, abs=1e-10)
    assert total_after == pytest.approx(2.0, abs=1e-10)
    assert metrics.entanglement_entropy(out, [spin(0)]) == pytest.approx(1.0, abs=1e-10)


def test_hyper_entangler_hardware_layer():
    out = P.hyper_entangler(P.hyper_input(), layer="hardware")
    assert abs(out.fidelity(P.hyper_target()) - 1) < 1e-10


# --- Stern-Gerlach ---------------------------------------------------------------

def _sigma_n(theta):
    return math.sin(theta) * SY + math.cos(theta) * SZ


def test_polarized_spin_points_along_n():
    for t0 in (0.0, 0.4, 2.0, -1.3):
        a, b = P.polarized_spin(t0)
        v = np.array([a, b])
        assert np.vdot(v, _sigma_n(t0) @ v).real == pytest.approx(1.0, abs=1e-12)


def test_stern_gerlach_cos2_law():
    t0 = 0.7
    spin_in = P.polarized_spin(t0)
    for t in np.linspace(-3, 3, 13):
        assert P.stern_gerlach_p_up(t, spin_in) == pytest.approx(math.cos((t - t0) / 2) ** 2, abs=1e-12)


def test_stern_gerlach_oracle_rotation():
    # direct oracle: |<u| exp(-iθσx/2) |ψ>|²
    rng = np.random.default_rng(1)
    v = random_state(rng, 2)
    for t in (0.3, 1.9):
        u = math.cos(t / 2) * np.eye(2) - 1j * math.sin(t / 2) * SX
        assert P.stern_gerlach_p_up(t, v) == pytest.approx(abs((u @ v)[0]) ** 2, abs=1e-12)


def test_stern_gerlach_paper_angle_view():
    t0 = 0.3
    spin_in = P.polarized_spin(t0, paper_angle=True)
    for t in np.linspace(0, math.pi, 7):
        assert P.stern_gerlach_p_up(t, spin_in, paper_angle=True) == pytest.approx(math.cos(t - t0) ** 2, abs=1e-12)


def test_stern_gerlach_extremes():
    t0 = 1.1
    s = P.polarized_spin(t0)
    assert P.stern_gerlach_p_up(t0, s) == pytest.approx(1.0, abs=1e-12)
    assert P.stern_gerlach_p_up(t0 + math.pi, s) == pytest.approx(0.0, abs=1e-12)
    assert P.stern_gerlach_p_up(t0 + 2 * math.pi, s) == pytest.approx(1.0, abs=1e-12)


def test_stern_gerlach_unpolarized():
    for t in np.linspace(0, 2 * math.pi, 37):
        assert abs(P.unpolarized_p_up(t) - 0.5) < 1e-12


def test_stern_gerlach_hardware_layer():
    s = P.polarized_spin(0.4)
    for t in (0.0, 1.0, 2.5):
        assert P.stern_gerlach_p_up(t, s, layer="hardware") == pytest.approx(P.stern_gerlach_p_up(t, s), abs=1e-12)


def test_stern_gerlach_rejects_unnormalised():
    with pytest.raises(InvalidStateError):
        P.stern_gerlach_p_up(0.0, (1, 1))


def test_sweep_fit_recovers_law():
    thetas, p = P.stern_gerlach_sweep(0.5, 37)
    assert thetas[0] == 0 and thetas[-1] == pytest.approx(2 * math.pi)
    fit = metrics.fit_polarization(list(zip(thetas / 2, p)))
    assert fit.residual < 1e-9 and fit.degree == pytest.approx(1.0, abs=1e-9)
    assert metrics.angle_distance_mod_pi(fit.theta0, 0.25) < 1e-8


# --- CHSH ---------------------------------------------------------------------------

def _corr_oracle(v_s1s2, t1, t2):
    op = np.kron(_sigma_n(t1), _sigma_n(t2))
    return float(np.vdot(v_s1s2, op @ v_s1s2).real)


@pytest.mark.parametrize("which", list(BellState))
def test_chsh_correlation_matches_oracle(which):
    s = P.spin_bell_state(which)
    for t1, t2 in ((0.0, 0.0), (0.3, -1.2), (2.0, 0.5)):
        assert P.chsh_correlation(s, t1, t2) == pytest.approx(_corr_oracle(which.vector(), t1, t2), abs=1e-12)


def test_chsh_phi_plus_closed_form():
    s = P.spin_bell_state(BellState.PHI_PLUS)
    for t1, t2 in ((0.2, 0.2), (0.4, -0.4), (1.0, 0.3)):
        assert P.chsh_correlation(s, t1, t2) == pytest.approx(math.cos(t1 + t2), abs=1e-12)
    assert P.chsh_correlation(s, 0.0, 0.0) == pytest.approx(1.0)


def test_chsh_product_state():
    s = core.new_register(2)
    for t1, t2 in ((0.3, 1.0), (2.0, -0.7)):
        assert P.chsh_correlation(s, t1, t2) == pytest.approx(math.cos(t1) * math.cos(t2), abs=1e-12)


def test_chsh_canonical_angles_reach_tsirelson():
    s = P.spin_bell_state(BellState.PHI_PLUS)
    assert abs(P.chsh_S(s) - 2 * math.sqrt(2)) < 1e-10


def test_chsh_alternative_angle_tuple():
    # (0, π/2, π/4, -π/4) gives S = 0 on every standard Bell state but the
    # CHSH operator at these angles still has top eigenvalue 2√2
    angles = (0.0, math.pi / 2, math.pi / 4, -math.pi / 4)
    for which in BellState:
        assert abs(P.chsh_S(P.spin_bell_state(which), angles)) < 1e-12
    assert P.chsh_quantum_max(angles) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_chsh_bounds_random():
    rng = np.random.default_rng(77)
    for _ in range(100):
        s = PureState(2, random_state(rng, 16))
        t1, t2 = rng.uniform(-math.pi, math.pi, 2)
        assert abs(P.chsh_correlation(s, t1, t2)) <= 1 + 1e-12
    bell_state = P.spin_bell_state(BellState.PHI_PLUS)
    for _ in range(100):
        angles = rng.uniform(-math.pi, math.pi, 4)
        assert P.chsh_S(bell_state, angles) <= 2 * math.sqrt(2) + 1e-9


def test_chsh_on_transferred_state():
    s = P.entanglement_transfer(P.transfer_input())
    assert abs(P.chsh_S(s) - 2 * math.sqrt(2)) < 1e-10


# --- named protocols -------------------------------------------------------------

@pytest.mark.parametrize("name", P.PROTOCOL_NAMES)
def test_every_named_protocol_runs(name):
    r = P.run_protocol(name, seed=1)
    assert r.derived and all(math.isfinite(v) for v in r.derived.values())


def test_unknown_protocol():
    with pytest.raises(ValueError):
        P.run_protocol("teleport")
