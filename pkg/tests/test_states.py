import math

import numpy as np
import pytest

from qsdc3.states import (
    Basis,
    BellLabel,
    DecoyState,
    JointState,
    Pauli,
    Subsystem,
    allclose_up_to_global_phase,
    apply_pauli_on_transit,
    attach_ancilla_and_entangle,
    bell_measure,
    bell_state,
    collapse_outcome,
    decoy_basis_and_bit,
    measure_ancilla_and_discard,
    measure_qubit,
    outcome_probabilities,
    prepare_decoy,
)

RH = math.sqrt(0.5)
PAIR = (Subsystem.HOME, Subsystem.TRANSIT)


def amps_close(state, expected, atol=1e-12):
    return all(abs(a - e) <= atol for a, e in zip(state.amps, expected))


class TestBellStates:
    # Amplitude conventions over (|00>, |01>, |10>, |11>).
    @pytest.mark.parametrize(
        "label, expected",
        [
            ((0, 0), (0, RH, RH, 0)),
            ((1, 0), (RH, 0, 0, RH)),
            ((0, 1), (0, -RH, RH, 0)),
            ((1, 1), (RH, 0, 0, -RH)),
        ],
    )
    def test_amplitudes(self, label, expected):
        assert amps_close(bell_state(label), expected)

    def test_accepts_bell_label(self):
        assert bell_state(BellLabel(1, 1)) is bell_state((1, 1))

    def test_normalized(self):
        for label in ((0, 0), (0, 1), (1, 0), (1, 1)):
            amps = bell_state(label).amps
            assert abs(sum(abs(a) ** 2 for a in amps) - 1.0) < 1e-12

    def test_label_bits_validated(self):
        with pytest.raises(ValueError):
            BellLabel(2, 0)


class TestPauliOnTransit:
    def test_bit_flip_moves_00_to_10(self):
        out = apply_pauli_on_transit(bell_state((0, 0)), Pauli.X)
        assert amps_close(out, bell_state((1, 0)).amps)

    def test_phase_flip_moves_10_to_11(self):
        out = apply_pauli_on_transit(bell_state((1, 0)), Pauli.Z)
        assert amps_close(out, bell_state((1, 1)).amps)

    def test_phase_flip_moves_00_to_01(self):
        # (|01>+|10>)/sqrt2 -> (|10>-|01>)/sqrt2, exactly the listed sign.
        out = apply_pauli_on_transit(bell_state((0, 0)), Pauli.Z)
        assert amps_close(out, bell_state((0, 1)).amps)

    def test_identity_returns_same_state(self, rng):
        for label in ((0, 0), (1, 1)):
            state = bell_state(label)
            assert apply_pauli_on_transit(state, Pauli.I).amps == state.amps

    @pytest.mark.parametrize("j", [0, 1])
    @pytest.mark.parametrize("k", [0, 1])
    def test_encoding_identity(self, j, k, rng):
        # Bit flip to the j-th power then phase flip to the k-th power on the
        # transit qubit maps the base pair to label (j, k) with certainty.
        state = bell_state((0, 0))
        if j:
            state = apply_pauli_on_transit(state, Pauli.X)
        if k:
            state = apply_pauli_on_transit(state, Pauli.Z)
        label, post = bell_measure(state, rng)
        assert (label.flip, label.phase) == (j, k)
        assert allclose_up_to_global_phase(post, bell_state((j, k)))

    def test_norm_preserved(self, rng):
        state = bell_state((0, 1))
        for pauli in (Pauli.X, Pauli.Z, Pauli.X):
            state = apply_pauli_on_transit(state, pauli)
            assert abs(sum(abs(a) ** 2 for a in state.amps) - 1.0) < 1e-12


class TestBellMeasure:
    @pytest.mark.parametrize("label", [(0, 0), (0, 1), (1, 0), (1, 1)])
    def test_eigenstates_are_certain(self, label, rng):
        for _ in range(8):
            out, post = bell_measure(bell_state(label), rng)
            assert (out.flip, out.phase) == label
            assert post is bell_state(label)

    def test_rejects_probe_carrying_state(self, rng):
        state = attach_ancilla_and_entangle(bell_state((0, 0)), RH, RH)
        with pytest.raises(ValueError, match="probe"):
            bell_measure(state, rng)

    def test_rejects_lone_qubit(self, rng):
        with pytest.raises(ValueError):
            bell_measure(prepare_decoy(DecoyState.PLUS), rng)

    def test_after_probe_projection_onto_chi0(self, scripted):
        # Probe-coupled pair with alpha = beta = 1/sqrt2: reading chi0 leaves
        # the original pair, so the joint measurement is certain.
        state = attach_ancilla_and_entangle(bell_state((0, 0)), RH, RH)
        outcome, remaining = measure_ancilla_and_discard(state, scripted([0.3]))
        assert outcome == 0
        label, _ = bell_measure(remaining, scripted([0.9]))
        assert (label.flip, label.phase) == (0, 0)

    def test_outcome_distribution_uniform_on_probe_free_mix(self, rng):
        # The equal superposition of labels (0,0) and (1,0) is (0.5,.5,.5,.5);
        # a joint measurement samples those two labels evenly.
        state = JointState((0.5, 0.5, 0.5, 0.5), PAIR)
        counts = {(0, 0): 0, (1, 0): 0}
        for _ in range(400):
            label, _ = bell_measure(state, rng)
            counts[(label.flip, label.phase)] += 1
        assert counts[(0, 0)] + counts[(1, 0)] == 400
        assert 130 < counts[(0, 0)] < 270


class TestMeasureQubit:
    def test_z_anticorrelation(self, scripted):
        # Transit read as 0 collapses the home qubit to |1>.
        outcome, post = measure_qubit(bell_state((0, 0)), Subsystem.TRANSIT, Basis.Z, scripted([0.2]))
        assert outcome == 0
        assert amps_close(post, (0, 0, 1, 0))
        home, _ = measure_qubit(post, Subsystem.HOME, Basis.Z, scripted([0.99]))
        assert home == 1

    def test_x_correlation(self, scripted):
        # Transit read as + collapses the home qubit to |+>.
        outcome, post = measure_qubit(bell_state((0, 0)), Subsystem.TRANSIT, Basis.X, scripted([0.2]))
        assert outcome == 0
        p_plus, _ = outcome_probabilities(post, Subsystem.HOME, Basis.X)
        assert p_plus == pytest.approx(1.0, abs=1e-12)

    def test_plus_decoy_is_x_eigenstate(self, rng):
        for _ in range(16):
            outcome, post = measure_qubit(prepare_decoy(DecoyState.PLUS), Subsystem.TRANSIT, Basis.X, rng)
            assert outcome == 0
            assert amps_close(post, (RH, RH))

    def test_missing_subsystem_rejected(self, rng):
        with pytest.raises(ValueError, match="ancilla"):
            measure_qubit(bell_state((0, 0)), Subsystem.ANCILLA, Basis.Z, rng)
        with pytest.raises(ValueError, match="home"):
            measure_qubit(prepare_decoy(DecoyState.ZERO), Subsystem.HOME, Basis.Z, rng)

    @pytest.mark.parametrize("label", [(0, 0), (0, 1), (1, 0), (1, 1)])
    @pytest.mark.parametrize("basis", [Basis.Z, Basis.X])
    def test_transit_marginal_is_maximally_mixed(self, label, basis, rng):
        # The lone transit qubit of any entangled pair reveals nothing: both
        # outcomes are exactly equally likely, whichever label was encoded.
        p0, p1 = outcome_probabilities(bell_state(label), Subsystem.TRANSIT, basis)
        assert p0 == pytest.approx(0.5, abs=1e-12)
        hits = sum(
            measure_qubit(bell_state(label), Subsystem.TRANSIT, basis, rng)[0] for _ in range(600)
        )
        assert 240 < hits < 360


class TestDecoys:
    @pytest.mark.parametrize(
        "label, expected",
        [
            (DecoyState.ZERO, (1, 0)),
            (DecoyState.ONE, (0, 1)),
            (DecoyState.PLUS, (RH, RH)),
            (DecoyState.MINUS, (RH, -RH)),
        ],
    )
    def test_preparations(self, label, expected):
        state = prepare_decoy(label)
        assert amps_close(state, expected)
        assert state.subsystems == (Subsystem.TRANSIT,)
        assert not state.has_home

    def test_basis_and_bit(self):
        assert decoy_basis_and_bit(DecoyState.ZERO) == (Basis.Z, 0)
        assert decoy_basis_and_bit(DecoyState.MINUS) == (Basis.X, 1)

    def test_measuring_in_own_basis_reproduces_label(self, rng):
        for label in DecoyState:
            basis, expected = decoy_basis_and_bit(label)
            outcome, _ = measure_qubit(prepare_decoy(label), Subsystem.TRANSIT, basis, rng)
            assert outcome == expected


class TestProbeCoupling:
    def test_pair_becomes_weighted_mix_of_labels(self):
        # alpha |(0,0) pair>|chi0> + beta |(1,0) pair>|chi1>
        alpha, beta = 0.6, 0.8
        state = attach_ancilla_and_entangle(bell_state((0, 0)), alpha, beta)
        a, b = alpha * RH, beta * RH
        assert state.subsystems == (Subsystem.HOME, Subsystem.TRANSIT, Subsystem.ANCILLA)
        assert amps_close(state, (0, b, a, 0, a, 0, 0, b))

    def test_plus_decoy_factorizes(self):
        # |+> (alpha |chi0> + beta |chi1>): the flying qubit stays untouched.
        alpha, beta = 0.6, 0.8
        state = attach_ancilla_and_entangle(prepare_decoy(DecoyState.PLUS), alpha, beta)
        assert amps_close(state, (alpha * RH, beta * RH, alpha * RH, beta * RH))
        p_plus, _ = outcome_probabilities(state, Subsystem.TRANSIT, Basis.X)
        assert p_plus == pytest.approx(1.0, abs=1e-12)

    def test_minus_decoy_keeps_its_sign(self):
        for alpha, beta in ((0.6, 0.8), (RH, RH), (1.0, 0.0)):
            state = attach_ancilla_and_entangle(prepare_decoy(DecoyState.MINUS), alpha, beta)
            _, p_minus = outcome_probabilities(state, Subsystem.TRANSIT, Basis.X)
            assert p_minus == pytest.approx(1.0, abs=1e-12)

    def test_zero_decoy_entangles(self):
        alpha, beta = 0.6, 0.8
        state = attach_ancilla_and_entangle(prepare_decoy(DecoyState.ZERO), alpha, beta)
        assert amps_close(state, (alpha, 0, 0, beta))

    def test_identity_coupling(self):
        state = attach_ancilla_and_entangle(bell_state((0, 1)), 1.0, 0.0)
        assert amps_close(state, (0, 0, -RH, 0, RH, 0, 0, 0))

    def test_rejects_unnormalized_coefficients(self):
        with pytest.raises(ValueError, match="alpha"):
            attach_ancilla_and_entangle(bell_state((0, 0)), 0.9, 0.8)

    def test_rejects_second_probe(self):
        state = attach_ancilla_and_entangle(bell_state((0, 0)), RH, RH)
        with pytest.raises(ValueError, match="already"):
            attach_ancilla_and_entangle(state, RH, RH)

    def test_norm_preserved_for_complex_coefficients(self):
        alpha = complex(0.5, 0.5)
        beta = complex(-0.5, 0.5)
        state = attach_ancilla_and_entangle(bell_state((1, 1)), alpha, beta)
        assert abs(sum(abs(a) ** 2 for a in state.amps) - 1.0) < 1e-12

    def test_probe_statistics(self, rng):
        # Reading the probe yields chi1 with probability |beta|^2 when the
        # flying qubit came from the Z family.
        beta_sq = 0.3
        alpha, beta = math.sqrt(1 - beta_sq), math.sqrt(beta_sq)
        p_chi0, p_chi1 = outcome_probabilities(
            attach_ancilla_and_entangle(bell_state((0, 0)), alpha, beta),
            Subsystem.ANCILLA,
            Basis.Z,
        )
        assert p_chi1 == pytest.approx(beta_sq, abs=1e-12)
        flips = 0
        for _ in range(2000):
            state = attach_ancilla_and_entangle(prepare_decoy(DecoyState.ZERO), alpha, beta)
            outcome, rest = measure_ancilla_and_discard(state, rng)
            flips += outcome
            assert not rest.has_ancilla
        se = math.sqrt(beta_sq * (1 - beta_sq) / 2000)
        assert abs(flips / 2000 - beta_sq) < 4 * se


class TestJointStateInvariants:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="normalized"):
            JointState((1.0, 1.0, 0.0, 0.0), PAIR)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="amplitude count"):
            JointState((1.0, 0.0), PAIR)

    def test_rejects_missing_transit(self):
        with pytest.raises(ValueError, match="transit"):
            JointState((1.0, 0.0), (Subsystem.HOME,))

    def test_rejects_out_of_order_register(self):
        with pytest.raises(ValueError, match="order"):
            JointState((1.0, 0.0, 0.0, 0.0), (Subsystem.TRANSIT, Subsystem.HOME))

    def test_global_phase_equivalence(self):
        state = bell_state((0, 1))
        negated = JointState(tuple(-a for a in state.amps), PAIR)
        assert allclose_up_to_global_phase(state, negated)
        assert not allclose_up_to_global_phase(state, bell_state((1, 1)))

    def test_collapse_outcome_is_deterministic_projection(self):
        # Projecting the transit qubit of the base pair onto |1> leaves |0>
        # on the home side.
        post = collapse_outcome(bell_state((0, 0)), Subsystem.TRANSIT, Basis.Z, 1)
        assert amps_close(post, (0, 1, 0, 0))
