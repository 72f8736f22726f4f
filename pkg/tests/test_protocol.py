from itertools import product

import numpy as np
import pytest

from qsdc3.adversary import AttackModel, ChannelSegment
from qsdc3.protocol import (
    AbortPolicy,
    MessageTriple,
    ProtocolAborted,
    PublicTranscript,
    RoundBudgetExceeded,
    RoundKind,
    SchedulePolicy,
    announce,
    decode_alice,
    decode_bob,
    decode_charlie,
    encode_bob,
    encode_charlie,
    run_ab_check,
    run_ca_check,
    run_decoy_check,
    run_protocol,
)
from qsdc3.states import (
    Basis,
    DecoyState,
    Pauli,
    apply_pauli_on_transit,
    attach_ancilla_and_entangle,
    bell_state,
    prepare_decoy,
)


class TestEncoders:
    def test_bob_maps_bit_to_bit_flip(self):
        assert encode_bob(0) is Pauli.I
        assert encode_bob(1) is Pauli.X

    def test_charlie_maps_bit_to_phase_flip(self):
        assert encode_charlie(0) is Pauli.I
        assert encode_charlie(1) is Pauli.Z

    @pytest.mark.parametrize("j, k", list(product((0, 1), repeat=2)))
    def test_joint_encoding_reaches_label_jk(self, j, k, rng):
        state = apply_pauli_on_transit(bell_state((0, 0)), encode_bob(j))
        state = apply_pauli_on_transit(state, encode_charlie(k))
        from qsdc3.states import bell_measure

        label, _ = bell_measure(state, rng)
        assert (label.flip, label.phase) == (j, k)


class TestAnnounceAndDecode:
    def test_announce_examples(self):
        assert announce(1, 0, 1) == (0, 1)
        assert announce(0, 0, 0) == (0, 0)

    @pytest.mark.parametrize("r, s, i", list(product((0, 1), repeat=3)))
    def test_announced_xor_equals_outcome_xor(self, r, s, i):
        x, y = announce(r, s, i)
        assert x ^ y == r ^ s  # the mask cancels in the XOR

    def test_decode_examples(self):
        assert decode_alice(0, 1, 1) == (1, 0)
        assert decode_alice(0, 0, 0) == (0, 0)
        assert decode_bob(1, 0, 1) == (0, 0)
        assert decode_bob(0, 0, 0) == (0, 0)
        assert decode_charlie(1, 1, 1) == (0, 1)
        assert decode_charlie(0, 0, 0) == (0, 0)

    @pytest.mark.parametrize("i, j, k", list(product((0, 1), repeat=3)))
    def test_all_decodes_invert_announce(self, i, j, k):
        # Honest rounds have outcome (j, k); every party's rule must invert
        # the masking exactly, and Bob's and Charlie's views of Alice agree.
        x, y = announce(j, k, i)
        assert decode_alice(x, y, i) == (j, k)
        assert decode_bob(x, y, j) == (i, k)
        assert decode_charlie(x, y, k) == (i, j)
        assert decode_bob(x, y, j)[0] == decode_charlie(x, y, k)[0]


class TestChecks:
    def test_honest_pair_always_passes(self, rng):
        for _ in range(200):
            passed, _ = run_ab_check(bell_state((0, 0)), rng)
            assert passed

    def test_ca_check_mirrors_ab(self, rng):
        for _ in range(200):
            passed, _ = run_ca_check(bell_state((0, 0)), rng)
            assert passed

    def test_bit_flipped_pair_fails_exactly_in_z(self, rng):
        # After a bit-flip disturbance the pair is label (1,0): Z outcomes
        # become equal (fail) while X stays correlated (pass).
        transcript = PublicTranscript()
        disturbed = apply_pauli_on_transit(bell_state((0, 0)), Pauli.X)
        z_seen = x_seen = 0
        for round_index in range(300):
            passed, _ = run_ab_check(disturbed, rng, transcript, round_index)
            basis = transcript.events[-2].payload["basis"]
            if basis == "Z":
                z_seen += 1
                assert not passed
            else:
                x_seen += 1
                assert passed
        assert z_seen and x_seen

    def test_phase_flipped_pair_fails_exactly_in_x(self, rng):
        disturbed = apply_pauli_on_transit(bell_state((0, 0)), Pauli.Z)
        transcript = PublicTranscript()
        for round_index in range(300):
            passed, _ = run_ca_check(disturbed, rng, transcript, round_index)
            basis = transcript.events[-2].payload["basis"]
            assert passed == (basis == "Z")

    def test_unattacked_decoys_always_pass(self, rng):
        for label in DecoyState:
            for _ in range(50):
                passed, _ = run_decoy_check(label, prepare_decoy(label), rng)
                assert passed

    def test_probe_coupled_zero_decoy_fails_half_the_time(self, rng):
        fails = 0
        n = 2000
        for _ in range(n):
            received = attach_ancilla_and_entangle(prepare_decoy(DecoyState.ZERO), 0.5**0.5, 0.5**0.5)
            passed, _ = run_decoy_check(DecoyState.ZERO, received, rng)
            fails += not passed
        assert abs(fails / n - 0.5) < 4 * (0.25 / n) ** 0.5

    def test_probe_coupled_plus_decoy_never_fails(self, rng):
        for _ in range(200):
            received = attach_ancilla_and_entangle(prepare_decoy(DecoyState.PLUS), 0.6, 0.8)
            passed, _ = run_decoy_check(DecoyState.PLUS, received, rng)
            assert passed


class TestMessageTriple:
    def test_rejects_unequal_lengths(self):
        with pytest.raises(ValueError, match="same length"):
            MessageTriple((0, 1), (0,), (1, 1))

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="at least one"):
            MessageTriple((), (), ())

    def test_rejects_non_bits(self):
        with pytest.raises(ValueError, match="bits"):
            MessageTriple((0, 2), (0, 1), (1, 1))

    def test_random_is_deterministic(self):
        a = MessageTriple.random(16, np.random.default_rng(7))
        b = MessageTriple.random(16, np.random.default_rng(7))
        assert a == b


class TestSchedulePolicy:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match="p_ab_check"):
            SchedulePolicy(p_ab_check=1.5)

    def test_defaults(self):
        policy = SchedulePolicy()
        assert (policy.p_ab_check, policy.p_bob_cm, policy.p_charlie_cm) == (0.25, 0.25, 0.25)


class TestRunProtocol:
    def test_all_zero_messages_decode_exactly(self, rng):
        messages = MessageTriple((0,) * 8, (0,) * 8, (0,) * 8)
        result = run_protocol(messages, SchedulePolicy(), rng)
        assert result.decoded.alice_view_bob == (0,) * 8
        assert result.decoded.charlie_view_alice == (0,) * 8
        checks = [r for r in result.records if r.kind is not RoundKind.MESSAGE]
        assert all(r.check_passed for r in checks)

    def test_random_messages_decode_exactly(self, rng):
        messages = MessageTriple.random(64, rng)
        result = run_protocol(messages, SchedulePolicy(), rng)
        d = result.decoded
        assert d.alice_view_bob == messages.bob_bits
        assert d.alice_view_charlie == messages.charlie_bits
        assert d.bob_view_alice == messages.alice_bits
        assert d.bob_view_charlie == messages.charlie_bits
        assert d.charlie_view_alice == messages.alice_bits
        assert d.charlie_view_bob == messages.bob_bits

    def test_announced_xor_identity_on_every_message_round(self, rng):
        messages = MessageTriple.random(48, rng)
        result = run_protocol(messages, SchedulePolicy(), rng)
        for rec in result.records:
            if rec.kind is RoundKind.MESSAGE:
                x, y = rec.announcement
                assert x ^ y == rec.bob_bit ^ rec.charlie_bit
                assert (rec.bell_outcome.flip, rec.bell_outcome.phase) == (
                    rec.bob_bit,
                    rec.charlie_bit,
                )

    def test_message_index_conservation(self, rng):
        # Exactly one message record per bit, indices in order, and check
        # rounds never consume an index.
        messages = MessageTriple.random(32, rng)
        result = run_protocol(messages, SchedulePolicy(0.4, 0.3, 0.3), rng)
        message_records = [r for r in result.records if r.kind is RoundKind.MESSAGE]
        assert [r.message_index for r in message_records] == list(range(32))
        for rec in result.records:
            if rec.kind is not RoundKind.MESSAGE:
                assert rec.message_index is None
                assert rec.check_passed is not None
                assert rec.announcement is None
            else:
                assert rec.check_passed is None
                assert rec.announcement is not None

    def test_transcript_structure(self, rng):
        messages = MessageTriple.random(24, rng)
        result = run_protocol(messages, SchedulePolicy(), rng)
        transcript = result.transcript
        assert len(transcript.announcements()) == 24
        kinds = {e.kind for e in transcript}
        assert "bob_mode" in kinds and "announcement" in kinds
        # Decoy reveals and decoy verdicts come in pairs.
        reveals = transcript.decoy_reveals()
        decoy_checks = [r for r in result.records if r.kind is RoundKind.CHARLIE_DECOY_CHECK]
        assert len(reveals) == len(decoy_checks)

    def test_unattacked_checks_never_fail_in_bulk(self, rng):
        messages = MessageTriple.random(16, rng)
        for _ in range(20):
            result = run_protocol(messages, SchedulePolicy(0.45, 0.4, 0.4), rng)
            for rec in result.records:
                if rec.kind is not RoundKind.MESSAGE:
                    assert rec.check_passed

    def test_strict_abort_on_disturbance(self):
        rng = np.random.default_rng(99)
        messages = MessageTriple.random(100, rng)
        attack = AttackModel.disturbance(Pauli.X, ChannelSegment.A_TO_B)
        with pytest.raises(ProtocolAborted) as info:
            run_protocol(messages, SchedulePolicy(0.5, 0.25, 0.25), rng, attack=attack)
        abort = info.value
        assert abort.check_kind in (
            RoundKind.BOB_EAVESDROP_CHECK,
            RoundKind.BOB_CONTROL_CHECK,
        )
        assert ChannelSegment.A_TO_B in abort.touched_segments
        assert abort.records[abort.round_index].check_passed is False

    def test_strict_abort_probability_grows_with_checks(self):
        # Detection per A-B check is 1/2 for a bit-flip disturbance, so with
        # dozens of checks per run surviving to completion is hopeless.
        aborted = 0
        for seed in range(50):
            rng = np.random.default_rng(seed)
            messages = MessageTriple.random(100, rng)
            attack = AttackModel.disturbance(Pauli.X, ChannelSegment.A_TO_B)
            try:
                run_protocol(messages, SchedulePolicy(0.5, 0.25, 0.25), rng, attack=attack)
            except ProtocolAborted:
                aborted += 1
        assert aborted == 50

    def test_record_and_continue_completes_under_attack(self, rng):
        messages = MessageTriple.random(32, rng)
        attack = AttackModel.disturbance(Pauli.X, ChannelSegment.A_TO_B)
        result = run_protocol(
            messages,
            SchedulePolicy(0.5, 0.25, 0.25),
            rng,
            attack=attack,
            abort_policy=AbortPolicy.RECORD_AND_CONTINUE,
        )
        failures = [r for r in result.records if r.check_passed is False]
        assert failures  # plenty of failed checks were logged
        assert len([r for r in result.records if r.kind is RoundKind.MESSAGE]) == 32

    def test_round_budget_exceeded(self, rng):
        messages = MessageTriple.random(4, rng)
        with pytest.raises(RoundBudgetExceeded):
            run_protocol(messages, SchedulePolicy(p_ab_check=1.0), rng, max_rounds=64)

    def test_attack_touched_segments_recorded(self, rng):
        messages = MessageTriple.random(16, rng)
        attack = AttackModel.disturbance(Pauli.Z, ChannelSegment.B_TO_C)
        result = run_protocol(
            messages,
            SchedulePolicy(),
            rng,
            attack=attack,
            abort_policy=AbortPolicy.RECORD_AND_CONTINUE,
        )
        touched = [r for r in result.records if r.attack_touched]
        assert touched
        assert all(r.attack_touched == (ChannelSegment.B_TO_C,) for r in touched)
        # A-B check rounds end before the B->C hop, so they are untouched.
        for rec in result.records:
            if rec.kind is RoundKind.BOB_EAVESDROP_CHECK:
                assert rec.attack_touched == ()
