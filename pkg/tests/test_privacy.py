import numpy as np
import pytest

from collab import PassSettings, run_chain
from lti import (
    RationalEntry,
    Signal,
    TransferMatrix,
    apply_filter,
    filter_periodic,
    relay_length,
    response_distance,
    tf_multiply,
    tf_poles,
)
from lti.serialization import SchemaError
from privacy import (
    ACCURACY_TOL,
    AccuracyReport,
    Obfuscator,
    ObfuscatorFamily,
    RelayMessage,
    VehicleComparison,
    accuracy_preserving,
    construct_alternative_explanation,
    explanation_residuals,
    generate_obfuscator,
    obfuscate,
    obfuscate_general,
    random_orders,
    reshaping_distance,
    verify_accuracy_preservation,
)
from road import generate_road
from utils.errors import DimensionError, ObfuscatorError, RoadCollabError
from vehicle import make_fleet
from conftest import sine_signal


def entry(zeros, poles, gain):
    return RationalEntry(np.array(zeros, dtype=complex), np.array(poles, dtype=complex), gain)


def coupled_pair(shift=0.0):
    """Small invertible 2x2 stand-ins for a sender's T and S."""
    T = TransferMatrix(((entry([], [-1.0 - shift], 1.0), entry([], [-2.0], 0.2)),
                        (entry([], [-3.0], 0.1), entry([], [-4.0 - shift], 2.0))))
    S = TransferMatrix(((entry([-5.0], [-1.5 - shift], -1.0), entry([], [-2.5], 0.3)),
                        (entry([], [-3.5], 0.2), entry([-6.0], [-4.5], -1.0 - shift))))
    return T, S


def det_numerator_roots(psi: TransferMatrix) -> np.ndarray:
    """Transmission zeros of a 2x2 matrix whose entries share one denominator."""
    (a, b), (c, d) = psi.entries
    num = np.polysub(a.gain * d.gain * np.poly(np.concatenate([a.zeros, d.zeros])),
                     b.gain * c.gain * np.poly(np.concatenate([b.zeros, c.zeros])))
    return np.roots(np.trim_zeros(np.real_if_close(num, tol=1e6), "f"))


@pytest.fixture
def plain_tuple():
    T, S = coupled_pair()
    e = sine_signal([0.4, 1.7], amplitude=0.1, horizon=4.0, dt=0.005)
    w_f = sine_signal([0.9, 2.3], amplitude=0.02, horizon=4.0, dt=0.005)
    return T, S, e, w_f


class TestObfuscator:
    def test_first_order_entries_share_poles(self):
        obf = generate_obfuscator(1, 1, seed=3)
        for psi in (obf.psi_s1, obf.psi_s2):
            poles = psi.entry(0, 0).poles
            assert poles.size == 1
            for row in psi.entries:
                for e in row:
                    assert np.array_equal(e.poles, poles)
                    assert e.zeros.size == 1
                    assert 0.5 <= e.gain <= 2.0

    @pytest.mark.parametrize("seed", range(10))
    def test_stable_and_minimum_phase(self, seed):
        obf = generate_obfuscator(2, 2, seed=seed)
        for psi in (obf.psi_s1, obf.psi_s2):
            for row in psi.entries:
                for e in row:
                    assert np.all(e.poles.real < 0)
                    assert np.all(e.zeros.real < 0)
            assert np.all(det_numerator_roots(psi).real < 0)

    def test_same_seed_same_obfuscator(self):
        a = generate_obfuscator(2, 1, seed=17)
        b = generate_obfuscator(2, 1, seed=17)
        assert response_distance(a.psi_s1, b.psi_s1) == 0.0
        assert response_distance(a.psi_s2, b.psi_s2) == 0.0
        assert (a.n1, a.n2) == (2, 1)

    def test_zero_order_rejected(self):
        with pytest.raises(ValueError):
            generate_obfuscator(0, 1, seed=0)

    def test_band_reaching_into_right_half_plane_rejected(self):
        with pytest.raises(ValueError):
            generate_obfuscator(1, 1, seed=0, pole_band=((-1.0, 1.0), (-1.0, 1.0)))

    def test_random_orders_in_range(self):
        for seed in range(20):
            n1, n2 = random_orders(3, seed)
            assert 1 <= n1 <= 3 and 1 <= n2 <= 3

    def test_identity_obfuscator(self):
        assert Obfuscator.identity().is_identity
        assert not generate_obfuscator(1, 1, seed=1).is_identity


class TestObfuscation:
    def test_identity_obfuscator_relays_plaintext(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        msg = obfuscate(Obfuscator.identity(), T, S, e, w_f, "abc")
        assert msg.T_tilde is T and msg.S_tilde is S
        assert np.array_equal(msg.e_tilde.data, e.data)
        assert np.array_equal(msg.w_f_tilde.data, w_f.data)

    def test_zero_signals_stay_zero(self, plain_tuple):
        T, S, _, _ = plain_tuple
        zero = Signal.zeros(2, 400, 0.005)
        msg = obfuscate(generate_obfuscator(2, 2, seed=4), T, S, zero, zero)
        assert np.allclose(msg.e_tilde.data, 0.0)
        assert np.allclose(msg.w_f_tilde.data, 0.0)

    def test_obfuscator_poles_appear_in_road_sensitivity(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        obf = generate_obfuscator(1, 1, seed=5)
        msg = obfuscate(obf, T, S, e, w_f)
        relayed = tf_poles(msg.T_tilde)
        for p in obf.psi_s1.entry(0, 0).poles:
            assert np.min(np.abs(relayed - p)) < 1e-6 * max(1.0, abs(p))
        assert response_distance(msg.T_tilde, tf_multiply(obf.psi_s1, T)) < 1e-12

    def test_obfuscation_reshapes_the_mismatch(self, plain_tuple):
        _, _, e, _ = plain_tuple
        reshaped = 0
        for seed in range(100):
            obf = generate_obfuscator(1, 1, seed=seed)
            if reshaping_distance(e, apply_filter(obf.psi_s1, e)) > 0.1:
                reshaped += 1
        assert reshaped >= 95

    def test_ill_conditioned_inverse_is_a_library_error(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        near_dc_zero = entry([-1e-10], [-1.0], 1.0)
        obf = Obfuscator(TransferMatrix.identity(2), TransferMatrix.diagonal([near_dc_zero, near_dc_zero]),
                         1, 1, 0)
        with pytest.raises(ObfuscatorError) as info:
            obfuscate(obf, T, S, e, w_f)
        assert isinstance(info.value, RoadCollabError)


class TestRelayMessage:
    def test_signal_channels_checked(self, plain_tuple):
        T, S, e, _ = plain_tuple
        with pytest.raises(DimensionError):
            RelayMessage(T, S, e, Signal.zeros(3, e.n_samples, e.dt), "x")

    def test_signal_lengths_must_agree(self, plain_tuple):
        T, S, e, _ = plain_tuple
        with pytest.raises(DimensionError):
            RelayMessage(T, S, e, Signal.zeros(2, e.n_samples + 1, e.dt), "x")

    def test_document_restores_message(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        msg = obfuscate(generate_obfuscator(1, 2, seed=8), T, S, e, w_f, "feedface")
        doc = msg.to_dict()
        assert set(doc) == {"schema", "kind", "sender_id", "T_tilde", "S_tilde", "e_tilde", "w_f_tilde"}
        restored = RelayMessage.from_dict(doc)
        assert restored.sender_id == "feedface"
        assert response_distance(restored.S_tilde, msg.S_tilde) < 1e-12
        assert np.array_equal(restored.e_tilde.data, msg.e_tilde.data)

    def test_foreign_document_rejected(self):
        with pytest.raises(SchemaError):
            RelayMessage.from_dict({"schema": "other/1", "kind": "RelayMessage"})


class TestAccuracyPreservingFamily:
    def test_standard_family_preserves_accuracy(self):
        obf = generate_obfuscator(2, 2, seed=9)
        assert accuracy_preserving(ObfuscatorFamily.from_obfuscator(obf))

    def test_identity_family_preserves_accuracy(self):
        assert accuracy_preserving(ObfuscatorFamily())

    def test_right_factor_on_road_sensitivity_breaks_accuracy(self):
        obf = generate_obfuscator(2, 2, seed=9)
        standard = ObfuscatorFamily.from_obfuscator(obf)
        broken = ObfuscatorFamily(psi_t1=standard.psi_t1, psi_t2=obf.psi_s2, psi_s1=standard.psi_s1,
                                  psi_s2=standard.psi_s2, psi_e=standard.psi_e, psi_w=standard.psi_w)
        assert not accuracy_preserving(broken)

    def test_general_family_applies_each_factor(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        obf = generate_obfuscator(1, 1, seed=4)
        msg = obfuscate_general(ObfuscatorFamily(psi_t2=obf.psi_s2), T, S, e, w_f, sender_id="ab")
        assert response_distance(msg.T_tilde, tf_multiply(T, obf.psi_s2)) < 1e-12
        assert msg.S_tilde is S
        assert msg.e_tilde is e and msg.w_f_tilde is w_f
        assert msg.sender_id == "ab"

    def test_unmatched_mismatch_filter_breaks_accuracy(self):
        obf = generate_obfuscator(1, 1, seed=10)
        other = generate_obfuscator(1, 1, seed=11)
        standard = ObfuscatorFamily.from_obfuscator(obf)
        broken = ObfuscatorFamily(psi_t1=standard.psi_t1, psi_s1=standard.psi_s1, psi_s2=standard.psi_s2,
                                  psi_e=other.psi_s1, psi_w=standard.psi_w)
        assert not accuracy_preserving(broken)


class TestIndistinguishability:
    def test_other_dynamics_explain_the_same_message(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        obf = generate_obfuscator(2, 2, seed=12)
        msg = obfuscate(obf, T, S, e, w_f)
        T_bar, S_bar = coupled_pair(shift=0.7)
        psi1_bar, psi2_bar = construct_alternative_explanation(msg, T_bar, S_bar, T, S, obf)
        road, learning = explanation_residuals(msg, T_bar, S_bar, psi1_bar, psi2_bar)
        assert road <= 1e-6
        assert learning <= 1e-6

    def test_own_dynamics_give_back_own_obfuscator(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        obf = generate_obfuscator(1, 1, seed=13)
        msg = obfuscate(obf, T, S, e, w_f)
        psi1_bar, psi2_bar = construct_alternative_explanation(msg, T, S, T, S, obf)
        assert response_distance(psi1_bar, obf.psi_s1) < 1e-8
        assert response_distance(psi2_bar, obf.psi_s2) < 1e-8

    def test_alternative_of_other_order_still_explains(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        obf = generate_obfuscator(1, 2, seed=14)
        msg = obfuscate(obf, T, S, e, w_f)
        lag = entry([], [-8.0], 8.0)
        T_bar = tf_multiply(T, TransferMatrix.diagonal([lag, lag]))
        psi1_bar, psi2_bar = construct_alternative_explanation(msg, T_bar, S, T, S, obf)
        assert max(explanation_residuals(msg, T_bar, S, psi1_bar, psi2_bar)) <= 1e-6

    def test_shape_mismatch_rejected(self, plain_tuple):
        T, S, e, w_f = plain_tuple
        obf = generate_obfuscator(1, 1, seed=15)
        msg = obfuscate(obf, T, S, e, w_f)
        scalar = TransferMatrix(((entry([], [-1.0], 1.0),),))
        with pytest.raises(DimensionError):
            construct_alternative_explanation(msg, scalar, S, T, S, obf)


class TestAccuracyReport:
    def test_pass_and_fail(self):
        good = VehicleComparison(1, 1e-6, 2e-6, 0.0, 1e-9, 1e-9)
        bad = VehicleComparison(2, 1e-6, 1e-3, 0.0)
        assert AccuracyReport([good]).passed
        report = AccuracyReport([good, bad])
        assert not report.passed
        assert report.filters_pass
        assert report.worst_signal_distance == pytest.approx(1e-3)
        assert report.summary().startswith("FAIL")

    def test_filter_identity_failure(self):
        row = VehicleComparison(1, 0.0, 0.0, 0.0, L1_identity=1e-3)
        report = AccuracyReport([row])
        assert report.signals_pass and not report.passed

    def test_identity_obfuscators_match_plain_chain_exactly(self, fleet_pair, road_params):
        road = generate_road(road_params, 3.0, 0.005, seed=21)
        plain = run_chain(fleet_pair, road, [1, 2], PassSettings())
        same = run_chain(fleet_pair, road, [1, 2], PassSettings(),
                         obfuscators=[Obfuscator.identity(), Obfuscator.identity()])
        report = verify_accuracy_preservation(plain, same, road.w)
        assert report.passed
        assert report.worst_signal_distance == 0.0
        assert [v.vehicle_id for v in report.vehicles] == [1, 2]

    def test_chains_of_different_length_rejected(self, fleet_pair, road_params):
        road = generate_road(road_params, 2.0, 0.005, seed=22)
        plain = run_chain(fleet_pair, road, [1, 2])
        with pytest.raises(DimensionError):
            verify_accuracy_preservation(plain, plain[:1], road.w)

    @pytest.mark.slow
    def test_obfuscated_chain_is_reported_per_vehicle(self, fleet_pair, road_params):
        road = generate_road(road_params, 6.0, 0.005, seed=23)
        obfuscators = [generate_obfuscator(2, 2, seed=s) for s in (31, 32)]
        plain = run_chain(fleet_pair, road, [1, 2], PassSettings(), token_seeds=[3, 4])
        hidden = run_chain(fleet_pair, road, [1, 2], PassSettings(), obfuscators=obfuscators,
                           token_seeds=[3, 4])
        report = verify_accuracy_preservation(plain, hidden, road.w, t_trim=1.0, t_end=5.0)
        assert len(report.vehicles) == 2
        first, second = report.vehicles
        assert first.w_f_distance == 0.0 and first.w_hat_distance == 0.0
        assert report.passed, report.summary()
        assert second.w_hat_distance <= ACCURACY_TOL
        assert plain[1].outgoing.sender_id == hidden[1].outgoing.sender_id

    @pytest.mark.slow
    def test_three_vehicle_obfuscated_chain_matches_plain_chain(self, base_params, road_params):
        fleet = make_fleet(3, base_params, 0.1, 0.05, master_seed=11, trial=0)
        road = generate_road(road_params, 10.0, 0.005, seed=11)
        obfuscators = [generate_obfuscator(2, 2, seed=s) for s in (41, 42, 43)]
        plain = run_chain(fleet, road, [1, 2, 3], PassSettings(relay_mask=1.0))
        hidden = run_chain(fleet, road, [1, 2, 3], PassSettings(relay_mask=1.0), obfuscators=obfuscators)
        report = verify_accuracy_preservation(plain, hidden, road.w, t_trim=1.0, t_end=9.0)
        assert report.passed, report.summary()
        for row in report.vehicles:
            assert max(row.w_f_distance, row.w_hat_distance, row.mse_distance) <= 1e-4
        assert hidden[2].w_f.n_samples == road.w.n_samples
        assert hidden[2].outgoing.e_tilde.n_samples == relay_length(road.w.n_samples, 2)

    def test_relayed_signals_filter_back_exactly(self, plain_tuple):
        _, _, e, w_f = plain_tuple
        obf = generate_obfuscator(2, 2, seed=24)
        padded = w_f.padded_to(relay_length(w_f.n_samples))
        hidden = obfuscate(obf, *coupled_pair(), e.padded_to(padded.n_samples), padded)
        restored = filter_periodic(obf.psi_s2, hidden.w_f_tilde)
        assert restored.relative_distance(padded) < 1e-10
