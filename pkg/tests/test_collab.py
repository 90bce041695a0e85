import numpy as np
import pytest

from collab.pipeline import STEP_LEARN
from collab import (
    FREQUENCY,
    PROFILE,
    TIME,
    VELOCITY,
    PassSettings,
    build_filters,
    build_sensitivities,
    filter_residuals,
    mismatch_recursion,
    mse,
    run_chain,
    run_vehicle_pass,
    update_learning_signal,
)
from estimator import solve_riccati
from lti import Factor, ResponseProduct, Signal, TransferMatrix, relay_length, response_distance
from road import JdpParams, RoadRealization, generate_road
from utils.errors import DimensionError, PipelineStepError
from vehicle import VehicleParams, make_fleet
from conftest import sine_signal


@pytest.fixture
def pair_sensitivities(fleet_pair, road_params):
    out = []
    for v in fleet_pair:
        out.append(build_sensitivities(v, solve_riccati(v.model, road_params)))
    return out


class TestFilters:
    def test_identical_vehicles_pass_learning_signal_unchanged(self, exact_vehicle, exact_design):
        T, S = build_sensitivities(exact_vehicle, exact_design)
        filters = build_filters(T, S, T, S)
        assert response_distance(filters.L1, TransferMatrix.identity(2)) < 1e-6

    def test_optimality_conditions_hold(self, pair_sensitivities):
        (T1, S1), (T2, S2) = pair_sensitivities
        filters = build_filters(T1, S1, T2, S2)
        assert filter_residuals(filters, T1, S1, T2, S2).within(1e-6)

    def test_round_trip_of_learning_filters_is_identity(self, pair_sensitivities):
        (T1, S1), (T2, S2) = pair_sensitivities
        forward = build_filters(T1, S1, T2, S2).L1
        backward = build_filters(T2, S2, T1, S1).L1
        assert response_distance(backward @ forward, TransferMatrix.identity(2)) < 1e-6

    def test_mismatch_filter_is_road_term_over_predecessor(self, pair_sensitivities):
        (T1, S1), (T2, S2) = pair_sensitivities
        filters = build_filters(T1, S1, T2, S2)
        expected = ResponseProduct([Factor(S2, inverted=True), Factor(T2), Factor(T1, inverted=True)], sign=-1.0)
        omegas = np.logspace(-1, 3, 200)
        assert response_distance(filters.L2, expected, omegas) < 1e-10

    def test_zero_inputs_give_zero_learning_signal(self, pair_sensitivities):
        (T1, S1), (T2, S2) = pair_sensitivities
        filters = build_filters(T1, S1, T2, S2)
        zero = Signal.zeros(2, 400, 0.005)
        assert np.allclose(update_learning_signal(filters, zero, zero).data, 0.0)


class TestMetrics:
    def test_identical_signals_have_zero_error(self):
        w = Signal(np.random.default_rng(0).normal(size=(2, 100)), 0.01)
        assert mse(w, w) == 0.0
        assert mse(w, w, VELOCITY) == 0.0

    def test_constant_velocity_offset(self):
        truth = Signal.zeros(2, 101, 0.01)
        offset = truth.with_data(np.full((2, 101), 0.1))
        assert mse(offset, truth, VELOCITY) == pytest.approx(0.01)

    def test_window_restricts_error(self):
        truth = Signal.zeros(1, 100, 0.1)
        data = np.zeros((1, 100))
        data[0, :10] = 1.0
        assert mse(truth.with_data(data), truth, VELOCITY, t_trim=1.0) == 0.0

    def test_unknown_space_rejected(self):
        w = Signal.zeros(2, 10, 0.1)
        with pytest.raises(ValueError):
            mse(w, w, "acceleration")


class TestPipeline:
    def test_first_vehicle_has_no_learning_signal(self, fleet_pair):
        road = generate_road(JdpParams(), 4.0, 0.005, seed=1)
        session = run_vehicle_pass(fleet_pair[0], road, None, noise_seed=2)
        assert np.all(session.w_f.data == 0.0)
        assert np.array_equal(session.w_hat.data, session.w_hat_o.data)
        assert session.filters is None
        assert session.outgoing.sender_id

    def test_flat_road_without_noise_gives_zero_everywhere(self, fleet_pair):
        params = JdpParams(lam=0.0)
        road = RoadRealization(Signal.zeros(2, 801, 0.005), 0, params)
        settings = PassSettings(noise_std=0.0)
        for session in run_chain(fleet_pair, road, [1, 2], settings):
            for sig in (session.y, session.w_hat_o, session.w_f, session.w_hat, session.e):
                assert np.max(np.abs(sig.data)) < 1e-9

    def test_mismatch_follows_sensitivities(self, fleet_pair):
        w = sine_signal([0.7, 1.3], amplitude=0.05, horizon=8.0, dt=0.005)
        road = RoadRealization(w, 0, JdpParams())
        sessions = run_chain(fleet_pair, road, [1, 2], PassSettings(noise_std=0.0))
        second = sessions[1]
        predicted = mismatch_recursion(second, w).window(3.0)
        assert second.e.window(3.0).relative_distance(predicted) < 5e-2

    def test_relay_mask_zeroes_start_of_mismatch(self, fleet_pair):
        road = generate_road(JdpParams(), 4.0, 0.005, seed=1)
        settings = PassSettings(relay_mask=0.5)
        session = run_vehicle_pass(fleet_pair[0], road, None, noise_seed=2, settings=settings)
        N = road.w.n_samples
        relayed = session.outgoing.e_tilde.data
        assert relayed.shape[1] == relay_length(N, settings.padding)
        assert np.all(relayed[:, :100] == 0.0)
        assert np.array_equal(relayed[:, 100:N], session.e.data[:, 100:])
        assert np.all(relayed[:, N:] == 0.0)

    def test_chain_is_reproducible(self, fleet_pair):
        road = generate_road(JdpParams(), 3.0, 0.005, seed=4)
        a = run_chain(fleet_pair, road, [5, 6])
        b = run_chain(fleet_pair, road, [5, 6])
        assert np.array_equal(a[1].w_hat.data, b[1].w_hat.data)
        assert a[1].outgoing.sender_id == b[1].outgoing.sender_id

    def test_time_domain_pass_is_finite(self, fleet_pair):
        road = generate_road(JdpParams(), 2.0, 0.005, seed=8)
        sessions = run_chain(fleet_pair, road, [1, 2], PassSettings(domain=TIME))
        assert all(np.all(np.isfinite(s.w_hat.data)) for s in sessions)

    def test_unknown_domain_rejected(self):
        with pytest.raises(ValueError):
            PassSettings(domain="laplace")

    def test_failures_carry_step_and_vehicle(self, fleet_pair):
        road = generate_road(JdpParams(), 2.0, 0.005, seed=8)
        first = run_vehicle_pass(fleet_pair[0], road, None, noise_seed=1)
        short_road = generate_road(JdpParams(), 1.0, 0.005, seed=8)
        with pytest.raises(PipelineStepError) as info:
            run_vehicle_pass(fleet_pair[1], short_road, first.outgoing, noise_seed=2)
        assert info.value.vehicle_id == fleet_pair[1].id
        assert info.value.step == STEP_LEARN
        assert isinstance(info.value.cause, DimensionError)

    @pytest.mark.slow
    def test_learning_improves_second_vehicle(self):
        base = VehicleParams()
        fleet = make_fleet(2, base, 0.1, 0.0, master_seed=21)
        params = JdpParams(lam=0.0, mu_eta=np.zeros(2))
        road = generate_road(params, 8.0, 0.005, seed=3)
        sessions = run_chain(fleet, road, [1, 2], PassSettings(noise_std=0.0, domain=FREQUENCY))
        first, second = (mse(s.w_hat, road.w, VELOCITY, t_trim=0.5, t_end=7.0) for s in sessions)
        assert second < 0.5 * first

    @pytest.mark.slow
    def test_profile_error_shrinks_along_the_chain(self, base_params):
        first, third = [], []
        for seed in (11, 12, 13, 14):
            fleet = make_fleet(3, base_params, 0.1, 0.05, master_seed=seed)
            road = generate_road(JdpParams(), 12.0, 0.005, seed=seed)
            sessions = run_chain(fleet, road, [1, 2, 3], PassSettings(relay_mask=1.0))
            scores = [mse(s.w_hat, road.w, PROFILE, t_trim=1.0, t_end=10.0) for s in sessions]
            first.append(scores[0])
            third.append(scores[2])
        assert np.mean(third) <= 0.5 * np.mean(first)

    def test_profile_error_is_default(self):
        w = Signal(np.ones((2, 101)), 0.01)
        zero = Signal.zeros(2, 101, 0.01)
        assert mse(w, zero) == pytest.approx(mse(w, zero, PROFILE))
        assert mse(w, zero) != pytest.approx(mse(w, zero, VELOCITY))
