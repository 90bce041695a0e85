import numpy as np
import pytest

from estimator import (
    bias_steady_state,
    cost_weight,
    design_from_dict,
    design_gain,
    design_to_dict,
    error_covariance,
    estimate_road,
    estimator_as_lti,
    riccati_residual,
    run_input_observer,
    run_state_estimator,
    solve_riccati,
    steady_state_cost,
)
from lti import Signal, StateSpace, is_hurwitz, simulate
from road import JdpParams
from utils.errors import RiccatiError
from conftest import sine_signal


def scalar_model():
    return StateSpace([[-1.0]], [[1.0]], [[1.0]], [[0.0]])


class TestDesign:
    def test_scalar_riccati_solution(self):
        design = design_gain(scalar_model(), [[1.0]], [[1.0]])
        assert design.Q[0, 0] == pytest.approx(np.sqrt(2.0) - 1.0, abs=1e-10)
        assert design.F[0, 0] == pytest.approx(1.0 - np.sqrt(2.0), abs=1e-10)

    def test_half_car_design_invariants(self, exact_vehicle, exact_design):
        model = exact_vehicle.model
        V2_inv = np.linalg.inv(exact_design.V2)
        cross = model.B @ exact_design.Sigma_bar @ model.D.T
        A_f = model.A - cross @ V2_inv @ model.C
        residual = riccati_residual(A_f, exact_design.Q, exact_design.V1, model.C.T @ V2_inv @ model.C)
        assert np.linalg.norm(residual) <= 1e-8 * max(1.0, np.linalg.norm(exact_design.V1))
        assert np.min(np.linalg.eigvalsh(exact_design.Q)) > -1e-10
        assert is_hurwitz(StateSpace(exact_design.closed_loop(model), model.B, model.C, model.D))
        assert np.allclose(exact_design.K_obs @ model.B, np.eye(2))
        assert np.allclose(exact_design.S_obs, 0.5 * 21.0 * np.eye(2))

    def test_mean_free_jumps_only_add_variance(self, exact_vehicle):
        model = exact_vehicle.model
        diffusion_only = JdpParams(lam=0.0, mu_eta=np.zeros(2), sigma_eta=np.zeros((2, 2)))
        silent_jumps = JdpParams(lam=3.0, mu_eta=np.zeros(2), sigma_eta=np.zeros((2, 2)))
        a = solve_riccati(model, diffusion_only)
        b = solve_riccati(model, silent_jumps)
        assert np.allclose(a.F, b.F)
        assert not np.any(b.bias_term)

    def test_gamma_at_or_below_half_rejected(self, exact_vehicle, road_params):
        with pytest.raises(ValueError, match="gamma must exceed 0.5"):
            solve_riccati(exact_vehicle.model, road_params, gamma=0.4)

    def test_undetectable_pair_rejected(self):
        unstable_hidden = StateSpace(np.diag([-1.0, 1.0]), [[1.0], [1.0]], [[1.0, 0.0]], [[0.0]])
        with pytest.raises(RiccatiError):
            design_gain(unstable_hidden, [[1.0]], [[1.0]])

    def test_riccati_gain_minimizes_steady_state_cost(self, exact_vehicle, exact_design):
        model = exact_vehicle.model
        optimum = steady_state_cost(exact_design, model)
        assert optimum == pytest.approx(np.trace(cost_weight(exact_design) @ exact_design.Q), rel=1e-6)
        rng = np.random.default_rng(0)
        for _ in range(5):
            F = exact_design.F * (1.0 + 0.1 * rng.normal(size=exact_design.F.shape))
            if np.max(np.linalg.eigvals(model.A + F @ model.C).real) < 0:
                assert steady_state_cost(exact_design, model, F) >= optimum * (1 - 1e-9)

    def test_cost_weight_acts_through_road_channels(self, exact_vehicle, exact_design):
        W = cost_weight(exact_design)
        assert W.shape == (4, 4)
        assert np.allclose(W, W.T)
        assert np.linalg.matrix_rank(W) == 2
        scale = 0.5 * (1.0 + exact_design.gamma)
        B = exact_vehicle.model.B
        assert np.allclose(B.T @ W @ B, scale ** 2 * np.eye(2))

    def test_error_covariance_is_symmetric(self, exact_vehicle, exact_design):
        P = error_covariance(exact_design, exact_vehicle.model)
        assert np.allclose(P, P.T)

    def test_document_restores_gain(self, exact_design):
        restored = design_from_dict(design_to_dict(exact_design))
        assert np.array_equal(restored.F, exact_design.F)
        assert restored.gamma == exact_design.gamma


class TestRuntime:
    def test_zero_measurement_without_drift_gives_zero(self, exact_vehicle):
        model = exact_vehicle.model
        design = solve_riccati(model, JdpParams(lam=0.0))
        y = Signal.zeros(2, 500, 1e-3)
        result = estimate_road(design, model, y)
        assert np.all(result.w_hat_o.data == 0.0)
        assert np.all(result.bias_offset.data == 0.0)

    def test_drift_settles_at_mean_jump_rate(self, exact_vehicle, exact_design, road_params):
        model = exact_vehicle.model
        assert np.allclose(bias_steady_state(exact_design, model), road_params.jump_mean_rate, rtol=1e-6)
        y = Signal.zeros(2, 20001, 1e-3)
        x_hat = run_state_estimator(exact_design, model, y)
        x_ss = -np.linalg.solve(exact_design.closed_loop(model), exact_design.bias_term)
        assert np.allclose(x_hat.data[:, -1], x_ss, rtol=1e-3, atol=1e-9)

    def test_input_observer_recovers_constant_input(self, exact_vehicle, exact_design):
        plant = exact_vehicle.plant
        w = Signal(np.tile([[0.1], [-0.05]], (1, 10001)), 1e-3)
        _, x = simulate(plant, w, return_states=True)
        w_hat = run_input_observer(exact_design, plant, x)
        assert np.allclose(w_hat.data[:, -1], [0.1, -0.05], rtol=1e-2)

    def test_doubling_gain_halves_settling_time(self, exact_vehicle, road_params):
        plant = exact_vehicle.plant
        w = Signal(np.tile([[0.1], [-0.05]], (1, 10001)), 1e-4)
        _, x = simulate(plant, w, return_states=True)

        def settling_time(gamma):
            design = solve_riccati(exact_vehicle.model, road_params, gamma=gamma)
            w_hat = run_input_observer(design, plant, x)
            rel = np.max(np.abs(w_hat.data - w.data) / np.abs(w.data), axis=0)
            outside = np.flatnonzero(rel > 0.02)
            return 0.0 if outside.size == 0 else (outside[-1] + 1) * w.dt

        slow, fast = settling_time(20.0), settling_time(40.0)
        assert 0.0 < slow < 0.5
        assert fast <= 0.5 * slow + w.dt

    def test_combined_block_matches_sequential_run(self, exact_vehicle, driftless_params):
        model = exact_vehicle.model
        design = solve_riccati(model, driftless_params)
        y = sine_signal([0.3, 0.7], amplitude=0.5, horizon=6.0, dt=2e-4)
        sequential = run_input_observer(design, model, run_state_estimator(design, model, y))
        combined = simulate(estimator_as_lti(design, model), y)
        assert combined.relative_distance(sequential) < 1e-2

    def test_combined_block_has_six_states(self, exact_vehicle, exact_design):
        assert estimator_as_lti(exact_design, exact_vehicle.model).n == 6

    def test_linear_part_excludes_drift(self, exact_vehicle, exact_design):
        model = exact_vehicle.model
        y = sine_signal([0.5, 1.1], amplitude=0.2, horizon=4.0, dt=2e-4)
        result = estimate_road(exact_design, model, y)
        linear = simulate(estimator_as_lti(exact_design, model), y)
        assert result.w_hat_o.relative_distance(linear) < 1e-2
        assert np.allclose(result.bias_offset.data[:, -1], bias_steady_state(exact_design, model), rtol=1e-2)

    def test_measurement_channels_checked(self, exact_vehicle, exact_design):
        with pytest.raises(ValueError):
            run_state_estimator(exact_design, exact_vehicle.model, Signal.zeros(3, 10, 1e-3))
