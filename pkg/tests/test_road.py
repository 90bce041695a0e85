import numpy as np
import pytest

from lti import Signal
from road import JdpParams, export_csv, generate_road, n_samples_for, road_profile


def test_sample_count_covers_horizon():
    road = generate_road(JdpParams(), horizon=2.0, dt=0.01, seed=1)
    assert road.w.n_samples == n_samples_for(2.0, 0.01) == 201
    assert road.w.channels == 2


def test_no_jumps_and_no_diffusion_gives_flat_road():
    params = JdpParams(lam=0.0, sigma_zeta=np.zeros((2, 2)))
    road = generate_road(params, horizon=5.0, dt=0.01, seed=3)
    assert np.all(road.w.data == 0.0)
    assert road.jump_counts == (0, 0)


def test_same_seed_same_road():
    a = generate_road(JdpParams(), 3.0, 0.01, seed=42)
    b = generate_road(JdpParams(), 3.0, 0.01, seed=42)
    c = generate_road(JdpParams(), 3.0, 0.01, seed=43)
    assert np.array_equal(a.w.data, b.w.data)
    assert not np.array_equal(a.w.data, c.w.data)


def test_jump_count_matches_poisson_rate():
    params = JdpParams(lam=2.0)
    counts = [generate_road(params, 10.0, 0.01, seed).jump_counts[0] for seed in range(2000)]
    assert np.mean(counts) == pytest.approx(2.0 * 10.0, abs=0.5)


def test_shared_arrivals_jump_together():
    road = generate_road(JdpParams(lam=3.0), 10.0, 0.01, seed=9)
    assert road.jump_counts[0] == road.jump_counts[1]


def test_independent_arrivals_differ():
    params = JdpParams(lam=3.0, shared_arrivals=False)
    counts = [generate_road(params, 10.0, 0.01, seed).jump_counts for seed in range(20)]
    assert any(left != right for left, right in counts)


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        JdpParams(lam=-1.0)


def test_negative_jump_variance_rejected():
    with pytest.raises(ValueError, match="negative variances"):
        JdpParams(sigma_eta=np.diag([-1e-3, 1e-3]))


def test_invalid_horizon_rejected():
    with pytest.raises(ValueError):
        generate_road(JdpParams(), horizon=0.0, dt=0.01, seed=0)


def test_total_covariance():
    params = JdpParams(lam=2.0, mu_eta=np.array([0.1, 0.0]), sigma_eta=np.diag([0.01, 0.02]),
                       sigma_zeta=0.1 * np.eye(2))
    expected = 0.01 * np.eye(2) + 2.0 * np.array([[0.01, 0.0], [0.0, 0.0]]) + 2.0 * np.diag([0.01, 0.02])
    assert np.allclose(params.sigma_bar, expected)
    assert np.allclose(params.jump_mean_rate, [0.2, 0.0])


def test_profile_of_constant_velocity_is_a_ramp():
    w = Signal(np.ones((2, 201)), 0.01)
    profile = road_profile(w)
    assert np.allclose(profile.data[:, -1], [2.0, 2.0])
    assert np.all(profile.data[:, 0] == 0.0)


def test_single_jump_is_a_step_in_the_profile():
    dt = 0.01
    data = np.zeros((2, 201))
    data[:, 100] = 0.05 / dt
    profile = road_profile(Signal(data, dt))
    assert np.allclose(profile.data[:, 150], 0.05)
    assert np.allclose(profile.data[:, 50], 0.0)


def test_parameters_document_restores_parameters():
    params = JdpParams(lam=1.5, shared_arrivals=False)
    restored = JdpParams.from_dict(params.as_dict())
    assert restored.lam == params.lam
    assert restored.shared_arrivals is False
    assert np.array_equal(restored.sigma_bar, params.sigma_bar)


def test_csv_export(tmp_path):
    road = generate_road(JdpParams(), 1.0, 0.1, seed=5)
    path = export_csv(road, tmp_path / "road.csv", profile=True)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,w_l,w_r,z_l,z_r"
    assert len(lines) == road.w.n_samples + 1
