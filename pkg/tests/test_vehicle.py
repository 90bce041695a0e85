from dataclasses import fields

import numpy as np
import pytest

from lti import is_hurwitz
from vehicle import VehicleParams, build_half_car, make_fleet, perturb_params


def test_symmetric_vehicle_heave_row():
    p = VehicleParams()
    sys = build_half_car(p)
    assert np.allclose(sys.B[2], [p.c_s / p.m_b, p.c_s / p.m_b])


def test_nominal_and_perturbed_models_are_stable():
    p = VehicleParams()
    assert is_hurwitz(build_half_car(p))
    for seed in range(20):
        assert is_hurwitz(build_half_car(perturb_params(p, 0.2, seed)))


def test_constant_road_slope_produces_no_acceleration():
    sys = build_half_car(VehicleParams())
    assert np.max(np.abs(sys.evaluate(0.0))) < 1e-9


def test_non_positive_parameter_rejected():
    with pytest.raises(ValueError):
        VehicleParams(m_b=0.0)


def test_zero_spread_returns_same_parameters():
    p = VehicleParams()
    assert perturb_params(p, 0.0, 123) == p


def test_perturbation_is_deterministic():
    p = VehicleParams()
    assert perturb_params(p, 0.1, 5) == perturb_params(p, 0.1, 5)
    assert perturb_params(p, 0.1, 5) != perturb_params(p, 0.1, 6)


@pytest.mark.parametrize("rel_sigma", [-0.1, 0.3, 0.5])
def test_spread_out_of_range_rejected(rel_sigma):
    with pytest.raises(ValueError):
        perturb_params(VehicleParams(), rel_sigma, 0)


def test_perturbation_is_unbiased():
    p = VehicleParams()
    draws = [perturb_params(p, 0.05, seed) for seed in range(2000)]
    for f in fields(p):
        mean = np.mean([getattr(d, f.name) for d in draws])
        assert mean == pytest.approx(getattr(p, f.name), rel=0.01)


def test_perturbation_stays_within_truncation():
    p = VehicleParams()
    for seed in range(200):
        d = perturb_params(p, 0.1, seed)
        for f in fields(p):
            ratio = getattr(d, f.name) / getattr(p, f.name)
            assert 0.55 < ratio < 1.45


def test_fleet_ids_and_reproducibility():
    base = VehicleParams()
    fleet = make_fleet(4, base, 0.1, 0.05, master_seed=11, trial=2)
    assert [v.id for v in fleet] == [1, 2, 3, 4]
    again = make_fleet(4, base, 0.1, 0.05, master_seed=11, trial=2)
    assert all(a.true_params == b.true_params and a.model_params == b.model_params
               for a, b in zip(fleet, again))


def test_fleet_is_heterogeneous_and_models_are_imperfect():
    fleet = make_fleet(3, VehicleParams(), 0.1, 0.05, master_seed=11)
    assert fleet[0].true_params != fleet[1].true_params
    assert all(v.model_params != v.true_params for v in fleet)


def test_adding_vehicles_keeps_existing_draws():
    base = VehicleParams()
    small = make_fleet(2, base, 0.1, 0.05, master_seed=3)
    large = make_fleet(5, base, 0.1, 0.05, master_seed=3)
    assert [v.true_params for v in small] == [v.true_params for v in large[:2]]
