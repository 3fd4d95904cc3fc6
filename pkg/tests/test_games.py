import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from socialgrad import (
    BoxSpace,
    GameModel,
    boundary_distance,
    certify_strong_monotonicity,
    incentivized_pseudo_gradient,
    project_box,
    symmetry_check,
)
from socialgrad.games import as_vector


def box(lo, hi, n):
    return BoxSpace(lower=np.full(n, float(lo)), upper=np.full(n, float(hi)))


def test_box_validation():
    with pytest.raises(ValueError):
        BoxSpace(lower=np.array([0.0, 0.0]), upper=np.array([1.0]))
    with pytest.raises(ValueError):
        BoxSpace(lower=np.array([1.0]), upper=np.array([0.0]))


def test_box_geometry():
    b = box(-2.0, 2.0, 5)
    assert b.dim == 5
    assert b.diameter == pytest.approx(4.0 * np.sqrt(5.0))
    assert np.array_equal(b.center, np.zeros(5))
    assert b.contains(np.full(5, 2.0))
    assert not b.contains(np.full(5, 2.0), margin=1e-9)
    assert not b.contains(np.full(5, 2.1))


def test_as_vector_dim_check():
    with pytest.raises(ValueError):
        as_vector([1.0, 2.0], dim=3, name="probe")
    with pytest.raises(ValueError):
        as_vector([[1.0, 2.0]], dim=2, name="probe")


finite_vec = arrays(np.float64, 3,
                    elements=st.floats(-50, 50, allow_nan=False))


@given(finite_vec)
def test_projection_lands_in_box(x):
    b = box(-1.0, 1.5, 3)
    y = project_box(x, b)
    assert b.contains(y)
    # projecting twice changes nothing
    assert np.array_equal(project_box(y, b), y)
    # points already inside are fixed points
    if b.contains(x):
        assert np.array_equal(y, np.asarray(x, dtype=float))


def test_boundary_distance_values():
    b = box(-2.0, 2.0, 2)
    assert boundary_distance(np.array([0.0, 0.0]), b) == pytest.approx(2.0)
    assert boundary_distance(np.array([1.5, 0.0]), b) == pytest.approx(0.5)
    assert boundary_distance(np.array([2.0, 0.0]), b) == pytest.approx(0.0)


def test_incentivized_pseudo_gradient_is_sum(agg, rng):
    x = rng.uniform(-2.0, 2.0, 5)
    p = rng.normal(size=5)
    expected = agg.game.g0(x) + p
    assert np.allclose(incentivized_pseudo_gradient(agg.game, x, p), expected,
                       rtol=0.0, atol=0.0)


def test_certificate_constant_jacobian(agg):
    # the Jacobian is constant, so the grid minimum equals the analytic
    # minimum eigenvalue no matter the density
    rep = certify_strong_monotonicity(agg.game, grid_density=3)
    assert rep.passed
    assert rep.grid_min_eig == pytest.approx(agg.game.analytic_min_eig, abs=1e-12)


def test_certificate_oscillator_corner(osc):
    rep = certify_strong_monotonicity(osc.game, grid_density=41)
    assert rep.passed
    # worst point of the symmetric-part spectrum sits at a box corner
    assert np.allclose(np.abs(rep.grid_worst_point), np.pi / 3.0, atol=1e-12)
    assert rep.grid_min_eig >= 0.5 * osc.game.monotonicity_m - 1e-12


def test_certificate_failure_is_reported(osc):
    import dataclasses

    # inflate the claimed modulus; the certificate must refuse it
    bogus = dataclasses.replace(osc.game, monotonicity_m=10.0)
    rep = certify_strong_monotonicity(bogus, grid_density=21)
    assert not rep.passed


def test_symmetry_check(agg, osc):
    assert symmetry_check(osc.game, samples=64)
    assert not symmetry_check(agg.game, samples=64)


def test_game_model_rejects_bad_shapes():
    b = box(-1.0, 1.0, 2)
    with pytest.raises(ValueError):
        GameModel(dim=3, space=b, g0=lambda x: x, jac_g0=lambda x: np.eye(3),
                  monotonicity_m=1.0, lip_L1=0.0)
    with pytest.raises(ValueError):
        GameModel(dim=2, space=b, g0=lambda x: x, jac_g0=lambda x: np.eye(2),
                  monotonicity_m=-1.0, lip_L1=0.0)
