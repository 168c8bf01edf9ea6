import math

import numpy as np
import pytest

from oracles import central_jacobian
from smcpcrlb.errors import DimensionMismatch, SingularGradient, UndefinedBearing
from smcpcrlb.distributions import GaussianLaw
from smcpcrlb.ssm import (BALLISTIC_X0, BallisticModel, BallisticParams, LinearGaussianModel,
                          UNGMModel, UNGMRayleighModel, air_density, ballistic_drag, ballistic_f,
                          ballistic_g, ballistic_grad_f, ballistic_grad_g, ballistic_hess_g,
                          drag_jacobian, j0_gaussian, simulate, simulate_ensemble, ungm_measurement,
                          ungm_step)

CBRT_EPS = np.finfo(float).eps ** (1 / 3)


class ZeroRng:
    """Every normal draw is zero: simulation becomes the noise-free recursion."""

    def standard_normal(self, size=None):
        return np.zeros(size)

    def random(self, size=None):
        return np.full(size, 0.5) if size is not None else 0.5


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


# --- growth model ----------------------------------------------------------------

def test_ungm_step_values():
    assert ungm_step(0.0, 0) == 8.0
    assert ungm_step(1.0, 0) == pytest.approx(21.0, abs=1e-14)
    assert ungm_measurement(2.0) == pytest.approx(0.2)


def test_ungm_zero_noise_first_step():
    tr = simulate(UNGMModel(), 1, ZeroRng(), x0=[0.0])
    assert tr.states[1, 0] == 8.0
    assert tr.measurements[0, 0] == pytest.approx(64 / 20)


def test_linear_zero_noise_geometric_decay():
    model = LinearGaussianModel([[0.9]], [[1.0]], [[1.0]], [[1.0]], GaussianLaw([0.0], [[1.0]]))
    tr = simulate(model, 5, ZeroRng(), x0=[1.0])
    np.testing.assert_allclose(tr.states[:, 0], 0.9 ** np.arange(6), rtol=1e-15)


# --- ballistic ---------------------------------------------------------------------

def test_ballistic_altitude_decreases_noise_free():
    tr = simulate(BallisticModel(1), 60, ZeroRng(), x0=BALLISTIC_X0)
    h = tr.states[:, 2]
    above = h[:-1] > 0
    assert np.all(np.diff(h)[above] < 0)


def test_zero_velocity_pure_gravity():
    p = BallisticParams()
    x = np.array([1e4, 0.0, 5e3, 0.0])
    np.testing.assert_array_equal(ballistic_drag(x, p), [0.0, 0.0])
    nxt = ballistic_f(x, p)
    assert nxt[3] == pytest.approx(-p.gravity * p.dt)
    assert nxt[2] == pytest.approx(5e3 - 0.5 * p.gravity * p.dt ** 2)


def test_air_density_branches():
    assert air_density(0.0)[0] == pytest.approx(1.227)
    assert air_density(9144.0)[0] == pytest.approx(1.754 * math.exp(-1.4910e-4 * 9144), rel=1e-14)
    assert air_density(9144.0)[0] == pytest.approx(0.4487, abs=1e-4)
    assert air_density(9143.0)[0] == pytest.approx(1.227 * math.exp(-1.09310e-4 * 9143), rel=1e-14)


def test_grad_f_matches_differences_at_initial_state():
    fd = central_jacobian(ballistic_f, BALLISTIC_X0, CBRT_EPS)
    assert rel(ballistic_grad_f(BALLISTIC_X0), fd) < 1e-5


def test_drag_jacobian_structure(rng):
    x = np.column_stack([rng.uniform(1e3, 2e5, 50), rng.uniform(-3e3, 3e3, 50),
                         rng.uniform(0, 9e4, 50), rng.uniform(-3e3, 3e3, 50)])
    m = drag_jacobian(x)
    assert np.all(m[:, :, 0] == 0.0)
    np.testing.assert_array_equal(m[:, 0, 3], m[:, 1, 1])
    with pytest.raises(SingularGradient):
        drag_jacobian(np.array([1e3, 0.0, 1e3, 0.0]))


def test_radar_values_and_structure():
    y = ballistic_g(np.array([3.0, 0.0, 4.0, 0.0]))
    assert y[0] == pytest.approx(5.0)
    assert y[1] == pytest.approx(0.9272952180016122, abs=1e-15)
    n = ballistic_grad_g(np.array([3.0, 1.0, 4.0, 2.0]))
    assert np.all(n[:, [1, 3]] == 0.0)
    with pytest.raises(UndefinedBearing):
        ballistic_g(np.array([0.0, 1.0, 4.0, 2.0]))


def test_radar_second_quadrant_branch():
    y = ballistic_g(np.array([-1.0, 0.0, 1.0, 0.0]))
    assert y[1] == pytest.approx(3 * math.pi / 4)


def test_radar_jacobian_and_hessian_match_differences(rng):
    for _ in range(100):
        x = np.array([rng.uniform(1e3, 2.5e5), rng.normal(0, 2e3), rng.uniform(1e2, 1e5), rng.normal(0, 2e3)])
        assert rel(ballistic_grad_g(x), central_jacobian(ballistic_g, x, CBRT_EPS)) < 1e-6
        assert rel(ballistic_hess_g(x), central_jacobian(ballistic_grad_g, x, CBRT_EPS)) < 1e-5


def test_ballistic_grad_f_random_states(rng):
    for _ in range(100):
        x = np.array([rng.uniform(1e4, 2.5e5), rng.uniform(-2.5e3, -100), rng.uniform(1e3, 9e4),
                      rng.uniform(-1e3, -10)])
        if abs(x[2] - 9144.0) < 10:
            continue
        assert rel(ballistic_grad_f(x), central_jacobian(ballistic_f, x, CBRT_EPS)) < 1e-5


def test_j0_examples():
    np.testing.assert_array_equal(j0_gaussian(GaussianLaw(np.zeros(2), np.eye(2))), np.eye(2))
    np.testing.assert_allclose(BallisticModel(1).j0(), np.diag([1e-6, 2.5e-3, 1e-6, 2.5e-3]), rtol=1e-14)
    assert UNGMModel().j0()[0, 0] == pytest.approx(100.0)


# --- analytic versus finite-difference derivatives of every model ----------------

def _random_points(model, rng, k=100):
    if isinstance(model, BallisticModel):
        return np.column_stack([rng.uniform(1e4, 2.5e5, k), rng.uniform(-2.5e3, -100, k),
                                rng.uniform(1.0e4, 9e4, k), rng.uniform(-1e3, -10, k)])
    return rng.uniform(-20, 20, (k, model.state_dim))


@pytest.mark.parametrize("model", [UNGMModel(), BallisticModel(1), BallisticModel(4)],
                         ids=["ungm", "ballistic1", "ballistic4"])
def test_gaussian_model_derivatives(model, rng):
    x = _random_points(model, rng)
    t = 3
    for xi in x:
        xi2 = xi[None]
        assert rel(model.jac_f(xi2, t)[0], central_jacobian(lambda z: model.f(z[None], t)[0], xi, CBRT_EPS)) < 1e-5
        assert rel(model.jac_g(xi2, t)[0], central_jacobian(lambda z: model.g(z[None], t)[0], xi, CBRT_EPS)) < 1e-5
        assert rel(model.hess_g(xi2, t)[0], central_jacobian(lambda z: model.jac_g(z[None], t)[0], xi, CBRT_EPS)) < 1e-5
    if isinstance(model, UNGMModel):
        for xi in x:
            assert rel(model.hess_f(xi[None], t)[0],
                       central_jacobian(lambda z: model.jac_f(z[None], t)[0], xi, CBRT_EPS)) < 1e-5


def _fd_hessian_scalar(fun, z):
    grad = lambda v: central_jacobian(lambda u: np.array([fun(u)]), v, 1e-4)[0]
    return central_jacobian(grad, z, 1e-4)


def test_ungm_density_hessians(rng):
    model = UNGMModel()
    for _ in range(100):
        xp = rng.uniform(-20, 20, 1)
        xn = model.f(xp[None], 2)[0] + rng.normal(0, 0.07, 1)
        y = np.array([ungm_measurement(xn[0]) + rng.normal(0, 0.03)])
        h_pp, h_pn, h_nn = model.transition_hessians(xp[None], xn[None], 2)
        z = np.concatenate([xp, xn])
        fd = _fd_hessian_scalar(lambda v: model.log_transition(v[None, :1], v[None, 1:], 2)[0], z)
        full = np.block([[h_pp[0], h_pn[0]], [h_pn[0].T, h_nn[0]]])
        assert rel(full, fd) < 1e-5
        lh = model.likelihood_hessian(xn[None], y, 3)[0]
        fd = _fd_hessian_scalar(lambda v: model.log_likelihood(v[None], y, 3)[0], xn)
        assert rel(lh, fd) < 1e-5


def test_rayleigh_likelihood_hessian_matches_differences(rng):
    model = UNGMRayleighModel()
    for _ in range(100):
        x = rng.uniform(-20, 20, 1)
        y = np.array([ungm_measurement(x[0]) + rng.uniform(0.02, 0.2)])
        lh = model.likelihood_hessian(x[None], y, 1)[0, 0, 0]
        f = lambda v: model.log_likelihood(np.array([[v]]), y, 1)[0]
        h = 1e-5  # w moves by |x|/10 * h, well inside the support
        fd = (f(x[0] + h) - 2.0 * f(x[0]) + f(x[0] - h)) / h ** 2
        assert lh == pytest.approx(fd, rel=1e-5)


def test_rayleigh_parameterizations():
    a = UNGMRayleighModel()
    b = UNGMRayleighModel(parameterization="variance")
    assert a.sensor.scale_sq == 1e-3
    assert b.sensor.scale_sq == pytest.approx(1e-3 / (2 - math.pi / 2))
    assert "scale squared" in a.metadata()["rayleigh_parameterization"]
    with pytest.raises(ValueError):
        UNGMRayleighModel(parameterization="scale")


def test_simulation_deterministic():
    a = simulate_ensemble(BallisticModel(2), 3, 10, seed=99)
    b = simulate_ensemble(BallisticModel(2), 3, 10, seed=99)
    for ta, tb in zip(a, b):
        np.testing.assert_array_equal(ta.states, tb.states)
        np.testing.assert_array_equal(ta.measurements, tb.measurements)


def test_state_shape_checked():
    with pytest.raises(DimensionMismatch):
        UNGMModel().sample_transition(np.zeros((3, 2)), 0, np.random.default_rng(0))
