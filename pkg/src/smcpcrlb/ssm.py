"""State-space models and trajectory simulation.

Two model classes are distinguished:

``GeneralModel``
    Arbitrary transition and likelihood densities.  The bound engine needs
    their log-density Hessians; subclasses supply them analytically, otherwise
    a central finite-difference fallback is used and ``analytic_hessians`` is
    False so run metadata can flag it.

``GaussianModel``
    ``x[t+1] = f(x[t]) + v``, ``y[t] = g(x[t]) + w`` with Gaussian v, w.  The
    bound only needs the Jacobians of ``f`` and ``g``.

All model callbacks are vectorized: states are passed as ``(N, n)`` arrays,
Jacobians come back as ``(N, rows, n)`` and Hessians as ``(N, n, n)``.

Time indexing: the transition from ``x[t]`` to ``x[t+1]`` is called with
``t`` (t = 0 .. T-1) and the measurement ``y[t]`` with ``t`` (t = 1 .. T).
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .distributions import GaussianLaw, RayleighLaw
from .errors import DimensionMismatch, OutOfSupport, SingularGradient, UndefinedBearing
from .numkit import as_square, invert_spd

#: Relative step of the finite-difference Hessian fallback.
FD_STEP = 1e-5

SIMULATION_STREAM = 0
FILTER_STREAM = 1


def derive_rng(seed, j, stream):
    """Independent generator for sequence ``j`` and purpose ``stream``.

    Counter-based: the stream depends only on ``(seed, j, stream)``, never on
    the order in which sequences are processed.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(j), int(stream))))


def _as_states(x, n):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != n:
        raise DimensionMismatch(f"expected (N, {n}) states, got shape {x.shape}")
    return x


def fd_hessian(fun, z, step=FD_STEP):
    """Central-difference Hessian of a vectorized scalar function.

    ``fun`` maps ``(N, d)`` to ``(N,)``; returns ``(N, d, d)``.  The step for
    component k is ``step * (1 + |z_k|)``.
    """
    z = np.asarray(z, dtype=float)
    n_pts, d = z.shape
    h = step * (1.0 + np.abs(z))
    f0 = fun(z)
    out = np.empty((n_pts, d, d))
    for k in range(d):
        ek = np.zeros(d)
        ek[k] = 1.0
        dk = h[:, k:k + 1] * ek
        out[:, k, k] = (fun(z + dk) - 2.0 * f0 + fun(z - dk)) / h[:, k] ** 2
        for m in range(k + 1, d):
            em = np.zeros(d)
            em[m] = 1.0
            dm = h[:, m:m + 1] * em
            val = (fun(z + dk + dm) - fun(z + dk - dm) - fun(z - dk + dm) + fun(z - dk - dm)) / (
                4.0 * h[:, k] * h[:, m]
            )
            out[:, k, m] = out[:, m, k] = val
    return out


def fd_jacobian(fun, x, step=None):
    """Central-difference Jacobian of a vectorized map ``(N, n) -> (N, p)``."""
    x = np.asarray(x, dtype=float)
    if step is None:
        step = np.finfo(float).eps ** (1.0 / 3.0)
    n_pts, n = x.shape
    cols = []
    for k in range(n):
        h = step * (1.0 + np.abs(x[:, k]))
        e = np.zeros(n)
        e[k] = 1.0
        fp = np.asarray(fun(x + h[:, None] * e))
        fm = np.asarray(fun(x - h[:, None] * e))
        cols.append((fp - fm) / (2.0 * h.reshape((-1,) + (1,) * (fp.ndim - 1))))
    return np.stack(cols, axis=-1)


class GeneralModel:
    """Arbitrary Markov transition and measurement densities."""

    name = "general"
    analytic_hessians = False

    def __init__(self, state_dim, meas_dim, prior):
        self.state_dim = int(state_dim)
        self.meas_dim = int(meas_dim)
        self.prior = prior
        if prior.dim != self.state_dim:
            raise DimensionMismatch(f"prior has dim {prior.dim}, model state_dim {self.state_dim}")

    # -- required callbacks ------------------------------------------------
    def sample_transition(self, x, t, rng):
        raise NotImplementedError

    def log_transition(self, x_prev, x_next, t):
        """log p(x_next[i] | x_prev[i]) for matched rows."""
        raise NotImplementedError

    def sample_measurement(self, x, t, rng):
        raise NotImplementedError

    def log_likelihood(self, x, y, t):
        """log p(y | x[i]) for every row of x."""
        raise NotImplementedError

    # -- optional callbacks with generic fallbacks ------------------------
    def log_transition_matrix(self, x_prev, x_next, t):
        """Array ``K[i, m] = log p(x_next[i] | x_prev[m])``."""
        n = self.state_dim
        n1, n0 = x_next.shape[0], x_prev.shape[0]
        xp = np.broadcast_to(x_prev[None, :, :], (n1, n0, n)).reshape(-1, n)
        xn = np.broadcast_to(x_next[:, None, :], (n1, n0, n)).reshape(-1, n)
        return self.log_transition(xp, xn, t).reshape(n1, n0)

    def transition_hessians(self, x_prev, x_next, t):
        """Hessian blocks of ``log p(x_next | x_prev)``.

        Returns ``(H_pp, H_pn, H_nn)`` with ``H_pn[i, a, b] = d2 / dx_prev_a dx_next_b``.
        """
        n = self.state_dim
        z = np.concatenate([x_prev, x_next], axis=1)
        hess = fd_hessian(lambda zz: self.log_transition(zz[:, :n], zz[:, n:], t), z)
        return hess[:, :n, :n], hess[:, :n, n:], hess[:, n:, n:]

    def likelihood_hessian(self, x, y, t):
        """Hessian in x of ``log p(y | x)``, shape ``(N, n, n)``."""
        return fd_hessian(lambda xx: self.log_likelihood(xx, y, t), x)

    def j0(self):
        """Prior Fisher information (inverse prior covariance for a Gaussian prior)."""
        return j0_gaussian(self.prior)

    def metadata(self):
        return {
            "model": self.name,
            "hessians": "analytic" if self.analytic_hessians else "finite-difference",
        }


def j0_gaussian(prior):
    return invert_spd(prior.covariance)


class GaussianModel(GeneralModel):
    """Additive-Gaussian model ``x+ = f(x) + N(0, Q)``, ``y = g(x) + N(0, R)``.

    Subclasses implement ``f``, ``jac_f``, ``g``, ``jac_g``.  ``jac_f`` returns
    the Jacobian ``df_i/dx_j`` (rows are output components).  ``hess_f`` and
    ``hess_g`` return ``(N, out, n, n)`` second derivatives; when a subclass
    leaves them unimplemented they are obtained by differencing the Jacobian.
    """

    name = "gaussian"

    def __init__(self, state_dim, meas_dim, Q, R, prior):
        super().__init__(state_dim, meas_dim, prior)
        self.Q = as_square(Q)
        self.R = as_square(R)
        if self.Q.shape[0] != self.state_dim or self.R.shape[0] != self.meas_dim:
            raise DimensionMismatch("Q must be n x n and R must be m x m")
        self.state_noise = GaussianLaw(np.zeros(self.state_dim), self.Q)
        self.meas_noise = GaussianLaw(np.zeros(self.meas_dim), self.R)
        self.Q_inv = self.state_noise.precision
        self.R_inv = self.meas_noise.precision

    def f(self, x, t):
        raise NotImplementedError

    def jac_f(self, x, t):
        raise NotImplementedError

    def g(self, x, t):
        raise NotImplementedError

    def jac_g(self, x, t):
        raise NotImplementedError

    def hess_f(self, x, t):
        return fd_jacobian(lambda xx: self.jac_f(xx, t), x)

    def hess_g(self, x, t):
        return fd_jacobian(lambda xx: self.jac_g(xx, t), x)

    def sample_transition(self, x, t, rng):
        x = _as_states(x, self.state_dim)
        return self.f(x, t) + self.state_noise.sample(rng, x.shape[0])

    def log_transition(self, x_prev, x_next, t):
        return self.state_noise.logpdf(x_next - self.f(x_prev, t))

    def log_transition_matrix(self, x_prev, x_next, t):
        # Whitened squared distances through one matrix product.
        low = self.state_noise.chol
        a = solve_triangular(low, x_next.T, lower=True).T
        b = solve_triangular(low, self.f(x_prev, t).T, lower=True).T
        centre = b.mean(axis=0)
        a = a - centre
        b = b - centre
        sq = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * (a @ b.T)
        return self.state_noise.log_norm - 0.5 * np.maximum(sq, 0.0)

    def transition_hessians(self, x_prev, x_next, t):
        jac = self.jac_f(x_prev, t)
        jt_qinv = np.einsum("nij,ik->njk", jac, self.Q_inv)
        resid = (x_next - self.f(x_prev, t)) @ self.Q_inv
        h_pp = -jt_qinv @ jac + np.einsum("nk,nkab->nab", resid, self.hess_f(x_prev, t))
        h_pn = jt_qinv
        h_nn = np.broadcast_to(-self.Q_inv, h_pp.shape).copy()
        return h_pp, h_pn, h_nn

    def sample_measurement(self, x, t, rng):
        x = _as_states(x, self.state_dim)
        return self.g(x, t) + self.meas_noise.sample(rng, x.shape[0])

    def log_likelihood(self, x, y, t):
        return self.meas_noise.logpdf(np.asarray(y, dtype=float) - self.g(x, t))

    def likelihood_hessian(self, x, y, t):
        jac = self.jac_g(x, t)
        resid = (np.asarray(y, dtype=float) - self.g(x, t)) @ self.R_inv
        fisher = np.einsum("nij,ik,nkl->njl", jac, self.R_inv, jac)
        return -fisher + np.einsum("nk,nkab->nab", resid, self.hess_g(x, t))

    def fisher_transition(self, x, t):
        """``J' Q^-1 J`` and ``-J' Q^-1`` at each particle (the expected-value integrands)."""
        jac = self.jac_f(x, t)
        jt_qinv = np.einsum("nij,ik->njk", jac, self.Q_inv)
        return jt_qinv @ jac, -jt_qinv

    def fisher_measurement(self, x, t):
        """``H' R^-1 H`` at each particle, H the measurement Jacobian."""
        jac = self.jac_g(x, t)
        return np.einsum("nij,ik,nkl->njl", jac, self.R_inv, jac)


class LinearGaussianModel(GaussianModel):
    """``x+ = A x + v``, ``y = C x + w``; the Kalman filter gives its exact bound."""

    name = "linear-gaussian"
    analytic_hessians = True

    def __init__(self, A, C, Q, R, prior):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.C = np.atleast_2d(np.asarray(C, dtype=float))
        super().__init__(self.A.shape[0], self.C.shape[0], Q, R, prior)

    def f(self, x, t):
        return x @ self.A.T

    def jac_f(self, x, t):
        return np.broadcast_to(self.A, (x.shape[0],) + self.A.shape).copy()

    def hess_f(self, x, t):
        n = self.state_dim
        return np.zeros((x.shape[0], n, n, n))

    def g(self, x, t):
        return x @ self.C.T

    def jac_g(self, x, t):
        return np.broadcast_to(self.C, (x.shape[0],) + self.C.shape).copy()

    def hess_g(self, x, t):
        n = self.state_dim
        return np.zeros((x.shape[0], self.meas_dim, n, n))


# --- univariate non-stationary growth model ---------------------------------

def ungm_step(x, t):
    """Transition mean ``x/2 + 25 x / (1 + x^2) + 8 cos(1.2 t)``."""
    return x / 2.0 + 25.0 * x / (1.0 + x * x) + 8.0 * np.cos(1.2 * t)


def ungm_measurement(x):
    return x * x / 20.0


class UNGMModel(GaussianModel):
    """Growth model with Gaussian state and sensor noise (variances q, r)."""

    name = "ungm-gaussian"
    analytic_hessians = True

    def __init__(self, q=5e-3, r=1e-3, prior_var=0.01, prior_mean=0.0):
        super().__init__(1, 1, [[q]], [[r]], GaussianLaw([prior_mean], [[prior_var]]))

    def f(self, x, t):
        return ungm_step(x, t)

    def jac_f(self, x, t):
        s = 1.0 + x * x
        return (0.5 + 25.0 * (1.0 - x * x) / (s * s))[:, :, None]

    def hess_f(self, x, t):
        s = 1.0 + x * x
        return (50.0 * x * (x * x - 3.0) / s ** 3)[:, :, None, None]

    def g(self, x, t):
        return ungm_measurement(x)

    def jac_g(self, x, t):
        return (x / 10.0)[:, :, None]

    def hess_g(self, x, t):
        return np.full((x.shape[0], 1, 1, 1), 0.1)


SCALE_SQUARED = "scale-squared"
VARIANCE = "variance"
RAYLEIGH_PARAMETERIZATIONS = {
    SCALE_SQUARED: "R_t interpreted as scale squared (sigma^2)",
    VARIANCE: "R_t interpreted as the Rayleigh variance (2 - pi/2) sigma^2",
}


class UNGMRayleighModel(GeneralModel):
    """Growth model with Gaussian state noise and additive Rayleigh sensor noise.

    ``y = x^2/20 + w`` with ``w ~ Rayleigh(scale_sq=r)``; the likelihood is
    zero wherever ``y - x^2/20 <= 0``.
    """

    name = "ungm-rayleigh"
    analytic_hessians = True

    def __init__(self, q=5e-3, r=1e-3, prior_var=0.01, prior_mean=0.0,
                 parameterization=SCALE_SQUARED):
        if parameterization not in RAYLEIGH_PARAMETERIZATIONS:
            raise ValueError(f"unknown Rayleigh parameterization {parameterization!r}")
        self.parameterization = parameterization
        self.dynamics = UNGMModel(q=q, r=1.0, prior_var=prior_var, prior_mean=prior_mean)
        # a Rayleigh law with scale s has variance (2 - pi/2) s^2
        scale_sq = r if parameterization == SCALE_SQUARED else r / (2.0 - math.pi / 2.0)
        self.sensor = RayleighLaw(scale_sq)
        super().__init__(1, 1, self.dynamics.prior)

    def sample_transition(self, x, t, rng):
        return self.dynamics.sample_transition(x, t, rng)

    def log_transition(self, x_prev, x_next, t):
        return self.dynamics.log_transition(x_prev, x_next, t)

    def log_transition_matrix(self, x_prev, x_next, t):
        return self.dynamics.log_transition_matrix(x_prev, x_next, t)

    def transition_hessians(self, x_prev, x_next, t):
        return self.dynamics.transition_hessians(x_prev, x_next, t)

    def sample_measurement(self, x, t, rng):
        x = _as_states(x, 1)
        return ungm_measurement(x) + self.sensor.sample(rng, x.shape[0])[:, None]

    def log_likelihood(self, x, y, t):
        w = float(np.asarray(y).reshape(-1)[0]) - ungm_measurement(x[:, 0])
        return self.sensor.logpdf(w)

    def likelihood_hessian(self, x, y, t):
        w = float(np.asarray(y).reshape(-1)[0]) - ungm_measurement(x[:, 0])
        _, d1, d2 = self.sensor.derivs(w)
        dw = -x[:, 0] / 10.0
        return (d2 * dw * dw - d1 / 10.0)[:, None, None]

    def metadata(self):
        meta = super().metadata()
        meta["rayleigh_parameterization"] = RAYLEIGH_PARAMETERIZATIONS[self.parameterization]
        meta["rayleigh_scale_sq"] = self.sensor.scale_sq
        return meta


# --- ballistic re-entry ------------------------------------------------------

@dataclass(frozen=True)
class BallisticParams:
    gravity: float = 9.8  # m/s^2
    beta: float = 40000.0  # ballistic coefficient
    dt: float = 2.0  # s

    @property
    def A(self):
        dt = self.dt
        return np.array([[1.0, dt, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0],
                         [0.0, 0.0, 1.0, dt], [0.0, 0.0, 0.0, 1.0]])

    @property
    def G(self):
        dt = self.dt
        return np.array([[dt * dt / 2.0, 0.0], [dt, 0.0], [0.0, dt * dt / 2.0], [0.0, dt]])


#: Table of (gamma, sigma_range [m], sigma_elevation [rad]) per tracking case.
BALLISTIC_CASES = {
    1: (1.0, 100.0, 0.017),
    2: (5.0, 100.0, 0.017),
    3: (1.0, 500.0, 0.085),
    4: (5.0, 500.0, 0.085),
}

#: Initial state [X m, Xdot m/s, H m, Hdot m/s]: 232 km, 88 km, 2.290 km/s at 190 deg.
BALLISTIC_X0 = np.array([
    232e3,
    2290.0 * math.cos(math.radians(190.0)),
    88e3,
    2290.0 * math.sin(math.radians(190.0)),
])
#: Prior standard deviations: 1 km in position, 20 m/s in velocity.
BALLISTIC_PRIOR_STD = np.array([1e3, 20.0, 1e3, 20.0])

DENSITY_SWITCH_ALTITUDE = 9144.0


def air_density(h):
    """Air density and its exponential decay rate, branch chosen by altitude."""
    h = np.asarray(h, dtype=float)
    low = h < DENSITY_SWITCH_ALTITUDE
    alpha1 = np.where(low, 1.227, 1.754)
    alpha2 = np.where(low, 1.09310e-4, 1.4910e-4)
    return alpha1 * np.exp(-alpha2 * h), alpha2


def ballistic_drag(x, params=BallisticParams()):
    """Drag acceleration ``-(g rho / 2 beta) |v| v`` for states ``(..., 4)``."""
    x = np.asarray(x, dtype=float)
    vx, h, vh = x[..., 1], x[..., 2], x[..., 3]
    rho, _ = air_density(h)
    speed = np.hypot(vx, vh)
    c = -params.gravity * rho / (2.0 * params.beta) * speed
    return np.stack([c * vx, c * vh], axis=-1)


def ballistic_f(x, params=BallisticParams()):
    """Noise-free transition ``A x + G F(x) + G [0, -g]``."""
    x = np.asarray(x, dtype=float)
    force = ballistic_drag(x, params) + np.array([0.0, -params.gravity])
    return x @ params.A.T + force @ params.G.T


def drag_jacobian(x, params=BallisticParams()):
    """The 2 x 4 drag Jacobian M(x) (rows: drag components, columns: states)."""
    x = np.asarray(x, dtype=float)
    vx, h, vh = x[..., 1], x[..., 2], x[..., 3]
    speed = np.hypot(vx, vh)
    if np.any(speed == 0.0):
        raise SingularGradient("drag Jacobian undefined at zero velocity")
    rho, alpha2 = air_density(h)
    k = params.gravity * rho / (2.0 * params.beta)
    m = np.zeros(x.shape[:-1] + (2, 4))
    m[..., 0, 1] = -k * (2.0 * vx * vx + vh * vh) / speed
    m[..., 1, 1] = -k * vx * vh / speed
    m[..., 0, 2] = k * alpha2 * speed * vx
    m[..., 1, 2] = k * alpha2 * speed * vh
    m[..., 0, 3] = m[..., 1, 1]
    m[..., 1, 3] = -k * (vx * vx + 2.0 * vh * vh) / speed
    return m


def ballistic_grad_f(x, params=BallisticParams()):
    """Transition Jacobian ``A + G M(x)``."""
    return params.A + params.G @ drag_jacobian(x, params)


def _check_bearing(x):
    if np.any(x[..., 0] == 0.0):
        raise UndefinedBearing("elevation undefined for horizontal position X = 0")


def ballistic_g(x):
    """Radar measurement (range [m], elevation [rad]).

    Elevation is ``arctan(H / X)``, shifted by pi when X < 0.
    """
    x = np.asarray(x, dtype=float)
    _check_bearing(x)
    px, ph = x[..., 0], x[..., 2]
    elev = np.arctan(ph / px) + np.where(px < 0.0, math.pi, 0.0)
    return np.stack([np.hypot(px, ph), elev], axis=-1)


def ballistic_grad_g(x):
    """Measurement Jacobian (2 x 4); velocity columns are zero."""
    x = np.asarray(x, dtype=float)
    _check_bearing(x)
    px, ph = x[..., 0], x[..., 2]
    r2 = px * px + ph * ph
    r = np.sqrt(r2)
    n = np.zeros(x.shape[:-1] + (2, 4))
    n[..., 0, 0] = px / r
    n[..., 0, 2] = ph / r
    n[..., 1, 0] = -ph / r2
    n[..., 1, 2] = px / r2
    return n


def ballistic_hess_g(x):
    """Second derivatives of the radar map, shape ``(..., 2, 4, 4)``."""
    x = np.asarray(x, dtype=float)
    _check_bearing(x)
    px, ph = x[..., 0], x[..., 2]
    r2 = px * px + ph * ph
    r3 = r2 * np.sqrt(r2)
    r4 = r2 * r2
    out = np.zeros(x.shape[:-1] + (2, 4, 4))
    out[..., 0, 0, 0] = ph * ph / r3
    out[..., 0, 2, 2] = px * px / r3
    out[..., 0, 0, 2] = out[..., 0, 2, 0] = -px * ph / r3
    out[..., 1, 0, 0] = 2.0 * px * ph / r4
    out[..., 1, 2, 2] = -2.0 * px * ph / r4
    out[..., 1, 0, 2] = out[..., 1, 2, 0] = (ph * ph - px * px) / r4
    return out


def ballistic_state_cov(gamma, dt):
    """``gamma * kron(I2, [[dt^3/3, dt^2/2], [dt^2/2, dt]])``."""
    theta = np.array([[dt ** 3 / 3.0, dt ** 2 / 2.0], [dt ** 2 / 2.0, dt]])
    return gamma * np.kron(np.eye(2), theta)


class BallisticModel(GaussianModel):
    """Re-entry target tracked by a range/elevation radar at the origin.

    The transition Hessian is not implemented analytically; it is obtained by
    differencing ``jac_f`` and is only needed on the general-model path.
    """

    name = "ballistic"

    def __init__(self, case=1, params=BallisticParams(), gamma=None, sigma_range=None,
                 sigma_elevation=None, prior_mean=BALLISTIC_X0, prior_std=BALLISTIC_PRIOR_STD):
        case_gamma, case_sr, case_se = BALLISTIC_CASES[case]
        self.case = case
        self.params = params
        self.gamma = case_gamma if gamma is None else gamma
        self.sigma_range = case_sr if sigma_range is None else sigma_range
        self.sigma_elevation = case_se if sigma_elevation is None else sigma_elevation
        Q = ballistic_state_cov(self.gamma, params.dt)
        R = np.diag([self.sigma_range ** 2, self.sigma_elevation ** 2])
        prior = GaussianLaw(prior_mean, np.diag(np.asarray(prior_std, dtype=float) ** 2))
        super().__init__(4, 2, Q, R, prior)

    def f(self, x, t):
        return ballistic_f(x, self.params)

    def jac_f(self, x, t):
        return ballistic_grad_f(x, self.params)

    def g(self, x, t):
        return ballistic_g(x)

    def jac_g(self, x, t):
        return ballistic_grad_g(x)

    def hess_g(self, x, t):
        return ballistic_hess_g(x)

    def metadata(self):
        meta = super().metadata()
        meta.update(case=self.case, gamma=self.gamma, sigma_range=self.sigma_range,
                    sigma_elevation=self.sigma_elevation)
        return meta


# --- simulation -------------------------------------------------------------

@dataclass
class Trajectory:
    """True states ``x[0..T]`` and measurements ``y[1..T]`` (stored at index t-1)."""

    states: np.ndarray
    measurements: np.ndarray
    seed: object = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.states.shape[0] != self.measurements.shape[0] + 1:
            raise DimensionMismatch("states must hold exactly one more entry than measurements")

    @property
    def horizon(self):
        return self.measurements.shape[0]


def simulate(model, horizon, rng, x0=None, seed=None):
    """Simulate one trajectory; x0 is drawn from the prior unless given."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    n, m = model.state_dim, model.meas_dim
    states = np.empty((horizon + 1, n))
    meas = np.empty((horizon, m))
    states[0] = model.prior.sample(rng) if x0 is None else np.asarray(x0, dtype=float)
    for t in range(horizon):
        states[t + 1] = model.sample_transition(states[t][None, :], t, rng)[0]
        meas[t] = model.sample_measurement(states[t + 1][None, :], t + 1, rng)[0]
    return Trajectory(states, meas, seed=seed)


def simulate_ensemble(model, m_sequences, horizon, seed):
    """``m_sequences`` trajectories, sequence j driven by ``derive_rng(seed, j, SIMULATION_STREAM)``."""
    return [simulate(model, horizon, derive_rng(seed, j, SIMULATION_STREAM), seed=(seed, j))
            for j in range(m_sequences)]
