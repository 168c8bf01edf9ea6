"""Noise laws: multivariate Gaussian and scalar Rayleigh.

Random streams are anything exposing the ``numpy.random.Generator`` methods
``standard_normal`` and ``random``; tests substitute stubs with fixed draws.
"""
import math
from functools import cached_property

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionMismatch, OutOfSupport
from .numkit import as_square, cholesky, invert_spd

_LOG_2PI = math.log(2.0 * math.pi)


class GaussianLaw:
    """N(mean, covariance); the Cholesky factor is computed once and cached."""

    def __init__(self, mean, covariance):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float)).copy()
        self.covariance = as_square(covariance).copy()
        if self.covariance.shape[0] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"mean has dim {self.mean.shape[0]}, covariance is {self.covariance.shape}"
            )
        self.mean.flags.writeable = False
        self.covariance.flags.writeable = False
        self.chol  # validates SPD eagerly

    @property
    def dim(self):
        return self.mean.shape[0]

    @cached_property
    def chol(self):
        return cholesky(self.covariance)

    @cached_property
    def precision(self):
        return invert_spd(self.covariance)

    @cached_property
    def log_norm(self):
        return -0.5 * self.dim * _LOG_2PI - float(np.sum(np.log(np.diag(self.chol))))

    def sample(self, rng, size=None):
        """``size`` draws stacked along the first axis (a single vector if None)."""
        shape = (self.dim,) if size is None else (size, self.dim)
        z = np.asarray(rng.standard_normal(shape), dtype=float).reshape(shape)
        return self.mean + z @ self.chol.T

    def whiten(self, x):
        """L^-1 (x - mean) for x of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected trailing dim {self.dim}, got {x.shape}")
        flat = (x - self.mean).reshape(-1, self.dim)
        return solve_triangular(self.chol, flat.T, lower=True).T.reshape(x.shape)

    def logpdf(self, x):
        z = self.whiten(x)
        return self.log_norm - 0.5 * np.sum(z * z, axis=-1)


def gaussian_sample(law, rng):
    return law.sample(rng)


def gaussian_logpdf(law, x):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (law.dim,):
        raise DimensionMismatch(f"law has dim {law.dim}, x has shape {x.shape}")
    return float(law.logpdf(x))


class RayleighLaw:
    """Rayleigh law with density ``(w / s2) exp(-w^2 / (2 s2))`` on w > 0.

    ``scale_sq`` is the squared scale s2 (the variance of the underlying
    Gaussian components, not the variance of the Rayleigh variable itself).
    """

    def __init__(self, scale_sq):
        scale_sq = float(scale_sq)
        if not scale_sq > 0.0:
            raise ValueError(f"scale_sq must be positive, got {scale_sq}")
        self.scale_sq = scale_sq

    @property
    def scale(self):
        return math.sqrt(self.scale_sq)

    @property
    def mean(self):
        return self.scale * math.sqrt(math.pi / 2.0)

    def sample(self, rng, size=None):
        u = np.asarray(rng.random(size), dtype=float)
        return self.scale * np.sqrt(-2.0 * np.log1p(-u))

    def logpdf(self, w):
        w = np.asarray(w, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(w > 0.0, np.log(np.where(w > 0.0, w, 1.0) / self.scale_sq)
                           - w * w / (2.0 * self.scale_sq), -np.inf)
        return out if out.ndim else float(out)

    def derivs(self, w):
        """(logpdf, d/dw, d2/dw2); raises OutOfSupport if any w <= 0."""
        w = np.asarray(w, dtype=float)
        if np.any(~(w > 0.0)):
            raise OutOfSupport("Rayleigh log-density derivatives requested at w <= 0")
        s2 = self.scale_sq
        logpdf = np.log(w / s2) - w * w / (2.0 * s2)
        d1 = 1.0 / w - w / s2
        d2 = -1.0 / (w * w) - 1.0 / s2
        if w.ndim == 0:
            return float(logpdf), float(d1), float(d2)
        return logpdf, d1, d2


def rayleigh_logpdf_derivs(law, w):
    return law.derivs(w)
