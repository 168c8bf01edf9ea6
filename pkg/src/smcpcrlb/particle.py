"""Sequential importance resampling (SIR) filter with systematic resampling.

The filter resamples at every step, so the filtered and predicted clouds
handed to the smoother and the bound engine are always equally weighted.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import AllWeightsZero

PRIOR = "prior"
PREDICTED = "predicted"
WEIGHTED = "weighted"
FILTERED = "filtered"
SMOOTHED = "smoothed"


@dataclass
class ParticleSet:
    particles: np.ndarray  # (N, n)
    weights: np.ndarray  # (N,)
    kind: str
    time_index: int

    @property
    def size(self):
        return self.particles.shape[0]

    def ess(self):
        return 1.0 / float(np.sum(self.weights ** 2))

    def mean(self):
        return self.weights @ self.particles

    def cov(self):
        d = self.particles - self.mean()
        return (self.weights[:, None] * d).T @ d


def _uniform(n):
    return np.full(n, 1.0 / n)


def init(prior, n, rng):
    """N i.i.d. draws from the prior, equally weighted."""
    if n < 1:
        raise ValueError("need at least one particle")
    return ParticleSet(np.asarray(prior.sample(rng, n), dtype=float).reshape(n, -1),
                       _uniform(n), PRIOR, 0)


def predict(resampled, model, rng):
    """Propagate an equally weighted cloud through the state transition."""
    if resampled.kind not in (PRIOR, FILTERED, SMOOTHED):
        raise ValueError(f"predict expects an equally weighted cloud, got kind={resampled.kind!r}")
    t = resampled.time_index
    x = model.sample_transition(resampled.particles, t, rng)
    return ParticleSet(x, _uniform(resampled.size), PREDICTED, t + 1)


def normalize_log_weights(log_w):
    """Normalized weights from log-weights, max-subtracted before exponentiation."""
    log_w = np.asarray(log_w, dtype=float)
    top = np.max(log_w)
    if not np.isfinite(top):
        raise AllWeightsZero("every particle has zero likelihood")
    w = np.exp(log_w - top)
    return w / w.sum()


def update_weights(predicted, y, model):
    """Reweight a predicted cloud by the likelihood of measurement ``y``."""
    if predicted.kind != PREDICTED:
        raise ValueError(f"update_weights expects a predicted cloud, got kind={predicted.kind!r}")
    t = predicted.time_index
    with np.errstate(divide="ignore"):
        log_w = np.log(predicted.weights) + model.log_likelihood(predicted.particles, y, t)
    return ParticleSet(predicted.particles, normalize_log_weights(log_w), WEIGHTED, t)


def systematic_indices(weights, u0, size=None):
    """Ancestor indices selected at positions ``(u0 + k) / size`` on the weight CDF.

    ``size`` defaults to the number of weights.
    """
    weights = np.asarray(weights, dtype=float)
    n = weights.shape[0]
    size = n if size is None else int(size)
    cdf = np.cumsum(weights)
    cdf[-1] = 1.0
    positions = (u0 + np.arange(size)) / size
    return np.minimum(np.searchsorted(cdf, positions, side="right"), n - 1)


def systematic_resample(filtered, rng, u0=None):
    """Systematic resampling with a single uniform offset ``u0``."""
    if u0 is None:
        u0 = float(rng.random())
    idx = systematic_indices(filtered.weights, u0)
    return ParticleSet(filtered.particles[idx], _uniform(filtered.size), FILTERED,
                       filtered.time_index)


def log_evidence_increment(predicted, y, model):
    """log of the particle estimate of p(y_t | y_1:t-1); handy for diagnostics."""
    ll = model.log_likelihood(predicted.particles, y, predicted.time_index)
    return float(logsumexp(ll + np.log(predicted.weights)))


class SIRFilter:
    """Step-by-step SIR filter over one measurement sequence.

    ``step(y)`` advances from t to t+1 and returns the predicted cloud
    ``p(x[t+1] | y[1:t])`` together with the resampled filtered cloud
    ``p(x[t+1] | y[1:t+1])``.
    """

    def __init__(self, model, n_particles, rng):
        self.model = model
        self.rng = rng
        self.current = init(model.prior, n_particles, rng)

    def step(self, y):
        predicted = predict(self.current, self.model, self.rng)
        weighted = update_weights(predicted, y, self.model)
        self.current = systematic_resample(weighted, self.rng)
        return predicted, self.current
