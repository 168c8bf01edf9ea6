"""One-step joint smoothing of (x[t], x[t+1]) from two filtered clouds.

The proposal is the product of the filtering densities at t and t+1.  Each
filtered particle at t+1 is paired with the particle of the same index at t
and weighted by its transition density relative to the mixture of
transitions from the whole cloud at t:

    zeta_i = p(x1_i | x0_i) / (N * sum_m p(x1_i | x0_m))

Weights are handled in log space throughout.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ZeroTransitionMass
from .particle import FILTERED, SMOOTHED, ParticleSet, systematic_indices


@dataclass
class PairParticleSet:
    prev: np.ndarray  # (N, n) components at time t
    next: np.ndarray  # (N, n) components at time t+1
    weights: np.ndarray
    time_index: int

    @property
    def size(self):
        return self.prev.shape[0]


def pair_log_zeta(log_kernel):
    """log zeta for each diagonal pair given ``log_kernel[i, m] = log p(x1_i | x0_m)``."""
    log_kernel = np.asarray(log_kernel, dtype=float)
    n = log_kernel.shape[0]
    denom = logsumexp(log_kernel, axis=1)
    diag = np.diagonal(log_kernel)
    with np.errstate(invalid="ignore"):
        out = diag - np.log(n) - denom
    # a row with no transition mass at all contributes nothing
    return np.where(np.isfinite(denom), out, -np.inf)


def pair_weights_from_kernel(log_kernel):
    log_zeta = pair_log_zeta(log_kernel)
    top = np.max(log_zeta)
    if not np.isfinite(top):
        raise ZeroTransitionMass("no pair carries transition mass")
    w = np.exp(log_zeta - top)
    return w / w.sum()


def pairwise_weights(filtered_t, filtered_t1, model):
    """Weighted pairs approximating p(x[t], x[t+1] | y[1:t+1])."""
    if filtered_t.size != filtered_t1.size:
        raise ValueError("both clouds must hold the same number of particles")
    t = filtered_t.time_index
    log_kernel = model.log_transition_matrix(filtered_t.particles, filtered_t1.particles, t)
    return PairParticleSet(filtered_t.particles, filtered_t1.particles,
                           pair_weights_from_kernel(log_kernel), t)


def resample_pairs(pairs, rng, u0=None):
    """Systematic resampling of whole pairs; a pair is never split."""
    if u0 is None:
        u0 = float(rng.random())
    idx = systematic_indices(pairs.weights, u0)
    n = pairs.size
    return PairParticleSet(pairs.prev[idx], pairs.next[idx], np.full(n, 1.0 / n), pairs.time_index)


def marginal_t(pairs):
    """The x[t] components of an equally weighted pair cloud: p(x[t] | y[1:t+1])."""
    n = pairs.size
    return ParticleSet(pairs.prev.copy(), np.full(n, 1.0 / n), SMOOTHED, pairs.time_index)


def marginal_t1(pairs):
    n = pairs.size
    return ParticleSet(pairs.next.copy(), np.full(n, 1.0 / n), FILTERED, pairs.time_index + 1)


def joint_smoothing_grid(transition, filter_t, filter_t1):
    """Exact joint smoothing mass on a finite state space.

    ``transition[a, b] = p(x[t+1] = b | x[t] = a)``; ``filter_t`` and
    ``filter_t1`` are the filtering masses at t and t+1.  Returns
    ``P[a, b] = p(x[t] = a, x[t+1] = b | y[1:t+1])``.
    """
    transition = np.asarray(transition, dtype=float)
    filter_t = np.asarray(filter_t, dtype=float)
    filter_t1 = np.asarray(filter_t1, dtype=float)
    predictive = filter_t @ transition
    return transition * filter_t[:, None] * filter_t1[None, :] / predictive[None, :]
