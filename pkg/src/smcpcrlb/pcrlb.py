"""Particle approximation of the posterior Cramer-Rao lower bound.

The Fisher information recursion

    J[t+1] = D22 - D12' (J[t] + D11)^-1 D12

needs expectations (the D-blocks) over the joint law of states and
measurements.  Here they are estimated from measurements alone: for every
measurement sequence a SIR filter plus one-step pair smoother yields particle
clouds for p(x[t], x[t+1] | y[1:t+1]), the Hessian integrands are averaged
over the cloud, and the per-sequence averages are then averaged over the M
sequences.

Two estimators are provided:

* ``general``: negative Hessians of ``log p(x[t+1] | x[t])`` at the pair
  particles and of ``log p(y[t+1] | x[t+1])`` at the t+1 component.
* ``gaussian`` (additive Gaussian noise only): the zero-mean residual terms
  are dropped analytically, leaving ``F' Q^-1 F`` and ``-F' Q^-1`` at the
  smoothed x[t] particles and ``Q^-1 + H' R^-1 H`` with H evaluated at the
  predicted x[t+1] particles.

``theoretical_bound`` evaluates the same integrands at simulated true states
instead of particles and serves as the reference.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, SequenceFailure, ShapeMismatch
from .numkit import invert_spd, is_psd, pcrlb_inverse_step, pfim_step, symmetrize
from .particle import SIRFilter
from .smoother import marginal_t, pairwise_weights, resample_pairs
from .ssm import FILTER_STREAM, GaussianModel, derive_rng, j0_gaussian, simulate_ensemble

GENERAL = "general"
GAUSSIAN = "gaussian"


@dataclass
class BoundSeries:
    """Bound matrices ``inverse[t-1] = J[t]^-1`` for t = 1..T."""

    inverse: np.ndarray
    information: np.ndarray
    j0: np.ndarray
    metadata: dict = field(default_factory=dict)
    history: list = None

    def __len__(self):
        return self.inverse.shape[0]

    @property
    def horizon(self):
        return self.inverse.shape[0]

    @property
    def state_dim(self):
        return self.j0.shape[0]

    def sqrt_diagonal(self):
        """Square roots of the bound diagonals, shape (T, n)."""
        return np.sqrt(np.clip(np.diagonal(self.inverse, axis1=1, axis2=2), 0.0, None))


@dataclass
class QualityMetric:
    """Time-averaged elementwise squared error between two bound series."""

    lam: np.ndarray

    @property
    def diagonal(self):
        return np.diag(self.lam).copy()


class FisherRecursion:
    """Running information matrix advanced one step at a time."""

    def __init__(self, j0, keep_history=False):
        self.j_current = symmetrize(np.asarray(j0, dtype=float))
        self.time_index = 0
        self.history = [] if keep_history else None
        self.psd_violations = []

    def advance(self, d11, d12, d22):
        """Advance J by one step; returns the new bound ``J^-1``."""
        j_next = pfim_step(self.j_current, d11, d12, d22)
        j_inv = pcrlb_inverse_step(self.j_current, d11, d12, d22)
        self.time_index += 1
        if not (is_psd(j_next) and is_psd(j_inv)):
            self.psd_violations.append(self.time_index)
        if self.history is not None:
            self.history.append({"t": self.time_index, "d11": d11, "d12": d12, "d22": d22,
                                 "j": j_next, "j_inv": j_inv})
        self.j_current = j_next
        return j_inv


def choose_path(model, path=None):
    if path in (None, "auto"):
        return GAUSSIAN if isinstance(model, GaussianModel) else GENERAL
    if path == GAUSSIAN and not isinstance(model, GaussianModel):
        raise ValueError("the gaussian path needs an additive-Gaussian model")
    if path not in (GAUSSIAN, GENERAL):
        raise ValueError(f"unknown path {path!r}")
    return path


# --- integrands -------------------------------------------------------------

def general_integrands(model, x_prev, x_next, y_next, t):
    """Cloud averages of the negative Hessian integrands for one sequence.

    Returns ``(d11, d12, d22)`` where d22 includes the likelihood term at
    ``y_next`` (the measurement at time t+1).
    """
    h_pp, h_pn, h_nn = model.transition_hessians(x_prev, x_next, t)
    h_lik = model.likelihood_hessian(x_next, y_next, t + 1)
    return -h_pp.mean(axis=0), -h_pn.mean(axis=0), -(h_nn + h_lik).mean(axis=0)


def gaussian_integrands(model, smoothed, predicted, t):
    """Cloud averages for the additive-Gaussian estimator.

    Returns ``(d11, d12, d22_measurement)``; the constant ``Q^-1`` part of
    D22 is added by the caller.
    """
    ftqf, ftq = model.fisher_transition(smoothed, t)
    return ftqf.mean(axis=0), ftq.mean(axis=0), model.fisher_measurement(predicted, t + 1).mean(axis=0)


def d_blocks_general(pairs_by_seq, measurements_next, model, t=None):
    """D-blocks from resampled pair clouds, one per sequence, and y[t+1] per sequence."""
    if t is None:
        t = pairs_by_seq[0].time_index
    per_seq = [general_integrands(model, p.prev, p.next, y, t)
               for p, y in zip(pairs_by_seq, measurements_next)]
    return tuple(np.mean(np.stack(block), axis=0) for block in zip(*per_seq))


def d_blocks_gaussian(smoothed_t, predicted_t1, model):
    """D-blocks from smoothed x[t] clouds and predicted x[t+1] clouds per sequence."""
    t = smoothed_t[0].time_index
    per_seq = [gaussian_integrands(model, s.particles, p.particles, t)
               for s, p in zip(smoothed_t, predicted_t1)]
    d11, d12, d22m = (np.mean(np.stack(block), axis=0) for block in zip(*per_seq))
    return d11, d12, model.Q_inv + d22m


# --- per-sequence pipeline ---------------------------------------------------

def sequence_integrands(model, measurements, n_particles, rng, path):
    """Per-step cloud averages for one measurement sequence.

    Returns an array of shape (T, 3, n, n) holding (d11, d12, d22-part) for
    t = 0..T-1.  On the gaussian path the third block excludes ``Q^-1``.
    """
    measurements = np.asarray(measurements, dtype=float)
    horizon = measurements.shape[0]
    n = model.state_dim
    out = np.empty((horizon, 3, n, n))
    pf = SIRFilter(model, n_particles, rng)
    for t in range(horizon):
        try:
            filtered_t = pf.current
            predicted, filtered_t1 = pf.step(measurements[t])
            pairs = resample_pairs(pairwise_weights(filtered_t, filtered_t1, model), rng)
            if path == GAUSSIAN:
                blocks = gaussian_integrands(model, marginal_t(pairs).particles,
                                             predicted.particles, t)
            else:
                blocks = general_integrands(model, pairs.prev, pairs.next, measurements[t], t)
        except NumericalError as exc:
            exc.step = t + 1
            raise
        out[t] = np.stack(blocks)
    return out


def _ordered_map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _as_measurement_array(measurement_sequences):
    seqs = [getattr(s, "measurements", s) for s in measurement_sequences]
    out = []
    for s in seqs:
        s = np.asarray(s, dtype=float)
        out.append(s[:, None] if s.ndim == 1 else s)
    return out


def _recurse(model, blocks, path, j0, keep_history, metadata):
    """Run the information recursion over reduced D-blocks of shape (T, 3, n, n)."""
    n = model.state_dim
    horizon = blocks.shape[0]
    rec = FisherRecursion(j0, keep_history=keep_history)
    inverse = np.empty((horizon, n, n))
    information = np.empty((horizon, n, n))
    for t in range(horizon):
        d11, d12, d22 = blocks[t]
        if path == GAUSSIAN:
            d22 = model.Q_inv + d22
        inverse[t] = rec.advance(symmetrize(d11), d12, symmetrize(d22))
        information[t] = rec.j_current
    metadata = dict(metadata)
    metadata["psd_violations"] = list(rec.psd_violations)
    return BoundSeries(inverse, information, np.asarray(j0, dtype=float), metadata, rec.history)


def _sequence_failure(j, exc):
    return SequenceFailure(j, getattr(exc, "step", None), exc)


def run_bound(model, measurement_sequences, n_particles, seed, *, path=None, workers=1,
              keep_history=False, j0=None):
    """Particle approximation of the bound from measurement sequences alone.

    ``measurement_sequences`` is a list of M arrays of shape (T, m) (or
    ``Trajectory`` objects, of which only the measurements are read).
    Sequence j filters with ``derive_rng(seed, j, FILTER_STREAM)``, so the
    result does not depend on ``workers``.
    """
    path = choose_path(model, path)
    seqs = _as_measurement_array(measurement_sequences)
    m_seq = len(seqs)
    horizon = seqs[0].shape[0] if seqs else 0
    if any(s.shape[0] != horizon for s in seqs):
        raise ShapeMismatch("all measurement sequences must share one horizon")
    j0 = model.j0() if j0 is None else j0
    meta = {"n_particles": int(n_particles), "m_sequences": m_seq, "horizon": horizon,
            "seed": int(seed), "path": path, "estimator": "particle", **model.metadata()}
    n = model.state_dim
    if horizon == 0:
        return BoundSeries(np.empty((0, n, n)), np.empty((0, n, n)), np.asarray(j0), meta)

    def work(j):
        try:
            return sequence_integrands(model, seqs[j], n_particles,
                                       derive_rng(seed, j, FILTER_STREAM), path)
        except NumericalError as exc:
            raise _sequence_failure(j, exc) from exc

    per_seq = np.stack(_ordered_map(work, range(m_seq), workers))
    return _recurse(model, per_seq.mean(axis=0), path, j0, keep_history, meta)


def theoretical_bound(model, trajectories=None, *, m_sequences=None, horizon=None, seed=None,
                      path=None, keep_history=False, j0=None):
    """Reference bound from an ensemble of true trajectories.

    The D-block integrands of the chosen estimator are evaluated at the true
    states (and, on the general path, the true measurements) and averaged
    over the ensemble.  Trajectories are simulated with
    ``simulate_ensemble(model, m_sequences, horizon, seed)`` when not given.
    """
    path = choose_path(model, path)
    if trajectories is None:
        trajectories = simulate_ensemble(model, m_sequences, horizon, seed)
    states = np.stack([tr.states for tr in trajectories])  # (M, T+1, n)
    meas = np.stack([tr.measurements for tr in trajectories])  # (M, T, m)
    m_seq, horizon = meas.shape[0], meas.shape[1]
    n = model.state_dim
    j0 = model.j0() if j0 is None else j0
    meta = {"m_sequences": m_seq, "horizon": horizon, "seed": seed, "path": path,
            "estimator": "true-state", **model.metadata()}
    blocks = np.empty((horizon, 3, n, n))
    for t in range(horizon):
        try:
            if path == GAUSSIAN:
                blocks[t] = np.stack(gaussian_integrands(model, states[:, t], states[:, t + 1], t))
            else:
                per_seq = [general_integrands(model, states[j, t][None], states[j, t + 1][None],
                                              meas[j, t], t) for j in range(m_seq)]
                blocks[t] = np.mean(np.stack([np.stack(b) for b in per_seq]), axis=0)
        except NumericalError as exc:
            raise SequenceFailure(None, t + 1, exc) from exc
    return _recurse(model, blocks, path, j0, keep_history, meta)


def lambda_j(approx, reference):
    """Time average of the squared elementwise bound error."""
    a = approx.inverse if isinstance(approx, BoundSeries) else np.asarray(approx, dtype=float)
    b = reference.inverse if isinstance(reference, BoundSeries) else np.asarray(reference, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatch(f"bound series shapes differ: {a.shape} vs {b.shape}")
    diff = a - b
    return QualityMetric(np.mean(diff * diff, axis=0))


__all__ = [
    "BoundSeries", "QualityMetric", "FisherRecursion", "j0_gaussian", "invert_spd",
    "d_blocks_general", "d_blocks_gaussian", "run_bound", "theoretical_bound", "lambda_j",
]
