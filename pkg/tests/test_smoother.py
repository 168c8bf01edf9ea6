import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_force_joint, forward_filter, one_step_smoother
from smcpcrlb.distributions import GaussianLaw
from smcpcrlb.errors import ZeroTransitionMass
from smcpcrlb.particle import FILTERED, ParticleSet
from smcpcrlb.smoother import (PairParticleSet, joint_smoothing_grid, marginal_t, pair_log_zeta,
                               pair_weights_from_kernel, pairwise_weights, resample_pairs)
from smcpcrlb.ssm import LinearGaussianModel


def cloud(x, t):
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    return ParticleSet(x, np.full(len(x), 1.0 / len(x)), FILTERED, t)


def scalar_linear(a, q):
    return LinearGaussianModel([[a]], [[1.0]], [[q]], [[1.0]], GaussianLaw([0.0], [[1.0]]))


def test_single_pair():
    pairs = pairwise_weights(cloud([0.3], 0), cloud([1.0], 1), scalar_linear(0.9, 1.0))
    assert pairs.weights.tolist() == [1.0]


def test_flat_transition_gives_uniform_weights(rng):
    pairs = pairwise_weights(cloud(rng.standard_normal(6), 0), cloud(rng.standard_normal(6), 1),
                             scalar_linear(0.9, 1e12))
    np.testing.assert_allclose(pairs.weights, np.full(6, 1 / 6), rtol=1e-9)


def test_hand_computed_kernel():
    log_k = np.log([[2.0, 1.0], [1.0, 3.0]])
    np.testing.assert_allclose(pair_weights_from_kernel(log_k), [8 / 17, 9 / 17], rtol=1e-14)


def test_zero_transition_mass():
    with pytest.raises(ZeroTransitionMass):
        pair_weights_from_kernel(np.full((3, 3), -np.inf))


def test_resample_pairs_examples():
    prev = np.arange(4.0)[:, None]
    nxt = 10 + np.arange(4.0)[:, None]
    uniform = PairParticleSet(prev, nxt, np.full(4, 0.25), 0)
    out = resample_pairs(uniform, None, u0=0.4)
    assert sorted(out.prev[:, 0].tolist()) == [0, 1, 2, 3]
    point = PairParticleSet(prev, nxt, np.array([0.0, 0.0, 0.0, 1.0]), 0)
    out = resample_pairs(point, None, u0=0.4)
    assert out.prev[:, 0].tolist() == [3.0] * 4 and out.next[:, 0].tolist() == [13.0] * 4
    skew = PairParticleSet(prev, nxt, np.array([0.25, 0.75, 0.0, 0.0]), 0)
    out = resample_pairs(skew, None, u0=0.5)
    assert np.bincount(out.prev[:, 0].astype(int), minlength=4).tolist() == [1, 3, 0, 0]
    np.testing.assert_array_equal(out.next - out.prev, 10.0)  # pairs never split
    assert np.all(out.weights == 0.25)


def test_marginal_examples():
    m = marginal_t(PairParticleSet(np.array([[1.0], [2.0]]), np.array([[9.0], [8.0]]),
                                   np.array([0.5, 0.5]), 4))
    assert m.particles[:, 0].tolist() == [1.0, 2.0]
    assert m.weights.tolist() == [0.5, 0.5]
    assert m.time_index == 4


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.integers(min_value=3, max_value=12))
def test_permutation_invariance(seed, n):
    rng = np.random.default_rng(seed)
    model = scalar_linear(0.8, 0.7)
    x0, x1 = rng.standard_normal(n), rng.standard_normal(n)
    base = pairwise_weights(cloud(x0, 0), cloud(x1, 1), model).weights
    # jointly permuting both clouds permutes the pair weights the same way
    perm = rng.permutation(n)
    joint = pairwise_weights(cloud(x0[perm], 0), cloud(x1[perm], 1), model).weights
    np.testing.assert_allclose(joint, base[perm], rtol=1e-12)
    # reordering the other t-particles leaves the zeta of pair 0 unchanged
    x0_swapped = x0.copy()
    x0_swapped[[1, 2]] = x0[[2, 1]]
    log_k = model.log_transition_matrix(x0[:, None], x1[:, None], 0)
    log_k_swapped = model.log_transition_matrix(x0_swapped[:, None], x1[:, None], 0)
    assert pair_log_zeta(log_k_swapped)[0] == pytest.approx(pair_log_zeta(log_k)[0], rel=1e-12, abs=1e-12)


def _smoothing_setup(n, rng, a=0.9, q=0.5):
    m_t, p_t = 0.4, 0.6
    p_pred = a * a * p_t + q
    m_t1, p_t1 = 1.1, p_pred * 1.0 / (p_pred + 1.0)
    x0 = rng.normal(m_t, np.sqrt(p_t), n)
    x1 = rng.normal(m_t1, np.sqrt(p_t1), n)
    pairs = pairwise_weights(cloud(x0, 0), cloud(x1, 1), scalar_linear(a, q))
    return pairs, one_step_smoother(a, q, m_t, p_t, m_t1, p_t1)


def test_marginal_matches_rauch_smoother(rng):
    n = 10_000
    pairs, (m_s, p_s, _) = _smoothing_setup(n, rng)
    ess = 1.0 / np.sum(pairs.weights ** 2)
    out = marginal_t(resample_pairs(pairs, rng))
    se = np.sqrt(p_s * (1.0 / ess + 1.0 / n))
    assert abs(out.mean()[0] - m_s) < 5 * se


def test_pair_covariance_converges(rng):
    def err(n):
        errs = []
        for _ in range(8):
            pairs, (_, _, joint) = _smoothing_setup(n, rng)
            z = np.column_stack([pairs.prev[:, 0], pairs.next[:, 0]])
            mean = pairs.weights @ z
            d = z - mean
            cov = (pairs.weights[:, None] * d).T @ d
            errs.append(np.max(np.abs(cov - joint)))
        return np.mean(errs)

    e_small, e_large = err(250), err(4000)
    # a 16-fold increase in N should cut the error by about 4
    assert e_large < e_small / 2


@pytest.mark.parametrize("k,t", [(2, 0), (2, 3), (3, 2)])
def test_joint_smoothing_identity_brute_force(k, t):
    rng = np.random.default_rng(100 + 10 * k + t)
    prior = rng.dirichlet(np.ones(k))
    transition = rng.dirichlet(np.ones(k), size=k)
    likelihoods = [rng.uniform(0.05, 1.0, k) for _ in range(t + 1)]
    filters = forward_filter(prior, transition, likelihoods)
    got = joint_smoothing_grid(transition, filters[t], filters[t + 1])
    exact = brute_force_joint(prior, transition, likelihoods, t)
    assert np.max(np.abs(got - exact)) < 1e-10
