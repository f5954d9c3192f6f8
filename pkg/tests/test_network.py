import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from movenet.network import (EdgeTransition, edge_counts, network_log_mass, simulate_network,
                             simulate_pair_chains, transition_probs)
from oracles import random_network


def test_transition_example():
    p10, p11 = transition_probs(0.2, 0.95)
    assert p10 == pytest.approx(0.01)
    assert p11 == pytest.approx(0.96)


def test_phi_zero_gives_independent_draws():
    assert transition_probs(0.3, 0.0) == pytest.approx((0.3, 0.3))


@pytest.mark.parametrize("p1,phi", [(0.0, 0.5), (1.0, 0.5), (0.5, 1.0), (0.5, -0.1)])
def test_domain(p1, phi):
    with pytest.raises(ValueError):
        transition_probs(p1, phi)


@settings(max_examples=200, deadline=None)
@given(p1=st.floats(1e-6, 1 - 1e-6), phi=st.floats(0.0, 1 - 1e-6))
def test_stationarity_identity(p1, phi):
    p10, p11 = transition_probs(p1, phi)
    assert p1 * p11 + (1 - p1) * p10 == pytest.approx(p1, abs=1e-12)
    assert EdgeTransition(p1, phi).stationary() == pytest.approx(p1, rel=1e-9)


def test_log_mass_example():
    W = np.zeros((2, 2, 2), dtype=np.int8)
    W[0, 1] = W[1, 0] = [1, 1]
    assert network_log_mass(W, 0.2, 0.95) == pytest.approx(np.log(0.2 * 0.96))


@pytest.mark.parametrize("n,T", [(2, 3), (3, 2)])
def test_enumeration_normalizes(n, T):
    pairs = n * (n - 1) // 2
    total = 0.0
    iu, ju = np.triu_indices(n, 1)
    for bits in itertools.product([0, 1], repeat=pairs * T):
        W = np.zeros((n, n, T), dtype=np.int8)
        chains = np.array(bits).reshape(pairs, T)
        W[iu, ju] = chains
        W[ju, iu] = chains
        total += np.exp(network_log_mass(W, 0.37, 0.6))
    assert total == pytest.approx(1.0, abs=1e-12)


def _counts_by_loop(W):
    n, _, T = W.shape
    c = {"n00": 0, "n01": 0, "n10": 0, "n11": 0, "n0_init": 0, "n1_init": 0}
    for i in range(n):
        for j in range(i + 1, n):
            c["n1_init" if W[i, j, 0] else "n0_init"] += 1
            for t in range(1, T):
                c[f"n{W[i, j, t - 1]}{W[i, j, t]}"] += 1
    return c


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 6), T=st.integers(1, 8))
def test_counts_match_double_loop(seed, n, T):
    W = random_network(n, T, np.random.default_rng(seed))
    assert vars(edge_counts(W)) == _counts_by_loop(W)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_log_mass_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    W = random_network(5, 4, rng)
    perm = rng.permutation(5)
    Wp = W[np.ix_(perm, perm, np.arange(4))]
    assert network_log_mass(Wp, 0.3, 0.8) == pytest.approx(network_log_mass(W, 0.3, 0.8))


def test_zero_probability_transition_is_minus_inf():
    W = np.zeros((2, 2, 2), dtype=np.int8)
    W[0, 1, 1] = W[1, 0, 1] = 1
    # p10 = (1 - phi) p1 is tiny but positive for phi < 1
    assert np.isfinite(network_log_mass(W, 0.2, 0.999999))


def test_marginal_stationary_monte_carlo():
    p1, phi, N, T = 0.2, 0.95, 100_000, 10
    chains = simulate_pair_chains(p1, phi, N, T, np.random.default_rng(11))
    freq = chains.mean(axis=0)
    assert np.all(np.abs(freq - p1) < 3 * np.sqrt(p1 * (1 - p1) / N))


def test_simulated_transition_frequencies():
    W = simulate_network(0.3, 0.7, 30, 200, np.random.default_rng(5))
    c = edge_counts(W)
    p10, p11 = transition_probs(0.3, 0.7)
    n0, n1 = c.n00 + c.n01, c.n10 + c.n11
    assert abs(c.n01 / n0 - p10) < 4 * np.sqrt(p10 * (1 - p10) / n0)
    assert abs(c.n11 / n1 - p11) < 4 * np.sqrt(p11 * (1 - p11) / n1)


def test_simulate_network_is_symmetric():
    W = simulate_network(0.4, 0.5, 6, 7, np.random.default_rng(0))
    assert W.edges.shape == (6, 6, 7)
    assert np.array_equal(W.edges, W.edges.transpose(1, 0, 2))
    assert not np.any(W.edges[np.arange(6), np.arange(6)])
