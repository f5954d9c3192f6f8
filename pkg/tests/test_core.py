import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from movenet.core import (DynamicNetwork, IsolatedIndividualError, ModelParams, TrajectoryGrid,
                          attraction_direction, build_precision, conditional_mean, ego_mean,
                          ego_size, joint_step_mean, movement_log_density, simulate_paths,
                          simulate_step)
from oracles import conditional_from_joint, dense_movement_log_density, random_network, random_slice

PARAMS = ModelParams(alpha=0.9, beta=0.5, p1=0.2, phi=0.95, c=0.33, sigma2=1.0)


def _three_node():
    edges = np.zeros((3, 3, 1), dtype=np.int8)
    edges[0, 1, 0] = edges[1, 0, 0] = 1
    edges[0, 2, 0] = edges[2, 0, 0] = 1
    return edges


def test_ego_size_examples():
    W = _three_node()
    assert ego_size(W, 0, 0, c=0.33) == 2.0
    assert ego_size(W, 1, 0, c=0.33) == 1.0
    iso = np.zeros((3, 3, 1), dtype=np.int8)
    assert ego_size(iso, 2, 0, c=0.33) == 0.33


def test_ego_size_errors():
    W = _three_node()
    with pytest.raises(IndexError):
        ego_size(W, 3, 0, c=0.33)
    with pytest.raises(ValueError):
        ego_size(W, 0, 0, c=0.0)


def test_ego_mean_and_direction():
    W = _three_node()
    mu = np.array([[[0.0, 0.0]], [[2.0, 0.0]], [[0.0, 2.0]]])
    np.testing.assert_allclose(ego_mean(mu, W, 0, 0), [1.0, 1.0])
    np.testing.assert_allclose(attraction_direction(mu, W, 0, 0), [2 ** -0.5, 2 ** -0.5])
    with pytest.raises(IsolatedIndividualError):
        ego_mean(mu, np.zeros((3, 3, 1), dtype=np.int8), 0, 0)


def test_direction_zero_when_on_centroid():
    edges = np.zeros((3, 3, 1), dtype=np.int8)
    edges[0, 1, 0] = edges[1, 0, 0] = edges[0, 2, 0] = edges[2, 0, 0] = 1
    mu = np.array([[[0.0, 0.0]], [[1.0, 0.0]], [[-1.0, 0.0]]])
    np.testing.assert_array_equal(attraction_direction(mu, edges, 0, 0), [0.0, 0.0])


def test_precision_example():
    W = _three_node()[:, :, 0]
    Q = build_precision(W, PARAMS)
    q0 = np.array([[2.0, -0.9, -0.9], [-0.9, 1.0, 0.0], [-0.9, 0.0, 1.0]])
    np.testing.assert_allclose(Q, np.kron(q0, np.eye(2)))
    np.testing.assert_allclose(Q, Q.T)
    assert np.all(np.linalg.eigvalsh(Q) > 0)


def test_precision_rejects_boundary_alpha():
    W = _three_node()[:, :, 0]
    with pytest.raises(ValueError):
        ModelParams(alpha=1.0, beta=0.5, p1=0.2, phi=0.95, c=0.33, sigma2=1.0)
    bad = PARAMS.replace(alpha=0.5)
    object.__setattr__(bad, "alpha", 1.0)
    with pytest.raises(ValueError):
        build_precision(W, bad)


@pytest.mark.parametrize("field,value", [("p1", 0.0), ("p1", 1.0), ("phi", 1.0), ("c", 0.0),
                                         ("sigma2", -1.0), ("alpha", -1.0), ("beta", np.nan)])
def test_params_domain(field, value):
    with pytest.raises(ValueError):
        PARAMS.replace(**{field: value})


def test_transition_probability_properties():
    assert PARAMS.p_1_given_0 == pytest.approx(0.01)
    assert PARAMS.p_1_given_1 == pytest.approx(0.96)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 8),
       alpha=st.floats(-0.99, 0.99), c=st.floats(0.01, 5.0))
def test_precision_positive_definite(seed, n, alpha, c):
    rng = np.random.default_rng(seed)
    W = random_slice(n, rng, p=rng.uniform(0, 1))
    Q = build_precision(W, PARAMS.replace(alpha=alpha, c=c))
    np.testing.assert_allclose(Q, Q.T)
    assert np.linalg.eigvalsh(Q).min() > 0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 6), ego=st.sampled_from(["previous", "current"]))
def test_conditional_mean_matches_dense_conditioning(seed, n, ego):
    rng = np.random.default_rng(seed)
    params = PARAMS.replace(alpha=rng.uniform(-0.95, 0.95), beta=rng.normal(0, 2),
                            c=rng.uniform(0.1, 3), sigma2=rng.uniform(0.2, 4))
    W_prev, W_now = random_slice(n, rng), random_slice(n, rng)
    prev = rng.normal(0, 5, (n, 2))
    now = rng.normal(0, 5, (n, 2))
    mean = joint_step_mean(prev, W_prev if ego == "previous" else W_now, params).ravel()
    Q = build_precision(W_now, params)
    i = int(rng.integers(n))
    oracle_mean, oracle_prec = conditional_from_joint(mean, Q, now.ravel(), i)
    got = conditional_mean(prev, np.delete(now, i, axis=0), W_now, W_prev, params, i, ego)
    np.testing.assert_allclose(got, oracle_mean, atol=1e-10)
    np.testing.assert_allclose(oracle_prec, Q[2 * i:2 * i + 2, 2 * i:2 * i + 2], atol=1e-10)


@pytest.mark.parametrize("ego", ["previous", "current"])
def test_log_density_matches_dense_mvn(rng, ego):
    n, T = 4, 6
    W = random_network(n, T, rng)
    mu = rng.normal(0, 3, (n, T, 2))
    params = PARAMS.replace(alpha=-0.4, beta=1.3, c=0.7, sigma2=1.7)
    got = movement_log_density(mu, W, params, ego)
    assert got == pytest.approx(dense_movement_log_density(mu, W, params, ego), abs=1e-9)


def test_log_density_sigma2_scaling(rng):
    # f(s) = K - a log s - q / (2 s) with a = n (T - 1)
    n, T = 3, 5
    W = random_network(n, T, rng)
    mu = rng.normal(0, 3, (n, T, 2))
    f = {s: movement_log_density(mu, W, PARAMS.replace(sigma2=s)) for s in (0.5, 1.0, 2.0)}
    a = n * (T - 1)
    q = 4 * (a * np.log(2.0) - f[1.0] + f[2.0])
    assert q > 0
    assert f[0.5] == pytest.approx(f[1.0] + a * np.log(2.0) - 0.5 * q, abs=1e-9)


def test_log_density_shape_mismatch(rng):
    W = random_network(3, 4, rng)
    with pytest.raises(ValueError):
        movement_log_density(np.zeros((3, 5, 2)), W, PARAMS)


def test_simulate_step_covariance(rng):
    n = 3
    W_now = _three_node()[:, :, 0]
    params = PARAMS.replace(sigma2=2.0)
    N = 40000
    draws = np.array([simulate_step(np.zeros((n, 2)), W_now, W_now, params, rng)
                      for _ in range(N)])
    xs = draws[:, :, 0]
    cov = np.linalg.inv(build_precision(W_now, params))[::2, ::2]
    emp = np.cov(xs.T)
    se = np.sqrt((np.outer(np.diag(cov), np.diag(cov)) + cov ** 2) / N)
    assert np.all(np.abs(emp - cov) < 4 * se)
    assert np.all(np.abs(xs.mean(axis=0)) < 4 * np.sqrt(np.diag(cov) / N))
    # x and y are independent
    assert abs(np.corrcoef(draws[:, 0, 0], draws[:, 0, 1])[0, 1]) < 4 / np.sqrt(N)


def test_attraction_moves_by_beta(rng):
    # two linked individuals 1000 km apart: mean projected step toward the partner is beta
    T = 60
    edges = np.ones((2, 2, T), dtype=np.int8)
    edges[0, 0] = edges[1, 1] = 0
    params = PARAMS.replace(beta=5.0, alpha=0.5)
    proj = []
    for _ in range(50):
        grid, _ = simulate_paths(params, 2, T, [[0.0, 0.0], [1000.0, 0.0]], rng, W=edges)
        pos = grid.positions
        gap = pos[1, :-1] - pos[0, :-1]
        unit = gap / np.linalg.norm(gap, axis=1)[:, None]
        proj.append(np.sum((pos[0, 1:] - pos[0, :-1]) * unit, axis=1))
    proj = np.concatenate(proj)
    assert abs(proj.mean() - 5.0) < 3 * proj.std() / np.sqrt(proj.size)


def test_simulate_paths_deterministic():
    a, Wa = simulate_paths(PARAMS, 4, 20, np.zeros((4, 2)), np.random.default_rng(3))
    b, Wb = simulate_paths(PARAMS, 4, 20, np.zeros((4, 2)), np.random.default_rng(3))
    np.testing.assert_array_equal(a.positions, b.positions)
    np.testing.assert_array_equal(Wa.edges, Wb.edges)


def test_simulate_paths_given_network_shape_check(rng):
    with pytest.raises(ValueError):
        simulate_paths(PARAMS, 3, 5, np.zeros((3, 2)), rng, W=np.zeros((3, 3, 4), dtype=np.int8))


def test_dynamic_network_validation():
    bad = np.zeros((3, 3, 2), dtype=np.int8)
    bad[0, 1, 0] = 1
    with pytest.raises(ValueError):
        DynamicNetwork(bad)
    loop = np.zeros((3, 3, 2), dtype=np.int8)
    loop[1, 1, 0] = 1
    with pytest.raises(ValueError):
        DynamicNetwork(loop)


def test_trajectory_grid_times():
    grid = TrajectoryGrid(np.zeros((2, 4, 2)), time_step=0.5)
    np.testing.assert_allclose(grid.times, [0.0, 0.5, 1.0, 1.5])
    assert (grid.n, grid.T) == (2, 4)
