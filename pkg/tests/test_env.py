import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netbandit.env import BanditEnv, Scenario, compute_optimum, read_means, uniform_means, write_means
from netbandit.errors import InputError
from netbandit.graph import build_graph, complete_graph, path_graph
from netbandit.strategies import enumerate_feasible


def test_point_mass_is_constant():
    env = BanditEnv([0.3, 0.7], "point", seed=1)
    for t in (1, 2, 500):
        assert env.sample_round(t).tolist() == [0.3, 0.7]


def test_bernoulli_support():
    env = BanditEnv([0.1, 0.5, 0.9], "bernoulli", seed=3)
    X = env.sample_rounds(1000)
    assert set(np.unique(X)) <= {0.0, 1.0}


def test_replay_same_round():
    env = BanditEnv(np.linspace(0, 1, 7), "uniform", seed=11)
    a = env.sample_round(42)
    b = BanditEnv(np.linspace(0, 1, 7), "uniform", seed=11).sample_round(42)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("dist", ["bernoulli", "uniform", "point"])
def test_bulk_matches_single_rounds(dist):
    env = BanditEnv([0.2, 0.4, 0.6, 0.8, 0.5], dist, seed=5)
    bulk = env.sample_rounds(30, start=4)
    for k in range(30):
        assert np.array_equal(bulk[k], env.sample_round(4 + k))


@pytest.mark.parametrize("dist", ["bernoulli", "uniform"])
def test_support_and_mean(dist):
    mu = np.array([0.0, 0.05, 0.37, 0.5, 0.93, 1.0])
    env = BanditEnv(mu, dist, seed=2024)
    X = env.sample_rounds(100_000)
    assert X.min() >= 0.0 and X.max() <= 1.0
    assert np.all(np.abs(X.mean(axis=0) - mu) < 0.01)


def test_support_million_draws():
    env = BanditEnv(uniform_means(10, 1), "uniform", seed=9)
    X = env.sample_rounds(100_000)
    assert X.size == 10**6
    assert 0.0 <= X.min() and X.max() <= 1.0


def test_arms_uncorrelated():
    env = BanditEnv([0.5, 0.5], "bernoulli", seed=8)
    X = env.sample_rounds(50_000)
    assert abs(np.corrcoef(X.T)[0, 1]) < 0.02


def test_rejects_bad_inputs():
    with pytest.raises(InputError):
        BanditEnv([1.2])
    with pytest.raises(InputError):
        BanditEnv([0.5], "gaussian")
    with pytest.raises(InputError):
        BanditEnv([0.5]).sample_round(0)


def test_ssr_optimum_shift():
    g = path_graph(3)
    opt = compute_optimum([0.9, 0.5, 0.4], g, None, "ssr")
    assert np.allclose(opt.values, [1.4, 1.8, 0.9])
    assert opt.optimal_index == 1
    assert compute_optimum([0.9, 0.5, 0.4], g, None, "sso").optimal_index == 0


def test_sso_gaps():
    opt = compute_optimum([0.2, 0.8], None, None, Scenario.SSO)
    assert opt.optimal_index == 1
    assert np.allclose(opt.gaps, [0.6, 0.0])
    assert opt.delta_min == pytest.approx(0.6)


def test_csr_worked_example(path4):
    a, b, c, d = 0.1, 0.2, 0.3, 0.25
    fs = enumerate_feasible(path4, "independent", 2)
    opt = compute_optimum([a, b, c, d], path4, fs, "csr")
    assert opt.values[4] == pytest.approx(a + b + c + d)  # s5 = {1,3}
    cso = compute_optimum([a, b, c, d], path4, fs, "cso")
    assert cso.values[4] == pytest.approx(a + c)


def test_combinatorial_requires_strategies():
    with pytest.raises(InputError):
        compute_optimum([0.5, 0.5], build_graph(2, []), None, "cso")


def test_all_gaps_zero_flagged():
    opt = compute_optimum([0.3, 0.4, 0.5], complete_graph(3), None, "ssr")
    assert np.all(opt.gaps == 0) and opt.delta_min is None


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(0, 0.9), min_size=2, max_size=6),
    st.data(),
)
def test_optimum_monotone_in_means(mu, data):
    K = len(mu)
    g = path_graph(K)
    j = data.draw(st.integers(0, K - 1))
    eps = data.draw(st.floats(1e-3, 0.1))
    bumped = list(mu)
    bumped[j] += eps
    fs = enumerate_feasible(g, "subsets", 2)
    for sc in ("ssr", "cso", "csr"):
        before = compute_optimum(mu, g, fs, sc).values
        after = compute_optimum(bumped, g, fs, sc).values
        assert np.all(after >= before - 1e-12)


def test_means_file_round_trip(tmp_path):
    mu = uniform_means(5, 3)
    write_means(mu, tmp_path / "m.txt")
    assert np.array_equal(read_means(tmp_path / "m.txt"), mu)
