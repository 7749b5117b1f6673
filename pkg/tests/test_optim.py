import inspect

import numpy as np
import pytest

from rotolab.oracle import Oracle, OracleConfig, make_rng
from rotolab.qsim import Observable, ParamCircuit, layered_ansatz, objective, random_circuit, \
    random_observable, rx
from rotolab.optim import (
    KINDS, OptimizerConfig, rcd_step, rotosolve_step, rsgf_step, run, sgd_step, spsa_step,
)
from rotolab.trig import exact_gradients, fit_univariate, landscape_constants, univariate_min

RX = ParamCircuit(1, (rx(0, 0),))
Z = Observable(1, ((1.0, "Z"),))
COS = Oracle(RX, Z)


def _problem(seed, n=3, d=6):
    rng = make_rng(seed, 5)
    circuit = random_circuit(rng, n, d)
    obs = random_observable(rng, n, 4)
    return circuit, obs, rng.uniform(-np.pi, np.pi, d)


def _flat_oracle(d=3):
    circuit = layered_ansatz(1, 1, axes=("Y", "Z", "Y")[:d])
    return Oracle(circuit, Observable(1, ((0.7, "I"),)))


def test_rotosolve_cos_examples():
    step = rotosolve_step(COS, [0.0], coord=0)
    assert abs(abs(step.theta[0]) - np.pi) < 1e-15
    assert COS.exact(step.theta) == pytest.approx(-1.0)
    fixed = rotosolve_step(COS, [np.pi], coord=0)
    assert abs(abs(fixed.theta[0]) - np.pi) < 1e-12


def test_rotosolve_monotone_and_attains_fit_minimum():
    circuit = layered_ansatz(4, 1)
    obs = random_observable(make_rng(3), 4, 5)
    oracle = Oracle(circuit, obs)
    theta = make_rng(4).uniform(-np.pi, np.pi, 8)
    rng = make_rng(5)
    for _ in range(200):
        j = int(rng.integers(8))
        _, fmin = univariate_min(fit_univariate(oracle, theta, j))
        new = rotosolve_step(oracle, theta, coord=j).theta
        assert objective(circuit, obs, new) <= objective(circuit, obs, theta) + 1e-9
        assert abs(objective(circuit, obs, new) - fmin) <= 1e-9
        assert np.count_nonzero(new != theta) <= 1
        theta = new


def test_rotosolve_flat_direction_is_noop():
    oracle = _flat_oracle()
    theta = np.array([0.1, 0.2, 0.3])
    step = rotosolve_step(oracle, theta, coord=1)
    assert step.flat and np.array_equal(step.theta, theta)
    tr = run(OptimizerConfig("rotosolve", T=3), oracle, theta)
    assert all(tr.flat[1:])


def test_rotosolve_takes_no_numeric_hyperparameters():
    params = set(inspect.signature(rotosolve_step).parameters)
    assert params == {"oracle", "theta", "rng", "coord"}


def test_rcd_examples():
    assert np.array_equal(rcd_step(COS, [0.0], 0.3, coord=0).theta, [0.0])
    step = rcd_step(COS, [np.pi / 2], 0.5, coord=0)
    assert step.theta[0] == pytest.approx(np.pi / 2 + 0.5)


def test_rcd_monotone_with_safe_step():
    circuit, obs, theta = _problem(1)
    alpha = 1 / landscape_constants(circuit, obs, trials=16).L_max
    tr = run(OptimizerConfig("rcd", T=500, alpha=alpha, seed=2), Oracle(circuit, obs), theta)
    assert np.all(np.diff(tr.values) <= 1e-12)


def test_sgd_examples():
    assert np.array_equal(sgd_step(COS, [0.0], 0.3).theta, [0.0])
    a = sgd_step(COS, [0.4], 0.3).theta
    b = rcd_step(COS, [0.4], 0.3, coord=0).theta
    assert np.allclose(a, b, atol=1e-15)


def test_sgd_monotone_with_step_one_over_L():
    circuit, obs, theta = _problem(2)
    L = landscape_constants(circuit, obs, trials=16).L
    tr = run(OptimizerConfig("sgd", T=200, alpha=1 / L), Oracle(circuit, obs), theta)
    assert np.all(np.diff(tr.values) <= 1e-12)


def test_spsa_examples():
    flat = _flat_oracle()
    theta = np.array([0.3, -0.2, 1.0])
    # 0.7 * |psi|^2 varies by an ulp between points
    assert np.allclose(spsa_step(flat, theta, 0.5, 0.01, rng=make_rng(0)).theta, theta, rtol=0, atol=1e-12)
    c, alpha = 0.01, 0.2
    step = spsa_step(COS, [0.4], alpha, c, delta=np.array([1.0]))
    fd = (np.cos(0.4 + c) - np.cos(0.4 - c)) / (2 * c)
    assert step.theta[0] == pytest.approx(0.4 - alpha * fd, abs=1e-14)


def test_spsa_gradient_unbiased_up_to_c_squared():
    circuit, obs, theta = _problem(6)
    rng = make_rng(7)
    c = 1e-2
    draws = 100000
    deltas = rng.choice([-1.0, 1.0], size=(draws, len(theta)))
    fp = objective(circuit, obs, theta + c * deltas)
    fm = objective(circuit, obs, theta - c * deltas)
    g = ((fp - fm) / (2 * c))[:, None] * deltas
    se = g.std(axis=0, ddof=1) / np.sqrt(draws)
    true = exact_gradients(circuit, obs, theta)
    lam = 4.0  # |coefficients| of the 4-term observable are at most 1
    assert np.all(np.abs(g.mean(axis=0) - true) <= 4 * se + lam * len(theta) * c**2)


def test_rsgf_examples():
    flat = _flat_oracle()
    theta = np.array([0.3, -0.2, 1.0])
    # 0.7 * |psi|^2 varies by an ulp between points
    assert np.allclose(rsgf_step(flat, theta, 0.5, 0.01, rng=make_rng(0)).theta, theta, rtol=0, atol=1e-12)
    nu, alpha = 0.01, 0.2
    step = rsgf_step(COS, [0.4], alpha, nu, direction=[1.0])
    fd = (np.cos(0.4 + nu) - np.cos(0.4)) / nu
    assert step.theta[0] == pytest.approx(0.4 - alpha * fd, abs=1e-14)


def test_rsgf_gradient_matches_within_nu():
    circuit, obs, theta = _problem(8)
    rng = make_rng(9)
    nu = 1e-2
    draws = 100000
    u = rng.standard_normal((draws, len(theta)))
    fs = objective(circuit, obs, theta + nu * u)
    f0 = objective(circuit, obs, theta)
    g = ((fs - f0) / nu)[:, None] * u
    se = g.std(axis=0, ddof=1) / np.sqrt(draws)
    true = exact_gradients(circuit, obs, theta)
    assert np.all(np.abs(g.mean(axis=0) - true) <= 4 * se + 10 * nu)


def test_run_examples():
    tr = run(OptimizerConfig("rotosolve", T=1, seed=7), COS, [0.0])
    assert tr.values[-1] == pytest.approx(-1.0) and len(tr) == 2
    with pytest.raises(ValueError):
        OptimizerConfig("rotosolve", T=0)
    tr = run(OptimizerConfig("rcd", T=1, alpha=0.0), COS, [0.25])
    assert np.array_equal(tr.thetas[0], tr.thetas[-1])


@pytest.mark.parametrize("kind", KINDS)
def test_execution_accounting(kind):
    circuit, obs, theta = _problem(10)
    oracle = Oracle(circuit, obs, OracleConfig.with_shots(7, seed=1))
    T = 13
    tr = run(OptimizerConfig(kind, T=T, alpha=0.05), oracle, theta)
    per = {"rotosolve": 3, "rcd": 2, "sgd": 2 * len(theta), "spsa": 2, "rsgf": 2}[kind]
    assert len(tr) == T + 1
    assert tr.executions[-1] == T * per and tr.shots[-1] == 7 * T * per
    assert np.all(np.diff(tr.executions) == per)


@pytest.mark.parametrize("kind", KINDS)
def test_seeded_determinism(kind):
    circuit, obs, theta = _problem(11)
    config = OptimizerConfig(kind, T=30, alpha=0.05, seed=4)
    noise = OracleConfig.gaussian(0.01, seed=2)
    a = run(config, Oracle(circuit, obs, noise), theta)
    b = run(config, Oracle(circuit, obs, noise), theta)
    assert a.values == b.values and a.coords == b.coords


@pytest.mark.parametrize("kind", ["rotosolve", "rcd"])
def test_coordinate_locality(kind):
    circuit, obs, theta = _problem(12)
    tr = run(OptimizerConfig(kind, T=40, alpha=0.1), Oracle(circuit, obs), theta)
    for before, after, j in zip(tr.thetas, tr.thetas[1:], tr.coords[1:]):
        changed = np.flatnonzero(before != after)
        assert changed.size <= 1 and (changed.size == 0 or changed[0] == j)


def test_trace_csv(tmp_path):
    tr = run(OptimizerConfig("rcd", T=3, alpha=0.1), COS, [0.5])
    tr.to_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "t,j,f_exact,circuit_executions,total_shots"
    assert len(lines) == 5 and lines[1].startswith("0,,")


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig("adam")
    with pytest.raises(ValueError):
        OptimizerConfig("rcd", alpha=-0.1)
    with pytest.raises(ValueError):
        OptimizerConfig("spsa", c=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig("rsgf", nu=0.0)
