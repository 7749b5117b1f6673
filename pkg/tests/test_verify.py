import math

import numpy as np
import pytest

from rotolab.oracle import OracleConfig, make_rng
from rotolab.optim import OptimizerConfig
from rotolab.qsim import Observable, ParamCircuit, layered_ansatz, random_observable, rx, \
    spectral_radius
from rotolab.trig import LandscapeConstants, landscape_constants
from rotolab.verify import (
    CHECKS, CheckResult, InsufficientDataError, SuiteSettings, TheoryReport,
    check_coordinate_descent_lemma, check_rcd_descent, check_rotosolve_descent,
    check_stationarity_rate, check_suboptimality_rate, estimate_fstar, run_ensemble, run_suite,
    scaling_problem, shot_budget, stationarity_bound, stationarity_iterations,
    suboptimality_iterations, trajectory_pl,
)

COS = (ParamCircuit(1, (rx(0, 0),)), Observable(1, ((1.0, "Z"),)))
COS_K = LandscapeConstants((1.0,), 1.0)


def _small():
    circuit = layered_ansatz(2, 1)
    obs = random_observable(make_rng(2), 2, 3)
    return circuit, obs


def test_shot_budget_examples():
    b = shot_budget(0.1, 1, 1.0, 2.0)
    assert (b.shots_per_evaluation, b.iterations, b.total_shots) == (200, 966, 579_600)
    assert shot_budget(0.01, 4, 1.0, 1.0, "suboptimal", mu=0.25).shots_per_evaluation == 1600
    with pytest.raises(ValueError):
        shot_budget(0.0, 1, 1.0, 1.0)
    with pytest.raises(ValueError):
        shot_budget(0.1, 1, 1.0, 1.0, "suboptimal")


@pytest.mark.parametrize("d", [1, 2, 3, 8, 50])
def test_shot_budget_quadruples_with_d(d):
    base = shot_budget(0.1, d, 1.0, 2.0).total_bound
    assert shot_budget(0.1, 2 * d, 1.0, 2.0).total_bound == pytest.approx(4 * base, rel=1e-12)


def test_iteration_formulas():
    assert stationarity_iterations("rotosolve", 0.1, 1, 2.0, COS_K) == 966
    K4 = LandscapeConstants((1.0,) * 4, 1.0)
    # (1 + sqrt 2) * 4 / (2 * 0.25) * ln(200) = 102.3
    assert suboptimality_iterations("rotosolve", 0.01, 4, 1.0, 0.25, K4) == 103
    # a prefactor of 4.8284 * 4 / 0.5 (i.e. lambda = 2) gives ceil(204.67) = 205
    K4_2 = LandscapeConstants((2.0,) * 4, 2.0)
    assert suboptimality_iterations("rotosolve", 0.01, 4, 1.0, 0.25, K4_2) == 205
    assert stationarity_iterations("rcd", 0.1, 1, 2.0, COS_K) == 800
    assert stationarity_bound("rotosolve", 10, 1, 2.0, 0.0, COS_K) == pytest.approx(
        (1 + math.sqrt(2)) * 2 / 10)


def test_descent_lemma_zero_step_and_cos_grid():
    circuit, obs = COS
    r = check_coordinate_descent_lemma(circuit, obs, samples=500, constants=COS_K)
    assert r.passed
    h = np.linspace(-np.pi, np.pi, 100)
    for theta in np.linspace(-np.pi, np.pi, 25):
        excess = np.cos(theta + h) - (np.cos(theta) - h * np.sin(theta) + h**2 / 2)
        assert excess.max() <= 1e-12


def test_descent_lemma_fails_with_understated_smoothness():
    circuit = layered_ansatz(4, 1)
    obs = random_observable(make_rng(3), 4, 4)
    K = landscape_constants(circuit, obs, trials=16)
    assert check_coordinate_descent_lemma(circuit, obs, constants=K).passed
    weak = LandscapeConstants(tuple(L / 10 for L in K.L_j), K.lam_max)
    assert not check_coordinate_descent_lemma(circuit, obs, constants=weak).passed


def test_exact_single_coordinate_descent():
    circuit, obs = COS
    traces = run_ensemble(OptimizerConfig("rotosolve", T=3), circuit, obs, OracleConfig.exact(),
                          [0.4], range(30))
    r = check_rotosolve_descent(traces, circuit, obs, sigma2=0.0)
    assert r.passed and r.statistic == 1.0
    assert all(tr.values[1] == pytest.approx(-1.0) for tr in traces)


def test_noisy_descent_checks_pass():
    circuit, obs = _small()
    K = landscape_constants(circuit, obs, trials=16)
    theta0 = make_rng(4).uniform(-np.pi, np.pi, circuit.param_dim)
    cfg = OracleConfig.with_shots(100, seed=1)
    sigma2 = spectral_radius(obs) ** 2 / 100
    roto = run_ensemble(OptimizerConfig("rotosolve", T=40), circuit, obs, cfg, theta0, range(30))
    assert check_rotosolve_descent(roto, circuit, obs, sigma2).passed
    alpha = 1 / K.L_max
    rcd = run_ensemble(OptimizerConfig("rcd", T=40, alpha=alpha), circuit, obs, cfg, theta0,
                       range(30))
    assert check_rcd_descent(rcd, circuit, obs, sigma2, alpha, K).passed


def test_stationarity_exact_cos():
    circuit, obs = COS
    traces = run_ensemble(OptimizerConfig("rotosolve", T=5), circuit, obs, OracleConfig.exact(),
                          [0.0], range(30))
    r = check_stationarity_rate(traces, circuit, obs, COS_K, 0.0, -1.0, eps=0.1)
    assert r.passed and r.hypotheses["T_guarantee"] == 966


def test_suboptimality_single_coordinate():
    circuit, obs = COS
    traces = run_ensemble(OptimizerConfig("rotosolve", T=4), circuit, obs, OracleConfig.exact(),
                          [0.5], range(30))
    pl = trajectory_pl(circuit, obs, traces, -1.0)
    assert pl.coordinate_sum == pytest.approx(pl.direct, rel=1e-9)  # d = 1: the two agree
    r = check_suboptimality_rate(traces, circuit, obs, COS_K, 0.0, -1.0, 0.01, pl.mu)
    assert r.passed
    assert not check_suboptimality_rate(traces, circuit, obs, COS_K, 0.0, -1.0, 0.01, 0.0).passed


def test_trajectory_pl_satisfies_inequality():
    circuit, obs = _small()
    fstar = estimate_fstar(circuit, obs, restarts=8)
    traces = run_ensemble(OptimizerConfig("rotosolve", T=30), circuit, obs, OracleConfig.exact(),
                          make_rng(6).uniform(-np.pi, np.pi, circuit.param_dim), range(3))
    pl = trajectory_pl(circuit, obs, traces, fstar)
    assert pl.mu == min(pl.coordinate_sum, pl.direct) and pl.mu >= 0
    assert 0 <= pl.maximizer_fraction <= 1


def test_insufficient_seeds():
    circuit, obs = COS
    traces = run_ensemble(OptimizerConfig("rotosolve", T=2), circuit, obs, OracleConfig.exact(),
                          [0.0], range(5))
    with pytest.raises(InsufficientDataError, match="30"):
        check_rotosolve_descent(traces, circuit, obs, 0.0)
    with pytest.raises(InsufficientDataError):
        run_suite(circuit, obs, ["rotosolve_descent"], SuiteSettings(seeds=10))


def test_rcd_checks_need_alpha():
    circuit, obs = COS
    traces = run_ensemble(OptimizerConfig("rcd", T=2), circuit, obs, OracleConfig.exact(),
                          [0.3], range(30))
    with pytest.raises(ValueError):
        check_stationarity_rate(traces, circuit, obs, COS_K, 0.0, -1.0, 0.1, which="rcd")


def test_ensembles_must_share_start():
    circuit, obs = COS
    a = run_ensemble(OptimizerConfig("rotosolve", T=2), circuit, obs, OracleConfig.exact(),
                     [0.3], range(15))
    b = run_ensemble(OptimizerConfig("rotosolve", T=2), circuit, obs, OracleConfig.exact(),
                     [0.4], range(15))
    with pytest.raises(ValueError):
        check_rotosolve_descent(a + b, circuit, obs, 0.0)


def test_scaling_problem_keeps_radius_fixed():
    for d in (2, 4, 8):
        circuit, obs = scaling_problem(d)
        assert circuit.param_dim == d
        assert spectral_radius(obs) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ValueError):
        scaling_problem(3)


def test_suite_empty_and_unknown():
    circuit, obs = COS
    assert run_suite(circuit, obs, []).results == []
    with pytest.raises(ValueError):
        run_suite(circuit, obs, ["nope"])


def test_suite_smoothness_with_negative_control():
    circuit, obs = _small()
    ok = run_suite(circuit, obs, ["smoothness"], SuiteSettings(seeds=1))
    bad = run_suite(circuit, obs, ["smoothness"], SuiteSettings(seeds=1), negative_control=True)
    assert ok.all_passed and not bad.all_passed
    assert "negative control" in bad.results[0].detail


def test_report_outputs(tmp_path):
    report = TheoryReport()
    report.add(CheckResult("a", True, 0.97, 0.95, {"d": 4, "sigma2": np.float64(0.01)}, "x",
                           at_least=True))
    report.add(CheckResult("b", False, 2.0, 1.0))
    assert not report.all_passed
    assert report.results[0].margin == pytest.approx(0.02) and report.results[1].margin == -1.0
    report.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "check,verdict,statistic,bound,margin,hypotheses,detail"
    assert lines[1].startswith("a,PASS,0.97,0.95") and "sigma2=0.01" in lines[1]
    assert "[FAIL] b" in report.to_text()


def test_settings_from_dict():
    s = SuiteSettings.from_dict({"seeds": [3, 4], "shot_dims": [2, 4], "unrelated": 1})
    assert s.trials == (3, 4) and s.shot_dims == (2, 4)
    assert SuiteSettings(seeds=3).trials == (0, 1, 2)
    assert set(CHECKS) >= {"smoothness", "shot_scaling"}
