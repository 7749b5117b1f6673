import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import central_difference, reference_objective, second_difference
from rotolab.oracle import Oracle, make_rng
from rotolab.qsim import Observable, ParamCircuit, layered_ansatz, objective, random_circuit, \
    random_observable, rx
from rotolab.trig import (
    SinusoidFit, UndefinedPLError, derivatives, estimate_smoothness, exact_fits, fit_from_values,
    fit_univariate, gradient, landscape_constants, normalize_angle, pl_bound_at, psr_first,
    psr_second_diag, univariate_min,
)

COS = Oracle(ParamCircuit(1, (rx(0, 0),)), Observable(1, ((1.0, "Z"),)))


def _fit(A, B, C):
    return SinusoidFit(A, B, C, 0.0, 0.0, C, 0.0, 0.0)


def _problem(seed, n=4, d=6):
    rng = make_rng(seed, 3)
    circuit = random_circuit(rng, n, d)
    obs = random_observable(rng, n, 4)
    return circuit, obs, rng.uniform(-np.pi, np.pi, d)


def test_cos_fit():
    fit = fit_univariate(COS, [0.0], 0)
    assert (fit.a, fit.b, fit.c) == pytest.approx((2.0, 0.0, 0.0), abs=1e-15)
    assert fit.amplitude == pytest.approx(1.0)
    assert fit.phase == pytest.approx(np.pi / 2)
    assert fit.offset == pytest.approx(0.0, abs=1e-15)


def test_constant_objective_is_flat():
    circuit = layered_ansatz(2, 1)
    oracle = Oracle(circuit, Observable(2, ((1.0, "II"),)))
    fit = fit_univariate(oracle, np.zeros(4), 1)
    assert fit.flat and fit.amplitude == 0 and fit.phase == 0 and fit.offset == pytest.approx(1.0)


def test_reconstruction_on_grid():
    circuit, obs, theta = _problem(0)
    fit = fit_univariate(Oracle(circuit, obs), theta, 2)
    grid = np.linspace(-np.pi, np.pi, 100)
    rows = np.repeat(theta[None], 100, axis=0)
    rows[:, 2] = grid
    assert np.max(np.abs(fit(grid) - objective(circuit, obs, rows))) <= 1e-9


def test_univariate_min_examples():
    phi, f = univariate_min(_fit(1.0, np.pi / 2, 0.0))
    assert abs(abs(phi) - np.pi) < 1e-15 and f == -1.0
    phi, f = univariate_min(_fit(0.0, 0.0, 0.3))
    assert phi == pytest.approx(-np.pi / 2) and f == 0.3


@pytest.mark.parametrize("seed", range(5))
def test_univariate_min_matches_simulation(seed):
    circuit, obs, theta = _problem(seed)
    for j in range(circuit.param_dim):
        fit = fit_univariate(Oracle(circuit, obs), theta, j)
        phi, fmin = univariate_min(fit)
        moved = theta.copy()
        moved[j] = phi
        assert abs(objective(circuit, obs, moved) - fmin) <= 1e-9
        assert abs(fit(phi) - fmin) <= 1e-12


def test_psr_cos_examples():
    assert psr_first(COS, [0.0], 0) == pytest.approx(0.0, abs=1e-15)
    assert psr_first(COS, [np.pi / 2], 0) == pytest.approx(-1.0)
    assert psr_second_diag(COS, [0.0], 0) == pytest.approx(-1.0)
    assert psr_second_diag(COS, [np.pi / 2], 0) == pytest.approx(0.0, abs=1e-15)


def test_psr_matches_finite_differences_five_qubits():
    circuit, obs, theta = _problem(1, n=5, d=8)
    oracle = Oracle(circuit, obs)
    f = lambda t: reference_objective(circuit, obs, t)
    for j in range(circuit.param_dim):
        assert abs(psr_first(oracle, theta, j) - central_difference(f, theta, j)) <= 1e-6
        assert abs(psr_second_diag(oracle, theta, j) - second_difference(f, theta, j)) <= 1e-4


def test_full_gradient_and_shared_derivatives():
    circuit, obs, theta = _problem(2)
    oracle = Oracle(circuit, obs)
    g = gradient(oracle, theta)
    assert np.allclose(g, [psr_first(oracle, theta, j) for j in range(len(theta))], atol=1e-14)
    est = derivatives(oracle, theta, 3)
    assert est.executions == 3
    assert est.h == pytest.approx(psr_second_diag(oracle, theta, 3), abs=1e-14)


@pytest.mark.parametrize("seed", range(50))
def test_amplitude_and_offset_identities(seed):
    circuit, obs, theta = _problem(100 + seed, n=3, d=5)
    oracle = Oracle(circuit, obs)
    f0 = oracle.exact(theta)
    for fit in exact_fits(circuit, obs, theta):
        assert abs(fit.amplitude - np.hypot(fit.gradient, fit.curvature)) <= 1e-9
        assert abs(fit.offset - (fit.curvature + f0)) <= 1e-9


def test_exact_fits_match_single_fits():
    circuit, obs, theta = _problem(4)
    for j, fit in enumerate(exact_fits(circuit, obs, theta)):
        single = fit_univariate(Oracle(circuit, obs), theta, j)
        assert fit.amplitude == pytest.approx(single.amplitude, abs=1e-13)


def test_pl_bound_examples():
    fit = _fit(1.0, np.pi / 2, 0.0)
    assert pl_bound_at(fit, np.pi / 2) == pytest.approx(0.5)
    assert pl_bound_at(fit, 0.0) == pytest.approx(0.0, abs=1e-15)
    # phi = pi - delta puts phi + B at 3pi/2 - delta: cos^2 = sin^2(delta), 1 + sin = 2 sin^2(delta/2)
    delta = 1e-6
    direct = np.sin(delta) ** 2 / (4 * np.sin(delta / 2) ** 2)
    assert pl_bound_at(fit, np.pi - delta) == pytest.approx(direct, abs=1e-9)
    assert pl_bound_at(fit, np.pi) == pytest.approx(1.0)
    with pytest.raises(UndefinedPLError):
        pl_bound_at(_fit(0.0, 0.0, 0.0), 0.0)


@settings(max_examples=200, deadline=None)
@given(A=st.floats(0.01, 5), B=st.floats(-np.pi, np.pi), C=st.floats(-3, 3),
       phi=st.floats(-np.pi, np.pi))
def test_coordinate_pl_inequality(A, B, C, phi):
    fit = _fit(A, B, C)
    maximizer = np.pi / 2 - B
    dist = abs(normalize_angle(phi - maximizer))
    mu = pl_bound_at(fit, phi)
    if dist >= 1e-3:
        assert mu > 0
    grad = A * np.cos(phi + B)
    gap = fit(phi) - (C - A)
    assert grad**2 >= 2 * mu * gap - 1e-9


def test_smoothness_examples():
    rx_circuit = ParamCircuit(1, (rx(0, 0),))
    assert estimate_smoothness(rx_circuit, Observable(1, ((1.0, "Z"),)), 0) == pytest.approx(1.0)
    assert estimate_smoothness(rx_circuit, Observable(1, ((2.0, "Z"),)), 0) == pytest.approx(2.0)


def test_smoothness_bounded_by_spectral_radius():
    circuit = layered_ansatz(4, 1)
    obs = random_observable(make_rng(6), 4, 5)
    consts = landscape_constants(circuit, obs, trials=16)
    assert all(L <= (1 + 1e-9) * consts.lam_max for L in consts.L_j)
    assert consts.L_bar <= consts.L_max
    assert consts.u == pytest.approx((1 + np.sqrt(2)) * consts.lam_max)


def test_fit_rejects_bad_coordinate():
    with pytest.raises(IndexError):
        fit_univariate(COS, [0.0], 1)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1e3, 1e3))
def test_normalize_angle_range(x):
    y = normalize_angle(x)
    assert -np.pi < y <= np.pi
    assert abs(np.sin(y) - np.sin(x)) < 1e-9 and abs(np.cos(y) - np.cos(x)) < 1e-9


def test_fit_from_values_reproduces_anchors():
    rng = make_rng(12)
    for _ in range(50):
        f0, fp, fm, anchor = rng.normal(size=3).tolist() + [rng.uniform(-np.pi, np.pi)]
        fit = fit_from_values(f0, fp, fm, anchor)
        assert fit(anchor) == pytest.approx(f0, abs=1e-10)
        assert fit(anchor + np.pi / 2) == pytest.approx(fp, abs=1e-10)
        assert fit(anchor - np.pi / 2) == pytest.approx(fm, abs=1e-10)
