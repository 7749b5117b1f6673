"""Three-point sinusoid reconstruction along one coordinate.

With a single-frequency Pauli rotation on coordinate j, the restriction
``f_j(phi) = A sin(phi + B) + C``. Evaluating at the anchor ``phi`` and at
``phi +- pi/2`` gives

    c = (f+ + f-) / 2,   a = 2 f0 - 2c,   b = f+ - f-
    A = sqrt(a^2 + b^2) / 2,   B = arctan2(a, b) - phi,   C = c

and the parameter-shift derivatives ``g = b / 2`` and ``h = -a / 2``, so
``A = sqrt(g^2 + h^2)`` and ``C = h + f0``.

Functions taking an ``oracle`` accept anything exposing ``estimate(theta)``
for batched parameter rows and an ``n_params`` attribute.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .oracle import Oracle, OracleConfig, make_rng
from .qsim import Observable, ParamCircuit, objective, spectral_bounds

HALF_PI = np.pi / 2
FLAT_TOL = 1e-12
SQRT2_PLUS_1 = 1.0 + math.sqrt(2.0)


class UndefinedPLError(ValueError):
    """Flat direction: no positive PL constant exists."""


def normalize_angle(x):
    """Map angles into ``(-pi, pi]``."""
    x = np.asarray(x, dtype=float)
    wrapped = np.pi - np.mod(np.pi - x, 2 * np.pi)
    out = np.where((x > -np.pi) & (x <= np.pi), x, wrapped)  # in-range values pass through exactly
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SinusoidFit:
    """``f_j(phi) = amplitude * sin(phi + phase) + offset`` plus the raw ``(a, b, c)``."""

    amplitude: float
    phase: float
    offset: float
    a: float
    b: float
    c: float
    anchor: float
    value: float  # the estimate at the anchor, f0

    @property
    def flat(self) -> bool:
        return self.amplitude <= FLAT_TOL

    @property
    def raw(self) -> tuple[float, float, float]:
        return self.a, self.b, self.c

    def __call__(self, phi):
        return self.amplitude * np.sin(np.asarray(phi) + self.phase) + self.offset

    @property
    def gradient(self) -> float:
        return self.b / 2

    @property
    def curvature(self) -> float:
        return -self.a / 2


def fit_from_values(f0: float, f_plus: float, f_minus: float, anchor: float) -> SinusoidFit:
    c = 0.5 * (f_plus + f_minus)
    a = 2 * f0 - 2 * c
    b = f_plus - f_minus
    amplitude = 0.5 * np.hypot(a, b)
    if amplitude <= FLAT_TOL:
        phase = 0.0
    else:
        phase = normalize_angle(np.arctan2(a, b) - anchor)
    return SinusoidFit(float(amplitude), float(phase), float(c), float(a), float(b), float(c),
                       float(anchor), float(f0))


def _shifted(theta: np.ndarray, j: int, shifts) -> np.ndarray:
    rows = np.repeat(np.asarray(theta, dtype=float)[None, :], len(shifts), axis=0)
    rows[:, j] += shifts
    return rows


def _check_coord(oracle, j: int) -> None:
    if not 0 <= j < oracle.n_params:
        raise IndexError(f"coordinate {j} outside [0, {oracle.n_params})")


def fit_univariate(oracle, theta, j: int) -> SinusoidFit:
    """Fit the restriction of f to coordinate ``j`` around ``theta[j]`` (3 evaluations)."""
    _check_coord(oracle, j)
    f0, fp, fm = oracle.estimate(_shifted(theta, j, [0.0, HALF_PI, -HALF_PI]))
    return fit_from_values(f0, fp, fm, float(np.asarray(theta)[j]))


def univariate_min(fit: SinusoidFit) -> tuple[float, float]:
    """Minimizer ``phi* = -pi/2 - B`` (in ``(-pi, pi]``) and minimum ``C - A``."""
    return normalize_angle(-HALF_PI - fit.phase), fit.offset - fit.amplitude


class DerivativeEstimate(NamedTuple):
    g: float
    h: float
    executions: int


def psr_first(oracle, theta, j: int) -> float:
    """Parameter-shift first derivative ``(f(theta + pi/2 e_j) - f(theta - pi/2 e_j)) / 2``."""
    _check_coord(oracle, j)
    fp, fm = oracle.estimate(_shifted(theta, j, [HALF_PI, -HALF_PI]))
    return 0.5 * (fp - fm)


def psr_second_diag(oracle, theta, j: int) -> float:
    """``h_j = (f(theta + pi/2 e_j) + f(theta - pi/2 e_j) - 2 f(theta)) / 2``."""
    _check_coord(oracle, j)
    f0, fp, fm = oracle.estimate(_shifted(theta, j, [0.0, HALF_PI, -HALF_PI]))
    return 0.5 * (fp + fm - 2 * f0)


def derivatives(oracle, theta, j: int) -> DerivativeEstimate:
    """``g`` and ``h`` from one shared set of three evaluations."""
    fit = fit_univariate(oracle, theta, j)
    return DerivativeEstimate(fit.gradient, fit.curvature, 3)


def gradient(oracle, theta) -> np.ndarray:
    """Full parameter-shift gradient from one batch of ``2d`` evaluations."""
    theta = np.asarray(theta, dtype=float)
    d = theta.shape[0]
    rows = np.repeat(theta[None, :], 2 * d, axis=0)
    idx = np.arange(d)
    rows[idx, idx] += HALF_PI
    rows[d + idx, idx] -= HALF_PI
    values = oracle.estimate(rows)
    return 0.5 * (values[:d] - values[d:])


def exact_gradients(circuit: ParamCircuit, obs: Observable, thetas) -> np.ndarray:
    """Noise-free parameter-shift gradients for one point ``(d,)`` or many ``(N, d)``."""
    thetas = np.asarray(thetas, dtype=float)
    single = thetas.ndim == 1
    pts = np.atleast_2d(thetas)
    n, d = pts.shape
    rows = np.repeat(pts, 2 * d, axis=0).reshape(n, 2 * d, d)
    idx = np.arange(d)
    rows[:, idx, idx] += HALF_PI
    rows[:, d + idx, idx] -= HALF_PI
    values = np.asarray(objective(circuit, obs, rows.reshape(-1, d))).reshape(n, 2 * d)
    grads = 0.5 * (values[:, :d] - values[:, d:])
    return grads[0] if single else grads


def exact_fits(circuit: ParamCircuit, obs: Observable, theta) -> list[SinusoidFit]:
    """Noise-free fits for every coordinate at ``theta`` from one batched simulation."""
    theta = np.asarray(theta, dtype=float)
    d = theta.shape[0]
    idx = np.arange(d)
    rows = np.repeat(theta[None, :], 2 * d + 1, axis=0)
    rows[1 + idx, idx] += HALF_PI
    rows[1 + d + idx, idx] -= HALF_PI
    values = np.asarray(objective(circuit, obs, rows))
    return [fit_from_values(values[0], values[1 + j], values[1 + d + j], theta[j]) for j in range(d)]


def pl_bound_at(fit: SinusoidFit, phi: float) -> float:
    """Largest coordinate-wise PL constant valid at ``phi``.

    ``A cos^2(x) / (2 (1 + sin x))`` with ``x = phi + B``, evaluated through the
    identity ``cos^2 x = (1 - sin x)(1 + sin x)`` as ``A (1 - sin x) / 2``. The
    rewritten form is finite at the minimizer (``sin x = -1``), where it takes
    the limit value ``A``; it is zero at maximizers.
    """
    if fit.flat:
        raise UndefinedPLError("flat direction (A = 0) has no positive PL constant")
    s = np.sin(phi + fit.phase)
    return float(fit.amplitude * (1.0 - s) / 2.0)


@dataclass(frozen=True)
class LandscapeConstants:
    """Coordinate-wise smoothness (and optionally PL) constants."""

    L_j: tuple[float, ...]
    lam_max: float
    mu_j: tuple[float, ...] = field(default=())

    @property
    def d(self) -> int:
        return len(self.L_j)

    @property
    def L(self) -> float:
        return float(sum(self.L_j))

    @property
    def L_max(self) -> float:
        return float(max(self.L_j))

    @property
    def L_bar(self) -> float:
        return self.L / self.d

    @property
    def mu(self) -> float:
        return float(sum(self.mu_j))

    @property
    def u(self) -> float:
        return float(SQRT2_PLUS_1 * self.lam_max)


def _amplitudes(circuit: ParamCircuit, obs: Observable, thetas: np.ndarray, j: int) -> np.ndarray:
    n = thetas.shape[0]
    rows = np.repeat(thetas, 3, axis=0)
    rows[1::3, j] += HALF_PI
    rows[2::3, j] -= HALF_PI
    v = np.asarray(objective(circuit, obs, rows)).reshape(n, 3)
    c = 0.5 * (v[:, 1] + v[:, 2])
    return 0.5 * np.hypot(2 * v[:, 0] - 2 * c, v[:, 1] - v[:, 2])


def estimate_smoothness(circuit: ParamCircuit, obs: Observable, j: int, trials: int = 64,
                        rng: np.random.Generator | None = None, refine: bool = True) -> float:
    """Coordinate-wise smoothness ``L_j``: the largest amplitude ``A_j`` found.

    Since ``|f_j''| <= A_j`` with equality at the extrema, the supremum of the
    amplitude over the frozen coordinates is the tight constant. The best of
    ``trials`` random settings is optionally polished by local maximization.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = rng if rng is not None else make_rng(0, j)
    d = circuit.param_dim
    thetas = rng.uniform(-np.pi, np.pi, size=(trials, d))
    amps = _amplitudes(circuit, obs, thetas, j)
    best = float(amps.max())
    if refine and d > 1:
        from scipy.optimize import minimize

        start = thetas[int(np.argmax(amps))]
        res = minimize(lambda t: -_amplitudes(circuit, obs, t[None, :], j)[0], start,
                       method="Nelder-Mead" if d <= 2 else "Powell",
                       options={"maxfev": 400 * d, "xtol": 1e-8, "ftol": 1e-12})
        best = max(best, float(-res.fun))
    return best


def landscape_constants(circuit: ParamCircuit, obs: Observable, trials: int = 64,
                        seed: int = 0, refine: bool = True) -> LandscapeConstants:
    """Smoothness constants for every coordinate."""
    L = tuple(estimate_smoothness(circuit, obs, j, trials, make_rng(seed, j), refine)
              for j in range(circuit.param_dim))
    return LandscapeConstants(L, max(spectral_bounds(obs)))


def exact_oracle(circuit: ParamCircuit, obs: Observable) -> Oracle:
    return Oracle(circuit, obs, OracleConfig.exact())
