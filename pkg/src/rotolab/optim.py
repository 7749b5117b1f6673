"""Rotosolve, randomized coordinate descent and three baselines behind one ``run`` loop.

Every step consumes only noisy estimates from its oracle; ``run`` records the
noise-free objective at each iterate for reporting. Parameters are wrapped into
``(-pi, pi]`` after every update (the objective is 2*pi periodic).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .oracle import make_rng
from .trig import fit_univariate, gradient, normalize_angle, psr_first

KINDS = ("rotosolve", "rcd", "sgd", "spsa", "rsgf")

# stream tag separating optimizer randomness from oracle noise for the same seed
_OPTIM_STREAM = 1


class Step(NamedTuple):
    theta: np.ndarray
    coord: int | None = None
    flat: bool = False


@dataclass(frozen=True)
class OptimizerConfig:
    """Optimizer kind and hyperparameters.

    ``alpha`` is the step size (rcd, sgd, spsa, rsgf), ``c`` the SPSA perturbation
    and ``nu`` the RSGF smoothing radius. Rotosolve uses none of them.
    """

    kind: str
    T: int = 100
    alpha: float = 0.1
    c: float = 1e-2
    nu: float = 1e-2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown optimizer kind {self.kind!r}; choose from {KINDS}")
        if self.T < 1:
            raise ValueError("iteration budget T must be >= 1")
        if self.kind != "rotosolve" and self.alpha < 0:
            raise ValueError("step size alpha must be non-negative")
        if self.kind == "spsa" and self.c <= 0:
            raise ValueError("SPSA perturbation c must be positive")
        if self.kind == "rsgf" and self.nu <= 0:
            raise ValueError("RSGF smoothing nu must be positive")

    @property
    def executions_per_step(self) -> int | None:
        """Oracle rows per iteration (``None`` for sgd, which needs ``2d``)."""
        return {"rotosolve": 3, "rcd": 2, "sgd": None, "spsa": 2, "rsgf": 2}[self.kind]


def _pick(oracle, rng, coord):
    if coord is not None:
        return int(coord)
    if rng is None:
        raise ValueError("need an rng or an explicit coordinate")
    return int(rng.integers(oracle.n_params))


def rotosolve_step(oracle, theta, rng=None, coord=None) -> Step:
    """Exact minimization of the fitted sinusoid along one random coordinate.

    Sets ``theta_j <- theta_j - pi/2 - arctan2(a, b)``, i.e. the absolute
    minimizer ``-pi/2 - B`` of the reconstructed restriction.
    """
    j = _pick(oracle, rng, coord)
    fit = fit_univariate(oracle, theta, j)
    new = np.array(theta, dtype=float)
    if fit.flat:
        return Step(new, j, True)
    new[j] = normalize_angle(new[j] - np.pi / 2 - np.arctan2(fit.a, fit.b))
    return Step(new, j)


def rcd_step(oracle, theta, alpha: float, rng=None, coord=None) -> Step:
    j = _pick(oracle, rng, coord)
    g = psr_first(oracle, theta, j)
    new = np.array(theta, dtype=float)
    new[j] = normalize_angle(new[j] - alpha * g)
    return Step(new, j)


def sgd_step(oracle, theta, alpha: float) -> Step:
    g = gradient(oracle, theta)
    return Step(normalize_angle(np.asarray(theta, dtype=float) - alpha * g))


def spsa_step(oracle, theta, alpha: float, c: float, rng=None, delta=None) -> Step:
    """Simultaneous perturbation along a Rademacher direction (2 evaluations)."""
    theta = np.asarray(theta, dtype=float)
    if delta is None:
        delta = rng.choice([-1.0, 1.0], size=theta.shape[0])
    fp, fm = oracle.estimate(np.stack([theta + c * delta, theta - c * delta]))
    g = (fp - fm) / (2 * c) * delta  # delta_i == 1 / delta_i
    return Step(normalize_angle(theta - alpha * g))


def rsgf_step(oracle, theta, alpha: float, nu: float, rng=None, direction=None) -> Step:
    """Gaussian-smoothing forward difference along a random direction (2 evaluations)."""
    theta = np.asarray(theta, dtype=float)
    u = rng.standard_normal(theta.shape[0]) if direction is None else np.asarray(direction, float)
    fs, f0 = oracle.estimate(np.stack([theta + nu * u, theta]))
    g = (fs - f0) / nu * u
    return Step(normalize_angle(theta - alpha * g))


def make_stepper(config: OptimizerConfig) -> Callable:
    """``step(oracle, theta, rng) -> Step`` for the configured optimizer."""
    kind, a = config.kind, config.alpha
    if kind == "rotosolve":
        return lambda oracle, theta, rng: rotosolve_step(oracle, theta, rng)
    if kind == "rcd":
        return lambda oracle, theta, rng: rcd_step(oracle, theta, a, rng)
    if kind == "sgd":
        return lambda oracle, theta, rng: sgd_step(oracle, theta, a)
    if kind == "spsa":
        return lambda oracle, theta, rng: spsa_step(oracle, theta, a, config.c, rng)
    return lambda oracle, theta, rng: rsgf_step(oracle, theta, a, config.nu, rng)


@dataclass
class OptimizerTrace:
    """Iterates ``t = 0..T`` with noise-free objective values and cumulative costs."""

    kind: str
    seed: int
    thetas: list = field(default_factory=list)
    values: list = field(default_factory=list)
    coords: list = field(default_factory=list)
    executions: list = field(default_factory=list)
    shots: list = field(default_factory=list)
    flat: list = field(default_factory=list)

    def append(self, theta, value, coord, executions, shots, flat=False):
        self.thetas.append(np.array(theta, dtype=float))
        self.values.append(float(value))
        self.coords.append(coord)
        self.executions.append(int(executions))
        self.shots.append(int(shots))
        self.flat.append(bool(flat))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def T(self) -> int:
        return len(self.values) - 1

    @property
    def theta_array(self) -> np.ndarray:
        return np.array(self.thetas)

    @property
    def value_array(self) -> np.ndarray:
        return np.array(self.values)

    def rows(self):
        for t in range(len(self)):
            j = self.coords[t]
            yield (t, "" if j is None else j, repr(self.values[t]), self.executions[t], self.shots[t])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "j", "f_exact", "circuit_executions", "total_shots"])
            w.writerows(self.rows())


def run(config: OptimizerConfig, oracle, theta0, *, step: Callable | None = None,
        trial: int = 0) -> OptimizerTrace:
    """Run ``config.T`` iterations from ``theta0``.

    ``oracle`` must provide ``estimate``, ``exact``, ``n_params`` and a
    ``counter``. ``step`` overrides the default update for ``config.kind``.
    Randomness in the updates comes from ``(config.seed, trial)``; oracle
    noise comes from the oracle's own stream.
    """
    rng = make_rng(config.seed, trial, _OPTIM_STREAM)
    step = step or make_stepper(config)
    theta = normalize_angle(np.asarray(theta0, dtype=float))
    theta = np.atleast_1d(theta)
    counter = oracle.counter
    trace = OptimizerTrace(config.kind, config.seed)
    trace.append(theta, oracle.exact(theta), None, counter.circuit_executions, counter.total_shots)
    for _ in range(config.T):
        theta, coord, flat = step(oracle, theta, rng)
        trace.append(theta, oracle.exact(theta), coord, counter.circuit_executions,
                     counter.total_shots, flat)
    return trace
