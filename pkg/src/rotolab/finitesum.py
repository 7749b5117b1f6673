"""Rotosolve for finite-sum classification losses, plus a synthetic benchmark.

The classifier circuit is one :class:`ParamCircuit` whose first ``m``
parameters are the data features (the angle-encoding prefix) and whose
remaining ``d`` parameters are trainable. The loss is

    L(theta) = 1/(2K) * sum_k (1 - y_k f(x_k, theta)),   f in [-1, 1].
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .oracle import EvalCounter, Oracle, OracleConfig, make_rng
from .optim import OptimizerConfig, Step, run
from .qsim import Observable, ParamCircuit, PauliRotation, cnot, spectral_bounds
from .trig import FLAT_TOL, normalize_angle


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray  # (K, m)
    labels: np.ndarray  # (K,), entries +-1

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.features, dtype=float))
        y = np.asarray(self.labels, dtype=float).reshape(-1)
        if x.shape[0] != y.shape[0] or y.shape[0] < 1:
            raise ValueError("need K >= 1 samples with one label each")
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise ValueError("labels must be +1 or -1")
        if not np.all(np.isfinite(x)):
            raise ValueError("features must be finite")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @property
    def K(self) -> int:
        return self.labels.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x{i + 1}" for i in range(self.m)] + ["y"])
            for x, y in zip(self.features, self.labels):
                w.writerow([repr(float(v)) for v in x] + [int(y)])

    @classmethod
    def from_csv(cls, path) -> "Dataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if header[-1] != "y" or not all(h == f"x{i + 1}" for i, h in enumerate(header[:-1])):
            raise ValueError(f"{path}: expected header x1,...,xm,y; got {','.join(header)}")
        data = np.array(body, dtype=float)
        return cls(data[:, :-1], data[:, -1])


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    """Encoder + ansatz circuit over parameters ``[x_1..x_m, theta_1..theta_d]``."""

    circuit: ParamCircuit
    n_features: int
    readout: Observable

    def __post_init__(self):
        lo, hi = spectral_bounds(self.readout)
        if lo > 1 + 1e-10 or hi > 1 + 1e-10:
            raise ValueError("readout spectrum must lie in [-1, 1]")

    @property
    def n_params(self) -> int:
        return self.circuit.param_dim - self.n_features

    def rows(self, theta, dataset: Dataset) -> np.ndarray:
        """Full circuit parameters for every (theta row, sample) pair, shape (B*K, m+d)."""
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        B, K = theta.shape[0], dataset.K
        x = np.broadcast_to(dataset.features, (B, K, self.n_features))
        t = np.broadcast_to(theta[:, None, :], (B, K, self.n_params))
        return np.concatenate([x, t], axis=2).reshape(B * K, -1)

    def oracle(self, config: OracleConfig | None = None, trial: int = 0,
               counter: EvalCounter | None = None) -> Oracle:
        return Oracle(self.circuit, self.readout, config, trial=trial, counter=counter)


def sample_losses(model: ClassifierModel, theta, dataset: Dataset, oracle: Oracle) -> np.ndarray:
    """Per-sample losses ``(1 - y_k f(x_k, theta)) / 2``; shape (K,) or (B, K)."""
    theta = np.asarray(theta, dtype=float)
    scores = np.asarray(oracle.estimate(model.rows(theta, dataset))).reshape(-1, dataset.K)
    out = 0.5 * (1.0 - dataset.labels * scores)
    return out[0] if theta.ndim == 1 else out


def loss(model: ClassifierModel, theta, dataset: Dataset, oracle: Oracle):
    """Mean loss in [0, 1]; one circuit execution per sample."""
    out = sample_losses(model, theta, dataset, oracle).mean(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PerSampleCoeffs:
    """``L_j^(k)(phi) = a_k sin(phi) + b_k cos(phi) + c_k`` for each sample."""

    coord: int
    a_k: np.ndarray
    b_k: np.ndarray
    c_k: np.ndarray

    @property
    def a(self) -> float:
        return float(self.a_k.mean())

    @property
    def b(self) -> float:
        return float(self.b_k.mean())

    @property
    def c(self) -> float:
        return float(self.c_k.mean())

    def __call__(self, phi):
        return self.a * np.sin(phi) + self.b * np.cos(phi) + self.c


def fit_coeffs(model: ClassifierModel, theta, j: int, dataset: Dataset,
               oracle: Oracle) -> PerSampleCoeffs:
    """Per-sample sinusoid coefficients from losses at ``theta_j`` in {0, pi/2, pi} (3K executions)."""
    if not 0 <= j < model.n_params:
        raise IndexError(f"coordinate {j} outside [0, {model.n_params})")
    rows = np.repeat(np.asarray(theta, dtype=float)[None, :], 3, axis=0)
    rows[:, j] = [0.0, np.pi / 2, np.pi]
    l0, lh, lpi = sample_losses(model, rows, dataset, oracle)
    return PerSampleCoeffs(j, (2 * lh - l0 - lpi) / 2, (l0 - lpi) / 2, (l0 + lpi) / 2)


def finitesum_rotosolve_step(model: ClassifierModel, theta, dataset: Dataset, oracle: Oracle,
                             rng=None, coord=None) -> Step:
    """Set ``theta_j = arctan2(a_j, b_j) + pi``, the minimizer of ``a_j sin + b_j cos``."""
    j = int(coord) if coord is not None else int(rng.integers(model.n_params))
    co = fit_coeffs(model, theta, j, dataset, oracle)
    new = np.array(theta, dtype=float)
    if np.hypot(co.a, co.b) <= FLAT_TOL:
        return Step(new, j, True)
    new[j] = normalize_angle(np.arctan2(co.a, co.b) + np.pi)
    return Step(new, j)


class FiniteSumObjective:
    """Loss as an oracle for :func:`rotolab.optim.run`: each row costs K executions."""

    def __init__(self, model: ClassifierModel, dataset: Dataset, config: OracleConfig | None = None,
                 trial: int = 0):
        self.model = model
        self.dataset = dataset
        self.base = model.oracle(config, trial=trial)
        self.counter = self.base.counter
        self._exact = model.oracle(OracleConfig.exact())

    @property
    def n_params(self) -> int:
        return self.model.n_params

    def estimate(self, theta):
        return loss(self.model, theta, self.dataset, self.base)

    def exact(self, theta):
        return loss(self.model, theta, self.dataset, self._exact)

    def rotosolve_step(self, _oracle, theta, rng) -> Step:
        return finitesum_rotosolve_step(self.model, theta, self.dataset, self.base, rng)


def make_benchmark(seed: int = 0, K: int = 32, layers: int = 2,
                   spread: float = 0.3) -> tuple[ClassifierModel, Dataset]:
    """Two 2-D Gaussian blobs, centered at (1, 1) for y=+1 and (-1, -1) for y=-1.

    Feature i is angle-encoded by RY(x_i) on qubit i; the ansatz is ``layers``
    blocks of per-qubit RY, RZ rotations followed by a CNOT ring; the readout is
    Z on qubit 0. Labels alternate +1/-1, so odd K gets one extra +1 sample.
    """
    if K < 2 or layers < 1:
        raise ValueError("need K >= 2 and layers >= 1")
    rng = make_rng(seed, 0xDA7A)
    y = np.where(np.arange(K) % 2 == 0, 1.0, -1.0)
    x = y[:, None] * np.ones((K, 2)) + spread * rng.standard_normal((K, 2))
    n = 2
    gates: list = [PauliRotation("Y", q, q) for q in range(n)]
    p = n
    for _ in range(layers):
        for q in range(n):
            gates.append(PauliRotation("Y", q, p))
            gates.append(PauliRotation("Z", q, p + 1))
            p += 2
        gates += [cnot(0, 1), cnot(1, 0)]
    model = ClassifierModel(ParamCircuit(n, tuple(gates)), n, Observable(n, ((1.0, "ZI"),)))
    return model, Dataset(x, y)


def initial_point(model: ClassifierModel, seed: int = 0) -> np.ndarray:
    """Shared starting parameters, uniform in (-pi, pi]."""
    return make_rng(seed, 0x7E7A).uniform(-np.pi, np.pi, size=model.n_params)


def run_benchmark(model: ClassifierModel, dataset: Dataset, config: OptimizerConfig,
                  oracle_config: OracleConfig, theta0, trial: int = 0):
    """One optimizer run on the finite-sum loss; Rotosolve uses the absolute-anchor update."""
    objective = FiniteSumObjective(model, dataset, oracle_config, trial=trial)
    step = objective.rotosolve_step if config.kind == "rotosolve" else None
    return run(config, objective, theta0, step=step, trial=trial)


def load_dataset(path: str | Path) -> Dataset:
    return Dataset.from_csv(path)


# step size shared by the gradient-based baselines in the benchmark comparison
BASELINE_ALPHA = 0.1


def executions_per_iteration(kind: str, n_params: int, K: int) -> int:
    """Circuit executions one iteration costs on a K-sample finite-sum loss."""
    rows = {"rotosolve": 3, "rcd": 2, "sgd": 2 * n_params, "spsa": 2, "rsgf": 2}[kind]
    return rows * K


def budget_iterations(kind: str, budget: int, n_params: int, K: int) -> int:
    """Most iterations of ``kind`` that fit in ``budget`` circuit executions (at least 1)."""
    return max(1, int(budget) // executions_per_iteration(kind, n_params, K))


def compare_optimizers(model: ClassifierModel, dataset: Dataset, kinds, budget: int, seeds,
                       oracle_config: OracleConfig, theta0, alpha: float = BASELINE_ALPHA,
                       c: float = 1e-2, nu: float = 1e-2) -> dict:
    """Traces per optimizer kind at an equal circuit-execution budget, one per seed."""
    out = {}
    for kind in kinds:
        T = budget_iterations(kind, budget, model.n_params, dataset.K)
        out[kind] = [run_benchmark(model, dataset,
                                   OptimizerConfig(kind, T=T, alpha=alpha, c=c, nu=nu, seed=int(s)),
                                   oracle_config, theta0, trial=int(s))
                     for s in seeds]
    return out


def band_width(traces, budget: int, points: int = 201) -> float:
    """Across-seed std of the loss curve, averaged over a common execution grid.

    Curves are interpolated onto ``points`` evenly spaced execution counts in
    ``[0, budget]`` (held at the last value beyond a run's final iterate).
    """
    grid = np.linspace(0.0, float(budget), points)
    curves = np.array([np.interp(grid, tr.executions, tr.values) for tr in traces])
    return float(curves.std(axis=0, ddof=1).mean())
