"""Stochastic estimates of the objective with shot and execution bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .qsim import MAX_DENSE_QUBITS, Observable, ParamCircuit, apply_circuit, expectation, \
    spectral_radius

MODES = ("exact", "gaussian", "shots")


class UnsupportedModeError(ValueError):
    pass


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based generator for one ``(seed, stream...)`` key; never shared."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


@dataclass(frozen=True)
class OracleConfig:
    """Noise model for the estimator.

    ``exact`` returns f(theta). ``gaussian`` adds N(0, sigma^2) per evaluation.
    ``shots`` averages ``shots`` Born-rule samples of the eigenvalues of H.
    Outside shots mode each execution books ``shot_equivalent`` shots.
    """

    mode: str = "exact"
    sigma: float = 0.0
    shots: int = 1
    seed: int = 0
    shot_equivalent: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"oracle mode must be one of {MODES}, got {self.mode!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.mode == "shots" and self.shots < 1:
            raise ValueError("shots must be a positive integer")

    @classmethod
    def exact(cls, seed: int = 0) -> "OracleConfig":
        return cls("exact", seed=seed)

    @classmethod
    def gaussian(cls, sigma: float, seed: int = 0) -> "OracleConfig":
        return cls("gaussian", sigma=float(sigma), seed=seed)

    @classmethod
    def with_shots(cls, shots: int, seed: int = 0) -> "OracleConfig":
        return cls("shots", shots=int(shots), seed=seed)

    @classmethod
    def from_dict(cls, cfg: dict) -> "OracleConfig":
        """Build from the ``[oracle]`` config table (mode, sigma, shots, seed)."""
        return cls(
            mode=cfg.get("mode", "exact"),
            sigma=float(cfg.get("sigma", 0.0)),
            shots=int(cfg.get("shots", 1)),
            seed=int(cfg.get("seed", 0)),
            shot_equivalent=int(cfg.get("shot_equivalent", 0)),
        )

    def with_seed(self, seed: int) -> "OracleConfig":
        return replace(self, seed=seed)

    @property
    def shots_per_execution(self) -> int:
        return self.shots if self.mode == "shots" else self.shot_equivalent


@dataclass
class EvalCounter:
    circuit_executions: int = 0
    total_shots: int = 0

    def add(self, executions: int, shots_each: int) -> None:
        self.circuit_executions += executions
        self.total_shots += executions * shots_each


class Oracle:
    """Noisy access to ``f(theta) = <psi(theta)|H|psi(theta)>`` for one trial.

    Owns its random stream (derived from ``(config.seed, trial)``) and its
    :class:`EvalCounter`. Each row of a batched call is one circuit execution
    with independent noise.
    """

    def __init__(self, circuit: ParamCircuit, obs: Observable, config: OracleConfig | None = None,
                 trial: int = 0, counter: EvalCounter | None = None):
        if obs.n_qubits != circuit.n_qubits:
            raise ValueError("observable and circuit act on different qubit counts")
        self.circuit = circuit
        self.obs = obs
        self.config = config or OracleConfig()
        self.counter = counter if counter is not None else EvalCounter()
        self.rng = make_rng(self.config.seed, trial)
        if self.config.mode == "shots" and circuit.n_qubits > MAX_DENSE_QUBITS:
            raise UnsupportedModeError(
                f"shot sampling needs a dense eigendecomposition (at most {MAX_DENSE_QUBITS} "
                f"qubits, got {circuit.n_qubits}); use gaussian mode instead"
            )

    @property
    def n_params(self) -> int:
        return self.circuit.param_dim

    def exact(self, theta):
        """Noise-free value(s); not counted."""
        return expectation(apply_circuit(self.circuit, theta), self.obs)

    def estimate(self, theta):
        """One noisy estimate per parameter row; counted."""
        theta = np.asarray(theta, dtype=float)
        single = theta.ndim == 1
        batch = np.atleast_2d(theta)
        cfg = self.config
        states = apply_circuit(self.circuit, batch)
        if cfg.mode == "shots":
            values = self._sample_shots(states)
        else:
            values = np.atleast_1d(expectation(states, self.obs))
            if cfg.mode == "gaussian":
                values = values + cfg.sigma * self.rng.standard_normal(values.shape)
        self.counter.add(batch.shape[0], cfg.shots_per_execution)
        return float(values[0]) if single else values

    __call__ = estimate

    def _sample_shots(self, states: np.ndarray) -> np.ndarray:
        eigvals, eigvecs = self.obs.eigh
        probs = np.abs(states @ eigvecs.conj()) ** 2
        probs = np.clip(probs, 0.0, None)
        probs /= probs.sum(axis=1, keepdims=True)
        counts = self.rng.multinomial(self.config.shots, probs)
        return counts @ eigvals / self.config.shots

    def spawn(self, trial: int) -> "Oracle":
        """Fresh oracle for another trial: same problem and config, new stream and counter."""
        return Oracle(self.circuit, self.obs, self.config, trial=trial)


def variance_bound(obs: Observable, shots: int) -> float:
    """Upper bound ``lambda_bar^2 / n`` on the variance of an n-shot estimate."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    return spectral_radius(obs) ** 2 / shots


def noise_variance(obs: Observable, config: OracleConfig) -> float:
    """The sigma^2 a config guarantees: 0, sigma^2, or lambda_bar^2 / n."""
    if config.mode == "exact":
        return 0.0
    if config.mode == "gaussian":
        return config.sigma**2
    return variance_bound(obs, config.shots)
