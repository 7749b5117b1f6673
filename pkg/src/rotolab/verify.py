"""Empirical checks of the descent lemmas and convergence rates over trace ensembles.

An ensemble is a list of :class:`~rotolab.optim.OptimizerTrace` runs sharing
the same starting point and differing only in their random streams.
Expectations are taken across the ensemble; expected gradient norms use exact
(simulated) gradients at the visited iterates. Every bound check is one-sided:
the measured mean may exceed the bound by at most a ``confidence``-level
confidence half-width (Student t over seeds), and must do so at no more than
``1 - min_fraction`` of the iterations.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .oracle import Oracle, OracleConfig, make_rng, variance_bound
from .optim import OptimizerConfig, OptimizerTrace, run
from .qsim import Observable, ParamCircuit, layered_ansatz, objective, spectral_radius
from .trig import SQRT2_PLUS_1, LandscapeConstants, exact_fits, exact_gradients, pl_bound_at

MIN_SEEDS = 30
FSTAR_SLACK = 1e-9


class InsufficientDataError(ValueError):
    pass


@dataclass
class CheckResult:
    name: str
    passed: bool
    statistic: float
    bound: float
    hypotheses: dict = field(default_factory=dict)
    detail: str = ""
    at_least: bool = False  # statistic must reach the bound rather than stay below it

    @property
    def margin(self) -> float:
        """Distance to the bound, positive on the passing side."""
        return self.statistic - self.bound if self.at_least else self.bound - self.statistic

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass
class TheoryReport:
    results: list = field(default_factory=list)

    def add(self, result: CheckResult) -> CheckResult:
        self.results.append(result)
        return result

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["check", "verdict", "statistic", "bound", "margin", "hypotheses", "detail"])
            for r in self.results:
                hyp = ";".join(f"{k}={_fmt(v)}" for k, v in r.hypotheses.items())
                w.writerow([r.name, r.verdict, _fmt(r.statistic), _fmt(r.bound), _fmt(r.margin),
                            hyp, r.detail])

    def to_text(self) -> str:
        lines = []
        for r in self.results:
            lines.append(f"[{r.verdict}] {r.name}: statistic={r.statistic:.6g} "
                         f"bound={r.bound:.6g} margin={r.margin:.3g}")
            if r.detail:
                lines.append(f"       {r.detail}")
            if r.hypotheses:
                lines.append("       " + ", ".join(f"{k}={_fmt(v)}" for k, v in r.hypotheses.items()))
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# -- ensemble helpers ---------------------------------------------------------


def run_ensemble(config: OptimizerConfig, circuit: ParamCircuit, obs: Observable,
                 oracle_config: OracleConfig, theta0, trials) -> list[OptimizerTrace]:
    """One run per trial index, all from ``theta0``, each with its own oracle stream."""
    return [run(config, Oracle(circuit, obs, oracle_config, trial=int(s)), theta0, trial=int(s))
            for s in trials]


def _stack(traces) -> tuple[np.ndarray, np.ndarray]:
    if not traces:
        raise InsufficientDataError("empty ensemble")
    lengths = {len(tr) for tr in traces}
    if len(lengths) != 1:
        raise ValueError("all traces in an ensemble must have the same length")
    thetas = np.array([tr.thetas for tr in traces])
    values = np.array([tr.values for tr in traces])
    if not np.allclose(thetas[:, 0], thetas[0, 0], rtol=0, atol=0):
        raise ValueError("ensemble runs must share the same starting point")
    return thetas, values


def gradient_norms(circuit: ParamCircuit, obs: Observable, traces) -> np.ndarray:
    """Exact ``||grad f||^2`` at every iterate, shape (seeds, T + 1)."""
    thetas, _ = _stack(traces)
    S, n, d = thetas.shape
    grads = exact_gradients(circuit, obs, thetas.reshape(-1, d))
    return np.sum(grads**2, axis=1).reshape(S, n)


def _require_seeds(traces, minimum: int) -> None:
    if len(traces) < minimum:
        raise InsufficientDataError(
            f"need at least {minimum} independent seeds for a confidence interval, got {len(traces)}"
        )


def _upper_ci(samples: np.ndarray, confidence: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and confidence half-width; samples shape (seeds, T)."""
    S = samples.shape[0]
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(S)
    q = stats.t.ppf(0.5 + confidence / 2, df=S - 1)
    return mean, q * se


def estimate_fstar(circuit: ParamCircuit, obs: Observable, restarts: int = 32,
                   T: int | None = None, seed: int = 0) -> float:
    """Best value reached by exact-mode Rotosolve from ``restarts`` random starts."""
    d = circuit.param_dim
    T = T or 60 * d
    rng = make_rng(seed, 0xF5)
    best = np.inf
    for r in range(restarts):
        theta0 = rng.uniform(-np.pi, np.pi, d)
        tr = run(OptimizerConfig("rotosolve", T=T, seed=seed), Oracle(circuit, obs), theta0, trial=r)
        best = min(best, min(tr.values))
    return float(best)


def initial_gap(traces, fstar: float) -> float:
    return float(traces[0].values[0] - fstar)


# -- lemmas -------------------------------------------------------------------


def check_rotosolve_descent(traces, circuit: ParamCircuit, obs: Observable, sigma2: float,
                            lam: float | None = None, confidence: float = 0.99,
                            min_fraction: float = 0.95, min_seeds: int = MIN_SEEDS) -> CheckResult:
    """Per-iteration expected Rotosolve decrease.

    ``E[f(t+1) - f(t)] <= -(E||grad f(t)||^2 / d - sigma^2) / u`` with
    ``u = (1 + sqrt 2) lambda_bar``; the ``1/d`` comes from the uniformly drawn
    coordinate.
    """
    _require_seeds(traces, min_seeds)
    _, values = _stack(traces)
    lam = spectral_radius(obs) if lam is None else lam
    d = circuit.param_dim
    u = float(SQRT2_PLUS_1 * lam)
    gn2 = gradient_norms(circuit, obs, traces)[:, :-1]
    z = np.diff(values, axis=1) + gn2 / (d * u)
    mean, half = _upper_ci(z, confidence)
    ok = mean <= sigma2 / u + half + 1e-12
    frac = float(ok.mean())
    worst = float(np.max(mean - half - sigma2 / u))
    return CheckResult(
        "rotosolve_descent", frac >= min_fraction, frac, min_fraction,
        dict(lam=lam, d=d, sigma2=sigma2, u=u, seeds=len(traces), T=values.shape[1] - 1,
             confidence=confidence),
        f"bound held at {ok.sum()}/{ok.size} iterations; worst excess beyond CI {worst:.3e}",
        at_least=True,
    )


def check_rcd_descent(traces, circuit: ParamCircuit, obs: Observable, sigma2: float,
                      alpha: float, constants: LandscapeConstants, confidence: float = 0.99,
                      min_fraction: float = 0.95, min_seeds: int = MIN_SEEDS) -> CheckResult:
    """``E[f(t+1) - f(t)] <= -alpha/(2d) E||grad f||^2 + L_bar alpha^2 sigma^2 / 2``."""
    _require_seeds(traces, min_seeds)
    _, values = _stack(traces)
    d = circuit.param_dim
    gn2 = gradient_norms(circuit, obs, traces)[:, :-1]
    z = np.diff(values, axis=1) + alpha / (2 * d) * gn2
    floor = constants.L_bar * alpha**2 * sigma2 / 2
    mean, half = _upper_ci(z, confidence)
    ok = mean <= floor + half + 1e-12
    frac = float(ok.mean())
    return CheckResult(
        "rcd_descent", frac >= min_fraction, frac, min_fraction,
        dict(alpha=alpha, L_bar=constants.L_bar, L_max=constants.L_max, d=d, sigma2=sigma2,
             seeds=len(traces)),
        f"bound held at {ok.sum()}/{ok.size} iterations",
        at_least=True,
    )


def check_coordinate_descent_lemma(circuit: ParamCircuit, obs: Observable, samples: int = 500,
                                   constants: LandscapeConstants | None = None,
                                   rng: np.random.Generator | None = None,
                                   slack: float = 1e-9) -> CheckResult:
    """``f(theta + h e_j) <= f(theta) + h grad_j f(theta) + L_j h^2 / 2`` at random points."""
    from .trig import landscape_constants

    constants = constants or landscape_constants(circuit, obs)
    rng = rng if rng is not None else make_rng(0, 0x14)
    d = circuit.param_dim
    thetas = rng.uniform(-np.pi, np.pi, size=(samples, d))
    js = rng.integers(d, size=samples)
    hs = rng.uniform(-np.pi, np.pi, size=samples)
    moved = thetas.copy()
    moved[np.arange(samples), js] += hs
    f0 = np.asarray(objective(circuit, obs, thetas))
    f1 = np.asarray(objective(circuit, obs, moved))
    g = exact_gradients(circuit, obs, thetas)[np.arange(samples), js]
    L = np.asarray(constants.L_j)[js]
    excess = f1 - (f0 + hs * g + L * hs**2 / 2)
    violations = int(np.sum(excess > slack))
    return CheckResult(
        "smoothness", violations == 0, float(excess.max()), slack,
        dict(samples=samples, L_max=constants.L_max, d=d),
        f"{violations} violations",
    )


# -- PL constants -------------------------------------------------------------


def coordinate_pl_constants(circuit: ParamCircuit, obs: Observable, thetas) -> np.ndarray:
    """Coordinate-wise PL bounds ``mu_j(theta)`` at each point, shape (N, d); NaN on flat coordinates."""
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    out = np.full(thetas.shape, np.nan)
    for i, theta in enumerate(thetas):
        for j, fit in enumerate(exact_fits(circuit, obs, theta)):
            if not fit.flat:
                out[i, j] = pl_bound_at(fit, theta[j])
    return out


@dataclass(frozen=True)
class TrajectoryPL:
    """PL constants measured along visited iterates.

    ``coordinate_sum`` is the smallest ``sum_j mu_j(theta)`` of the
    coordinate-wise bounds; ``direct`` is the smallest ratio
    ``||grad f||^2 / (2 (f - f*))``. The coordinate sum bounds the gap to each
    coordinate's own minimum rather than to ``f*``, so it can exceed the direct
    ratio; ``mu`` is the smaller of the two and always satisfies the PL
    inequality at every visited iterate.
    """

    coordinate_sum: float
    direct: float
    maximizer_fraction: float

    @property
    def mu(self) -> float:
        return min(self.coordinate_sum, self.direct)


def trajectory_pl(circuit: ParamCircuit, obs: Observable, traces, fstar: float,
                  t_start: int = 0, gap_floor: float = 1e-8) -> TrajectoryPL:
    """PL constants over iterates ``t >= t_start`` whose gap exceeds ``gap_floor``.

    Iterates at numerical optimality carry no information about the constant
    and are skipped. ``maximizer_fraction`` counts (iterate, coordinate) pairs
    sitting at a coordinate maximizer, where the coordinate-wise bound vanishes.
    """
    thetas, values = _stack(traces)
    d = thetas.shape[2]
    gap = (values - (fstar - FSTAR_SLACK))[:, t_start:]
    sel = gap > gap_floor
    if not np.any(sel):
        raise InsufficientDataError("no iterate above the gap floor in the selected region")
    gn2 = gradient_norms(circuit, obs, traces)[:, t_start:]
    pts = thetas[:, t_start:][sel]
    pl = coordinate_pl_constants(circuit, obs, pts)
    return TrajectoryPL(float(np.min(np.nansum(pl, axis=1))),
                        float(np.min(gn2[sel] / (2 * gap[sel]))),
                        float(np.mean(np.nan_to_num(pl, nan=1.0) <= 1e-12 * max(1.0, d))))


def trajectory_pl_constant(circuit: ParamCircuit, obs: Observable, traces, fstar: float,
                           t_start: int = 0, gap_floor: float = 1e-8) -> float:
    """The conservative PL constant ``trajectory_pl(...).mu``."""
    return trajectory_pl(circuit, obs, traces, fstar, t_start, gap_floor).mu


# -- rate theorems ------------------------------------------------------------


def stationarity_bound(which: str, T, d: int, delta0: float, sigma2: float,
                       constants: LandscapeConstants, alpha: float | None = None):
    """Right-hand side for ``min_{t<T} E||grad f(theta_t)||^2``."""
    T = np.asarray(T, dtype=float)
    if which == "rotosolve":
        return constants.u * d * delta0 / T + d * sigma2
    return 2 * d * delta0 / (alpha * T) + constants.L_bar * alpha * d * sigma2


def stationarity_iterations(which: str, eps: float, d: int, delta0: float,
                            constants: LandscapeConstants) -> int:
    """Iterations guaranteeing ``min E||grad f||^2 <= eps^2`` when ``sigma^2 <= eps^2 / 2d``."""
    if which == "rotosolve":
        return math.ceil(2 * constants.u * d * delta0 / eps**2)
    return math.ceil(4 * d * constants.L_max * delta0 / eps**2)


def suboptimality_iterations(which: str, eps: float, d: int, delta0: float, mu: float,
                             constants: LandscapeConstants) -> int:
    """Iterations guaranteeing ``E[f - f*] <= eps`` when ``sigma^2 <= eps mu / d``."""
    log = math.log(2 * delta0 / eps)
    if which == "rotosolve":
        return math.ceil(constants.u * d / (2 * mu) * log)
    return math.ceil(d * constants.L_max / mu * log)


def check_stationarity_rate(traces, circuit: ParamCircuit, obs: Observable,
                            constants: LandscapeConstants, sigma2: float, fstar: float,
                            eps: float, which: str = "rotosolve", alpha: float | None = None,
                            confidence: float = 0.99, min_fraction: float = 0.95,
                            min_seeds: int = MIN_SEEDS) -> CheckResult:
    """Anytime bound on ``min_t E||grad f||^2`` and the ``eps``-stationarity iteration count."""
    _require_seeds(traces, min_seeds)
    if which == "rcd" and alpha is None:
        raise ValueError("RCD check needs the step size alpha")
    d = circuit.param_dim
    delta0 = initial_gap(traces, fstar - FSTAR_SLACK)
    gn2 = gradient_norms(circuit, obs, traces)
    mean, half = _upper_ci(gn2, confidence)
    lower = mean - half
    Ts = np.arange(1, gn2.shape[1])
    running_min = np.minimum.accumulate(lower[:-1])
    bound = stationarity_bound(which, Ts, d, delta0, sigma2, constants, alpha)
    ok = running_min <= bound
    frac = float(ok.mean())
    T_guar = stationarity_iterations(which, eps, d, delta0, constants)
    hyp = dict(which=which, d=d, delta0=delta0, sigma2=sigma2, eps=eps, T_guarantee=T_guar,
               lam=constants.lam_max, L_max=constants.L_max, seeds=len(traces))
    if alpha is not None:
        hyp["alpha"] = alpha
    detail = f"anytime bound held at {ok.sum()}/{ok.size} horizons"
    guarantee_ok = True
    if sigma2 <= eps**2 / (2 * d):
        reached = np.nonzero(lower[: T_guar] <= eps**2)[0]
        if reached.size:
            detail += f"; eps^2 reached at t={reached[0]} <= T_guarantee={T_guar}"
        elif gn2.shape[1] < T_guar:
            raise InsufficientDataError(
                f"ensemble has {gn2.shape[1] - 1} iterations, guarantee needs {T_guar}")
        else:
            guarantee_ok = False
            detail += f"; eps^2 NOT reached within T_guarantee={T_guar}"
    else:
        detail += "; noise too large for the eps-guarantee branch (sigma^2 > eps^2/2d)"
    return CheckResult(f"stationarity_{which}", frac >= min_fraction and guarantee_ok, frac,
                       min_fraction, hyp, detail, at_least=True)


def check_suboptimality_rate(traces, circuit: ParamCircuit, obs: Observable,
                             constants: LandscapeConstants, sigma2: float, fstar: float,
                             eps: float, mu: float, which: str = "rotosolve",
                             alpha: float | None = None, t_start: int = 0,
                             confidence: float = 0.99, min_fraction: float = 0.95,
                             min_seeds: int = MIN_SEEDS) -> CheckResult:
    """Geometric contraction of ``E[f - f*]`` inside the PL region.

    ``mu`` should come from :func:`trajectory_pl` on the visited iterates.
    Checks ``E[gap(t+1)] <= rho E[gap(t)] + floor`` for ``t >= t_start`` with
    ``rho = 1 - 2 mu / (u d)`` (Rotosolve) or ``1 - alpha mu / d`` (RCD), and
    that the log-form iteration count reaches ``eps`` when ``sigma^2 <= eps mu / d``.
    """
    _require_seeds(traces, min_seeds)
    if which == "rcd" and alpha is None:
        raise ValueError("RCD check needs the step size alpha")
    _, values = _stack(traces)
    d = circuit.param_dim
    gap = values - (fstar - FSTAR_SLACK)
    if which == "rotosolve":
        rho = float(1 - 2 * mu / (constants.u * d))
        floor = float(sigma2 / constants.u)
    else:
        rho = 1 - alpha * mu / d
        floor = constants.L_bar * alpha**2 * sigma2 / 2
    # the f* slack keeps every gap >= FSTAR_SLACK, which cannot contract
    floor_eff = floor + (1 - rho) * FSTAR_SLACK
    z = gap[:, t_start + 1:] - rho * gap[:, t_start:-1]
    mean, half = _upper_ci(z, confidence)
    ok = mean <= floor_eff + half + 1e-12
    frac = float(ok.mean())

    delta0 = float(gap[0, t_start])
    hyp = dict(which=which, d=d, mu=mu, rho=rho, floor=floor, sigma2=sigma2, eps=eps,
               delta0=delta0, lam=constants.lam_max, seeds=len(traces), t_start=t_start)
    if alpha is not None:
        hyp["alpha"] = alpha
    detail = f"contraction held at {ok.sum()}/{ok.size} iterations"
    regime = sigma2 <= eps * mu / d
    if not regime:
        detail += f"; noise outside the sigma^2 <= eps mu / d regime ({sigma2:.3g} > {eps * mu / d:.3g})"
    T_ok = True
    if mu > 0 and regime and delta0 > eps / 2:
        T_sub = suboptimality_iterations(which, eps, d, delta0, mu, constants)
        hyp["T_guarantee"] = T_sub
        if t_start + T_sub < gap.shape[1]:
            g_T = gap[:, t_start + T_sub]
            m, h = _upper_ci(g_T[:, None], confidence)
            T_ok = bool(m[0] - h[0] <= eps)
            detail += f"; E[gap] at T_guarantee={T_sub}: {m[0]:.3e} (eps={eps:g})"
        else:
            detail += f"; T_guarantee={T_sub} beyond ensemble length, not checked"
    if mu <= 0:
        detail += "; mu <= 0: trajectory leaves the PL region"
    return CheckResult(f"suboptimality_{which}", frac >= min_fraction and T_ok and mu > 0,
                       frac, min_fraction, hyp, detail, at_least=True)


# -- shot complexity ----------------------------------------------------------


@dataclass(frozen=True)
class ShotBudget:
    iterations: int
    shots_per_evaluation: int
    total_shots: int
    iterations_bound: float
    shots_bound: float
    evaluations_per_iteration: int = 3

    @property
    def total_bound(self) -> float:
        return self.evaluations_per_iteration * self.iterations_bound * self.shots_bound


def shot_budget(eps: float, d: int, lam: float, delta0: float, regime: str = "stationary",
                mu: float | None = None, evaluations_per_iteration: int = 3) -> ShotBudget:
    """Rotosolve iterations, shots per evaluation and total shots to reach ``eps``.

    The shot count is the smallest ``n`` with ``lam^2 / n`` inside the noise
    hypothesis of the rate theorem (``eps^2 / 2d`` or ``eps mu / d``).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    u = SQRT2_PLUS_1 * lam
    if regime == "stationary":
        T_b = 2 * u * d * delta0 / eps**2
        n_b = 2 * d * lam**2 / eps**2
    elif regime == "suboptimal":
        if mu is None or mu <= 0:
            raise ValueError("suboptimal regime needs mu > 0")
        T_b = u * d / (2 * mu) * math.log(2 * delta0 / eps)
        n_b = d * lam**2 / (eps * mu)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    T = math.ceil(T_b - 1e-9)
    n = math.ceil(n_b - 1e-9)
    return ShotBudget(T, n, evaluations_per_iteration * T * n, T_b, n_b, evaluations_per_iteration)


def shots_to_target(traces, circuit: ParamCircuit, obs: Observable, eps: float) -> int | None:
    """Cumulative shots when the ensemble mean ``||grad f||^2`` first drops to ``eps^2``."""
    gn2 = gradient_norms(circuit, obs, traces).mean(axis=0)
    hit = np.nonzero(gn2 <= eps**2)[0]
    if hit.size == 0:
        return None
    return int(traces[0].shots[hit[0]])


def scaling_problem(d: int) -> tuple[ParamCircuit, Observable]:
    """``d/2`` qubits, one RY-RZ layer with a CNOT chain, ``H = (1/2n) sum_i (Z_i + X_i)``.

    The spectral radius stays at ``1/sqrt 2`` for every even ``d``, so only
    the dimension changes across a sweep.
    """
    if d < 2 or d % 2:
        raise ValueError("scaling problems need an even d >= 2")
    n = d // 2
    terms = []
    for p in "ZX":
        terms += [(0.5 / n, "I" * i + p + "I" * (n - i - 1)) for i in range(n)]
    return layered_ansatz(n, 1, axes=("Y", "Z")), Observable(n, tuple(terms))


def shots_to_stationarity(circuit: ParamCircuit, obs: Observable, eps: float, runs: int = 40,
                          seed: int = 0, T: int | None = None) -> tuple[float, int]:
    """Mean cumulative shots until ``||grad f||^2 <= eps^2`` over runs from random starts.

    Each run uses ``n = ceil(2 d lambda^2 / eps^2)`` shots per evaluation (the
    stationary-regime noise hypothesis). Returns the mean over runs that hit the
    target and the number of runs that did not within ``T`` iterations.
    """
    d = circuit.param_dim
    n = shot_budget(eps, d, spectral_radius(obs), 1.0).shots_per_evaluation
    T = T or 40 * d
    config = OracleConfig.with_shots(n, seed=seed)
    hits, misses = [], 0
    for r in range(runs):
        theta0 = make_rng(seed, d, r).uniform(-np.pi, np.pi, d)
        tr = run(OptimizerConfig("rotosolve", T=T, seed=seed), Oracle(circuit, obs, config, trial=r),
                 theta0, trial=r)
        g2 = np.sum(exact_gradients(circuit, obs, tr.theta_array) ** 2, axis=1)
        k = np.nonzero(g2 <= eps**2)[0]
        if k.size:
            hits.append(tr.shots[k[0]])
        else:
            misses += 1
    if not hits:
        raise InsufficientDataError("no run reached the target")
    return float(np.mean(hits)), misses


def check_shot_scaling(dims=(2, 4, 8), eps: float = 0.1, runs: int = 40, seed: int = 0,
                       factor: float = 1.5, exponent: float = 2.0) -> CheckResult:
    """Measured shots-to-eps grows no faster than ``d^exponent`` (up to ``factor``) across ``dims``."""
    shots = {d: shots_to_stationarity(*scaling_problem(d), eps, runs, seed) for d in dims}
    d0 = dims[0]
    ratios = {d: shots[d][0] / shots[d0][0] / (d / d0) ** exponent for d in dims}
    worst = max(ratios.values())
    misses = sum(m for _, m in shots.values())
    hyp = dict(eps=eps, runs=runs, seed=seed, factor=factor, exponent=exponent)
    hyp.update({f"shots_d{d}": s for d, (s, _) in shots.items()})
    hyp.update({f"ratio_d{d}": r for d, r in ratios.items()})
    return CheckResult("shot_scaling", worst <= factor and misses == 0, worst, factor, hyp,
                       f"shots relative to d^{exponent:g} scaling: "
                       + ", ".join(f"d={d}: {r:.3f}" for d, r in ratios.items())
                       + f"; {misses} runs missed the target")


# -- check suite --------------------------------------------------------------

CHECKS = (
    "smoothness", "rotosolve_descent", "rcd_descent", "stationarity_rotosolve",
    "stationarity_rcd", "suboptimality_rotosolve", "suboptimality_rcd", "shot_scaling",
)

# what each negative control violates; the check must then FAIL
NEGATIVE_CONTROLS = {
    "smoothness": "smoothness constants L_j understated 10x",
    "rotosolve_descent": "noise variance understated 10x",
    "rcd_descent": "noise variance understated 10x",
    "stationarity_rotosolve": "ensemble sampled with 1 shot, checked with the variance of n shots",
    "stationarity_rcd": "ensemble sampled with 1 shot, checked with the variance of n shots",
    "suboptimality_rotosolve": "PL constant overstated 20x",
    "suboptimality_rcd": "PL constant overstated 20x",
    "shot_scaling": "claims linear growth in d",
}


@dataclass(frozen=True)
class SuiteSettings:
    """Ensemble sizes and targets for :func:`run_suite`.

    ``seeds`` is a count (trials ``0..seeds-1``) or an explicit sequence of trials.
    """

    seeds: int | tuple = 50
    theta_seed: int = 5
    oracle_seed: int = 1
    descent_T: int = 200
    descent_shots: int = 100
    stationary_eps: float = 0.3
    stationary_T: int | None = None  # default: the guarantee horizon
    suboptimal_eps: float = 0.01
    pl_radius: float = 0.3
    suboptimal_T: int | None = None  # default: the guarantee horizon
    shot_eps: float = 0.1
    shot_dims: tuple = (2, 4, 8)
    shot_runs: int = 40
    fstar_restarts: int = 32

    @classmethod
    def from_dict(cls, cfg: dict) -> "SuiteSettings":
        known = {k: v for k, v in cfg.items() if k in cls.__dataclass_fields__}
        if "shot_dims" in known:
            known["shot_dims"] = tuple(int(d) for d in known["shot_dims"])
        if isinstance(known.get("seeds"), (list, tuple)):
            known["seeds"] = tuple(int(x) for x in known["seeds"])
        return cls(**known)

    @property
    def trials(self) -> tuple:
        return tuple(range(self.seeds)) if isinstance(self.seeds, int) else tuple(self.seeds)


class _Problem:
    """Lazily computed constants shared by the checks of one suite run."""

    def __init__(self, circuit: ParamCircuit, obs: Observable, settings: SuiteSettings):
        from .trig import landscape_constants

        self.circuit, self.obs, self.s = circuit, obs, settings
        self.d = circuit.param_dim
        self.constants = landscape_constants(circuit, obs)
        self.theta0 = make_rng(settings.theta_seed).uniform(-np.pi, np.pi, self.d)
        self._fstar = None

    @property
    def fstar(self) -> float:
        if self._fstar is None:
            self._fstar = estimate_fstar(self.circuit, self.obs, self.s.fstar_restarts)
        return self._fstar

    @property
    def alpha(self) -> float:
        return 1.0 / self.constants.L_max

    def ensemble(self, kind: str, T: int, oracle_config: OracleConfig, theta0=None):
        config = OptimizerConfig(kind, T=T, alpha=self.alpha)
        theta0 = self.theta0 if theta0 is None else theta0
        return run_ensemble(config, self.circuit, self.obs, oracle_config, theta0, self.s.trials)

    def near_minimizer(self) -> np.ndarray:
        """A start inside the PL region: a perturbed exact-Rotosolve minimizer."""
        tr = run(OptimizerConfig("rotosolve", T=60 * self.d), Oracle(self.circuit, self.obs),
                 self.theta0)
        shift = make_rng(self.s.theta_seed, 0x91).uniform(-self.s.pl_radius, self.s.pl_radius, self.d)
        return tr.thetas[-1] + shift


def _descent(p: _Problem, which: str, negative: bool) -> CheckResult:
    s = p.s
    traces = p.ensemble(which, s.descent_T, OracleConfig.with_shots(s.descent_shots, s.oracle_seed))
    sigma2 = variance_bound(p.obs, s.descent_shots) / (10 if negative else 1)
    if which == "rotosolve":
        return check_rotosolve_descent(traces, p.circuit, p.obs, sigma2)
    return check_rcd_descent(traces, p.circuit, p.obs, sigma2, p.alpha, p.constants)


def _stationarity(p: _Problem, which: str, negative: bool) -> CheckResult:
    s, d, K = p.s, p.d, p.constants
    eps = s.stationary_eps
    n = shot_budget(eps, d, K.lam_max, 1.0).shots_per_evaluation
    sigma2 = variance_bound(p.obs, n)
    delta0 = float(objective(p.circuit, p.obs, p.theta0)) - (p.fstar - FSTAR_SLACK)
    T = s.stationary_T or stationarity_iterations(which, eps, d, delta0, K) + 1
    traces = p.ensemble(which, T, OracleConfig.with_shots(1 if negative else n, s.oracle_seed))
    return check_stationarity_rate(traces, p.circuit, p.obs, K, sigma2, p.fstar, eps, which,
                                   alpha=p.alpha if which == "rcd" else None)


def _suboptimality(p: _Problem, which: str, negative: bool) -> CheckResult:
    s, d, K = p.s, p.d, p.constants
    eps = s.suboptimal_eps
    start = p.near_minimizer()
    horizon = lambda mu: suboptimality_iterations(
        which, eps, d, float(objective(p.circuit, p.obs, start)) - p.fstar + FSTAR_SLACK, mu, K) + 1
    exact = p.ensemble(which, 60, OracleConfig.exact(), start)
    mu_exact = trajectory_pl(p.circuit, p.obs, exact, p.fstar).mu
    n = math.ceil(d * K.lam_max**2 / (eps * mu_exact / 2))
    T = s.suboptimal_T or horizon(mu_exact / 2)
    traces = p.ensemble(which, T, OracleConfig.with_shots(n, s.oracle_seed), start)
    mu = min(mu_exact, trajectory_pl(p.circuit, p.obs, traces, p.fstar).mu)
    return check_suboptimality_rate(traces, p.circuit, p.obs, K, variance_bound(p.obs, n), p.fstar,
                                    eps, mu * (20 if negative else 1), which,
                                    alpha=p.alpha if which == "rcd" else None)


def run_suite(circuit: ParamCircuit, obs: Observable, checks=CHECKS,
              settings: SuiteSettings | None = None, negative_control: bool = False) -> TheoryReport:
    """Run the selected checks; with ``negative_control`` each runs with its hypothesis violated."""
    settings = settings or SuiteSettings()
    unknown = [c for c in checks if c not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks {unknown}; choose from {CHECKS}")
    report = TheoryReport()
    if not checks:
        return report
    if any(c not in ("smoothness", "shot_scaling") for c in checks):
        _require_seeds(settings.trials, MIN_SEEDS)
    p = _Problem(circuit, obs, settings)
    for name in checks:
        if name == "smoothness":
            K = p.constants
            if negative_control:
                K = LandscapeConstants(tuple(L / 10 for L in K.L_j), K.lam_max)
            r = check_coordinate_descent_lemma(circuit, obs, constants=K)
        elif name == "shot_scaling":
            r = check_shot_scaling(settings.shot_dims, settings.shot_eps, settings.shot_runs,
                                   settings.oracle_seed, exponent=1.0 if negative_control else 2.0)
        else:
            kind, which = name.rsplit("_", 1) if name.startswith(("stationarity", "suboptimality")) \
                else (name.split("_")[1], name.split("_")[0])
            fn = {"descent": _descent, "stationarity": _stationarity, "suboptimality": _suboptimality}[kind]
            r = fn(p, which, negative_control)
        if negative_control:
            r.detail = f"negative control ({NEGATIVE_CONTROLS[name]}): " + r.detail
        report.add(r)
    return report
