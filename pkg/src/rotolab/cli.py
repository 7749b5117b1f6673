"""Command-line front end: ``fit``, ``optimize``, ``verify`` and ``dataset``.

Every subcommand reads a TOML config. Paths inside it are relative to the
config file. Recognised keys::

    problem = "ansatz.circ"      # circuit + observable file (or use [bench])
    theta = [0.1, 0.2]           # parameters for fit / start for optimize
    theta_seed = 0               # random start when theta is absent

    [oracle]  mode, sigma, shots, seed, shot_equivalent
    [optim]   kinds, T, budget, alpha, c, nu, seeds
    [bench]   K, layers, sigma, seed, spread
    [verify]  checks, seeds, plus any SuiteSettings field

Exit status: 0 on success, 1 when a verify check fails, 2 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .circuit_io import CircuitParseError, load_problem
from .finitesum import budget_iterations, initial_point, make_benchmark, run_benchmark
from .optim import KINDS, OptimizerConfig, run
from .oracle import Oracle, OracleConfig, make_rng
from .trig import fit_univariate
from .verify import CHECKS, InsufficientDataError, SuiteSettings, run_suite

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg["_base"] = path.parent
    return cfg


def parse_seeds(text: str) -> list[int]:
    """``"7"``, ``"0,3,5"`` or a half-open range ``"0:10"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            lo, hi = part.split(":")
            seeds.extend(range(int(lo), int(hi)))
        elif part:
            seeds.append(int(part))
    return seeds


def _problem(cfg: dict):
    if "problem" not in cfg:
        raise ConfigError("config needs a 'problem' circuit file")
    return load_problem(Path(cfg["_base"]) / cfg["problem"])


def _theta(cfg: dict, d: int) -> np.ndarray:
    if "theta" in cfg:
        theta = np.asarray(cfg["theta"], dtype=float)
        if theta.shape != (d,):
            raise ConfigError(f"theta has {theta.size} entries, circuit has {d} parameters")
        return theta
    return make_rng(int(cfg.get("theta_seed", 0))).uniform(-np.pi, np.pi, d)


def _oracle_config(cfg: dict) -> OracleConfig:
    if "oracle" in cfg:
        return OracleConfig.from_dict(cfg["oracle"])
    if "bench" in cfg:
        return OracleConfig.gaussian(float(cfg["bench"].get("sigma", 1e-4)))
    return OracleConfig.exact()


def _benchmark(cfg: dict):
    b = cfg.get("bench", {})
    return make_benchmark(seed=int(b.get("seed", 0)), K=int(b.get("K", 32)),
                          layers=int(b.get("layers", 2)), spread=float(b.get("spread", 0.3)))


# -- fit ----------------------------------------------------------------------

FIT_HEADER = ["j", "A", "B", "C", "g", "h", "resid_A", "resid_C"]


def cmd_fit(cfg: dict, out: Path | None) -> int:
    circuit, obs = _problem(cfg)
    theta = _theta(cfg, circuit.param_dim)
    oracle = Oracle(circuit, obs, _oracle_config(cfg))
    rows = []
    for j in range(circuit.param_dim):
        fit = fit_univariate(oracle, theta, j)
        g, h = fit.gradient, fit.curvature
        rows.append([j, fit.amplitude, fit.phase, fit.offset, g, h,
                     abs(fit.amplitude - np.hypot(g, h)), abs(fit.offset - (h + fit.value))])
    print(" ".join(f"{k:>12s}" for k in FIT_HEADER))
    for r in rows:
        print(f"{r[0]:>12d} " + " ".join(f"{v:>12.6g}" for v in r[1:]))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "fit.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FIT_HEADER)
            w.writerows([r[0]] + [repr(float(v)) for v in r[1:]] for r in rows)
    return 0


# -- optimize -----------------------------------------------------------------

SUMMARY_HEADER = ["optimizer", "t", "circuit_executions", "f_mean", "f_std"]


def _optim_settings(cfg: dict, seeds_override):
    o = cfg.get("optim", {})
    kinds = o.get("kinds", [o["kind"]] if "kind" in o else ["rotosolve"])
    bad = [k for k in kinds if k not in KINDS]
    if bad:
        raise ConfigError(f"unknown optimizer kind {bad[0]!r}; choose from {', '.join(KINDS)}")
    seeds = seeds_override if seeds_override is not None else [int(s) for s in o.get("seeds", [0])]
    if not seeds:
        raise ConfigError("no seeds selected")
    return o, kinds, seeds


def write_summary(path: Path, traces: dict) -> None:
    """Mean and across-seed std of the exact objective per optimizer and iteration."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for kind, runs in traces.items():
            values = np.array([tr.values for tr in runs])
            std = values.std(axis=0, ddof=1) if len(runs) > 1 else np.zeros(values.shape[1])
            for t in range(values.shape[1]):
                w.writerow([kind, t, runs[0].executions[t], repr(float(values[:, t].mean())),
                            repr(float(std[t]))])


def cmd_optimize(cfg: dict, out: Path, seeds_override=None) -> int:
    o, kinds, seeds = _optim_settings(cfg, seeds_override)
    oracle_config = _oracle_config(cfg)
    bench = "problem" not in cfg
    if bench:
        model, data = _benchmark(cfg)
        theta0 = (np.asarray(cfg["theta"], dtype=float) if "theta" in cfg
                  else initial_point(model, int(cfg.get("theta_seed", 0))))
        d, K = model.n_params, data.K
    else:
        circuit, obs = _problem(cfg)
        theta0 = _theta(cfg, circuit.param_dim)
        d, K = circuit.param_dim, 1
    out.mkdir(parents=True, exist_ok=True)
    traces = {}
    for kind in kinds:
        T = budget_iterations(kind, o["budget"], d, K) if "budget" in o else int(o.get("T", 100))
        traces[kind] = []
        for s in seeds:
            config = OptimizerConfig(kind, T=T, alpha=float(o.get("alpha", 0.1)),
                                     c=float(o.get("c", 1e-2)), nu=float(o.get("nu", 1e-2)), seed=s)
            if bench:
                tr = run_benchmark(model, data, config, oracle_config, theta0, trial=s)
            else:
                tr = run(config, Oracle(circuit, obs, oracle_config, trial=s), theta0, trial=s)
            tr.to_csv(out / f"{kind}_seed{s}.csv")
            traces[kind].append(tr)
    write_summary(out / "summary.csv", traces)
    for kind, runs in traces.items():
        finals = [tr.values[-1] for tr in runs]
        print(f"{kind:10s} T={runs[0].T:5d} executions={runs[0].executions[-1]:8d} "
              f"final f mean={np.mean(finals):.6g} std={np.std(finals):.3g}")
    return 0


# -- verify -------------------------------------------------------------------


def cmd_verify(cfg: dict, out: Path | None, seeds_override=None, negative_control=False) -> int:
    v = dict(cfg.get("verify", {}))
    checks = v.pop("checks", list(CHECKS))
    if not checks:
        print("no checks selected")
        return 0
    if seeds_override is not None:
        v["seeds"] = seeds_override
    settings = SuiteSettings.from_dict(v)
    circuit, obs = _problem(cfg)
    report = run_suite(circuit, obs, checks, settings, negative_control)
    print(report.to_text())
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        report.to_csv(out / "report.csv")
        (out / "report.txt").write_text(report.to_text() + "\n")
    return 0 if report.all_passed else 1


# -- dataset ------------------------------------------------------------------


def cmd_dataset(cfg: dict, out: Path) -> int:
    _, data = _benchmark(cfg)
    out.mkdir(parents=True, exist_ok=True)
    data.to_csv(out / "dataset.csv")
    print(f"wrote {data.K} samples ({int(np.sum(data.labels > 0))} positive) to {out / 'dataset.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rotolab", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs_out in [("fit", False), ("optimize", True), ("verify", False), ("dataset", True)]:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="TOML experiment config")
        s.add_argument("--out", required=needs_out, type=Path, help="output directory")
        if name in ("optimize", "verify"):
            s.add_argument("--seeds", type=parse_seeds, help='e.g. "7", "0,1,2" or "0:50"')
        if name == "verify":
            s.add_argument("--negative-control", action="store_true",
                           help="violate each check's hypothesis; every check should FAIL")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "fit":
            return cmd_fit(cfg, args.out)
        if args.command == "optimize":
            return cmd_optimize(cfg, args.out, args.seeds)
        if args.command == "verify":
            return cmd_verify(cfg, args.out, args.seeds, args.negative_control)
        return cmd_dataset(cfg, args.out)
    except (ConfigError, CircuitParseError, InsufficientDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
