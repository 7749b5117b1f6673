"""
Checking convergence guarantees on sampled trajectories
=======================================================

Run with ``python demos/03_theory_checks.py`` (about half a minute).
"""
from pathlib import Path

from rotolab.circuit_io import load_problem
from rotolab.verify import NEGATIVE_CONTROLS, SuiteSettings, run_suite

######################################################################
# The worst-case rates for Rotosolve and randomized coordinate descent are
# statements about expectations. The suite runs 50-seed ensembles and tests
# each bound against a 99% Student-t interval at every iteration.

circuit, obs = load_problem(Path(__file__).parent / "circuits" / "two_qubit.circ")
checks = ["smoothness", "rotosolve_descent", "rcd_descent", "suboptimality_rotosolve"]
report = run_suite(circuit, obs, checks, SuiteSettings(seeds=50))
print(report.to_text())

######################################################################
# A check that cannot fail proves nothing. Each one has a negative control
# that violates its hypothesis on purpose, and the suite must then report FAIL.

negative = run_suite(circuit, obs, checks, SuiteSettings(seeds=50), negative_control=True)
for r in negative.results:
    print(f"{r.name:25s} {r.verdict}   ({NEGATIVE_CONTROLS[r.name]})")
