"""
Three evaluations pin down a coordinate
=======================================

Run with ``python demos/01_sinusoid_fit.py``.
"""
import numpy as np

from rotolab.oracle import Oracle, make_rng
from rotolab.qsim import layered_ansatz, objective, random_observable
from rotolab.trig import fit_univariate, univariate_min

######################################################################
# When a parameter enters the circuit through a single Pauli rotation, the
# energy seen along that parameter is a pure sinusoid
# ``A sin(phi + B) + C``. Three evaluations (at the current value and at
# +-pi/2) are enough to recover it exactly.

circuit = layered_ansatz(3, 2, entangle="ring")
obs = random_observable(make_rng(0), 3, 5)
theta = make_rng(1).uniform(-np.pi, np.pi, circuit.param_dim)
oracle = Oracle(circuit, obs)

j = 4
fit = fit_univariate(oracle, theta, j)
print(f"coordinate {j}: A={fit.amplitude:.4f} B={fit.phase:.4f} C={fit.offset:.4f}")

######################################################################
# Sweep the coordinate on a grid and compare the fitted curve with direct
# simulation. The difference sits at machine precision.

grid = np.linspace(-np.pi, np.pi, 9)
rows = np.repeat(theta[None], grid.size, axis=0)
rows[:, j] = grid
for phi, direct, fitted in zip(grid, objective(circuit, obs, rows), fit(grid)):
    print(f"  phi={phi:+.3f}  simulated={direct:+.6f}  fitted={fitted:+.6f}")

######################################################################
# The same three numbers carry the parameter-shift gradient ``g = b/2`` and
# the curvature proxy ``h = -a/2``. They satisfy ``A = sqrt(g^2 + h^2)`` and
# ``C = h + f``, so the amplitude is a local smoothness constant.

print(f"g={fit.gradient:+.6f} h={fit.curvature:+.6f} "
      f"sqrt(g^2+h^2)={np.hypot(fit.gradient, fit.curvature):.6f}")

######################################################################
# Closed-form minimization along the coordinate is what a Rotosolve step does.

phi_star, f_star = univariate_min(fit)
moved = theta.copy()
moved[j] = phi_star
print(f"minimizer phi*={phi_star:+.4f}, predicted {f_star:+.6f}, "
      f"simulated {float(objective(circuit, obs, moved)):+.6f}")
