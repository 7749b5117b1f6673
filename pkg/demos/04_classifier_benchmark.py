"""
Training a two-blob classifier at equal circuit budget
======================================================

Run with ``python demos/04_classifier_benchmark.py``.
"""
import numpy as np

from rotolab.finitesum import band_width, compare_optimizers, initial_point, make_benchmark
from rotolab.optim import KINDS
from rotolab.oracle import OracleConfig

######################################################################
# Two Gaussian blobs in the plane, angle-encoded on two qubits, followed by
# two layers of RY/RZ rotations and a CNOT ring. The loss
# ``(1/2K) sum (1 - y f(x))`` is an average of per-sample sinusoids, so
# Rotosolve still minimizes a coordinate exactly from three evaluations per
# sample.

model, data = make_benchmark(seed=0, K=32, layers=2)
theta0 = initial_point(model, 0)
print(f"{data.K} samples, {model.n_params} trainable parameters")

######################################################################
# Every optimizer gets 9600 circuit executions and the same start, with
# Gaussian noise of 1e-4 on each loss evaluation. The gradient baselines
# share a step size of 0.1.

budget = 9600
traces = compare_optimizers(model, data, KINDS, budget, range(10),
                            OracleConfig.gaussian(1e-4), theta0)

for kind, runs in traces.items():
    finals = np.array([tr.values[-1] for tr in runs])
    print(f"{kind:9s} T={runs[0].T:4d} final loss {finals.mean():.4f} +- {finals.std(ddof=1):.4f}"
          f"   band {band_width(runs, budget):.2e}")

######################################################################
# Rotosolve lands lowest. The band column is the across-seed standard
# deviation of the loss curve, averaged over the execution axis. It is widest
# for Rotosolve: the random coordinate order makes each seed drop at a
# different moment, so the curves fan out on the way down. By the end of the
# budget they have merged again. The gradient methods crawl and stay close
# together throughout.
