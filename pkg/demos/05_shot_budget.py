"""
How many shots does a target accuracy cost?
===========================================

Run with ``python demos/05_shot_budget.py``.
"""
from rotolab.verify import check_shot_scaling, shot_budget

######################################################################
# To reach ``min E||grad f||^2 <= eps^2`` the iteration count grows like
# ``d / eps^2``. The per-evaluation shot count needed to keep the noise
# variance under ``eps^2 / 2d`` also grows like ``d / eps^2``. Their product
# is quadratic in ``d``.

for d in (1, 2, 4, 8):
    b = shot_budget(eps=0.1, d=d, lam=1.0, delta0=2.0)
    print(f"d={d}: T={b.iterations:6d}  n={b.shots_per_evaluation:5d}  total={b.total_shots:,}")

######################################################################
# Those are worst-case counts. On a family of circuits whose observable keeps
# the same spectral radius as d grows, the measured shots-to-target stays
# within the quadratic envelope.

result = check_shot_scaling(dims=(2, 4, 8), eps=0.1, runs=20, seed=1)
print(result.detail)
print(result.verdict)
