"""
Mixed norms that do not survive transposition
=============================================

A kernel on the unit square whose rows all have norm at most one in the
Lorentz space X_p, while the L^1 average of its column norms grows without
bound as the construction deepens. The exponential Orlicz space shows no
such growth on random kernels.
"""

from rispace.harness import run_suite
from rispace.mixed2d import CounterexampleAnalytic, CounterexampleParams, transpose_lower_bound

p = 1.5
print(" n   sup of rows   columns   columns^p   lower bound on columns^p")
for n in range(0, 21, 2):
    P = CounterexampleParams(n, p)
    A = CounterexampleAnalytic(P)
    exact, bound = transpose_lower_bound(P)
    print(f"{n:2d}   {A.sup_norm():.12f}  {A.column_norm():7.4f}  {exact:9.4f}   {bound:9.4f}")

rep = run_suite("transpose-exp", seed=0, params={"trials": 30})
agg = rep.aggregate
print(f"\nExp L^2 on {agg['count']} random kernels: ratio in "
      f"[{agg['min_ratio']:.3f}, {agg['max_ratio']:.3f}]")
