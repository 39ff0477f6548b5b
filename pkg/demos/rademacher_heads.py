"""
Head integrals of Rademacher sums
=================================

How much of a dyadic Rademacher sum sits on its largest 2^-i portion, and
how close the two-term estimate (tail block plus square root of the rest)
comes to the exact value.
"""

import numpy as np

from rispace.rademacher import head_equivalence_sides, rademacher_sum
from rispace.stepfn import head_integral, rearrange

rng = np.random.default_rng(0)

# a sum with decreasing coefficients, and its decreasing rearrangement
a = np.sort(rng.uniform(0, 1, size=8))[::-1]
f = rademacher_sum(a)
print("cells:", f.n_cells, " sup:", f.sup_abs(), " L1:", f.l1())
print("rearranged values:", np.round(rearrange(f).values[:6], 4), "...")

# exact head integral against the estimate, level by level
print("\n  i    exact       estimate    ratio")
for i in range(1, a.size + 3):
    lhs, rhs = head_equivalence_sides(a, i)
    print(f"{i:3d}  {lhs:.6e}  {rhs:.6e}  {lhs / rhs:.4f}")

# past the number of terms the head is flat: the sum of the coefficients
i = a.size + 2
assert np.isclose(head_integral(f, 2.0 ** -i), 2.0 ** -i * a.sum())
