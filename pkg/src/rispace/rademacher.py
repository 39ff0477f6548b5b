"""Rademacher sums realized exactly on the dyadic grid.

``r_k`` is ``+1`` on the left half and ``-1`` on the right half of every
dyadic interval of length ``2^(1-k)``.  A sum ``sum_k a_k r_k`` with ``n``
terms is therefore constant on the ``2^n`` dyadic cells of length
``2^-n``, and cell ``j`` enumerates one sign pattern.
"""

from __future__ import annotations

import math

import numpy as np

from .stepfn import StepFn1D, head_integral, seq_rearrange

__all__ = [
    "MAX_TERMS",
    "head_equivalence_sides",
    "rademacher",
    "rademacher_cells",
    "rademacher_head_integral",
    "rademacher_sum",
]

MAX_TERMS = 20


def rademacher_cells(a) -> np.ndarray:
    """Values of ``sum_k a_k r_k`` on the ``2^n`` dyadic cells, left to right."""
    a = np.asarray(a, dtype=float).ravel()
    n = a.size
    if not 1 <= n <= MAX_TERMS:
        raise ValueError(f"need 1 <= n <= {MAX_TERMS} coefficients, got {n}")
    v = np.zeros(1)
    for ak in a:
        # every cell splits in two: left half gets +a_k, right half -a_k
        v = np.stack((v + ak, v - ak), axis=1).ravel()
    return v


def rademacher_sum(a) -> StepFn1D:
    """``sum_k a_k r_k`` as a step function."""
    v = rademacher_cells(a)
    return StepFn1D(np.arange(v.size + 1) / v.size, v)


def rademacher(k: int, n: int | None = None) -> StepFn1D:
    """The ``k``-th Rademacher function (``k >= 1``)."""
    if k < 1:
        raise ValueError("Rademacher functions are indexed from 1")
    a = np.zeros(k if n is None else max(n, k))
    a[k - 1] = 1.0
    return rademacher_sum(a)


def rademacher_head_integral(a, tau: float) -> float:
    """``int_0^tau (sum_k a_k r_k)^*`` computed from the equal-measure cells."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    v = np.sort(np.abs(rademacher_cells(a)))[::-1]
    h = 1.0 / v.size
    full = min(int(tau / h), v.size)
    rest = tau - full * h
    tail = v[full] * rest if full < v.size and rest > 0 else 0.0
    return math.fsum(v[:full]) * h + tail


def head_equivalence_sides(a, i: int) -> tuple[float, float]:
    """Both sides of the two-sided estimate for Rademacher head integrals.

    Returns ``(lhs, rhs)`` with ``lhs = int_0^{2^-i} (sum a_k r_k)^*`` and
    ``rhs = 2^-i (a*_1 + ... + a*_i + sqrt(i) (sum_{k>i} (a*_k)^2)^(1/2))``,
    where ``a*`` is the nonincreasing rearrangement of ``|a|``.  For
    ``i >= n`` both sides equal ``2^-i sum |a_k|``.
    """
    if i < 1:
        raise ValueError(f"dyadic level must be >= 1, got {i}")
    s = seq_rearrange(a)
    tau = 2.0 ** -i
    lhs = head_integral(rademacher_sum(s), tau)
    tail = math.sqrt(math.fsum(s[i:] ** 2))
    rhs = tau * (math.fsum(s[:i]) + math.sqrt(i) * tail)
    return lhs, rhs
