"""Step functions on the unit square, mixed norms and the transposition map.

A :class:`StepFn2D` is a finite family of pairwise disjoint half-open
rectangles ``[s0, s1) x [t0, t1)`` carrying values; the rest of the square
carries ``0``.  Mixed norms ``X(Y)`` take the ``Y``-norm in ``s`` of every
section ``F(., t)`` and then the ``X``-norm in ``t`` of the result.

The second half of the module builds the family of kernels showing that
transposition does not map ``L^inf(X_p)`` boundedly into ``L^1(X_p)``,
both as explicit rectangles (small cases, used as an oracle) and
analytically in log-domain (any level up to ``n = 24``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .norms import SpaceSpec, WeightFn, norm
from .stepfn import StepFn1D

__all__ = [
    "CounterexampleAnalytic",
    "CounterexampleParams",
    "MATERIALIZE_CAP",
    "StepFn2D",
    "build_counterexample",
    "mixed_norm",
    "section_norms",
    "transpose",
    "transpose_lower_bound",
]

SCHEMA = "rispace/stepfn2d"
SCHEMA_VERSION = 1
MATERIALIZE_CAP = 10 ** 6


class StepFn2D:
    """Piecewise-constant function on ``[0, 1)^2`` over disjoint rectangles.

    Parameters
    ----------
    rects : array_like, shape (R, 5)
        Rows ``(s0, s1, t0, t1, value)``.  Zero-valued rows are dropped;
        uncovered area carries the value ``0``.  Overlaps are detected when
        sections are formed.
    """

    def __init__(self, rects):
        r = np.array(rects, dtype=float).reshape(-1, 5)
        s0, s1, t0, t1, v = r.T
        if np.any((s0 < 0) | (s1 > 1) | (t0 < 0) | (t1 > 1)):
            raise ValueError("rectangles must lie in the unit square")
        if np.any((s1 <= s0) | (t1 <= t0)):
            raise ValueError("rectangles must have positive side lengths")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        area = math.fsum(((s1 - s0) * (t1 - t0)).tolist())
        if area > 1.0 + 1e-12:
            raise ValueError(f"rectangles cover area {area} > 1; they overlap")
        r = r[v != 0]
        r.setflags(write=False)
        self._rects = r

    @classmethod
    def from_grid(cls, s_breakpoints, t_breakpoints, values) -> "StepFn2D":
        """Tensor grid; ``values[i, j]`` lives on s-cell ``i`` and t-cell ``j``."""
        s = np.asarray(s_breakpoints, dtype=float)
        t = np.asarray(t_breakpoints, dtype=float)
        V = np.asarray(values, dtype=float)
        if V.shape != (s.size - 1, t.size - 1):
            raise ValueError(f"values must have shape {(s.size - 1, t.size - 1)}")
        for bp in (s, t):
            if bp[0] != 0 or bp[-1] != 1 or np.any(np.diff(bp) <= 0):
                raise ValueError("grid breakpoints must increase from 0 to 1")
        I, J = np.meshgrid(np.arange(s.size - 1), np.arange(t.size - 1), indexing="ij")
        I, J = I.ravel(), J.ravel()
        return cls(np.stack([s[I], s[I + 1], t[J], t[J + 1], V[I, J]], axis=1))

    @classmethod
    def separable(cls, g: StepFn1D, h: StepFn1D | None = None) -> "StepFn2D":
        """``g(s) h(t)``; ``h`` defaults to ``1``."""
        h = StepFn1D.constant() if h is None else h
        return cls.from_grid(g.breakpoints, h.breakpoints,
                             np.outer(g.values, h.values))

    @property
    def rects(self) -> np.ndarray:
        return self._rects

    def transpose(self) -> "StepFn2D":
        return StepFn2D(self._rects[:, [2, 3, 0, 1, 4]])

    def __eq__(self, other):
        if not isinstance(other, StepFn2D):
            return NotImplemented
        key = lambda r: r[np.lexsort(r.T[::-1])]
        return (self._rects.shape == other._rects.shape
                and np.array_equal(key(self._rects), key(other._rects)))

    def __repr__(self):
        return f"StepFn2D(<{len(self._rects)} nonzero rectangles>)"

    @cached_property
    def _sections(self):
        r = self._rects
        t_edges = np.union1d([0.0, 1.0], r[:, 2:4].ravel())
        ncell = t_edges.size - 1
        if r.shape[0] == 0:
            return t_edges, [StepFn1D.zero()] * ncell
        j0 = np.searchsorted(t_edges, r[:, 2])
        j1 = np.searchsorted(t_edges, r[:, 3])
        reps = j1 - j0
        owner = np.repeat(np.arange(r.shape[0]), reps)
        # cell index for each (rectangle, covered t-cell) pair
        offs = np.arange(owner.size) - np.repeat(np.cumsum(reps) - reps, reps)
        cell = j0[owner] + offs
        order = np.lexsort((r[owner, 0], cell))
        cell, owner = cell[order], owner[order]
        s0, s1, v = r[owner, 0], r[owner, 1], r[owner, 4]
        same = cell[1:] == cell[:-1]
        if np.any(same & (s1[:-1] > s0[1:])):
            raise ValueError("rectangles overlap")
        starts = np.searchsorted(cell, np.arange(ncell))
        stops = np.searchsorted(cell, np.arange(ncell), side="right")
        sections = []
        for a, b in zip(starts, stops):
            if a == b:
                sections.append(StepFn1D.zero())
                continue
            # interleave zero gaps between the sorted s-intervals
            bp = np.empty(2 * (b - a) + 2)
            bp[0], bp[-1] = 0.0, 1.0
            bp[1:-1:2], bp[2:-1:2] = s0[a:b], s1[a:b]
            vals = np.zeros(2 * (b - a) + 1)
            vals[1::2] = v[a:b]
            sections.append(StepFn1D(bp, vals))
        return t_edges, sections

    def sections(self) -> tuple[np.ndarray, list]:
        """``(t_breakpoints, [F(., t) on each t-cell])``."""
        return self._sections

    def __call__(self, s: float, t: float) -> float:
        t_edges, secs = self.sections()
        j = int(np.searchsorted(t_edges, t, side="right")) - 1
        return float(secs[j](s))

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "version": SCHEMA_VERSION,
                "rectangles": self._rects.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StepFn2D":
        if d.get("schema", SCHEMA) != SCHEMA:
            raise ValueError(f"not a 2-D step function record: {d.get('schema')!r}")
        if "rectangles" in d:
            return cls(d["rectangles"])
        return cls.from_grid(d["s_breakpoints"], d["t_breakpoints"], d["values"])


def transpose(F: StepFn2D) -> StepFn2D:
    """``(TF)(s, t) = F(t, s)``."""
    return F.transpose()


def section_norms(F: StepFn2D, inner: SpaceSpec) -> StepFn1D:
    """``t -> ||F(., t)||_inner`` as a step function in ``t``."""
    t_edges, secs = F.sections()
    return StepFn1D(t_edges, [norm(sec, inner) for sec in secs])


def mixed_norm(F: StepFn2D, outer: SpaceSpec, inner: SpaceSpec) -> float:
    """``|| ||F(s, t)||_{inner(s)} ||_{outer(t)}``."""
    return norm(section_norms(F, inner), outer)


# -- the transposition counterexample -------------------------------------------


@dataclass(frozen=True)
class CounterexampleParams:
    """Level ``n`` and exponent ``1 < p < 2``; ``theta = p - 1``.

    ``a_m = exp(1 - m^(1/theta))`` and ``1/b_m = ceil(1/a_m)`` for
    ``m = 1..2^n`` are kept as logarithms; ``b_m`` underflows long before
    ``n`` gets interesting.
    """

    n: int
    p: float

    def __post_init__(self):
        if not 1 < self.p < 2:
            raise ValueError(f"need 1 < p < 2, got {self.p}")
        if not 0 <= self.n <= 24:
            raise ValueError(f"need 0 <= n <= 24, got {self.n}")

    @property
    def theta(self) -> float:
        return self.p - 1.0

    @cached_property
    def m(self) -> np.ndarray:
        return np.arange(1, 2 ** self.n + 1, dtype=float)

    @cached_property
    def log_inv_a(self) -> np.ndarray:
        """``-log a_m = m^(1/theta) - 1``."""
        return self.m ** (1.0 / self.theta) - 1.0

    @cached_property
    def log_a(self) -> np.ndarray:
        return -self.log_inv_a

    @cached_property
    def log_b(self) -> np.ndarray:
        """``log b_m = -log ceil(e^L)``, with ``L = -log a_m``.

        Written as ``-L - log1p((ceil(x) - x)/x)`` so that ``b_m <= a_m``
        holds exactly in floating point; the correction is below one ulp
        once ``x = e^L`` exceeds ``2^52``.
        """
        L = self.log_inv_a
        out = -L.copy()
        small = L < 52 * math.log(2)
        x = np.exp(L[small])
        out[small] -= np.log1p((np.ceil(x) - x) / x)
        return out

    def inv_b(self, m: int) -> int | None:
        """``1/b_m`` as an exact integer, ``None`` if astronomically large."""
        L = float(self.log_inv_a[m - 1])
        return math.ceil(math.exp(L)) if L < 700 else None

    def rectangle_count(self) -> float:
        """``sum_m 1/b_m`` (``inf`` when it cannot be represented)."""
        total = 0
        for m in range(1, 2 ** self.n + 1):
            k = self.inv_b(m)
            if k is None:
                return math.inf
            total += k
        return total

    @cached_property
    def weight(self) -> WeightFn:
        return WeightFn.W(self.p)

    @cached_property
    def W_a(self) -> np.ndarray:
        """``W(a_m) = (m^(1/theta))^(1-p) = m^((1-p)/theta)``, from logs."""
        return np.exp((1.0 - self.p) / self.theta * np.log(self.m))

    @cached_property
    def W_b(self) -> np.ndarray:
        return self.weight.from_log(-self.log_b)


class CounterexampleAnalytic:
    """Closed-form handle on the kernel and its transpose.

    For ``t`` in the ``m``-th block of the t-axis the section ``K(., t)`` is
    ``W(a_m)^(-1/p)`` on one interval of length ``b_m``.  Every section of
    the transpose carries, for each ``m``, the value ``W(a_m)^(-1/p)`` on a
    set of measure ``2^-n b_m``; its distribution does not depend on ``t``.
    """

    def __init__(self, params: CounterexampleParams):
        self.params = params

    def row_norms(self) -> np.ndarray:
        """``||K(., t)||_{X_p}`` on the ``m``-th block, ``m = 1..2^n``."""
        P = self.params
        return (P.W_b / P.W_a) ** (1.0 / P.p)

    def sup_norm(self) -> float:
        """``||K||_{L^inf(X_p)}``."""
        return float(np.max(self.row_norms()))

    def column_distribution(self) -> tuple[np.ndarray, np.ndarray]:
        """``(values, log measures)`` of one section of the transpose."""
        P = self.params
        return P.W_a ** (-1.0 / P.p), P.log_b - P.n * math.log(2.0)

    def column_norm_p(self) -> float:
        """``||TK(., t)||_{X_p}^p`` as a Stieltjes sum, accumulated in log-domain.

        Values increase with ``m``, so the decreasing rearrangement visits
        ``m = 2^n, ..., 1`` and the left end of block ``m`` sits at
        ``T_m = 2^-n sum_{j > m} b_j``.
        """
        P = self.params
        vals, log_mu = self.column_distribution()
        # log of sum_{j >= m} mu_j, for every m
        log_T = np.logaddexp.accumulate(log_mu[::-1])[::-1]
        W_T = P.weight.from_log(np.maximum(-log_T, 0.0))
        W_next = np.append(W_T[1:], 0.0)
        return math.fsum((vals ** P.p * (W_T - W_next)).tolist())

    def column_norm(self) -> float:
        """``||TK||_{L^1(X_p)}``, the common norm of all sections."""
        return self.column_norm_p() ** (1.0 / self.params.p)


def _materialize(P: CounterexampleParams) -> StepFn2D:
    count = P.rectangle_count()
    if count > MATERIALIZE_CAP:
        raise ValueError(
            f"materialized kernel needs {count:.3g} rectangles "
            f"(cap {MATERIALIZE_CAP}); use mode='analytic'")
    W = P.weight
    scale = 2.0 ** -P.n
    rows = []
    for m in range(1, 2 ** P.n + 1):
        k = P.inv_b(m)
        a_m = math.exp(1.0 - m ** (1.0 / P.theta))
        value = W(a_m) ** (-1.0 / P.p)
        grid = np.arange(k + 1) / k
        t_edges = (m - 1 + grid) * scale
        t_edges[-1] = m * scale
        block = np.empty((k, 5))
        block[:, 0], block[:, 1] = grid[:-1], grid[1:]
        block[:, 2], block[:, 3] = t_edges[:-1], t_edges[1:]
        block[:, 4] = value
        rows.append(block)
    return StepFn2D(np.concatenate(rows))


def build_counterexample(params: CounterexampleParams, mode: str = "analytic"):
    """The kernel ``K_n`` as rectangles (``"materialized"``) or a closed-form
    handle (``"analytic"``)."""
    if mode == "analytic":
        return CounterexampleAnalytic(params)
    if mode == "materialized":
        return _materialize(params)
    raise ValueError(f"mode must be 'analytic' or 'materialized', got {mode!r}")


def transpose_lower_bound(params: CounterexampleParams) -> tuple[float, float]:
    """``(||TK(., t)||_{X_p}^p, sum_{m=2}^{2^n} ((n+1) ln 2 + m^(1/theta))^(-theta))``.

    The second number is an explicit lower bound for the first that grows
    like ``n`` up to lower-order terms.
    """
    P = params
    exact = CounterexampleAnalytic(P).column_norm_p()
    m = P.m[1:]
    bound = math.fsum((((P.n + 1) * math.log(2.0) + m ** (1.0 / P.theta))
                       ** (-P.theta)).tolist())
    if exact < bound * (1 - 1e-12):
        raise ArithmeticError(f"column norm {exact!r} below its lower bound {bound!r}")
    return exact, bound
