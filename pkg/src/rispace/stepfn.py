"""Piecewise-constant functions on the unit interval.

A :class:`StepFn1D` is a finite partition ``0 = t_0 < t_1 < ... < t_N = 1``
together with one value per half-open cell ``[t_{i-1}, t_i)``.  Values at
breakpoints are irrelevant (measure zero), which is what makes structural
equality of canonical forms meaningful.

Everything here is exact up to double rounding of the breakpoints: the
distribution function, the decreasing rearrangement and the head integral
``tau -> int_0^tau f^*`` are all finite sums over cells.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "StepFn1D",
    "common_refinement",
    "distribution",
    "head_integral",
    "head_integrals",
    "rearrange",
    "seq_rearrange",
    "sorted_cells",
]

SCHEMA = "rispace/stepfn1d"
SCHEMA_VERSION = 1


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class StepFn1D:
    """Exact step function on ``[0, 1)`` in canonical form.

    Parameters
    ----------
    breakpoints : array_like
        Nondecreasing reals with ``breakpoints[0] == 0`` and
        ``breakpoints[-1] == 1``.  Repeated breakpoints (zero-measure
        cells) are dropped.
    values : array_like
        One finite value per cell, ``len(values) == len(breakpoints) - 1``.

    Adjacent cells carrying the same value are merged, so two step
    functions that agree almost everywhere compare equal.  Instances are
    immutable.
    """

    __slots__ = ("_bp", "_vals")

    def __init__(self, breakpoints, values):
        bp = np.array(breakpoints, dtype=float).ravel()
        v = np.array(values, dtype=float).ravel()
        if bp.size < 2 or v.size != bp.size - 1:
            raise ValueError(
                f"need len(breakpoints) == len(values) + 1 >= 2, "
                f"got {bp.size} and {v.size}")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        widths = np.diff(bp)
        if np.any(widths < 0) or not np.all(np.isfinite(bp)):
            raise ValueError("breakpoints must be nondecreasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v = v + 0.0  # -0.0 -> 0.0

        keep = widths > 0
        v = v[keep]
        bp = np.concatenate(([0.0], bp[1:][keep]))
        if v.size > 1:
            change = v[1:] != v[:-1]
            bp = np.concatenate(([0.0], bp[1:-1][change], [1.0]))
            v = v[np.concatenate(([True], change))]
        self._bp = _frozen(bp)
        self._vals = _frozen(v)

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, c: float = 1.0) -> "StepFn1D":
        return cls([0.0, 1.0], [c])

    @classmethod
    def zero(cls) -> "StepFn1D":
        return cls.constant(0.0)

    @classmethod
    def indicator(cls, a: float, b: float, value: float = 1.0) -> "StepFn1D":
        """``value * chi_[a, b)`` for ``0 <= a <= b <= 1``."""
        if not 0.0 <= a <= b <= 1.0:
            raise ValueError(f"need 0 <= a <= b <= 1, got a={a}, b={b}")
        return cls([0.0, a, b, 1.0], [0.0, value, 0.0])

    @classmethod
    def uniform(cls, values: Sequence[float]) -> "StepFn1D":
        """Values on the ``len(values)`` cells of equal length."""
        n = len(values)
        return cls(np.arange(n + 1) / n, values)

    # -- accessors --------------------------------------------------------

    @property
    def breakpoints(self) -> np.ndarray:
        return self._bp

    @property
    def values(self) -> np.ndarray:
        return self._vals

    @property
    def measures(self) -> np.ndarray:
        return np.diff(self._bp)

    @property
    def n_cells(self) -> int:
        return self._vals.size

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self._vals)))

    def is_zero(self) -> bool:
        return bool(np.all(self._vals == 0.0))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t >= 1)):
            raise ValueError("evaluation points must lie in [0, 1)")
        idx = np.searchsorted(self._bp, t, side="right") - 1
        return self._vals[idx]

    def on(self, breakpoints: np.ndarray) -> np.ndarray:
        """Cell values on a refinement given by ``breakpoints``."""
        idx = np.searchsorted(self._bp, breakpoints[:-1], side="right") - 1
        return self._vals[idx]

    # -- arithmetic -------------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, StepFn1D):
            bp = np.union1d(self._bp, other._bp)
            return StepFn1D(bp, op(self.on(bp), other.on(bp)))
        return StepFn1D(self._bp, op(self._vals, float(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return StepFn1D(self._bp, self._vals / float(c))

    def __neg__(self):
        return StepFn1D(self._bp, -self._vals)

    def __abs__(self):
        return StepFn1D(self._bp, np.abs(self._vals))

    def l1(self) -> float:
        """``int_0^1 |f|``, summed with compensation."""
        return math.fsum(np.abs(self._vals) * self.measures)

    # -- comparison / repr ------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, StepFn1D):
            return NotImplemented
        return (np.array_equal(self._bp, other._bp)
                and np.array_equal(self._vals, other._vals))

    def __hash__(self):
        return hash((self._bp.tobytes(), self._vals.tobytes()))

    def __repr__(self):
        if self.n_cells <= 6:
            return (f"StepFn1D(breakpoints={self._bp.tolist()}, "
                    f"values={self._vals.tolist()})")
        return f"StepFn1D(<{self.n_cells} cells>)"

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "version": SCHEMA_VERSION,
                "breakpoints": self._bp.tolist(),
                "values": self._vals.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "StepFn1D":
        if d.get("schema", SCHEMA) != SCHEMA:
            raise ValueError(f"not a step function record: {d.get('schema')!r}")
        if d.get("version", SCHEMA_VERSION) > SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {d['version']}")
        return cls(d["breakpoints"], d["values"])


def common_refinement(fs: Iterable[StepFn1D]) -> tuple[np.ndarray, np.ndarray]:
    """Merge partitions of several step functions.

    Returns
    -------
    breakpoints : ndarray, shape (N + 1,)
    values : ndarray, shape (len(fs), N)
        Row ``k`` holds the values of ``fs[k]`` on the common cells.
    """
    fs = list(fs)
    if not fs:
        return np.array([0.0, 1.0]), np.zeros((0, 1))
    bp = fs[0].breakpoints
    for f in fs[1:]:
        bp = np.union1d(bp, f.breakpoints)
    return bp, np.stack([f.on(bp) for f in fs])


def sorted_cells(values: np.ndarray, measures: np.ndarray):
    """Cells sorted by ``|value|`` descending (stable), along the last axis.

    Works on a single row or on a batch ``(rows, cells)`` sharing one
    vector of measures.  Returns ``(abs_values, measures)`` in sorted
    order.
    """
    a = np.abs(values)
    order = np.argsort(-a, axis=-1, kind="stable")
    return np.take_along_axis(a, order, axis=-1), np.asarray(measures)[order]


def rearrange(f: StepFn1D) -> StepFn1D:
    """Decreasing rearrangement ``f^*`` as a step function on ``[0, 1)``."""
    if np.all(f.values >= 0) and np.all(np.diff(f.values) < 0):
        return f  # already its own rearrangement; keeps f** == f* bit for bit
    v, m = sorted_cells(f.values, f.measures)
    bp = np.concatenate(([0.0], np.cumsum(m)))
    # rounding may push interior partial sums past 1
    np.minimum(bp, 1.0, out=bp)
    bp[-1] = 1.0
    return StepFn1D(bp, v)


def distribution(f: StepFn1D, level: float) -> float:
    """Measure of ``{t : |f(t)| > level}``."""
    if level < 0:
        raise ValueError(f"level must be nonnegative, got {level}")
    mask = np.abs(f.values) > level
    return math.fsum(f.measures[mask])


def head_integrals(f: StepFn1D, taus) -> np.ndarray:
    """Vectorized :func:`head_integral`; the map is piecewise linear."""
    taus = np.asarray(taus, dtype=float)
    if np.any((taus <= 0) | (taus > 1)):
        raise ValueError("tau must lie in (0, 1]")
    fs = rearrange(f)
    cum = np.concatenate(([0.0], np.cumsum(fs.values * fs.measures)))
    return np.interp(taus, fs.breakpoints, cum)


def head_integral(f: StepFn1D, tau: float) -> float:
    """``int_0^tau f^*(t) dt`` for ``0 < tau <= 1``.

    This is the K-functional of ``f`` for the couple ``(L^1, L^inf)``.
    """
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    fs = rearrange(f)
    bp, v = fs.breakpoints, fs.values
    j = int(np.searchsorted(bp, tau, side="right")) - 1
    j = min(j, v.size)
    full = v[:j] * np.diff(bp[: j + 1])
    partial = v[j] * (tau - bp[j]) if j < v.size else 0.0
    return math.fsum(np.append(full, partial))


def seq_rearrange(a) -> np.ndarray:
    """Absolute values of a finite sequence sorted nonincreasingly."""
    a = np.abs(np.asarray(a, dtype=float).ravel())
    if not np.all(np.isfinite(a)):
        raise ValueError("sequence entries must be finite")
    return np.sort(a)[::-1].copy()
