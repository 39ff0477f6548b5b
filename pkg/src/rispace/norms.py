"""Norms of rearrangement-invariant spaces evaluated on step functions.

Every function-space norm here depends on ``f`` only through its
decreasing rearrangement, so the work is done on "cells": a vector of
values and a vector of cell measures.  The private ``*_cells`` kernels
accept a batch ``(rows, cells)`` of value vectors sharing one measure
vector; :func:`rispace.harness.max_sign_norm` uses that to evaluate all
sign patterns of a family at once.

Spaces are described by :class:`SpaceSpec`, weights by :class:`WeightFn`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .stepfn import StepFn1D, seq_rearrange, sorted_cells

__all__ = [
    "SpaceSpec",
    "WeightFn",
    "fundamental_function",
    "lorentz_norm",
    "lp_norm",
    "luxemburg_norm",
    "marcinkiewicz_argmax",
    "marcinkiewicz_norm",
    "norm",
    "norm_cells",
    "seq_norm",
    "weak_seq_norm",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_GOLDEN_STEPS = 200
_BISECT_STEPS = 200
_CHUNK = 1024


@dataclass(frozen=True)
class WeightFn:
    """Catalog weight on ``[0, 1]``, vanishing at ``0``.

    ``kind`` is one of

    * ``"W_p"``: ``t -> (1 + ln(1/t))^(1-p)``, i.e. ``ln^(1-p)(e/t)``;
    * ``"phi_p"``: ``u -> (1 + ln(1/u))^(1/p-1)``;
    * ``"power"``: ``t -> t^beta``;
    * ``"identity"``: ``t -> t``.

    ``param`` is ``p`` (> 1) for the logarithmic weights and ``beta`` (> 0)
    for the power weight.
    """

    kind: str
    param: Optional[float] = None

    def __post_init__(self):
        if self.kind in ("W_p", "phi_p"):
            if self.param is None or not self.param > 1:
                raise ValueError(f"{self.kind} needs p > 1, got {self.param}")
        elif self.kind == "power":
            if self.param is None or not self.param > 0:
                raise ValueError(f"power weight needs beta > 0, got {self.param}")
        elif self.kind == "identity":
            object.__setattr__(self, "param", None)
        else:
            raise ValueError(f"unknown weight {self.kind!r}")
        if self.param is not None:
            object.__setattr__(self, "param", float(self.param))

    @classmethod
    def W(cls, p: float) -> "WeightFn":
        return cls("W_p", p)

    @classmethod
    def phi(cls, p: float) -> "WeightFn":
        return cls("phi_p", p)

    @classmethod
    def power(cls, beta: float) -> "WeightFn":
        return cls("power", beta)

    @classmethod
    def identity(cls) -> "WeightFn":
        return cls("identity")

    def from_log(self, L):
        """Weight at ``t = exp(-L)``, for ``L >= 0`` (``L = inf`` is ``t = 0``)."""
        L = np.asarray(L, dtype=float)
        with np.errstate(over="ignore", divide="ignore"):
            if self.kind == "W_p":
                return (1.0 + L) ** (1.0 - self.param)
            if self.kind == "phi_p":
                return (1.0 + L) ** (1.0 / self.param - 1.0)
            if self.kind == "power":
                return np.exp(-self.param * L)
            return np.exp(-L)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any((t < 0) | (t > 1)):
            raise ValueError("weights are defined on [0, 1]")
        if self.kind == "identity":
            out = t.copy()
        elif self.kind == "power":
            out = t ** self.param
        else:
            # the limit at 0 is taken analytically, never by evaluating log(0)
            pos = t > 0
            out = np.where(pos, self.from_log(-np.log(np.where(pos, t, 1.0))), 0.0)
        return out if out.ndim else float(out)

    def __str__(self):
        return self.kind if self.param is None else f"{self.kind}:{self.param:g}"

    def to_dict(self) -> dict:
        return {"id": self.kind, "param": self.param}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightFn":
        return cls(d["id"], d.get("param"))

    @classmethod
    def parse(cls, kind: str, param: Optional[str] = None) -> "WeightFn":
        kind = {"W": "W_p", "phi": "phi_p", "id": "identity"}.get(kind, kind)
        return cls(kind, None if param is None else float(param))


_TAGS = ("Lp", "Lorentz", "Marcinkiewicz", "OrliczExp", "SeqWeak")


@dataclass(frozen=True)
class SpaceSpec:
    """Tagged description of a norm.

    Use the named constructors rather than the raw fields::

        SpaceSpec.lp(2)                 # L^2 (or l^2 on sequences)
        SpaceSpec.xp(1.5)               # Lorentz space with weight W_p
        SpaceSpec.marcinkiewicz(WeightFn.phi(1.5))
        SpaceSpec.exp(2)                # Orlicz space Exp L^2
        SpaceSpec.seq_weak(3, "average")
    """

    tag: str
    p: Optional[float] = None
    weight: Optional[WeightFn] = None
    alpha: Optional[float] = None
    q: Optional[float] = None
    variant: Optional[str] = None

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown space tag {self.tag!r}")
        if self.tag == "Lp" and not (self.p is not None and self.p >= 1):
            raise ValueError(f"Lp needs p in [1, inf], got {self.p}")
        if self.tag == "Lorentz" and not (
                self.p is not None and self.p >= 1 and self.weight is not None):
            raise ValueError("Lorentz needs p >= 1 and a weight")
        if self.tag == "Marcinkiewicz" and self.weight is None:
            raise ValueError("Marcinkiewicz needs a weight")
        if self.tag == "OrliczExp" and not (self.alpha is not None and self.alpha > 0):
            raise ValueError(f"OrliczExp needs alpha > 0, got {self.alpha}")
        if self.tag == "SeqWeak":
            if not (self.q is not None and self.q > 1):
                raise ValueError(f"SeqWeak needs q > 1, got {self.q}")
            if self.variant not in ("sup", "average"):
                raise ValueError(f"variant must be 'sup' or 'average', got {self.variant!r}")

    @classmethod
    def lp(cls, p: float) -> "SpaceSpec":
        return cls("Lp", p=float(p))

    @classmethod
    def lorentz(cls, p: float, weight: WeightFn) -> "SpaceSpec":
        return cls("Lorentz", p=float(p), weight=weight)

    @classmethod
    def xp(cls, p: float) -> "SpaceSpec":
        return cls.lorentz(p, WeightFn.W(p))

    @classmethod
    def marcinkiewicz(cls, weight: WeightFn) -> "SpaceSpec":
        return cls("Marcinkiewicz", weight=weight)

    @classmethod
    def exp(cls, alpha: float) -> "SpaceSpec":
        return cls("OrliczExp", alpha=float(alpha))

    @classmethod
    def seq_weak(cls, q: float, variant: str = "sup") -> "SpaceSpec":
        return cls("SeqWeak", q=float(q), variant=variant)

    # -- compact string form ---------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "SpaceSpec":
        """Parse ``Lp:2``, ``Lp:inf``, ``Xp:1.5``, ``Lorentz:2:power:0.5``,
        ``M:phi_p:1.5``, ``ExpL:2`` or ``weak:3:average``."""
        head, *rest = text.strip().split(":")
        try:
            if head == "Lp" and len(rest) == 1:
                return cls.lp(float(rest[0]))
            if head == "Xp" and len(rest) == 1:
                return cls.xp(float(rest[0]))
            if head == "Lorentz" and len(rest) in (2, 3):
                return cls.lorentz(float(rest[0]), WeightFn.parse(*rest[1:]))
            if head == "M" and len(rest) in (1, 2):
                return cls.marcinkiewicz(WeightFn.parse(*rest))
            if head == "ExpL" and len(rest) == 1:
                return cls.exp(float(rest[0]))
            if head == "weak" and len(rest) in (1, 2):
                return cls.seq_weak(float(rest[0]), *rest[1:])
        except ValueError as exc:
            raise ValueError(f"bad space {text!r}: {exc}") from None
        raise ValueError(f"cannot parse space {text!r}")

    def __str__(self):
        if self.tag == "Lp":
            return f"Lp:{self.p:g}"
        if self.tag == "Lorentz":
            if self.weight == WeightFn.W(self.p):
                return f"Xp:{self.p:g}"
            return f"Lorentz:{self.p:g}:{self.weight}"
        if self.tag == "Marcinkiewicz":
            return f"M:{self.weight}"
        if self.tag == "OrliczExp":
            return f"ExpL:{self.alpha:g}"
        return f"weak:{self.q:g}:{self.variant}"

    def to_dict(self) -> dict:
        d = {"tag": self.tag}
        for key in ("p", "alpha", "q", "variant"):
            if getattr(self, key) is not None:
                d[key] = getattr(self, key)
        if self.weight is not None:
            d["weight"] = self.weight.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SpaceSpec":
        d = dict(d)
        if "weight" in d:
            d["weight"] = WeightFn.from_dict(d["weight"])
        return cls(**d)


# -- cell kernels ------------------------------------------------------------


def _as_batch(values):
    V = np.asarray(values, dtype=float)
    return (V[None, :], True) if V.ndim == 1 else (V, False)


def _breaks(ms: np.ndarray) -> np.ndarray:
    """Right endpoints of the sorted cells, clipped to ``[0, 1]``."""
    T = np.minimum(np.cumsum(ms, axis=-1), 1.0)
    T[..., -1] = 1.0
    return T


def _lp_cells(V, m, p):
    A = np.abs(V)
    if math.isinf(p):
        return A.max(axis=-1)
    if p == 1:
        return A @ m
    # scale out the max so large values cannot overflow A**p
    top = A.max(axis=-1)
    safe = np.where(top > 0, top, 1.0)
    return top * ((A / safe[:, None]) ** p @ m) ** (1.0 / p)


def _lorentz_cells(V, m, p, w):
    vs, ms = sorted_cells(V, m)
    T = _breaks(ms)
    wT = w(T)
    dW = np.diff(wT, axis=-1, prepend=0.0)
    top = vs[:, 0]
    safe = np.where(top > 0, top, 1.0)
    return top * np.sum((vs / safe[:, None]) ** p * dW, axis=-1) ** (1.0 / p)


def _marcinkiewicz_cells(V, m, w):
    """Return ``(sup, argmax)`` of ``(w(t)/t) int_0^t f^*`` per row."""
    vs, ms = sorted_cells(V, m)
    T_hi = _breaks(ms)
    T_lo = np.concatenate((np.zeros_like(T_hi[:, :1]), T_hi[:, :-1]), axis=1)
    H_hi = np.cumsum(vs * ms, axis=-1)
    H_lo = np.concatenate((np.zeros_like(H_hi[:, :1]), H_hi[:, :-1]), axis=1)
    live = T_hi > T_lo

    def g(t):
        # bounded average first, then the (possibly large) weight factor
        t = np.where(live, t, 1.0)
        avg = (H_lo + vs * (t - T_lo)) / t
        return np.where(live, w(t) * avg, -np.inf)

    end_val = g(T_hi)

    lo, hi = T_lo.copy(), T_hi.copy()
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    g1, g2 = g(x1), g(x2)
    for _ in range(_GOLDEN_STEPS):
        if np.max(hi - lo) <= 1e-15:
            break
        right = g1 < g2
        lo = np.where(right, x1, lo)
        hi = np.where(right, hi, x2)
        new1 = hi - _GOLDEN * (hi - lo)
        new2 = lo + _GOLDEN * (hi - lo)
        x1, x2 = np.where(right, x2, new1), np.where(right, new2, x1)
        g1, g2 = g(x1), g(x2)
    mid = 0.5 * (lo + hi)
    mid_val = g(mid)

    cand = np.concatenate((end_val, mid_val), axis=1)
    where = np.concatenate((T_hi, mid), axis=1)
    k = np.argmax(cand, axis=1)
    rows = np.arange(cand.shape[0])
    sup = cand[rows, k]
    arg = where[rows, k]
    zero = ~np.isfinite(sup) | (H_hi[:, -1] == 0)
    return np.where(zero, 0.0, sup), np.where(zero, 1.0, arg)


def _luxemburg_cells(V, m, alpha):
    A = np.abs(V)
    top = A.max(axis=-1)
    out = np.zeros(A.shape[0])
    nz = top > 0
    if not np.any(nz):
        return out
    A, top = A[nz], top[nz]
    m_top = np.where(A == top[:, None], m, 0.0).sum(axis=-1)
    lo = top / np.log1p(1.0 / m_top) ** (1.0 / alpha)
    hi = top / math.log(2.0) ** (1.0 / alpha)
    hi = np.broadcast_to(hi, lo.shape).copy()
    lo = np.minimum(lo, hi)

    def excess(lam):
        return np.expm1((A / lam[:, None]) ** alpha) @ m - 1.0

    for _ in range(_BISECT_STEPS):
        if np.all(hi - lo <= 1e-15 * hi):
            break
        mid = 0.5 * (lo + hi)
        above = excess(mid) > 0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    out[nz] = hi
    return out


def _chunked(kernel, V, m, *args):
    V, single = _as_batch(V)
    m = np.asarray(m, dtype=float)
    parts = [kernel(V[i:i + _CHUNK], m, *args) for i in range(0, V.shape[0], _CHUNK)]
    if isinstance(parts[0], tuple):
        res = tuple(np.concatenate(cols) for cols in zip(*parts))
        return tuple(r[0] for r in res) if single else res
    res = np.concatenate(parts)
    return float(res[0]) if single else res


def norm_cells(values, measures, space: SpaceSpec):
    """Norm of the step function(s) with the given cell values and measures.

    ``values`` may be 1-D (one function) or 2-D (one function per row).
    """
    if space.tag == "Lp":
        return _chunked(_lp_cells, values, measures, space.p)
    if space.tag == "Lorentz":
        return _chunked(_lorentz_cells, values, measures, space.p, space.weight)
    if space.tag == "Marcinkiewicz":
        res = _chunked(_marcinkiewicz_cells, values, measures, space.weight)
        return res[0]
    if space.tag == "OrliczExp":
        return _chunked(_luxemburg_cells, values, measures, space.alpha)
    raise ValueError(f"{space} is a sequence space, not a function space")


# -- public API ----------------------------------------------------------------


def norm(f: StepFn1D, space: SpaceSpec) -> float:
    """Norm of ``f`` in the function space described by ``space``."""
    return float(norm_cells(f.values, f.measures, space))


def lp_norm(f: StepFn1D, p: float) -> float:
    """Lebesgue norm; ``p = inf`` gives the sup of ``|f|``."""
    if p == 1:
        return f.l1()
    return float(_chunked(_lp_cells, f.values, f.measures, float(p)))


def lorentz_norm(f: StepFn1D, p: float, w: WeightFn) -> float:
    """``(int (f^*)^p dw)^(1/p)`` as an exact Stieltjes sum over cells of ``f^*``.

    With ``w = WeightFn.W(p)`` this is the norm of ``X_p``.  Only
    monotonicity of ``w`` is used; no concave majorant is taken.
    """
    return float(_chunked(_lorentz_cells, f.values, f.measures, float(p), w))


def marcinkiewicz_argmax(f: StepFn1D, phi: WeightFn) -> tuple[float, float]:
    """``(sup, t)`` for ``sup_t (phi(t)/t) int_0^t f^*``.

    Candidates are all breakpoints of ``f^*`` plus a golden-section
    maximizer inside every cell, where the head integral is affine.
    """
    sup, arg = _chunked(_marcinkiewicz_cells, f.values, f.measures, phi)
    return float(sup), float(arg)


def marcinkiewicz_norm(f: StepFn1D, phi: WeightFn) -> float:
    return marcinkiewicz_argmax(f, phi)[0]


def luxemburg_norm(f: StepFn1D, alpha: float) -> float:
    """Luxemburg norm for the Young function ``exp(u^alpha) - 1``.

    Bisection on the modular inside ``[|f|_inf / N^{-1}(1/m_top),
    |f|_inf (ln 2)^(-1/alpha)]``, where ``m_top`` is the measure of the set
    on which ``|f|`` attains its maximum.  The modular is ``>= 1`` at the
    left end and ``<= 1`` at the right end, so the root is enclosed.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return float(_chunked(_luxemburg_cells, f.values, f.measures, float(alpha)))


def weak_seq_norm(a, q: float, variant: str = "sup") -> float:
    """Weak-l^q functional of a finite sequence.

    ``"sup"``: ``max_k k^(1/q) a*_k``.
    ``"average"``: ``max_k k^(-1/q) (a*_1 + ... + a*_k)``; here ``q`` is the
    conjugate of the summing exponent, so for ``1 < p < 2`` and
    ``1/p + 1/q = 1`` this is the averaged form of the l^{p,inf} quasinorm.
    """
    if not q > 1:
        raise ValueError(f"q must exceed 1, got {q}")
    s = seq_rearrange(a)
    if s.size == 0:
        return 0.0
    k = np.arange(1, s.size + 1, dtype=float)
    if variant == "sup":
        return float(np.max(k ** (1.0 / q) * s))
    if variant == "average":
        return float(np.max(k ** (-1.0 / q) * np.cumsum(s)))
    raise ValueError(f"variant must be 'sup' or 'average', got {variant!r}")


def seq_norm(a, space: SpaceSpec) -> float:
    """Norm of a finite sequence: ``Lp`` means ``l^p``, ``SeqWeak`` weak-l^q."""
    a = np.asarray(a, dtype=float)
    if space.tag == "Lp":
        return float(np.linalg.norm(a, ord=space.p)) if a.size else 0.0
    if space.tag == "SeqWeak":
        return weak_seq_norm(a, space.q, space.variant)
    raise ValueError(f"{space} is not a sequence space")


def fundamental_function(space: SpaceSpec, t: float) -> float:
    """``||chi_[0, t)||`` in ``space``."""
    return norm(StepFn1D.indicator(0.0, t), space)
