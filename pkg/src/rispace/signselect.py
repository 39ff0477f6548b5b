"""Constructive choice of signs with a certified head-integral lower bound.

Given ``g_1, ..., g_n`` in ``L^1`` and a dyadic level ``i``, :func:`select_signs`
finds ``eps_k = +-1`` such that

    int_0^{2^-i} (sum_k eps_k g_k)^*  >=  gamma' * 2^-i (a*_1 + ... + a*_i
                                           + sqrt(i) (sum_{k>i} (a*_k)^2)^(1/2))

with ``a_k = ||g_k||_1`` and ``gamma' = 1/(9 sqrt 2)``.  The construction:

1. sort the ``a_k``; split the indices into ``i`` groups, group ``l``
   holding the ``l``-th largest coefficient plus a consecutive run of the
   tail whose squared mass is at most ``sigma^2 / i``
   (:func:`group_indices`);
2. inside every group pick signs ``delta`` with
   ``||sum delta_k g_k||_1 >= (sum a_k^2)^(1/2) / sqrt 2``
   (:func:`khintchine_signs`);
3. combine the group sums ``y_l`` with signs ``eta'`` chosen by the
   pigeonhole argument over the ``2^i`` sign-agreement sets
   (:func:`select_eta`, :func:`pigeonhole_k0`) with ``d = 1/3``.

Where the constant comes from: with ``S`` the sum of the ``i`` largest
coefficients and ``sigma`` the tail l^2 mass, step 3 gives a head integral
of at least ``2^-i/(3 sqrt 2) sum_l (sum_{A_l} a_k^2)^(1/2)``.  If
``S >= sqrt(i) sigma / 2`` ("head" case) this is ``>= 2^-i S/(3 sqrt 2)``
while the right-hand side is ``<= 3 * 2^-i S``, a ratio of ``1/(9 sqrt 2)``.
Otherwise ("tail" case) every group carries squared mass
``>= 3 sigma^2/(4i)``, so the head integral is ``>= 2^-i sqrt(3i) sigma /
(6 sqrt 2)`` against a right-hand side ``< 1.5 * 2^-i sqrt(i) sigma``, a
ratio of ``sqrt(3)/(9 sqrt 2)``.  The minimum is ``1/(9 sqrt 2)``.  When
``i >= n`` ("short" case) the pigeonhole step is run on the ``g_k`` directly
at level ``n`` and concavity of the head integral carries the bound
``1/3`` down to level ``i``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .stepfn import StepFn1D, common_refinement, head_integral

__all__ = [
    "CertificationError",
    "GAMMA_PRIME",
    "SelectionCertificate",
    "SignSearchError",
    "dyadic_level",
    "group_indices",
    "khintchine_signs",
    "pigeonhole_k0",
    "select_eta",
    "select_signs",
    "signed_sum",
]

GAMMA_PRIME = 1.0 / (9.0 * math.sqrt(2.0))
KHINTCHINE = 1.0 / math.sqrt(2.0)
MAX_GROUPS = 20


class CertificationError(RuntimeError):
    """A bound guaranteed by construction failed; indicates a bug."""


class SignSearchError(RuntimeError):
    """The heuristic sign search found no certified sign vector."""


def _signs(x) -> np.ndarray:
    s = np.asarray(x, dtype=np.int8).ravel()
    if not np.all(np.abs(s) == 1):
        raise ValueError("sign vectors must contain only +1 and -1")
    return s


def signed_sum(fs: Sequence[StepFn1D], signs) -> StepFn1D:
    """``sum_k signs[k] * fs[k]``."""
    bp, V = common_refinement(fs)
    return StepFn1D(bp, _signs(signs).astype(float) @ V)


# -- pigeonhole ---------------------------------------------------------------


def pigeonhole_k0(e, c, d: float) -> tuple[int, str]:
    """Index ``k0`` (0-based) and branch of the pigeonhole alternative.

    For ``e_k, c_k >= 0`` with ``sum e_k = 1`` and ``sum c_k e_k = N`` (the
    length) and ``0 < d < 1/2``, some ``k0`` satisfies either

    * branch ``"a"``: ``c_k0 e_k0 > d`` and ``e_k0 < 1/N``, or
    * branch ``"b"``: ``c_k0 > d N`` and ``e_k0 >= 1/N``.

    The first such index is returned.
    """
    e = np.asarray(e, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    N = e.size
    if N == 0 or c.size != N:
        raise ValueError("e and c must be nonempty and of equal length")
    if not 0 < d < 0.5:
        raise ValueError(f"d must lie in (0, 1/2), got {d}")
    if np.any(e < 0) or np.any(c < 0):
        raise ValueError("e and c must be nonnegative")
    if abs(math.fsum(e) - 1.0) > 1e-12:
        raise ValueError(f"sum(e) must be 1, got {math.fsum(e)!r}")
    if abs(math.fsum(c * e) - N) > 1e-12 * N:
        raise ValueError(f"sum(c e) must equal N={N}, got {math.fsum(c * e)!r}")
    small = e < 1.0 / N
    hit_a = small & (c * e > d)
    hit_b = ~small & (c > d * N)
    hits = np.flatnonzero(hit_a | hit_b)
    if hits.size == 0:
        raise CertificationError("pigeonhole alternative failed; inputs inconsistent")
    k0 = int(hits[0])
    return k0, ("a" if hit_a[k0] else "b")


def select_eta(y: Sequence[StepFn1D], d: float = 1.0 / 3.0):
    """Signs ``eta'`` with ``d 2^-i sum ||y_l||_1 <= int_0^{2^-i} (sum eta'_l y_l)^*``.

    ``i = len(y)``.  The sets ``E_eta`` on which ``sign(y_l) = eta_l`` for
    all ``l`` (with ``sign 0 = +1``) are measured on the common refinement
    and fed to :func:`pigeonhole_k0` after normalizing
    ``sum_l ||y_l||_1 = 2^i``.  The result is flipped globally so that
    ``eta'_1 = +1``; a global flip leaves the head integral unchanged.

    Returns
    -------
    eta : ndarray of int8
    info : dict
        ``branch``, ``lhs``, ``rhs`` (the two sides above) and ``d``.
    """
    y = list(y)
    i = len(y)
    if not 1 <= i <= MAX_GROUPS:
        raise ValueError(f"need 1 <= len(y) <= {MAX_GROUPS}, got {i}")
    tau = 2.0 ** -i
    bp, Y = common_refinement(y)
    m = np.diff(bp)
    total = math.fsum((np.abs(Y) @ m).tolist())
    if total == 0.0:
        eta = np.ones(i, dtype=np.int8)
        return eta, {"branch": None, "lhs": 0.0, "rhs": 0.0, "d": d}

    # bit l of the code is set where y_l < 0
    codes = ((Y < 0).astype(np.int64) << np.arange(i)[:, None]).sum(axis=0)
    N = 1 << i
    e = np.bincount(codes, weights=m, minlength=N)
    mass = np.abs(Y).sum(axis=0) * m * (N / total)
    ce = np.bincount(codes, weights=mass, minlength=N)
    # renormalize away summation rounding before the exact-sum checks
    e = e / math.fsum(e.tolist())
    ce = ce * (N / math.fsum(ce.tolist()))
    c = np.divide(ce, e, out=np.zeros(N), where=e > 0)
    k0, branch = pigeonhole_k0(e, c, d)

    eta = np.where((k0 >> np.arange(i)) & 1, -1, 1).astype(np.int8)
    if eta[0] < 0:
        eta = -eta
    lhs = head_integral(StepFn1D(bp, eta.astype(float) @ Y), tau)
    rhs = d * tau * total
    if lhs < rhs:
        raise CertificationError(f"sign selection bound failed: {lhs!r} < {rhs!r}")
    return eta, {"branch": branch, "lhs": lhs, "rhs": rhs, "d": d}


# -- grouping -------------------------------------------------------------------


def group_indices(a, i: int) -> list[list[int]]:
    """Split ``0..n-1`` into ``i`` groups for nonincreasing positive ``a``.

    With ``sigma^2 = sum_{k >= i} a_k^2`` (0-based), group ``l`` holds index
    ``l`` plus the longest run after the previous group's run whose squared
    mass stays within ``sigma^2 / i``; the last group takes everything left.
    """
    a = np.asarray(a, dtype=float).ravel()
    n = a.size
    if not 1 <= i < n:
        raise ValueError(f"need 1 <= i < n, got i={i}, n={n}")
    if np.any(np.diff(a) > 0) or a[-1] <= 0:
        raise ValueError("coefficients must be positive and nonincreasing")
    sq = a ** 2
    bound = math.fsum(sq[i:].tolist()) / i
    groups = []
    start = i  # first tail index not yet assigned
    for l in range(i - 1):
        run, stop = 0.0, start
        while stop < n and run + sq[stop] <= bound:
            run += sq[stop]
            stop += 1
        groups.append([l] + list(range(start, stop)))
        start = stop
    groups.append([i - 1] + list(range(start, n)))
    return groups


# -- Khintchine-type signs -----------------------------------------------------


def _l1_of_patterns(P, M, m):
    """``int |sum_k P[r, k] M[k]|`` for every row of the sign matrix ``P``."""
    return np.abs(P @ M) @ m


def _patterns(g: int, start: int, stop: int) -> np.ndarray:
    """Sign patterns with first entry ``+1`` indexed ``start..stop-1``."""
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(g - 1)) & 1
    return np.concatenate((np.ones((codes.size, 1)), 1.0 - 2.0 * bits), axis=1)


def khintchine_signs(a, f: Sequence[StepFn1D], group=None, *,
                     exhaustive_limit: int = 20, seed: int = 0,
                     restarts: int = 64):
    """Signs ``delta`` on ``group`` with
    ``int |sum_{k in group} delta_k a_k f_k| >= (sum_{k in group} a_k^2)^(1/2) / sqrt 2``.

    ``f_k`` must have unit L^1 norm.  Groups up to ``exhaustive_limit``
    indices are searched exhaustively (the maximizer is returned); larger
    ones use seeded random restarts with greedy single-flip ascent.  The
    bound is checked before returning; a heuristic miss raises
    :class:`SignSearchError`.

    Returns
    -------
    delta : ndarray of int8, aligned with ``group``
    value : float
        The achieved ``L^1`` norm.
    """
    a = np.asarray(a, dtype=float).ravel()
    group = list(range(a.size)) if group is None else list(group)
    if not group:
        raise ValueError("empty group")
    fs = [f[k] for k in group]
    for k, fk in zip(group, fs):
        if abs(fk.l1() - 1.0) > 1e-12:
            raise ValueError(f"f[{k}] must have unit L1 norm, got {fk.l1()!r}")
    bp, F = common_refinement(fs)
    m = np.diff(bp)
    M = a[group][:, None] * F
    target = KHINTCHINE * math.sqrt(math.fsum((a[group] ** 2).tolist()))
    g = len(group)

    if g <= exhaustive_limit:
        best_val, best = -1.0, None
        total = 1 << (g - 1)
        step = max(1, (1 << 22) // max(1, M.shape[1] * g))
        for start in range(0, total, step):
            P = _patterns(g, start, min(total, start + step))
            vals = _l1_of_patterns(P, M, m)
            j = int(np.argmax(vals))
            if vals[j] > best_val:
                best_val, best = float(vals[j]), P[j]
        delta = best.astype(np.int8)
        if best_val < target * (1 - 1e-12):
            raise CertificationError(
                f"exhaustive search below the Khintchine bound: {best_val!r} < {target!r}")
        return delta, best_val

    rng = np.random.default_rng(seed)
    best_val, best = -1.0, None
    for _ in range(restarts):
        s = rng.choice([-1.0, 1.0], size=g)
        val = float(_l1_of_patterns(s[None, :], M, m)[0])
        improved = True
        while improved:
            flips = np.tile(s, (g, 1))
            flips[np.arange(g), np.arange(g)] *= -1
            vals = _l1_of_patterns(flips, M, m)
            j = int(np.argmax(vals))
            improved = vals[j] > val * (1 + 1e-15)
            if improved:
                s, val = flips[j], float(vals[j])
        if val > best_val:
            best_val, best = val, s
        if best_val >= target:
            break
    if best_val < target:
        raise SignSearchError(
            f"heuristic search below the Khintchine bound: {best_val!r} < {target!r}")
    if best[0] < 0:
        best = -best
    return best.astype(np.int8), best_val


# -- full selection ---------------------------------------------------------------


@dataclass
class SelectionCertificate:
    """Audit trail of one :func:`select_signs` run.

    Index sets refer to the caller's original ordering of ``g``.
    ``case`` is ``"head"``, ``"tail"`` or ``"short"`` (``i >= n``); ``branch``
    is the pigeonhole branch (``"a"``/``"b"``, ``None`` for all-zero input).
    ``gamma_emp = lhs / rhs_formula``.
    """

    i: int
    tau: float
    order: list
    groups: list
    delta: list
    eta: list
    branch: Optional[str]
    case: str
    lhs: float
    rhs_formula: float
    gamma_emp: float
    d: float
    eta_bound: float = 0.0
    khintchine: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def dyadic_level(tau: float) -> int:
    """Smallest ``i >= 1`` with ``2^-i <= tau``."""
    if not 0.0 < tau <= 1.0:
        raise ValueError(f"tau must lie in (0, 1], got {tau}")
    return max(1, math.ceil(-math.log2(tau) - 1e-12))


def select_signs(g: Sequence[StepFn1D], i: int, *, d: float = 1.0 / 3.0,
                 exhaustive_limit: int = 20, seed: int = 0):
    """Signs for ``g`` certified at the dyadic level ``tau = 2^-i``.

    Zero functions get sign ``+1`` and take no part in the construction.
    For a non-dyadic ``tau`` use ``i = dyadic_level(tau)``: the head
    integral of the signed sum only grows from ``2^-i`` up to ``tau``.

    Returns
    -------
    eps : ndarray of int8
    cert : SelectionCertificate

    Raises
    ------
    CertificationError
        If ``gamma_emp < 1/(9 sqrt 2)``; this cannot happen unless the
        implementation is wrong.
    """
    g = list(g)
    if i < 1:
        raise ValueError(f"dyadic level must be >= 1, got {i}")
    tau = 2.0 ** -i
    n_all = len(g)
    a_all = np.array([gk.l1() for gk in g])
    eps = np.ones(n_all, dtype=np.int8)
    live = [k for k in range(n_all) if a_all[k] > 0]
    # stable descending sort of the nonzero norms
    order = sorted(live, key=lambda k: -a_all[k])
    a = a_all[order]
    n = len(order)

    def finish(groups, delta, eta, info, case, khin):
        lhs = head_integral(signed_sum(g, eps), tau) if n else 0.0
        head = math.fsum(a[:i].tolist())
        sigma = math.sqrt(math.fsum((a[i:] ** 2).tolist()))
        rhs = tau * (head + math.sqrt(i) * sigma)
        gamma = lhs / rhs if rhs > 0 else 1.0
        cert = SelectionCertificate(
            i=i, tau=tau, order=order, groups=groups,
            delta=delta.tolist(), eta=eta.tolist(), branch=info["branch"],
            case=case, lhs=lhs, rhs_formula=rhs, gamma_emp=gamma, d=d,
            eta_bound=info["rhs"], khintchine=khin)
        if gamma < GAMMA_PRIME - 1e-12:
            raise CertificationError(
                f"certified ratio {gamma!r} below 1/(9 sqrt 2) at level {i}")
        return eps, cert

    ones = np.ones(n_all, dtype=np.int8)
    if n == 0:
        info = {"branch": None, "rhs": 0.0}
        return finish([], ones, np.ones(0, dtype=np.int8), info, "short", [])

    if i >= n:
        eta, info = select_eta([g[k] for k in order], d)
        eps[order] = eta
        return finish([[k] for k in order], ones, eta, info, "short", [])

    sorted_groups = group_indices(a, i)
    f = [g[k] / a_all[k] for k in order]
    delta = np.ones(n_all, dtype=np.int8)
    khin = []
    for grp in sorted_groups:
        dl, val = khintchine_signs(a, f, grp, exhaustive_limit=exhaustive_limit,
                                   seed=seed)
        for pos, s in zip(grp, dl):
            delta[order[pos]] = s
        khin.append(val)
    groups = [[order[pos] for pos in grp] for grp in sorted_groups]
    y = [signed_sum([g[k] for k in grp], delta[grp]) for grp in groups]
    eta, info = select_eta(y, d)
    for l, grp in enumerate(groups):
        eps[grp] = delta[grp] * eta[l]

    head = math.fsum(a[:i].tolist())
    sigma = math.sqrt(math.fsum((a[i:] ** 2).tolist()))
    case = "head" if head >= 0.5 * math.sqrt(i) * sigma else "tail"
    return finish(groups, delta, eta, info, case, khin)
