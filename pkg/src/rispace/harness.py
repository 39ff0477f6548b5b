"""Summing-ratio experiments and randomized inequality suites.

For ``p = 1`` the supremum over the dual unit ball of
``sum_i |<x*, x_i>|`` equals ``max_eps ||sum_i eps_i x_i||`` in any real
Banach space (choose ``x*`` norming the best signed sum; conversely every
``x*`` is dominated by the signed sum with ``eps_i = sign <x*, x_i>``).
That maximum is the denominator of every summing ratio below and is
computed by :func:`max_sign_norm`.

Suites are deterministic: trial ``t`` of a run with seed ``s`` draws from
``numpy.random.default_rng([s, t])`` regardless of how trials are
scheduled.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .mixed2d import StepFn2D, mixed_norm
from .norms import SpaceSpec, WeightFn, lp_norm, marcinkiewicz_argmax, norm, norm_cells, seq_norm, weak_seq_norm
from .rademacher import head_equivalence_sides, rademacher_sum
from .signselect import (GAMMA_PRIME, dyadic_level, khintchine_signs, select_signs,
                         signed_sum)
from .stepfn import StepFn1D, common_refinement, head_integral

__all__ = [
    "ExperimentReport",
    "SUITES",
    "SignMax",
    "disjoint_indicator_family",
    "disjoint_indicators",
    "marcinkiewicz_summing_check",
    "max_sign_norm",
    "random_family",
    "random_stepfn",
    "run_suite",
    "summing_ratio",
    "weak_concavity_check",
    "weak_lp_summing_check",
]

REPORT_SCHEMA_VERSION = 1
_BATCH_ELEMENTS = 1 << 20


# -- random generation ----------------------------------------------------------


def random_stepfn(rng: np.random.Generator, max_cells: int = 32,
                  nonneg: bool = False) -> StepFn1D:
    """Cell count uniform in ``[1, max_cells]``, breakpoints and values uniform."""
    c = int(rng.integers(1, max_cells + 1))
    bp = np.sort(rng.random(c - 1))
    v = rng.uniform(0.0 if nonneg else -1.0, 1.0, size=c)
    return StepFn1D(np.concatenate(([0.0], bp, [1.0])), v)


def random_family(rng: np.random.Generator, n: int, max_cells: int = 32,
                  nonneg: bool = False) -> list[StepFn1D]:
    return [random_stepfn(rng, max_cells, nonneg) for _ in range(n)]


def _digest(fs) -> str:
    h = hashlib.sha256()
    for f in fs:
        h.update(f.breakpoints.tobytes())
        h.update(f.values.tobytes())
    return h.hexdigest()[:16]


# -- signed-sum maximization ----------------------------------------------------


class SignMax(NamedTuple):
    value: float
    signs: np.ndarray
    exhaustive: bool  # False: value is only a lower bound for the max


def _pattern_block(n: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 1)) & 1
    return np.concatenate((np.ones((codes.size, 1)), 1.0 - 2.0 * bits), axis=1)


def max_sign_norm(f: Sequence[StepFn1D], space: SpaceSpec, *,
                  exhaustive_limit: int = 20, seed: int = 0,
                  restarts: int = 64) -> SignMax:
    """``max_{eps = +-1} ||sum eps_i f_i||`` in ``space``.

    All ``2^(n-1)`` patterns with ``eps_1 = +1`` are scanned when
    ``n <= exhaustive_limit`` (a global flip does not change any
    rearrangement-invariant norm).  Families with pairwise disjoint
    supports are answered directly: every pattern gives ``||sum |f_i| ||``.
    Otherwise seeded restarts with greedy single flips give a lower bound,
    flagged by ``exhaustive=False``.
    """
    f = list(f)
    n = len(f)
    if n == 0:
        return SignMax(0.0, np.ones(0, dtype=np.int8), True)
    bp, V = common_refinement(f)
    m = np.diff(bp)

    if np.all((V != 0).sum(axis=0) <= 1):
        ones = np.ones(n, dtype=np.int8)
        return SignMax(float(norm_cells(V.sum(axis=0), m, space)), ones, True)

    if n <= exhaustive_limit:
        total = 1 << (n - 1)
        step = max(1, _BATCH_ELEMENTS // V.shape[1])
        best, best_s = -1.0, None
        for start in range(0, total, step):
            P = _pattern_block(n, start, min(total, start + step))
            vals = norm_cells(P @ V, m, space)
            j = int(np.argmax(vals))
            if vals[j] > best:
                best, best_s = float(vals[j]), P[j]
        return SignMax(best, best_s.astype(np.int8), True)

    rng = np.random.default_rng(seed)
    best, best_s = -1.0, None
    for _ in range(restarts):
        s = rng.choice([-1.0, 1.0], size=n)
        val = float(norm_cells(s @ V, m, space))
        while True:
            flips = np.tile(s, (n, 1))
            flips[np.arange(n), np.arange(n)] *= -1
            vals = norm_cells(flips @ V, m, space)
            j = int(np.argmax(vals))
            if not vals[j] > val * (1 + 1e-15):
                break
            s, val = flips[j], float(vals[j])
        if val > best:
            best, best_s = val, s
    if best_s[0] < 0:
        best_s = -best_s
    return SignMax(best, best_s.astype(np.int8), False)


def summing_ratio(f: Sequence[StepFn1D], seq: SpaceSpec, target: SpaceSpec,
                  domain: SpaceSpec, **kwargs) -> float:
    """``||(||f_i||_target)_i||_seq / max_eps ||sum eps_i f_i||_domain``."""
    num = seq_norm([norm(fi, target) for fi in f], seq)
    den = max_sign_norm(f, domain, **kwargs).value
    if den == 0.0:
        raise ValueError("summing ratio undefined for an all-zero family")
    return num / den


def disjoint_indicators(k: int) -> list[StepFn1D]:
    """``chi_[(i-1)/k, i/k)`` for ``i = 1..k``."""
    edges = np.arange(k + 1) / k
    return [StepFn1D.indicator(edges[i], edges[i + 1]) for i in range(k)]


def disjoint_indicator_family(k: int, p: float, q: float) -> float:
    """Summing ratio of ``X_p -> L^q`` against ``l^p`` on ``k`` disjoint indicators.

    Every signed sum has modulus ``1``, so the denominator is ``1`` and the
    ratio is ``(sum_i ||f_i||_q^p)^(1/p) = k^(1/p - 1/q)``, unbounded in
    ``k`` when ``q > p``.
    """
    if k < 1 or not 1 < p < q:
        raise ValueError("need k >= 1 and 1 < p < q")
    return summing_ratio(disjoint_indicators(k), SpaceSpec.lp(p),
                         SpaceSpec.lp(q), SpaceSpec.xp(p))


# -- inequality checks ----------------------------------------------------------


def marcinkiewicz_summing_check(f: Sequence[StepFn1D], phi: WeightFn, **kwargs) -> dict:
    """Rademacher sum of the L^1 norms against the best signed sum in ``M_phi``.

    ``lhs = ||sum_k ||f_k||_1 r_k||_{M_phi}``, ``rhs = max_eps ||sum eps_k
    f_k||_{M_phi}``.  The check also runs :func:`select_signs` at the dyadic
    level just below the point ``t0`` where ``lhs`` is attained, measures
    ``gamma = int_0^{2^-i} (sum eps f)^* / int_0^{2^-i} (sum ||f_k|| r_k)^*``
    and verifies ``lhs <= (2 / gamma) ||sum eps_k f_k||_{M_phi}``.  That
    inequality holds whenever ``phi`` is nondecreasing with ``phi(t)/t``
    nonincreasing, which covers every catalog weight.
    """
    f = list(f)
    a = np.array([fk.l1() for fk in f])
    space = SpaceSpec.marcinkiewicz(phi)
    lhs, t0 = marcinkiewicz_argmax(rademacher_sum(a), phi)
    rhs = max_sign_norm(f, space, **kwargs).value
    out = {"lhs": lhs, "rhs": rhs, "c_emp": lhs / rhs if rhs > 0 else 0.0}
    if lhs == 0.0:
        out.update(level=None, gamma=None, bound=0.0, certified=True)
        return out
    i = dyadic_level(t0)
    eps, cert = select_signs(f, i)
    tau = 2.0 ** -i
    g = signed_sum(f, eps)
    gamma = head_integral(g, tau) / head_integral(rademacher_sum(a), tau)
    bound = 2.0 / gamma * norm(g, space)
    out.update(level=i, gamma=gamma, gamma_formula=cert.gamma_emp, bound=bound,
               certified=bool(lhs <= bound * (1 + 1e-9)))
    return out


def weak_lp_summing_check(f: Sequence[StepFn1D], p: float, **kwargs) -> tuple[float, float, float]:
    """Averaged weak-l^p functional of the L^1 norms against ``Exp L^q``.

    ``q = p/(p-1)``; ``lhs = max_k k^(-1/q) sum_{i<=k} (||f||_1)^*_i`` and
    ``rhs = max_eps ||sum eps_k f_k||_{Exp L^q}``.
    """
    q = p / (p - 1.0)
    lhs = weak_seq_norm([fk.l1() for fk in f], q, "average")
    rhs = max_sign_norm(f, SpaceSpec.exp(q), **kwargs).value
    return lhs, rhs, (lhs / rhs if rhs > 0 else 0.0)


def weak_concavity_check(f: Sequence[StepFn1D], p: float, q: float) -> tuple[float, float, float]:
    """Weak-l^q concavity of ``L^p`` for ``1 <= p < q``.

    ``lhs`` is the weak-l^q norm (sup form) of ``(||f_k||_p)_k``; ``rhs`` is
    the ``L^p`` norm of ``t -> ||(f_k(t))_k||_{weak-l^q}``, evaluated cellwise
    on the common refinement.
    """
    if not 1 <= p < q:
        raise ValueError("need 1 <= p < q")
    lhs = weak_seq_norm([lp_norm(fk, p) for fk in f], q, "sup")
    bp, V = common_refinement(f)
    s = np.sort(np.abs(V), axis=0)[::-1]
    k = np.arange(1, s.shape[0] + 1, dtype=float)[:, None]
    pointwise = np.max(k ** (1.0 / q) * s, axis=0)
    rhs = lp_norm(StepFn1D(bp, pointwise), p)
    return lhs, rhs, (lhs / rhs if rhs > 0 else 0.0)


# -- suites -----------------------------------------------------------------------


@dataclass
class ExperimentReport:
    """Per-trial records plus aggregates of one suite run."""

    experiment: str
    seed: int
    parameters: dict
    trials: list = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)
    schema_version: int = REPORT_SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)

    def to_csv(self) -> str:
        buf = io.StringIO()
        keys = sorted({k for rec in self.trials for k in rec
                       if not isinstance(rec[k], (list, dict))})
        w = csv.DictWriter(buf, fieldnames=keys, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(self.trials)
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(**d)


def aggregate(records: list) -> dict:
    """Min/max/mean of the ``ratio`` field and the pass count."""
    ratios = [r["ratio"] for r in records if r.get("ratio") is not None]
    out = {"count": len(records),
           "passed": sum(bool(r.get("passed", True)) for r in records)}
    if ratios:
        out.update(min_ratio=min(ratios), max_ratio=max(ratios),
                   mean_ratio=math.fsum(ratios) / len(ratios))
    out["all_passed"] = out["passed"] == out["count"]
    return out


def _trial_rademacher_head(rng, P):
    n = int(rng.integers(1, P["n_max"] + 1))
    a = rng.uniform(0.0, 1.0, size=n)
    rows = []
    for i in range(1, P["i_max"] + 1 if P.get("i_max") else n + 1):
        lhs, rhs = head_equivalence_sides(a, i)
        exact_ok = i < n or abs(lhs - rhs) <= 1e-12
        rows.append({"n": n, "i": i, "lhs": lhs, "rhs": rhs, "ratio": lhs / rhs,
                     "passed": bool(lhs > 0 and exact_ok)})
    return rows


def _trial_select_signs(rng, P):
    n = int(rng.integers(1, P["n_max"] + 1))
    i = int(rng.integers(1, n + 1))
    g = random_family(rng, n, P["max_cells"])
    eps, cert = select_signs(g, i)
    ok = cert.gamma_emp >= GAMMA_PRIME - 1e-12
    best = None
    if n <= P["exhaustive_n"]:
        bp, V = common_refinement(g)
        tau = 2.0 ** -i
        best = max(head_integral(StepFn1D(bp, s @ V), tau)
                   for s in _pattern_block(n, 0, 1 << (n - 1)))
        ok = ok and best >= cert.lhs * (1 - 1e-12)
    return {"digest": _digest(g), "n": n, "i": i, "case": cert.case,
            "branch": cert.branch, "lhs": cert.lhs, "rhs": cert.rhs_formula,
            "ratio": cert.gamma_emp, "exhaustive_max": best, "passed": bool(ok)}


def _trial_khintchine(rng, P):
    g = int(rng.integers(P["size_min"], P["size_max"] + 1))
    f = [h / h.l1() for h in (random_stepfn(rng, P["max_cells"]) for _ in range(g))]
    a = rng.uniform(0.0, 1.0, size=g)
    target = math.sqrt(math.fsum((a ** 2).tolist())) / math.sqrt(2.0)
    delta, val = khintchine_signs(a, f, exhaustive_limit=P["exhaustive_limit"],
                                  seed=int(rng.integers(2 ** 31)))
    return {"digest": _digest(f), "size": g, "value": val, "target": target,
            "ratio": val / target, "signs": delta.tolist(),
            "passed": bool(val >= target)}


def _trial_marcinkiewicz(rng, P):
    n = int(rng.integers(1, P["n_max"] + 1))
    f = random_family(rng, n, P["max_cells"])
    res = marcinkiewicz_summing_check(f, WeightFn.parse(P["weight"], P.get("weight_param")))
    return {"digest": _digest(f), "n": n, "lhs": res["lhs"], "rhs": res["rhs"],
            "ratio": res["c_emp"], "level": res["level"], "gamma": res["gamma"],
            "passed": res["certified"]}


def _trial_weak_lp(rng, P):
    n = int(rng.integers(1, P["n_max"] + 1))
    f = random_family(rng, n, P["max_cells"])
    lhs, rhs, ratio = weak_lp_summing_check(f, P["p"])
    return {"digest": _digest(f), "n": n, "lhs": lhs, "rhs": rhs, "ratio": ratio}


def _trial_concave(rng, P):
    n = int(rng.integers(1, P["n_max"] + 1))
    f = random_family(rng, n, P["max_cells"])
    lhs, rhs, ratio = weak_concavity_check(f, P["p"], P["q"])
    return {"digest": _digest(f), "n": n, "lhs": lhs, "rhs": rhs, "ratio": ratio}


def _trial_main(rng, P):
    n = int(rng.integers(1, P["n_max"] + 1))
    f = random_family(rng, n, P["max_cells"])
    num = seq_norm([lp_norm(fk, P["p"]) for fk in f], SpaceSpec.lp(P["q"]))
    den = max_sign_norm(f, SpaceSpec.xp(P["p"])).value
    return {"digest": _digest(f), "n": n, "lhs": num, "rhs": den, "ratio": num / den}


def _trial_transpose(rng, P):
    cs, ct = (int(rng.integers(1, P["max_cells"] + 1)) for _ in range(2))
    s = np.concatenate(([0.0], np.sort(rng.random(cs - 1)), [1.0]))
    t = np.concatenate(([0.0], np.sort(rng.random(ct - 1)), [1.0]))
    F = StepFn2D.from_grid(s, t, rng.uniform(-1.0, 1.0, size=(cs, ct)))
    inner = SpaceSpec.exp(P["alpha"])
    num = mixed_norm(F.transpose(), SpaceSpec.lp(P["p"]), inner)
    den = mixed_norm(F, SpaceSpec.lp(math.inf), inner)
    return {"cells": [cs, ct], "lhs": num, "rhs": den, "ratio": num / den}


@dataclass(frozen=True)
class _Suite:
    trial: Callable
    defaults: dict
    # suites whose constant is empirical pass a trial when lhs <= C rhs with
    # C the recorded maximum ratio
    empirical: bool = False


SUITES = {
    "rademacher-head": _Suite(_trial_rademacher_head, {"trials": 50, "n_max": 14}),
    "select-signs": _Suite(_trial_select_signs,
                           {"trials": 100, "n_max": 12, "max_cells": 32, "exhaustive_n": 6}),
    "khintchine": _Suite(_trial_khintchine, {"trials": 100, "size_min": 1, "size_max": 12,
                                             "max_cells": 32, "exhaustive_limit": 20}),
    "marcinkiewicz-summing": _Suite(_trial_marcinkiewicz,
                                    {"trials": 30, "n_max": 6, "max_cells": 32,
                                     "weight": "phi_p", "weight_param": 1.5}, True),
    "weak-lp-summing": _Suite(_trial_weak_lp, {"trials": 30, "n_max": 6, "max_cells": 32,
                                               "p": 1.5}, True),
    "weak-concavity": _Suite(_trial_concave, {"trials": 100, "n_max": 12, "max_cells": 32,
                                              "p": 1.5, "q": 2.0}, True),
    "xp-summing": _Suite(_trial_main, {"trials": 30, "n_max": 8, "max_cells": 32,
                                       "p": 1.5, "q": 1.8}, True),
    "transpose-exp": _Suite(_trial_transpose, {"trials": 30, "max_cells": 8,
                                               "alpha": 2.0, "p": 1.5}, True),
}


def _run_trial(args):
    name, seed, t, P = args
    rng = np.random.default_rng([seed, t])
    out = SUITES[name].trial(rng, P)
    rows = out if isinstance(out, list) else [out]
    for r in rows:
        r["trial"] = t
    return rows


def run_suite(experiment: str, seed: int = 0, params: dict | None = None,
              workers: int = 1) -> ExperimentReport:
    """Run a named suite; identical ``(experiment, seed, params)`` give
    byte-identical reports."""
    if experiment not in SUITES:
        raise KeyError(f"unknown experiment {experiment!r}; choose from {sorted(SUITES)}")
    suite = SUITES[experiment]
    P = {**suite.defaults, **(params or {})}
    jobs = [(experiment, seed, t, P) for t in range(int(P["trials"]))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            chunks = list(ex.map(_run_trial, jobs))
    else:
        chunks = [_run_trial(j) for j in jobs]
    records = [r for chunk in chunks for r in chunk]
    if suite.empirical and records:
        C = max(r["ratio"] for r in records)
        for r in records:
            r["passed"] = bool(r["lhs"] <= C * r["rhs"] * (1 + 1e-12))
    agg = aggregate(records)
    if suite.empirical and records:
        agg["constant"] = agg["max_ratio"]
    return ExperimentReport(experiment, seed, P, records, agg)
