import json
import math

import numpy as np
import pytest

from rispace.mixed2d import (MATERIALIZE_CAP, CounterexampleAnalytic, CounterexampleParams,
                             StepFn2D, build_counterexample, mixed_norm, section_norms,
                             transpose, transpose_lower_bound)
from rispace.norms import SpaceSpec, WeightFn, norm
from rispace.stepfn import StepFn1D

LINF, L1 = SpaceSpec.lp(math.inf), SpaceSpec.lp(1)


def random_grid(rng, max_cells=6):
    cs, ct = (int(rng.integers(1, max_cells + 1)) for _ in range(2))
    s = np.concatenate(([0.0], np.sort(rng.random(cs - 1)), [1.0]))
    t = np.concatenate(([0.0], np.sort(rng.random(ct - 1)), [1.0]))
    return StepFn2D.from_grid(s, t, rng.uniform(-1, 1, size=(cs, ct)))


# -- StepFn2D ---------------------------------------------------------------------


def test_transpose_of_corner_indicator():
    F = StepFn2D([[0, 0.5, 0.5, 1, 1.0]])
    assert transpose(F) == StepFn2D([[0.5, 1, 0, 0.5, 1.0]])
    assert F(0.2, 0.7) == 1.0 and F(0.7, 0.2) == 0.0
    assert transpose(F)(0.7, 0.2) == 1.0


def test_symmetric_is_fixed():
    g = StepFn1D.uniform([1.0, 2.0, 3.0])
    bp = g.breakpoints
    V = np.array([[1, 2, 3], [2, 5, 6], [3, 6, 9.0]])
    F = StepFn2D.from_grid(bp, bp, V)
    assert transpose(F) == F


def test_transpose_involution(rng):
    for _ in range(20):
        F = random_grid(rng)
        assert transpose(transpose(F)) == F


def test_invalid_rectangles():
    with pytest.raises(ValueError):
        StepFn2D([[0, 1.5, 0, 1, 1]])
    with pytest.raises(ValueError):
        StepFn2D([[0.5, 0.5, 0, 1, 1]])
    with pytest.raises(ValueError):
        StepFn2D([[0, 1, 0, 1, 1], [0, 0.5, 0, 0.5, 2]])  # area > 1
    with pytest.raises(ValueError):
        StepFn2D([[0, 0.6, 0, 0.5, 1], [0.5, 1, 0.25, 0.75, 2]]).sections()
    with pytest.raises(ValueError):
        StepFn2D.from_grid([0, 1], [0, 1], [[1, 2]])


def test_json_roundtrip(rng):
    F = random_grid(rng)
    d = json.loads(json.dumps(F.to_dict()))
    assert d["schema"] == "rispace/stepfn2d"
    assert StepFn2D.from_dict(d) == F
    G = StepFn2D.from_dict({"s_breakpoints": [0, 0.5, 1], "t_breakpoints": [0, 1],
                            "values": [[1], [2]]})
    assert G == StepFn2D.separable(StepFn1D.uniform([1.0, 2.0]))


def test_sections_fill_gaps_with_zero():
    F = StepFn2D([[0.25, 0.5, 0, 0.5, 3.0]])
    t, secs = F.sections()
    assert t.tolist() == [0, 0.5, 1]
    assert secs[0] == StepFn1D.indicator(0.25, 0.5, 3.0)
    assert secs[1] == StepFn1D.zero()


# -- mixed norms -------------------------------------------------------------------


@pytest.mark.parametrize("outer", [L1, LINF, SpaceSpec.lp(2), SpaceSpec.xp(1.5)], ids=str)
@pytest.mark.parametrize("inner", [SpaceSpec.lp(3), SpaceSpec.xp(1.5), SpaceSpec.exp(2)], ids=str)
def test_constant_in_t(outer, inner):
    g = StepFn1D.uniform([0.5, -2.0, 1.0, 0.0])
    assert mixed_norm(StepFn2D.separable(g), outer, inner) == pytest.approx(norm(g, inner), rel=1e-12)


@pytest.mark.parametrize("p", [1.2, 1.5, 1.9])
def test_quarter_square(p):
    F = StepFn2D([[0, 0.5, 0, 0.5, 1.0]])
    W = WeightFn.W(p)
    assert mixed_norm(F, L1, SpaceSpec.xp(p)) == pytest.approx(W(0.5) ** (1 / p) / 2, rel=1e-14)
    gamma = section_norms(F, SpaceSpec.xp(p))
    assert gamma == StepFn1D.indicator(0, 0.5, W(0.5) ** (1 / p))


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, math.inf])
def test_transpose_preserves_lp_of_lp(p, rng):
    for _ in range(10):
        F = random_grid(rng)
        Lp = SpaceSpec.lp(p)
        assert mixed_norm(transpose(F), Lp, Lp) == pytest.approx(mixed_norm(F, Lp, Lp), rel=1e-12)


# -- the transposition counterexample -------------------------------------------------------


def test_params_validation():
    for bad in [(1, 1.0), (1, 2.0), (25, 1.5), (-1, 1.5)]:
        with pytest.raises(ValueError):
            CounterexampleParams(*bad)


def test_first_two_coefficients():
    P = CounterexampleParams(3, 1.5)
    assert P.log_a[0] == 0.0 and P.inv_b(1) == 1
    assert P.log_a[1] == pytest.approx(-3.0)
    assert P.inv_b(2) == math.ceil(math.exp(3)) == 21
    assert P.W_a[0] == 1.0


@pytest.mark.parametrize("p", [1.2, 1.5, 1.9])
def test_b_between_half_a_and_a(p):
    P = CounterexampleParams(10, p)
    assert np.all(P.log_b <= P.log_a)
    assert np.all(P.log_a <= P.log_b + math.log(2) + 1e-15)
    # 1/b_m is an integer wherever it is representable
    for m in range(1, 2 ** 10 + 1):
        k = P.inv_b(m)
        if k is None:
            break
        assert float(k) == pytest.approx(math.exp(-P.log_b[m - 1]), rel=1e-12)


def test_sup_norm_at_most_one():
    for n in range(15):
        A = CounterexampleAnalytic(CounterexampleParams(n, 1.5))
        rows = A.row_norms()
        assert A.sup_norm() <= 1 + 1e-12
        assert rows[0] == pytest.approx(1.0)


def test_lower_bound_formula():
    P = CounterexampleParams(3, 1.5)
    exact, bound = transpose_lower_bound(P)
    assert bound == pytest.approx(sum((4 * math.log(2) + m ** 2) ** -0.5 for m in range(2, 9)), rel=1e-14)
    assert exact >= bound


def test_lower_bound_grows():
    b10 = transpose_lower_bound(CounterexampleParams(10, 1.5))[1]
    b20 = transpose_lower_bound(CounterexampleParams(20, 1.5))[1]
    assert b20 > b10


def test_column_norm_ratio_nondecreasing():
    ratios = []
    for n in range(15):
        A = CounterexampleAnalytic(CounterexampleParams(n, 1.5))
        ratios.append(A.column_norm() / A.sup_norm())
    assert all(x <= y for x, y in zip(ratios, ratios[1:]))
    assert ratios[14] >= 1.5 * ratios[4]


@pytest.mark.parametrize("n, p", [(0, 1.5), (1, 1.5), (1, 1.9), (2, 1.9)])
def test_materialized_agrees_with_analytic(n, p):
    P = CounterexampleParams(n, p)
    K = build_counterexample(P, "materialized")
    A = build_counterexample(P)
    xp = SpaceSpec.xp(p)
    assert mixed_norm(K, LINF, xp) == pytest.approx(A.sup_norm(), rel=1e-9)
    # every section of the transpose has the same norm
    col = section_norms(transpose(K), xp).values
    assert np.allclose(col, col[0], rtol=1e-12)
    assert mixed_norm(transpose(K), L1, xp) == pytest.approx(A.column_norm(), rel=1e-9)


def test_materialized_kernel_shape():
    P = CounterexampleParams(1, 1.5)
    K = build_counterexample(P, "materialized")
    assert len(K.rects) == P.rectangle_count() == 1 + 21
    # block m is a staircase of 1/b_m rectangles of size b_m x b_m 2^-n
    area = (K.rects[:, 1] - K.rects[:, 0]) * (K.rects[:, 3] - K.rects[:, 2])
    assert math.fsum(area) == pytest.approx((1 + 1 / 21) / 2, rel=1e-14)
    t, secs = K.sections()
    assert len(secs) == 22
    assert all(sec.n_cells <= 3 for sec in secs)


def test_materialize_cap():
    P = CounterexampleParams(2, 1.5)
    assert P.rectangle_count() > MATERIALIZE_CAP
    with pytest.raises(ValueError, match="rectangles"):
        build_counterexample(P, "materialized")
    with pytest.raises(ValueError):
        build_counterexample(P, "symbolic")


def test_analytic_reaches_large_levels():
    P = CounterexampleParams(20, 1.5)
    assert math.isinf(P.rectangle_count())
    exact, bound = transpose_lower_bound(P)
    assert np.isfinite(exact) and exact >= bound > 10
