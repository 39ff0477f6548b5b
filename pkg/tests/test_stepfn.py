import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rispace.stepfn import (StepFn1D, common_refinement, distribution, head_integral,
                            head_integrals, rearrange, seq_rearrange)

from conftest import step_functions

THIRDS = StepFn1D.uniform([1.0, 3.0, 2.0])


def sort_oracle(f: StepFn1D) -> StepFn1D:
    """Brute force: list every cell, sort by |value|, lay them out from 0."""
    cells = sorted(zip(np.abs(f.values), f.measures), key=lambda c: -c[0])
    bp, t = [0.0], 0.0
    for _, m in cells:
        t += m
        bp.append(min(t, 1.0))
    bp[-1] = 1.0
    return StepFn1D(bp, [v for v, _ in cells])


# -- construction -------------------------------------------------------------


def test_canonical_form_merges_and_drops():
    f = StepFn1D([0, 0.25, 0.25, 0.5, 1], [1, 7, 1, 2])
    assert f.breakpoints.tolist() == [0, 0.5, 1]
    assert f.values.tolist() == [1, 2]


def test_zero_is_one_cell():
    z = StepFn1D.uniform([0.0, -0.0, 0.0])
    assert z == StepFn1D.zero()
    assert z.n_cells == 1 and z.is_zero()


@pytest.mark.parametrize("bp, v", [
    ([0, 1], [1, 2]),
    ([0.1, 1], [1]),
    ([0, 0.6, 0.5, 1], [1, 2, 3]),
    ([0, 1], [math.inf]),
    ([0, 1], [math.nan]),
])
def test_invalid_rejected(bp, v):
    with pytest.raises(ValueError):
        StepFn1D(bp, v)


def test_immutable():
    f = StepFn1D.uniform([1, 2])
    with pytest.raises(ValueError):
        f.values[0] = 5


def test_arithmetic_on_refinement():
    f = StepFn1D.indicator(0, 0.5)
    g = StepFn1D.indicator(0.25, 1, 2.0)
    h = f + g
    assert h.breakpoints.tolist() == [0, 0.25, 0.5, 1]
    assert h.values.tolist() == [1, 3, 2]
    assert (h - g) == f
    assert (2 * f).values.tolist() == [2, 0]
    assert abs(-f) == f


def test_evaluation():
    assert THIRDS([0.0, 0.5, 0.9]).tolist() == [1, 3, 2]
    with pytest.raises(ValueError):
        THIRDS(1.0)


def test_json_roundtrip():
    d = json.loads(json.dumps(THIRDS.to_dict()))
    assert d["schema"] == "rispace/stepfn1d" and d["version"] == 1
    assert StepFn1D.from_dict(d) == THIRDS
    assert StepFn1D.from_dict({"breakpoints": [0, 1], "values": [2]}) == StepFn1D.constant(2)
    with pytest.raises(ValueError):
        StepFn1D.from_dict({**d, "version": 99})


def test_common_refinement():
    bp, V = common_refinement([StepFn1D.indicator(0, 0.5), StepFn1D.indicator(0.25, 1)])
    assert bp.tolist() == [0, 0.25, 0.5, 1]
    assert V.tolist() == [[1, 1, 0], [0, 1, 1]]


# -- rearrangement --------------------------------------------------------------


def test_rearrange_constant():
    assert rearrange(StepFn1D.constant(2.0)) == StepFn1D.constant(2.0)


def assert_same_cells(f, g):
    # breakpoints of f* are partial sums of measures, exact up to rounding
    np.testing.assert_allclose(f.breakpoints, g.breakpoints, rtol=0, atol=1e-15)
    np.testing.assert_array_equal(f.values, g.values)


def test_rearrange_thirds():
    assert_same_cells(rearrange(THIRDS), StepFn1D.uniform([3.0, 2.0, 1.0]))


def test_rearrange_centered_indicator():
    assert rearrange(StepFn1D.indicator(0.25, 0.75)) == StepFn1D.indicator(0, 0.5)


def test_rearrange_takes_absolute_values():
    assert rearrange(StepFn1D.uniform([-1.0, 3.0])) == StepFn1D.uniform([3.0, 1.0])


@given(step_functions(max_cells=64))
def test_rearrange_matches_sort_oracle(f):
    assert rearrange(f) == sort_oracle(f)


@given(step_functions())
def test_rearrange_nonincreasing_nonnegative(f):
    v = rearrange(f).values
    assert np.all(v >= 0) and np.all(np.diff(v) < 0)


@given(step_functions())
def test_rearrange_idempotent(f):
    g = rearrange(f)
    assert rearrange(g) == g


@given(step_functions(), st.floats(0, 12))
def test_equimeasurable(f, level):
    # cell measures of f* are differences of partial sums: equal up to rounding
    assert distribution(rearrange(f), level) == pytest.approx(distribution(f, level), abs=1e-14)


@given(step_functions())
def test_mass_conserved(f):
    assert rearrange(f).l1() == pytest.approx(f.l1(), rel=1e-14, abs=1e-300)


# -- distribution -----------------------------------------------------------------


def test_distribution_examples():
    half = StepFn1D.indicator(0, 0.5)
    assert distribution(half, 0.5) == 0.5
    assert distribution(half, 1.0) == 0.0
    assert distribution(THIRDS, 1.5) == pytest.approx(2 / 3, abs=1e-15)


def test_distribution_negative_level():
    with pytest.raises(ValueError):
        distribution(THIRDS, -0.1)


# -- head integral ------------------------------------------------------------------


def test_head_integral_examples():
    assert head_integral(StepFn1D.uniform([3.0, 2.0, 1.0]), 0.5) == pytest.approx(4 / 3, abs=1e-15)
    assert head_integral(THIRDS, 1.0) == pytest.approx(THIRDS.l1(), abs=1e-15)
    for tau in (0.01, 0.2, 0.3):
        assert head_integral(StepFn1D.indicator(0.5, 0.8), tau) == pytest.approx(tau, abs=1e-15)


@pytest.mark.parametrize("tau", [0.0, -0.5, 1.5])
def test_head_integral_domain(tau):
    with pytest.raises(ValueError):
        head_integral(THIRDS, tau)


@given(step_functions())
def test_head_integral_full_is_l1(f):
    assert head_integral(f, 1.0) == pytest.approx(f.l1(), rel=1e-13, abs=1e-300)


@given(step_functions(), st.lists(st.floats(1e-6, 1.0), min_size=3, max_size=3, unique=True))
def test_head_integral_concave(f, taus):
    t1, t2, t3 = sorted(taus)
    h1, h2, h3 = (head_integral(f, t) for t in (t1, t2, t3))
    chord = h1 + (h3 - h1) * (t2 - t1) / (t3 - t1)
    assert h2 >= chord - 1e-12 * max(1.0, f.sup_abs())
    assert h1 <= h2 + 1e-12 and h2 <= h3 + 1e-12


@given(step_functions())
def test_head_integrals_vectorized(f):
    taus = np.linspace(0.01, 1, 37)
    expect = [head_integral(f, t) for t in taus]
    np.testing.assert_allclose(head_integrals(f, taus), expect, rtol=1e-12, atol=1e-13)


# -- sequences -------------------------------------------------------------------------


@pytest.mark.parametrize("a, expect", [([1, 3, 2], [3, 2, 1]), ([0, 0], [0, 0]), ([-2, 1], [2, 1])])
def test_seq_rearrange(a, expect):
    assert seq_rearrange(a).tolist() == expect
