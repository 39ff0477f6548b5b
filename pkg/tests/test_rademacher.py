import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rispace.norms import lp_norm
from rispace.rademacher import (MAX_TERMS, head_equivalence_sides, rademacher,
                                rademacher_cells, rademacher_head_integral, rademacher_sum)
from rispace.stepfn import StepFn1D, distribution, head_integral

coeffs = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=10)


def enumeration_head(a, tau):
    """Average over all sign patterns, laid out as equal cells."""
    vals = sorted((abs(sum(s * x for s, x in zip(eps, a)))
                   for eps in itertools.product((1, -1), repeat=len(a))), reverse=True)
    h = 1 / len(vals)
    out, t = 0.0, 0.0
    for v in vals:
        step = min(h, tau - t)
        if step <= 0:
            break
        out += v * step
        t += step
    return out


def test_first_rademacher():
    assert rademacher_sum([1.0]) == StepFn1D([0, 0.5, 1], [1, -1])
    assert rademacher(1) == StepFn1D([0, 0.5, 1], [1, -1])


def test_two_terms():
    assert rademacher_cells([1, 1]).tolist() == [2, 0, 0, -2]


def test_rademacher_k():
    r3 = rademacher(3)
    assert r3.values.tolist() == [1, -1] * 4
    assert np.allclose(np.diff(r3.breakpoints), 1 / 8)


def test_grid_cap():
    with pytest.raises(ValueError):
        rademacher_sum(np.ones(MAX_TERMS + 1))
    with pytest.raises(ValueError):
        rademacher_sum([])
    with pytest.raises(ValueError):
        rademacher(0)


def test_full_grid_cells():
    assert rademacher_cells(np.arange(1, 21)).size == 2 ** 20


@given(coeffs)
def test_l2_norm_is_l2_of_coefficients(a):
    assert lp_norm(rademacher_sum(a), 2) == pytest.approx(math.hypot(*a), rel=1e-12, abs=1e-300)


@given(coeffs, st.randoms(use_true_random=False), st.floats(0, 20))
def test_distribution_invariant_under_permutation_and_flips(a, r, level):
    b = [x * r.choice((1, -1)) for x in a]
    r.shuffle(b)
    assert distribution(rademacher_sum(b), level) == pytest.approx(
        distribution(rademacher_sum(a), level), abs=1e-15)


@given(coeffs, st.floats(1e-3, 1))
def test_head_integral_against_enumeration(a, tau):
    expect = enumeration_head(a, tau)
    assert rademacher_head_integral(a, tau) == pytest.approx(expect, rel=1e-12, abs=1e-12)
    assert head_integral(rademacher_sum(a), tau) == pytest.approx(expect, rel=1e-12, abs=1e-12)


# -- two-sided head estimate ---------------------------------------------------------


def test_head_sides_single():
    assert head_equivalence_sides([1.0], 1) == (0.5, 0.5)


def test_head_sides_four_ones():
    lhs, rhs = head_equivalence_sides([1, 1, 1, 1], 1)
    assert lhs == pytest.approx(enumeration_head([1, 1, 1, 1], 0.5))
    assert lhs == pytest.approx(1.25)
    assert rhs == pytest.approx(0.5 * (1 + math.sqrt(3)))


@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=10), st.integers(0, 4))
def test_head_sides_equal_past_n(a, extra):
    i = len(a) + extra
    lhs, rhs = head_equivalence_sides(a, i)
    exact = 2.0 ** -i * math.fsum(a)
    assert lhs == pytest.approx(exact, rel=1e-12, abs=1e-300)
    assert rhs == pytest.approx(exact, rel=1e-12, abs=1e-300)


def test_head_sides_sorts_input():
    assert head_equivalence_sides([1, 3, -2], 1) == head_equivalence_sides([3, 2, 1], 1)


def test_head_sides_rejects_level():
    with pytest.raises(ValueError):
        head_equivalence_sides([1, 2], 0)


@given(coeffs.filter(lambda a: any(a)))
def test_lhs_nonincreasing_in_level(a):
    lhs = [head_equivalence_sides(a, i)[0] for i in range(1, len(a) + 3)]
    assert all(x >= y - 1e-15 for x, y in zip(lhs, lhs[1:]))


def test_ratio_two_sided(rng):
    ratios = []
    for _ in range(40):
        a = rng.uniform(0, 1, size=int(rng.integers(1, 11)))
        for i in range(1, a.size + 1):
            lhs, rhs = head_equivalence_sides(a, i)
            ratios.append(lhs / rhs)
    assert 0.5 < min(ratios) and max(ratios) <= 1 + 1e-12
