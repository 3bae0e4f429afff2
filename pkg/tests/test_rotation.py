import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from zakeri.rotation import (
    PRESETS,
    RotationNumber,
    convergents,
    from_quadratic_surd,
    legal_angle,
    multiplier,
    parse_rotation,
)

# high-precision oracle values (40 digits), frozen
GOLDEN = 0.61803398874989484820
SQRT2_OVER_2 = 0.70710678118654752440
LAM_GOLDEN = complex(-0.73736887807831990152, -0.67549029426152364234)
LAM_SQRT2 = complex(-0.26625534204141549, -0.96390253284987733)

def _exact(rot, n):
    x = Fraction(0)
    for a in reversed([rot.coefficient(k) for k in range(1, n + 1)]):
        x = 1 / (a + x)
    return x


cf_lists = st.lists(st.integers(1, 9), min_size=0, max_size=4)
periods = st.lists(st.integers(1, 9), min_size=1, max_size=4)


def test_golden_and_sqrt2():
    assert float(from_quadratic_surd([], [1])) == pytest.approx(GOLDEN, abs=1e-15)
    assert float(from_quadratic_surd([1], [2])) == pytest.approx(SQRT2_OVER_2, abs=1e-15)
    assert float(from_quadratic_surd([1], [2])) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_rational_rejected():
    with pytest.raises(ValueError):
        from_quadratic_surd([1, 2], [])


def test_convergents_golden():
    assert [q for _, q in convergents(parse_rotation("golden"), 5)] == [1, 2, 3, 5, 8]
    # first convergent is seeded from p0/q0 = 0/1: a_1 = 1 gives 1/1
    assert convergents(parse_rotation("golden"), 1) == [(1, 1)]


@given(pre=cf_lists, per=periods)
def test_convergent_bound(pre, per):
    rot = RotationNumber(tuple(pre), tuple(per))
    x = _exact(rot, 80)
    for p, q in convergents(rot, 12):
        assert abs(x - Fraction(p, q)) * q * q < 1


@given(pre=cf_lists, per=periods)
def test_value_from_many_terms(pre, per):
    rot = RotationNumber(tuple(pre), tuple(per))
    assert 0 < float(rot) < 1
    assert abs(float(_exact(rot, 40)) - float(rot)) < 1e-14
    assert rot.bound == max(pre + per)


def test_legal_angles():
    g = parse_rotation("golden")
    assert legal_angle(g, 0) == 0
    assert legal_angle(g, 1) == pytest.approx(0.3819660112501051, abs=1e-15)
    assert legal_angle(g, 2) == pytest.approx(0.7639320225002102, abs=1e-15)


@given(m=st.integers(0, 10_000))
def test_legal_angle_range(m):
    a = legal_angle(parse_rotation("golden"), m)
    assert 0 <= a < 1


def test_multiplier():
    assert abs(multiplier(parse_rotation("golden")) - LAM_GOLDEN) < 1e-15
    assert abs(multiplier(parse_rotation("sqrt2over2")) - cmath.exp(1j * math.pi * math.sqrt(2))) < 1e-15
    assert abs(multiplier(parse_rotation("sqrt2over2")) - LAM_SQRT2) < 1e-15


@given(pre=cf_lists, per=periods)
def test_multiplier_unit(pre, per):
    assert abs(abs(multiplier(RotationNumber(tuple(pre), tuple(per)))) - 1) < 1e-15


def test_parse_rotation():
    assert set(PRESETS) >= {"golden", "sqrt2over2"}
    assert float(parse_rotation("1:2")) == pytest.approx(SQRT2_OVER_2, abs=1e-15)
    assert float(parse_rotation(":1")) == pytest.approx(GOLDEN, abs=1e-15)
    with pytest.raises(ValueError):
        parse_rotation("nonsense")
