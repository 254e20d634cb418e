import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from induced_matching.logspace import LogValue, format_float, logsumexp

pos = st.floats(min_value=1e-300, max_value=1e300, allow_nan=False)


def test_zero_and_one():
    assert LogValue.zero().is_zero
    assert float(LogValue.zero()) == 0.0
    assert float(LogValue.one()) == 1.0
    assert LogValue(1, -math.inf) == LogValue.zero()


def test_negative_rejected():
    with pytest.raises(ValueError):
        LogValue.from_float(-1.0)


@given(pos, pos)
def test_arithmetic_matches_floats(x, y):
    a, b = LogValue.from_float(x), LogValue.from_float(y)
    assert math.isclose(float(a * b), x * y, rel_tol=1e-12) or math.isinf(x * y) or x * y < 1e-300
    assert math.isclose((a / b).log_magnitude, math.log(x) - math.log(y), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose((a + b).log_magnitude, math.log(x + y), rel_tol=1e-12, abs_tol=1e-12)
    assert (a < b) == (x < y)


def test_overflow_safe():
    big = LogValue.from_log(1e6)
    assert float(big) == math.inf
    assert (big / big) == LogValue.one()


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        LogValue.one() / LogValue.zero()


def test_logsumexp_order_and_zeros():
    vals = [LogValue.from_float(v) for v in (1.0, 2.0, 3.0)] + [LogValue.zero()]
    assert math.isclose(float(logsumexp(vals)), 6.0, rel_tol=1e-15)
    assert logsumexp([]).is_zero


def test_format_float_round_trips():
    for x in (0.1, 1 / 3, 1e-300, 2.5e300, 0.0):
        s = format_float(x)
        assert float(s) == x
    assert format_float(math.inf) in ("inf", "Infinity")
    assert format_float(math.nan) in ("nan", "NaN")
