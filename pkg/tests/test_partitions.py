import math
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forge import partitions as pt
from forge.errors import DomainError, OutOfRangeError

from .oracles import partitions_brute

HARDY_FIRST_LINE = 3972998993185.896
P200 = 3972999029388


def test_exact_values():
    assert pt.partition_exact(0) == 1
    assert pt.partition_exact(5) == 7
    assert pt.partition_exact(200) == P200


def test_recurrence_matches_enumeration():
    for n in range(61):
        assert pt.partition_exact(n) == partitions_brute(n)


def test_exact_range():
    with pytest.raises(OutOfRangeError):
        pt.partition_exact(pt.MAX_N + 1)
    with pytest.raises(DomainError):
        pt.partition_exact(-1)


def test_exact_nondecreasing():
    vals = [pt.partition_exact(n) for n in range(1, 2000)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_concurrent_readers_see_same_values():
    pt._cache[:] = [1]
    results = {}

    def read(i):
        results[i] = pt.partition_exact(3000 - 7 * i)

    threads = [threading.Thread(target=read, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results[0] == pt.partition_exact(3000)
    assert all(results[i] == pt.partition_exact(3000 - 7 * i) for i in range(8))


@pytest.mark.parametrize("n, c", [(3, 4), (1, 1), (10, 512)])
def test_ordered_compositions(n, c):
    assert pt.ordered_compositions(n) == c


def test_principal_term_200():
    v = pt.hardy_ramanujan_principal(200)
    assert v == pytest.approx(HARDY_FIRST_LINE, abs=0.5)
    ratio = v / P200
    assert 0.99999 <= ratio / (HARDY_FIRST_LINE / P200) <= 1.00001


def test_principal_derivative_matches_finite_difference():
    for n in (50, 200, 1000):
        fd = pt.principal_finite_difference(n)
        assert fd == pytest.approx(pt.hardy_ramanujan_principal(n), rel=1e-6)


def test_principal_positive_small_n():
    assert pt.hardy_ramanujan_principal(1) > 0
    with pytest.raises(DomainError):
        pt.hardy_ramanujan_principal(0)


def test_crude_values():
    assert pt.crude_asymptotic(1) == pytest.approx(math.exp(math.pi * math.sqrt(2 / 3)) / (4 * math.sqrt(3)))
    assert pt.crude_asymptotic(1) == pytest.approx(1.8767, abs=1e-4)
    # the crude form overshoots p(200) by about 3.2%
    assert pt.crude_asymptotic(200) / P200 == pytest.approx(1.0320, abs=1e-4)


def test_crude_ratio_improves():
    r100 = pt.partition_value(100).crude_ratio
    r10k = pt.partition_value(10**4).crude_ratio
    assert abs(1 - r10k) < abs(1 - r100)


def test_partition_value_beyond_float_range():
    v = pt.partition_value(80000)
    assert math.isinf(v.crude) and 0.99 < v.crude_ratio < 1


def test_digit_parabola():
    for n in (100, 400, 1000, 2500):
        ratio = len(str(pt.partition_exact(4 * n))) / len(str(pt.partition_exact(n)))
        assert ratio == pytest.approx(2, rel=0.10)


def test_digits_linear_in_sqrt_n():
    import numpy as np

    ns = np.arange(1000, 10**4 + 1, 100)
    d = np.array([len(str(pt.partition_exact(int(n)))) for n in ns], dtype=float)
    x = np.sqrt(ns)
    slope, icpt = np.polyfit(x, d, 1)
    assert np.max(np.abs(d - (slope * x + icpt)) / d) < 0.02


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40))
def test_partitions_bounded_by_compositions(n):
    assert pt.partition_exact(n) <= pt.ordered_compositions(n)
