import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcsign.special import (
    PERMANENT_MAX_DIM, UNCONDITIONED, LogMagnitudePhase, binomial, db_to_q, log_factorial,
    log_sum, lower_incomplete_gamma_int, permanent, q_to_db)


def brute_permanent(a):
    n = a.shape[0]
    return sum(math.prod(a[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def test_log_factorial_values():
    assert log_factorial(0) == 0.0
    assert log_factorial(1) == 0.0
    assert log_factorial(10) == pytest.approx(15.104412573, abs=1e-9)
    for n in (2, 17, 100, 500):
        exact = math.log(math.factorial(n))
        assert abs(log_factorial(n) - exact) <= 1e-12 * exact


def test_log_factorial_rejects_negative():
    with pytest.raises(ValueError):
        log_factorial(-1)


def test_binomial_values():
    assert binomial(5, 2) == 10
    assert binomial(7, -1) == 0
    assert binomial(7, 8) == 0
    assert binomial(60, 30) == 118264581564861424
    assert isinstance(binomial(60, 30), int)
    big = binomial(100, 50)
    assert abs(big - math.comb(100, 50)) <= 1e-12 * math.comb(100, 50)


@given(st.integers(0, 60), st.data())
def test_binomial_symmetry(n, data):
    k = data.draw(st.integers(0, n))
    assert binomial(n, k) == binomial(n, n - k)


def test_incomplete_gamma_values():
    assert lower_incomplete_gamma_int(1, 0.0) == 0.0
    assert lower_incomplete_gamma_int(1, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert lower_incomplete_gamma_int(3, UNCONDITIONED) == 2.0
    # series representation (s-1)! {1 - e^-x sum_j x^j/j!}
    for s, x in ((4, 2.5), (7, 0.3), (10, 12.0)):
        ref = math.factorial(s - 1) * (1 - math.exp(-x) * sum(x ** j / math.factorial(j)
                                                             for j in range(s)))
        assert lower_incomplete_gamma_int(s, x) == pytest.approx(ref, rel=1e-12)


@given(st.integers(1, 40), st.floats(0, 80), st.floats(0, 80))
def test_incomplete_gamma_monotone_and_bounded(s, x1, x2):
    lo, hi = sorted((x1, x2))
    a, b = lower_incomplete_gamma_int(s, lo), lower_incomplete_gamma_int(s, hi)
    assert a <= b * (1 + 1e-14)
    assert b <= math.factorial(s - 1) * (1 + 1e-14)


def test_q_to_db_anchors():
    assert q_to_db(0.0) == 0.0
    assert q_to_db(0.9) == pytest.approx(12.8, abs=0.05)
    assert q_to_db(0.96) == pytest.approx(17.0, abs=0.2)
    # definition -10 log10 exp(-2 artanh q)
    assert q_to_db(0.5) == pytest.approx(-10 * math.log10(math.exp(-2 * math.atanh(0.5))))
    with pytest.raises(ValueError):
        q_to_db(1.0)
    with pytest.raises(ValueError):
        q_to_db(-0.1)


@given(st.floats(0, 0.9999))
def test_db_round_trip(q):
    assert abs(db_to_q(q_to_db(q)) - q) <= 1e-12


@given(st.floats(0, 0.999), st.floats(0, 0.999))
def test_q_to_db_increasing(a, b):
    if a < b:
        assert q_to_db(a) < q_to_db(b)


def test_permanent_small_cases():
    a, b, c, d = 1 + 2j, 0.5, -1j, 3.0
    assert permanent([[a, b], [c, d]]) == pytest.approx(a * d + b * c)
    assert permanent(np.eye(4)) == pytest.approx(1.0)
    assert permanent(np.zeros((0, 0))) == 1.0


def test_permanent_matches_permutation_sum():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    assert abs(permanent(m) - brute_permanent(m)) < 1e-12 * max(1, abs(brute_permanent(m)))


@settings(max_examples=30)
@given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
def test_permanent_random_and_zero_row(n, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    ref = brute_permanent(m)
    assert abs(permanent(m) - ref) <= 1e-10 * max(1.0, abs(ref))
    m[rng.integers(n)] = 0
    assert permanent(m) == 0


def test_permanent_dimension_limit():
    permanent(np.ones((PERMANENT_MAX_DIM, PERMANENT_MAX_DIM)))
    with pytest.raises(ValueError):
        permanent(np.ones((PERMANENT_MAX_DIM + 1, PERMANENT_MAX_DIM + 1)))


def test_log_magnitude_phase_products():
    x = LogMagnitudePhase.from_complex(-2.0)
    y = LogMagnitudePhase.from_complex(1j)
    assert (x * y).to_complex() == pytest.approx(-2j)
    assert (x * LogMagnitudePhase.zero()).is_zero
    assert LogMagnitudePhase.from_complex(0).to_complex() == 0
    assert 0 <= y.conjugate().phase < 2 * math.pi
    # magnitudes far outside double range
    huge = LogMagnitudePhase(2000.0, 0.5)
    tiny = LogMagnitudePhase(-2000.0, 0.25)
    prod = huge * tiny
    assert prod.to_complex() == pytest.approx(complex(math.cos(0.75), math.sin(0.75)))


def test_log_sum_handles_large_terms():
    logs = np.array([1000.0, 1000.0 + math.log(2), -np.inf])
    mag, ph = log_sum(logs, np.array([0.0, math.pi, 0.3]))
    # e^1000 - 2 e^1000 = -e^1000
    assert mag == pytest.approx(1000.0)
    assert abs(abs(ph) - math.pi) < 1e-12
