import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cheblab.sieve import (OutOfRange, build_table, li, li_array, load_table, save_table,
                           segmented_primes, small_primes, von_mangoldt)

from conftest import brute_primes


def test_small_tables():
    assert build_table(10).primes.tolist() == [2, 3, 5, 7]
    assert build_table(2).primes.tolist() == [2]
    assert build_table(100).primes.size == 25


def test_bad_bound():
    with pytest.raises(ValueError):
        build_table(1)


@pytest.mark.parametrize("x, expected", [(10, 4), (1, 0), (100, 25), (2, 1), (1.99, 0), (10.5, 4)])
def test_pi_values(x, expected):
    assert build_table(100).pi(x) == expected


def test_pi_out_of_range():
    with pytest.raises(OutOfRange):
        build_table(100).pi(101)


def test_known_prime_counts(table_1e7):
    for k, n in enumerate([4, 25, 168, 1229, 9592, 78498, 664579], start=1):
        assert table_1e7.pi(10**k) == n


@pytest.mark.parametrize("segment", [1, 7, 64, 1000])
def test_segment_size_does_not_matter(segment):
    assert np.array_equal(segmented_primes(5000, segment), small_primes(5000))


def test_primes_match_trial_division():
    assert build_table(3000).primes.tolist() == brute_primes(3000)


def test_psi_values():
    t = build_table(100)
    assert t.psi(1) == 0.0
    assert t.psi(4) == pytest.approx(2 * math.log(2) + math.log(3), abs=1e-14)
    expected = sum(von_mangoldt(n) for n in (2, 3, 4, 5, 7, 8, 9))
    assert t.psi(10) == pytest.approx(expected, abs=1e-13)


def test_r_x1_values():
    t = build_table(100)
    assert t.r_x1(3) == 0
    assert t.r_x1(4) == 0.5
    # pi(100^(1/4)) = pi(3.16) = 2: both 16 and 81 are fourth powers below 100
    assert t.r_x1(100) == pytest.approx(4 / 2 + 2 / 3 + 2 / 4 + 1 / 5 + 1 / 6, abs=1e-14)


def test_prime_powers_complete(table_1e5):
    pairs = table_1e5.prime_powers
    vals = [v for v, _ in pairs]
    assert vals == sorted(set(vals))
    brute = {}
    for p in brute_primes(1000):
        k, pk = 1, p
        while pk <= 10**5:
            brute[pk] = k
            k, pk = k + 1, pk * p
    mine = {v: k for v, k in pairs if v <= 10**5}
    assert {v: k for v, k in mine.items() if k >= 2} == {v: k for v, k in brute.items() if k >= 2}
    assert sum(1 for _, k in pairs if k == 1) == table_1e5.primes.size


def test_psi_consistency(table_1e5):
    # psi - theta = sum of log p over higher prime powers
    xs = np.arange(2, 10**5 + 1, 97)
    theta = np.concatenate(([0.0], np.cumsum(np.log(table_1e5.primes))))[table_1e5.pi_array(xs)]
    higher = [sum(math.log(b) for v, b, k in zip(table_1e5.pp_values, table_1e5.pp_base,
                                                  table_1e5.pp_exp) if k >= 2 and v <= x)
              for x in xs[::50]]
    got = table_1e5.psi_array(xs) - theta
    assert np.allclose(got[::50], higher, atol=1e-8)


def test_big_pi_is_pi_plus_r(table_1e5):
    for x in range(2, 10**5 + 1, 113):
        n = int(np.searchsorted(table_1e5.pp_values, x, side="right"))
        direct = math.fsum((1.0 / table_1e5.pp_exp[:n]).tolist())
        assert table_1e5.big_pi(x) == pytest.approx(direct, abs=1e-9)
        assert table_1e5.r_x1(x) == pytest.approx(direct - table_1e5.pi(x), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0, max_value=10**5), st.floats(min_value=0, max_value=10**5))
def test_monotone(table_1e5, a, b):
    lo, hi = sorted((a, b))
    assert table_1e5.pi(lo) <= table_1e5.pi(hi)
    assert table_1e5.psi(lo) <= table_1e5.psi(hi)


def test_li_small_and_oracles():
    assert li(2) == 0.0
    with pytest.raises(ValueError):
        li(1.5)
    n = 10**6
    t = 2 + (np.arange(n) + 0.5) * (8 / n)
    midpoint = float(np.sum(1 / np.log(t)) * 8 / n)
    assert li(10) == pytest.approx(midpoint, abs=1e-8)
    for x in (3.0, 10.0, 1e4):
        assert li(x) == pytest.approx(float(mpmath.li(x) - mpmath.li(2)), abs=1e-9)
    assert li(1e8) == pytest.approx(float(mpmath.li(1e8) - mpmath.li(2)), rel=1e-14)
    assert np.allclose(li_array([10.0, 1e4]), [li(10.0), li(1e4)], rtol=0, atol=1e-12)


def test_li_vs_pi(table_1e6):
    assert abs(li(1e6) / table_1e6.pi(1e6) - 1) < 0.003


def test_von_mangoldt():
    assert von_mangoldt(1) == 0.0
    assert von_mangoldt(8) == pytest.approx(math.log(2))
    assert von_mangoldt(12) == 0.0
    assert von_mangoldt(97) == pytest.approx(math.log(97))


def test_cache_round_trip(tmp_path, table_1e5):
    path = tmp_path / "primes.bin"
    save_table(table_1e5, path)
    raw = path.read_bytes()
    assert raw.startswith(b"CHEBPRIMES1")
    assert int.from_bytes(raw[11:19], "little") == 10**5
    back = load_table(path)
    assert back.x_max == table_1e5.x_max
    assert np.array_equal(back.primes, table_1e5.primes)
    assert back.psi(10**5) == table_1e5.psi(10**5)


def test_cache_rejects_garbage(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE")
    with pytest.raises(ValueError):
        load_table(path)


def _r_ratio(t, x):
    return t.r_x1(x) * math.log(x) / math.sqrt(x)


@pytest.mark.xfail(strict=True, reason="second-order terms keep the ratio near 1.2-1.5 below 1e8")
def test_r_x1_estimate_within_quarter(table_1e7):
    for x in (1e5, 1e6, 1e7):
        assert abs(_r_ratio(table_1e7, x) - 1) <= 0.25


def test_r_x1_estimate_trend(table_1e7):
    ratios = [_r_ratio(table_1e7, x) for x in (1e5, 1e6, 1e7)]
    assert ratios[0] > ratios[1] > ratios[2] > 1
    for x in (1e5, 1e6, 1e7):
        roots = sum(table_1e7.pi(x ** (1 / k) + 1e-9) / k for k in range(2, 30))
        assert table_1e7.r_x1(x) == pytest.approx(roots, abs=1e-9)
