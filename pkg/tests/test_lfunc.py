import math

import mpmath
import numpy as np
import pytest

from cheblab.characters import character_group, conjugate, get_character, principal
from cheblab.lfunc import (PoleError, find_zeros, hurwitz_zeta, l_value, read_zero_file,
                           write_zero_file, z_function, zero_count_estimate)

CHI4 = get_character(4, 1)
ZETA = principal(1)


def _mp_hardy_chi4(t):
    """Rotated L(1/2+it, chi_4) built from mpmath only (root number 1, odd)."""
    s = mpmath.mpc(0.5, t)
    L = mpmath.dirichlet(s, [0, 1, 0, -1])
    phase = mpmath.exp(1j * (mpmath.im(mpmath.loggamma((s + 1) / 2)) + t / 2 * mpmath.log(4 / mpmath.pi)))
    return float(mpmath.re(phase * L))


def _mp_first_zero_chi4():
    grid = np.arange(0.5, 10.0, 0.25)
    vals = [_mp_hardy_chi4(t) for t in grid]
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa * fb < 0:
            lo, hi, flo = a, b, fa
            for _ in range(60):
                mid = (lo + hi) / 2
                fm = _mp_hardy_chi4(mid)
                if fm * flo > 0:
                    lo, flo = mid, fm
                else:
                    hi = mid
            return (lo + hi) / 2
    raise AssertionError("no sign change")


@pytest.mark.parametrize("s,a", [(2, 1), (2, 0.5), (3 + 4j, 0.25), (0.5 + 20j, 0.75), (-1.5 + 2j, 0.3),
                                 (0.5 + 150j, 1.0), (0.5 + 480j, 0.2)])
def test_hurwitz_vs_mpmath(s, a):
    ref = complex(mpmath.zeta(s, a))
    assert abs(hurwitz_zeta(s, a) - ref) <= 1e-10 * max(1, abs(ref))


def test_hurwitz_examples():
    assert hurwitz_zeta(2, 1) == pytest.approx(math.pi ** 2 / 6, abs=1e-12)
    assert hurwitz_zeta(2, 0.5) == pytest.approx(math.pi ** 2 / 2, abs=1e-10)
    assert abs(hurwitz_zeta(0.5 + 14.134725j, 1)) < 1e-6


def test_hurwitz_half_by_series():
    # zeta(2, 1/2) = sum 1/(n+1/2)^2; tail after N terms is about 1/N
    n = np.arange(10**7, dtype=float)
    partial = math.fsum(1 / (n + 0.5) ** 2)
    N = 10**7
    tail = 1 / N - 1 / (2 * N**2)
    assert hurwitz_zeta(2, 0.5) == pytest.approx(partial + tail, abs=1e-12)


def test_hurwitz_errors():
    with pytest.raises(PoleError):
        hurwitz_zeta(1, 0.5)
    with pytest.raises(ValueError):
        hurwitz_zeta(2, 0)
    with pytest.raises(ValueError):
        hurwitz_zeta(2, 1.5)


def test_l_value_examples():
    assert l_value(CHI4, 1) == pytest.approx(math.pi / 4, abs=1e-12)
    assert l_value(ZETA, 2) == pytest.approx(math.pi ** 2 / 6, abs=1e-12)
    chi3 = get_character(3, 1)
    n = np.arange(1, 10**6 + 1)
    vals = np.where(n % 3 == 1, 1.0, np.where(n % 3 == 2, -1.0, 0.0)) / n.astype(float) ** 2
    series = math.fsum(vals)
    assert abs(l_value(chi3, 2) - series) < 1e-9


@pytest.mark.parametrize("q", [5, 7, 8, 12])
def test_l_value_vs_mpmath(q):
    for chi in character_group(q):
        if not chi.is_primitive():
            continue
        coeffs = [complex(chi(a)) for a in range(q)]
        for s in (2, 0.5 + 7j, 0.5 + 60j):
            ref = complex(mpmath.dirichlet(s, coeffs))
            assert abs(l_value(chi, s) - ref) <= 1e-9 * q


def test_l_value_refuses_imprimitive():
    with pytest.raises(ValueError):
        l_value(principal(4), 2)


def test_first_zero_chi4_vs_oracle():
    zs = find_zeros(CHI4, 10)
    assert zs.certified
    oracle = _mp_first_zero_chi4()
    assert zs.ordinates[0] == pytest.approx(oracle, abs=1e-6)
    assert zs.ordinates[0] == pytest.approx(6.0209, abs=1e-4)
    assert np.all((zs.ordinates > 0) & (zs.ordinates <= 10))


def test_zeta_zeros_small():
    assert find_zeros(ZETA, 14).ordinates.size == 0
    zs = find_zeros(ZETA, 15)
    assert zs.ordinates.size == 1 and zs.ordinates[0] == pytest.approx(14.134725141734693, abs=1e-9)
    assert find_zeros(CHI4, 1).ordinates.size == 0


def test_zeta_zeros_match_mpmath():
    zs = find_zeros(ZETA, 60)
    ref = [float(mpmath.zetazero(k).imag) for k in range(1, zs.ordinates.size + 1)]
    assert np.allclose(zs.ordinates, ref, atol=1e-9)
    assert float(mpmath.zetazero(zs.ordinates.size + 1).imag) > 60


def test_zero_count_estimate():
    assert zero_count_estimate(4, 10) == pytest.approx(10 / math.pi * math.log(40 / (2 * math.pi)) - 10 / math.pi)
    assert zero_count_estimate(4, 10) == pytest.approx(2.71, abs=0.01)


@pytest.mark.parametrize("q", [1, 3, 4, 5, 7, 8, 12])
def test_certification_invariants(q):
    T = 60
    for chi in character_group(q):
        if not chi.is_primitive():
            continue
        zs = find_zeros(chi, T)
        assert zs.certified
        assert zs.residual_bound <= 1e-8
        assert abs(zs.count() - zero_count_estimate(q, T)) <= 3 + math.log(T) + math.log(q)
        g = zs.ordinates
        assert np.all(np.diff(g) > 0)
        if chi.is_real:
            assert np.all(g > 0)
            # rotated function is even or odd, so the negative axis mirrors the positive one
            t = np.linspace(0.3, 30, 25)
            zp, zm = z_function(chi, t), z_function(chi, -t)
            assert np.allclose(np.abs(zp), np.abs(zm), atol=1e-9)


def test_complex_character_zeros_conjugate_pairing():
    chi = get_character(5, 1)
    zs = find_zeros(chi, 40)
    assert zs.certified and not zs.real
    assert np.any(zs.ordinates < 0) and np.any(zs.ordinates > 0)
    other = find_zeros(conjugate(chi), 40)
    assert np.allclose(np.sort(-other.ordinates), zs.ordinates, atol=1e-8)


def test_unit_interval_density():
    # zeros of chi_4 are separated and roughly uniformly dense at height ~100
    zs = find_zeros(CHI4, 100)
    g = zs.ordinates
    assert np.min(np.diff(g)) > 0.05
    mid = g[(g > 50) & (g <= 100)]
    expect = zero_count_estimate(4, 100) / 2 - zero_count_estimate(4, 50) / 2
    assert abs(mid.size - expect) <= 3 + math.log(100)


def test_zero_file_round_trip(tmp_path):
    zs = find_zeros(CHI4, 30)
    path = tmp_path / "q4i1.txt"
    write_zero_file(zs, path)
    head = path.read_text().splitlines()[0]
    assert head == "# CHEBZEROS1 q=4 index=1 conductor=4 parity=1 T=30 certified=true"
    back = read_zero_file(path)
    assert back.certified and back.q == 4 and back.parity == 1
    assert np.allclose(back.ordinates, zs.ordinates, atol=1e-12)
    assert back.signed().size == 2 * zs.ordinates.size


def test_zero_file_bad_header(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1.0\n2.0\n")
    with pytest.raises(ValueError):
        read_zero_file(p)


def test_find_zeros_refusals():
    with pytest.raises(ValueError):
        find_zeros(principal(4), 10)
    with pytest.raises(ValueError):
        find_zeros(CHI4, 0)


def test_signed_and_truncate():
    zs = find_zeros(CHI4, 30)
    s = zs.signed(20)
    assert np.allclose(s, -s[::-1])
    assert zs.truncate(20).count() == s.size
    with pytest.raises(ValueError):
        zs.truncate(40)
