"""Dirichlet characters with exact root-of-unity values.

The unit group (Z/q)* is split by CRT into cyclic factors with explicit
generators: a primitive root for each odd prime power, ``-1`` for 4, and
``-1, 5`` for 2**k with k >= 3. A character is the tuple of exponents it
assigns to those generators; values are stored as integers ``e`` meaning
``exp(2*pi*i*e/m)`` with ``m`` the exponent of the group.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np


def factorize(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out.append((p, k))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def _primitive_root(p: int, k: int) -> int:
    """Smallest primitive root mod p**k for an odd prime p."""
    phi = (p - 1) * p ** (k - 1)
    mod = p**k
    odd_factors = [f for f, _ in factorize(phi)]
    for g in range(2, mod):
        if g % p and all(pow(g, phi // f, mod) != 1 for f in odd_factors):
            return g
    raise ArithmeticError(f"no primitive root mod {mod}")


@dataclass(frozen=True)
class _Factor:
    modulus: int  # the prime power this factor lives in
    generator: int  # generator residue mod q (lifted by CRT)
    order: int


def _crt_lift(residue: int, part: int, q: int) -> int:
    """The x mod q with x = residue mod part and x = 1 mod q // part."""
    other = q // part
    if other == 1:
        return residue % q
    # x = 1 + other * t, solve other * t = residue - 1 (mod part)
    t = ((residue - 1) * pow(other, -1, part)) % part
    return (1 + other * t) % q


@lru_cache(maxsize=None)
def _structure(q: int) -> tuple[tuple[_Factor, ...], int, np.ndarray]:
    """Generators, group exponent, and a log table (residue -> exponent vector)."""
    factors = []
    for p, k in factorize(q):
        pk = p**k
        if p == 2:
            if k == 2:
                factors.append(_Factor(pk, _crt_lift(-1, pk, q), 2))
            elif k >= 3:
                factors.append(_Factor(pk, _crt_lift(-1, pk, q), 2))
                factors.append(_Factor(pk, _crt_lift(5, pk, q), 2 ** (k - 2)))
        else:
            g = _primitive_root(p, k)
            factors.append(_Factor(pk, _crt_lift(g, pk, q), (p - 1) * p ** (k - 1)))
    exponent = math.lcm(*(f.order for f in factors)) if factors else 1
    logs = np.full((q, len(factors)), -1, dtype=np.int64)
    # enumerate the group as products of generator powers
    for exps in product(*(range(f.order) for f in factors)):
        a = 1
        for f, e in zip(factors, exps):
            a = a * pow(f.generator, e, q) % q
        logs[a % q] = exps
    if q == 1:
        logs = np.zeros((1, 0), dtype=np.int64)
    return tuple(factors), exponent, logs


@dataclass(frozen=True)
class DirichletCharacter:
    """A Dirichlet character mod ``modulus``.

    ``exps`` are the exponents on the canonical generators; ``index`` is the
    position of ``exps`` in lexicographic order, so the principal character
    is always index 0. ``table[a]`` is the value exponent for residue ``a``
    (a multiple of ``1/order`` turns scaled by ``order``), or -1 when
    gcd(a, q) > 1.
    """

    modulus: int
    index: int
    exps: tuple[int, ...]
    order: int
    table: tuple[int, ...]

    @property
    def descriptor(self) -> str:
        return f"{self.modulus}:{self.index}"

    @property
    def is_principal(self) -> bool:
        return all(e == 0 for e in self.exps)

    @property
    def is_real(self) -> bool:
        return all(2 * e % self.order == 0 for e in self.table if e >= 0)

    @property
    def parity(self) -> int:
        """0 for even characters, 1 for odd ones."""
        e = self.table[(self.modulus - 1) % self.modulus]
        return 0 if e == 0 else 1

    def exponent(self, n: int) -> int:
        """Value exponent of chi(n) in units of 1/order turns, -1 if chi(n)=0."""
        return self.table[n % self.modulus]

    def __call__(self, n: int) -> complex:
        return eval_char(self, n)

    def values(self) -> np.ndarray:
        """Complex values on residues 0..q-1."""
        return np.array([_root_value(e, self.order) for e in self.table], dtype=complex)

    def conductor(self) -> int:
        return conductor_and_inducer(self)[0]

    def inducer(self) -> DirichletCharacter:
        return conductor_and_inducer(self)[1]

    def is_primitive(self) -> bool:
        return self.conductor() == self.modulus

    def __repr__(self) -> str:
        return f"DirichletCharacter({self.descriptor})"


def _root_value(e: int, m: int) -> complex:
    if e < 0:
        return 0j
    e %= m
    if 4 * e % m == 0:
        return (1, 1j, -1, -1j)[4 * e // m]
    return cmath.exp(2j * math.pi * e / m)


@lru_cache(maxsize=None)
def character_group(q: int) -> tuple[DirichletCharacter, ...]:
    """All phi(q) characters mod q in canonical (lexicographic) order."""
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    factors, m, logs = _structure(q)
    units = [a for a in range(q) if math.gcd(a, q) == 1] if q > 1 else [0]
    chars = []
    for idx, exps in enumerate(product(*(range(f.order) for f in factors))):
        table = [-1] * q
        for a in units:
            table[a] = sum(e * int(l) * (m // f.order) for e, l, f in zip(exps, logs[a], factors)) % m
        chars.append(DirichletCharacter(q, idx, tuple(exps), m, tuple(table)))
    return tuple(chars)


def get_character(q: int, index: int) -> DirichletCharacter:
    group = character_group(q)
    if not 0 <= index < len(group):
        raise ValueError(f"character index {index} out of range for modulus {q}")
    return group[index]


def parse_descriptor(text: str) -> DirichletCharacter:
    """Parse ``"q:index"``."""
    try:
        q, i = (int(part) for part in text.split(":"))
    except ValueError:
        raise ValueError(f"bad character descriptor {text!r}, expected 'q:index'") from None
    return get_character(q, i)


def principal(q: int) -> DirichletCharacter:
    return character_group(q)[0]


def eval_char(chi: DirichletCharacter, n: int) -> complex:
    return _root_value(chi.table[n % chi.modulus], chi.order)


@lru_cache(maxsize=None)
def conductor_and_inducer(chi: DirichletCharacter) -> tuple[int, DirichletCharacter]:
    """Smallest q1 | q through which chi factors, and the primitive chi1 mod q1."""
    q = chi.modulus
    units = [a for a in range(q) if math.gcd(a, q) == 1]
    for q1 in sorted(d for d in range(1, q + 1) if q % d == 0):
        if all(chi.table[a] == 0 for a in units if a % q1 == 1 % q1):
            break
    # chi1(b) = chi(a) for any unit a = b mod q1
    lift = {}
    for a in units:
        lift.setdefault(a % q1, a)
    for cand in character_group(q1):
        if all(cand.table[b] * chi.order == chi.table[a] * cand.order for b, a in lift.items()):
            return q1, cand
    raise ArithmeticError(f"no inducing character found for {chi}")


def primitive_characters(q: int) -> list[DirichletCharacter]:
    return [chi for chi in character_group(q) if chi.is_primitive()]


def conjugate(chi: DirichletCharacter) -> DirichletCharacter:
    neg = tuple((-e) % f.order for e, f in zip(chi.exps, _structure(chi.modulus)[0]))
    for c in character_group(chi.modulus):
        if c.exps == neg:
            return c
    raise ArithmeticError("conjugate not found")


# -- exact cyclotomic sums -----------------------------------------------------


@lru_cache(maxsize=None)
def cyclotomic_poly(m: int) -> tuple[int, ...]:
    """Integer coefficients of the m-th cyclotomic polynomial, low degree first."""
    num = [-1] + [0] * (m - 1) + [1]
    for d in range(1, m):
        if m % d == 0:
            num = _polydiv_exact(num, list(cyclotomic_poly(d)))
    return tuple(num)


def _polydiv_exact(num: list[int], den: list[int]) -> list[int]:
    num = num[:]
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    assert not any(num), "non-exact cyclotomic division"
    return out


@lru_cache(maxsize=None)
def power_basis_matrix(m: int) -> np.ndarray:
    """Row k holds the coordinates of zeta_m**k in the basis 1..zeta**(phi(m)-1)."""
    phi_poly = cyclotomic_poly(m)
    deg = len(phi_poly) - 1
    rows = np.zeros((m, deg), dtype=np.int64)
    cur = [0] * deg
    cur[0] = 1
    for k in range(m):
        rows[k] = cur
        # multiply by X and reduce mod the monic cyclotomic polynomial
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi_poly[:-1])]
    return rows


def exact_root_sum(exponents, m: int) -> np.ndarray:
    """Sum of zeta_m**e over ``exponents`` as exact integer coordinates.

    Works on the last axis, so a 2-d array gives one coordinate vector per
    row. The sum is zero exactly when every coordinate is zero.
    """
    e = np.asarray(exponents) % m
    counts = np.zeros(e.shape[:-1] + (m,), dtype=np.int64)
    flat = counts.reshape(-1, m)
    rows = e.reshape(-1, e.shape[-1])
    offsets = (np.arange(rows.shape[0]) * m)[:, None]
    np.add.at(flat.reshape(-1), (rows + offsets).ravel(), 1)
    return counts @ power_basis_matrix(m)
