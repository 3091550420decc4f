"""Prime counts in residue classes, twisted Chebyshev sums, and c_chi / kappa."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .characters import DirichletCharacter, character_group, euler_phi
from .sieve import PrimeTable


def canonical_classes(classes, q: int) -> tuple[int, ...]:
    """Reduce residues to [0, q), rejecting duplicates and non-units."""
    reduced = [int(a) % q for a in classes]
    if len(set(reduced)) != len(reduced):
        raise ValueError(f"duplicate residue classes mod {q}: {list(classes)}")
    bad = [a for a in reduced if math.gcd(a, q) != 1]
    if bad:
        raise ValueError(f"residues {bad} are not coprime to {q}")
    return tuple(sorted(reduced))


def pi_progression(table: PrimeTable, x: float, q: int, a: int) -> int:
    table.check(x)
    p = table.primes[: table.pi(x)]
    return int(np.count_nonzero(p % q == a % q))


def r_progression(table: PrimeTable, x: float, q: int, a: int) -> float:
    """Sum of 1/k over p**k <= x with k >= 2 and p**k = a mod q."""
    table.check(x)
    n = int(np.searchsorted(table.pp_values, math.floor(x), side="right"))
    v, k = table.pp_values[:n], table.pp_exp[:n]
    sel = (k >= 2) & (v % q == a % q)
    return float(math.fsum((1.0 / k[sel]).tolist()))


def big_pi_progression(table: PrimeTable, x: float, q: int, a: int) -> float:
    return pi_progression(table, x, q, a) + r_progression(table, x, q, a)


def psi_progression(table: PrimeTable, x: float, q: int, a: int) -> float:
    table.check(x)
    n = int(np.searchsorted(table.pp_values, math.floor(x), side="right"))
    sel = table.pp_values[:n] % q == a % q
    return float(math.fsum(np.log(table.pp_base[:n][sel].astype(float)).tolist()))


def psi_chi(table: PrimeTable, chi: DirichletCharacter, x: float) -> complex:
    """psi(x, chi) = sum_{n <= x} chi(n) Lambda(n)."""
    table.check(x)
    if x < 2:
        return 0j
    n = int(np.searchsorted(table.pp_values, math.floor(x), side="right"))
    v = table.pp_values[:n]
    logs = np.log(table.pp_base[:n].astype(float))
    vals = chi.values()[v % chi.modulus]
    re = math.fsum((vals.real * logs).tolist())
    im = math.fsum((vals.imag * logs).tolist())
    return complex(re, im)


def psi_chi_array(table: PrimeTable, chi: DirichletCharacter, xs) -> np.ndarray:
    """psi(x, chi) at many points via a prefix sum over prime powers."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and xs.max() > table.x_max:
        table.check(xs.max())
    logs = np.log(table.pp_base.astype(float))
    vals = chi.values()[table.pp_values % chi.modulus]
    prefix = np.concatenate(([0j], np.cumsum(vals * logs)))
    return prefix[np.searchsorted(table.pp_values, np.floor(xs), side="right")]


def ramified_log_sum(table: PrimeTable, q: int, x: float) -> float:
    """sum over p**k <= x with p | q of log p."""
    n = int(np.searchsorted(table.pp_values, math.floor(x), side="right"))
    base = table.pp_base[:n]
    sel = np.gcd(base, q) > 1
    return float(math.fsum(np.log(base[sel].astype(float)).tolist()))


@dataclass(frozen=True)
class ProgressionCount:
    q: int
    a: int
    x: float
    pi_value: int
    R_value: float
    psi_value: float

    @property
    def Pi_value(self) -> float:
        return self.pi_value + self.R_value


def progression_count(table: PrimeTable, x: float, q: int, a: int) -> ProgressionCount:
    return ProgressionCount(q, a % q, x, pi_progression(table, x, q, a),
                            r_progression(table, x, q, a), psi_progression(table, x, q, a))


def c_chi(classes, q: int, chi: DirichletCharacter) -> complex:
    """(1/phi(q)) * sum_j conj(chi)(a_j)."""
    classes = canonical_classes(classes, q)
    if chi.modulus != q:
        raise ValueError(f"character modulus {chi.modulus} differs from {q}")
    total = sum(chi(a).conjugate() for a in classes)
    return complex(total) / euler_phi(q)


def c_chi_all(classes, q: int) -> dict[DirichletCharacter, complex]:
    return {chi: c_chi(classes, q, chi) for chi in character_group(q)}


def kappa_residue(classes, q: int) -> Fraction:
    """(1/phi(q)) * #{(j, b): b unit mod q, b**2 = a_j}."""
    classes = canonical_classes(classes, q)
    units = [b for b in range(q) if math.gcd(b, q) == 1] if q > 1 else [0]
    squares = [b * b % q for b in units]
    hits = sum(squares.count(a) for a in classes)
    return Fraction(hits, euler_phi(q))
