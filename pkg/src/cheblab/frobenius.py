"""Frobenius classes of rational primes in a small catalog of Galois extensions.

The catalog holds quadratic fields, cyclotomic fields Q(zeta_q) and the
splitting field of x^3 - 2. Each entry carries its Galois group as an
explicit multiplication table so powered Frobenius classes and the square
root counts behind kappa come straight from group arithmetic.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Callable

import numpy as np

from .characters import factorize
from .sieve import PrimeTable

RAMIFIED = "ramified"


class UnknownExtension(KeyError):
    def __str__(self) -> str:
        return f"unknown extension {self.args[0]!r}; run `cheb-lab catalog` for the list"


class UnknownClass(ValueError):
    pass


# -- groups ------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group given by its multiplication table.

    ``classes`` maps a class id to the indices of its elements; the first
    element listed is the class representative.
    """

    name: str
    labels: tuple
    table: np.ndarray
    identity: int
    classes: dict[str, tuple[int, ...]]

    @property
    def order(self) -> int:
        return len(self.labels)

    def mul(self, g: int, h: int) -> int:
        return int(self.table[g, h])

    def power(self, g: int, m: int) -> int:
        out = self.identity
        for _ in range(m):
            out = self.mul(out, g)
        return out

    def class_of(self, g: int) -> str:
        for cid, members in self.classes.items():
            if g in members:
                return cid
        raise KeyError(g)

    def class_size(self, cid: str) -> int:
        return len(self.classes[cid])

    def representative(self, cid: str) -> int:
        return self.classes[cid][0]


def group_from(name: str, elements, op, class_names: Callable | None = None) -> FiniteGroup:
    """Build a group table from elements and a binary operation.

    Conjugacy classes are computed directly; ``class_names`` maps a sorted
    tuple of member labels to an id (defaults to the representative's label).
    """
    elements = list(elements)
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    table = np.array([[index[op(a, b)] for b in elements] for a in elements], dtype=np.int64)
    ident = next(i for i in range(n) if all(table[i, j] == j for j in range(n)))
    inv = [next(j for j in range(n) if table[i, j] == ident) for i in range(n)]
    seen, classes = set(), {}
    for i in range(n):
        if i in seen:
            continue
        members = sorted({int(table[table[h, i], inv[h]]) for h in range(n)})
        members.remove(i)
        members = [i] + members
        seen.update(members)
        cid = class_names(tuple(elements[m] for m in members)) if class_names else str(elements[i])
        classes[cid] = tuple(members)
    return FiniteGroup(name, tuple(elements), table, ident, classes)


# -- number theory helpers ------------------------------------------------------------


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n >= 1."""
    if n <= 0:
        raise ValueError("kronecker symbol needs n >= 1")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _squarefree(d: int) -> bool:
    return all(k == 1 for _, k in factorize(abs(d)))


def _modpow(base: np.ndarray, exp: np.ndarray, mod: np.ndarray) -> np.ndarray:
    # int64 safe while mod < 3e9
    result = np.ones_like(mod)
    b = base % mod
    e = exp.copy()
    while np.any(e):
        odd = (e & 1).astype(bool)
        result = np.where(odd, result * b % mod, result)
        b = b * b % mod
        e >>= 1
    return result


# -- catalog entries -----------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticField:
    """Q(sqrt d) for squarefree d != 0, 1."""

    d: int

    def __post_init__(self):
        if self.d in (0, 1) or not _squarefree(self.d):
            raise ValueError(f"d must be squarefree and not 0 or 1, got {self.d}")

    @property
    def discriminant(self) -> int:
        return self.d if self.d % 4 == 1 else 4 * self.d

    def ext_id(self) -> str:
        if self.d == -1:
            return "gauss_i"
        return f"quad_{'m' if self.d < 0 else ''}{abs(self.d)}"

    def kronecker_table(self) -> np.ndarray:
        D = self.discriminant
        return np.array([kronecker(D, a) if a else 0 for a in range(abs(D))], dtype=np.int64)


def classify_quadratic(p: int, F: QuadraticField) -> str:
    """Splitting type of p in F from the Kronecker symbol (D/p)."""
    k = kronecker(F.discriminant, p)
    return {1: "split", -1: "inert", 0: RAMIFIED}[k]


def _cube_roots_of_two(p: int) -> int:
    return sum(1 for x in range(p) if (x * x * x - 2) % p == 0)


def classify_s3(p: int) -> str:
    """Frobenius class of p in the splitting field of x^3 - 2."""
    if p in (2, 3):
        return RAMIFIED
    if p < 10_000:
        roots = _cube_roots_of_two(p)
    elif p % 3 == 2:
        roots = 1
    else:
        roots = 3 if pow(2, (p - 1) // 3, p) == 1 else 0
    return {3: "identity", 1: "transposition", 0: "three_cycle"}[roots]


@dataclass(frozen=True)
class ExtensionCatalogEntry:
    """A Galois extension L/Q with a computable Frobenius map.

    ``classify_many`` returns, for an array of primes, the index of each
    prime's class in ``class_ids`` or -1 for ramified primes.
    """

    id: str
    description: str
    group: FiniteGroup
    ramified: frozenset[int]
    classify_many: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    abelian_reduction: tuple[int, dict[str, tuple[int, ...]]] | None = None
    quadratic: QuadraticField | None = None

    @property
    def class_ids(self) -> list[str]:
        return list(self.group.classes)

    def class_size(self, cid: str) -> int:
        return self.group.class_size(cid)

    def classify(self, p: int) -> str:
        if p in self.ramified:
            return RAMIFIED
        i = int(self.classify_many(np.array([p], dtype=np.int64))[0])
        return RAMIFIED if i < 0 else self.class_ids[i]

    def check_classes(self, class_ids) -> list[str]:
        ids = list(class_ids)
        unknown = [c for c in ids if c not in self.group.classes]
        if unknown:
            raise UnknownClass(f"unknown classes {unknown} for {self.id}; known: {self.class_ids}")
        if len(set(ids)) != len(ids):
            raise UnknownClass(f"duplicate classes {ids}")
        return ids

    def density(self, class_ids) -> Fraction:
        ids = self.check_classes(class_ids)
        return Fraction(sum(self.class_size(c) for c in ids), self.group.order)


def _c2() -> FiniteGroup:
    names = {("e",): "split", ("t",): "inert"}
    return group_from("C2", ["e", "t"], lambda a, b: "e" if a == b else "t", lambda m: names[m])


def quadratic_entry(d: int) -> ExtensionCatalogEntry:
    F = QuadraticField(d)
    D = F.discriminant
    kt = F.kronecker_table()

    def many(primes):
        k = kt[primes % abs(D)]
        return np.where(k == 1, 0, np.where(k == -1, 1, -1))

    units = [a for a in range(abs(D)) if math.gcd(a, D) == 1]
    reduction = (abs(D), {"split": tuple(a for a in units if kt[a] == 1),
                          "inert": tuple(a for a in units if kt[a] == -1)})
    ram = frozenset(p for p, _ in factorize(abs(D)))
    return ExtensionCatalogEntry(F.ext_id(), f"Q(sqrt({d})), discriminant {D}", _c2(), ram,
                                 many, reduction, F)


def cyclotomic_entry(q: int) -> ExtensionCatalogEntry:
    if q < 3 or q % 4 == 2 or q > 60:
        raise UnknownExtension(f"cyclo_{q}: need 3 <= q <= 60 and q != 2 mod 4")
    units = [a for a in range(1, q) if math.gcd(a, q) == 1]
    group = group_from(f"(Z/{q})*", units, lambda a, b: a * b % q)
    pos = np.full(q, -1, dtype=np.int64)
    for i, cid in enumerate(group.classes):
        pos[int(cid)] = i

    def many(primes):
        return pos[primes % q]

    reduction = (q, {str(a): (a,) for a in units})
    ram = frozenset(p for p, _ in factorize(q))
    return ExtensionCatalogEntry(f"cyclo_{q}", f"Q(zeta_{q})", group, ram, many, reduction)


def _s3() -> FiniteGroup:
    def compose(a, b):
        return tuple(a[b[i]] for i in range(3))

    def name(members):
        fixed = sum(1 for i in range(3) if members[0][i] == i)
        return {3: "identity", 1: "transposition", 0: "three_cycle"}[fixed]

    return group_from("S3", list(permutations(range(3))), compose, name)


def _s3_many(primes: np.ndarray) -> np.ndarray:
    primes = np.asarray(primes, dtype=np.int64)
    out = np.full(primes.size, -1, dtype=np.int64)
    small = (primes < 10_000) & (primes > 3)
    for i in np.flatnonzero(small):
        out[i] = {3: 0, 1: 1, 0: 2}[_cube_roots_of_two(int(primes[i]))]
    big = primes >= 10_000
    pb = primes[big]
    cls = np.where(pb % 3 == 2, 1, 2)
    one = pb % 3 == 1
    cube = _modpow(np.full(one.sum(), 2, dtype=np.int64), (pb[one] - 1) // 3, pb[one]) == 1
    sub = cls[one]
    sub[cube] = 0
    cls[one] = sub
    out[big] = cls
    return out


def s3_entry() -> ExtensionCatalogEntry:
    group = _s3()
    order = list(group.classes)
    # classify_many indexes follow the group's class order
    remap = np.array([order.index(c) for c in ("identity", "transposition", "three_cycle")])

    def many(primes):
        raw = _s3_many(primes)
        return np.where(raw < 0, -1, remap[np.maximum(raw, 0)])

    return ExtensionCatalogEntry("s3_x3m2", "splitting field of x^3 - 2 (Galois group S3)",
                                 group, frozenset({2, 3}), many)


QUADRATIC_CATALOG = (-1, -2, -3, -7, 2, 3, 5)


@lru_cache(maxsize=None)
def get_extension(ext_id: str) -> ExtensionCatalogEntry:
    if ext_id == "s3_x3m2":
        return s3_entry()
    if ext_id == "gauss_i":
        return quadratic_entry(-1)
    if ext_id.startswith("quad_"):
        tail = ext_id[5:]
        try:
            d = -int(tail[1:]) if tail.startswith("m") else int(tail)
        except ValueError:
            raise UnknownExtension(ext_id) from None
        if d not in QUADRATIC_CATALOG or d == -1:
            raise UnknownExtension(ext_id)
        return quadratic_entry(d)
    if ext_id.startswith("cyclo_"):
        try:
            return cyclotomic_entry(int(ext_id[6:]))
        except ValueError:
            raise UnknownExtension(ext_id) from None
    raise UnknownExtension(ext_id)


def catalog_ids() -> list[str]:
    ids = ["gauss_i"] + [QuadraticField(d).ext_id() for d in QUADRATIC_CATALOG if d != -1]
    ids += [f"cyclo_{q}" for q in range(3, 61) if q % 4 != 2]
    ids.append("s3_x3m2")
    return ids


# -- counting --------------------------------------------------------------------------


def _class_mask(ext: ExtensionCatalogEntry, class_ids) -> np.ndarray:
    ids = ext.check_classes(class_ids)
    mask = np.zeros(len(ext.class_ids), dtype=bool)
    for c in ids:
        mask[ext.class_ids.index(c)] = True
    return mask


def classify_table(table: PrimeTable, ext: ExtensionCatalogEntry) -> np.ndarray:
    return _cached_classes(table, ext)


_CLASS_CACHE: dict[tuple[int, str], tuple[weakref.ref, np.ndarray]] = {}


def _cached_classes(table: PrimeTable, ext: ExtensionCatalogEntry) -> np.ndarray:
    key = (id(table), ext.id)
    hit = _CLASS_CACHE.get(key)
    if hit is None or hit[0]() is not table:
        hit = (weakref.ref(table), ext.classify_many(table.primes))
        _CLASS_CACHE[key] = hit
    return hit[1]


def pi_chebotarev(table: PrimeTable, ext: ExtensionCatalogEntry, class_ids, x: float) -> int:
    """Unramified p <= x whose Frobenius class is one of ``class_ids``."""
    mask = _class_mask(ext, class_ids)
    n = table.pi(x)
    cls = classify_table(table, ext)[:n]
    return int(np.count_nonzero((cls >= 0) & mask[np.maximum(cls, 0)]))


def r_chebotarev(table: PrimeTable, ext: ExtensionCatalogEntry, class_ids, x: float) -> float:
    """Sum of 1/m over p**m <= x, m >= 2, with Frob(p)**m in the target classes."""
    targets = set(ext.check_classes(class_ids))
    table.check(x)
    total = []
    g = ext.group
    for p in table.primes[: table.pi(math.sqrt(x) + 1e-9)].tolist():
        if p * p > x:
            break
        cid = ext.classify(p)
        if cid == RAMIFIED:
            continue
        rep = g.representative(cid)
        m, pm = 2, p * p
        while pm <= x:
            if g.class_of(g.power(rep, m)) in targets:
                total.append(1.0 / m)
            m += 1
            pm *= p
    return math.fsum(total)


def kappa_chebotarev(ext: ExtensionCatalogEntry, class_ids) -> Fraction:
    """(1/|G|) * sum_j |C_j| * #{b in G : b**2 = g_j}, g_j a fixed element of C_j."""
    g = ext.group
    total = 0
    for cid in ext.check_classes(class_ids):
        rep = g.representative(cid)
        roots = sum(1 for b in range(g.order) if g.mul(b, b) == rep)
        total += g.class_size(cid) * roots
    return Fraction(total, g.order)


def census(table: PrimeTable, ext: ExtensionCatalogEntry, x: float) -> dict[str, dict]:
    """Class frequencies among unramified p <= x against |C|/|G|."""
    n = table.pi(x)
    cls = classify_table(table, ext)[:n]
    unram = int(np.count_nonzero(cls >= 0))
    out = {}
    for i, cid in enumerate(ext.class_ids):
        count = int(np.count_nonzero(cls == i))
        freq = count / unram if unram else float("nan")
        expected = ext.class_size(cid) / ext.group.order
        out[cid] = {"count": count, "frequency": freq, "expected": expected,
                    "deviation": freq - expected}
    return out


# -- prime ideals of quadratic fields -------------------------------------------------


def _quadratic_types(table: PrimeTable, F: QuadraticField, n: int) -> np.ndarray:
    kt = F.kronecker_table()
    return kt[table.primes[:n] % abs(F.discriminant)]


def dedekind_pi(table: PrimeTable, F: QuadraticField, x: float) -> int:
    """Prime ideals of norm <= x: two per split p, one per inert p with
    p**2 <= x, one per ramified p."""
    n = table.pi(x)
    k = _quadratic_types(table, F, n)
    split = int(np.count_nonzero(k == 1))
    ram = int(np.count_nonzero(k == 0))
    r = math.isqrt(int(math.floor(x)))
    inert = int(np.count_nonzero((k == -1) & (table.primes[:n] <= r)))
    return 2 * split + ram + inert


def dedekind_r(table: PrimeTable, F: QuadraticField, x: float) -> float:
    """Sum of 1/m over prime ideals P and m >= 2 with N(P)**m <= x."""
    table.check(x)
    terms = []
    n = table.pi(math.sqrt(x) + 1e-9)
    k = _quadratic_types(table, F, n)
    for p, kind in zip(table.primes[:n].tolist(), k.tolist()):
        norm = p * p if kind == -1 else p
        mult = 2 if kind == 1 else 1
        m, nm = 2, norm * norm
        while nm <= x:
            terms.extend([1.0 / m] * mult)
            m += 1
            nm *= norm
    return math.fsum(terms)


def dedekind_jumps(table: PrimeTable, F: QuadraticField) -> tuple[np.ndarray, np.ndarray]:
    """Jump positions and sizes of x -> pi(x, F) up to the table bound."""
    p = table.primes
    k = F.kronecker_table()[p % abs(F.discriminant)]
    pos = [p[k == 1], p[k == 0]]
    wts = [np.full(pos[0].size, 2.0), np.full(pos[1].size, 1.0)]
    inert = p[(k == -1) & (p <= math.isqrt(table.x_max))]
    pos.append(inert * inert)
    wts.append(np.ones(inert.size))
    pos, wts = np.concatenate(pos), np.concatenate(wts)
    order = np.argsort(pos, kind="stable")
    return pos[order], wts[order]
