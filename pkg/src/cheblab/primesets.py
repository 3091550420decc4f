"""Declarative prime sets and their counting functions.

Every spec reduces to a jump representation: the sorted primes where the
counting function steps and the step sizes. Counting, symmetric differences
and the discrepancy evaluators in :mod:`cheblab.explicit` all work from it.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from .characters import euler_phi, factorize
from .counting import canonical_classes
from .frobenius import ExtensionCatalogEntry, UnknownClass, classify_table, get_extension
from .sieve import PrimeTable

Weight = Union[Fraction, complex]


class SpecError(ValueError):
    """Invalid prime-set specification."""


class SpecParseError(SpecError):
    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        pointer = " " * position + "^"
        super().__init__(f"{message} at column {position}\n  {text}\n  {pointer}")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def _check_exceptions(added, removed, member: Callable[[int], bool]) -> tuple[tuple, tuple]:
    added = tuple(sorted({int(p) for p in added}))
    removed = tuple(sorted({int(p) for p in removed}))
    bad = [p for p in added + removed if not is_prime(p)]
    if bad:
        raise SpecError(f"exceptions must be primes, got {bad}")
    both = set(added) & set(removed)
    if both:
        raise SpecError(f"primes {sorted(both)} are both added and removed")
    inside = [p for p in added if member(p)]
    if inside:
        raise SpecError(f"added primes {inside} already belong to the set")
    outside = [p for p in removed if not member(p)]
    if outside:
        raise SpecError(f"removed primes {outside} are not in the set")
    return added, removed


# -- spec variants -----------------------------------------------------------------


@dataclass(frozen=True)
class ResidueUnion:
    """Primes in the classes a_j mod q, plus ``added`` minus ``removed``."""

    q: int
    classes: tuple[int, ...]
    added: tuple[int, ...] = ()
    removed: tuple[int, ...] = ()

    def __post_init__(self):
        if self.q < 1:
            raise SpecError(f"modulus must be positive, got {self.q}")
        try:
            classes = canonical_classes(self.classes, self.q)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
        object.__setattr__(self, "classes", classes)
        added, removed = _check_exceptions(self.added, self.removed, self._in_classes)
        object.__setattr__(self, "added", added)
        object.__setattr__(self, "removed", removed)

    def _in_classes(self, p: int) -> bool:
        return p % self.q in self.classes and math.gcd(p, self.q) == 1

    def contains(self, p: int) -> bool:
        return p in self.added or (self._in_classes(p) and p not in self.removed)

    @property
    def density(self) -> Fraction:
        return Fraction(len(self.classes), euler_phi(self.q))

    @property
    def exception_balance(self) -> int:
        return len(self.added) - len(self.removed)

    def __str__(self) -> str:
        return (f"residue q={self.q} classes={_join(self.classes)} "
                f"add={_join(self.added)} remove={_join(self.removed)}")


@dataclass(frozen=True)
class FrobeniusUnion:
    """Unramified primes whose Frobenius class is one of ``classes``."""

    ext: str
    classes: tuple[str, ...]
    added: tuple[int, ...] = ()
    removed: tuple[int, ...] = ()

    def __post_init__(self):
        entry = _extension(self.ext)
        object.__setattr__(self, "classes", tuple(_check_classes(entry, self.classes)))
        added, removed = _check_exceptions(self.added, self.removed, self._in_classes)
        object.__setattr__(self, "added", added)
        object.__setattr__(self, "removed", removed)

    @property
    def entry(self) -> ExtensionCatalogEntry:
        return get_extension(self.ext)

    def _in_classes(self, p: int) -> bool:
        return self.entry.classify(p) in self.classes

    def contains(self, p: int) -> bool:
        return p in self.added or (self._in_classes(p) and p not in self.removed)

    @property
    def density(self) -> Fraction:
        return self.entry.density(self.classes)

    @property
    def exception_balance(self) -> int:
        return len(self.added) - len(self.removed)

    def __str__(self) -> str:
        return (f"frobenius ext={self.ext} classes={_join(self.classes)} "
                f"add={_join(self.added)} remove={_join(self.removed)}")


@dataclass(frozen=True)
class Weighted:
    """F(x) = sum_j weight_j * pi(x, C_j) over classes of one extension."""

    ext: str
    weights: tuple[tuple[str, Weight], ...]

    def __post_init__(self):
        entry = _extension(self.ext)
        _check_classes(entry, [c for c, _ in self.weights])
        object.__setattr__(self, "weights", tuple((c, _as_weight(w)) for c, w in self.weights))

    @property
    def entry(self) -> ExtensionCatalogEntry:
        return get_extension(self.ext)

    @property
    def density(self) -> Weight:
        """(1/|G|) * sum_j weight_j |C_j|."""
        g = self.entry.group
        return sum((w * g.class_size(c) for c, w in self.weights), Fraction(0)) / g.order

    def __str__(self) -> str:
        return f"weighted ext={self.ext} " + ",".join(f"{c}:{_fmt_weight(w)}" for c, w in self.weights)


@dataclass(frozen=True)
class OddIndexed:
    """p_1, p_3, p_5, ... = 2, 5, 11, 17, 23, ..."""

    @property
    def density(self) -> Fraction:
        return Fraction(1, 2)

    def __str__(self) -> str:
        return "podd"


@dataclass(frozen=True)
class Procedural:
    """Membership by callback. Counting only; no explicit formula exists."""

    name: str
    member: Callable[[int], bool] = field(compare=False)
    density: Fraction | None = None

    def contains(self, p: int) -> bool:
        return bool(self.member(p))

    def __str__(self) -> str:
        return f"procedural {self.name}"


PrimeSetSpec = Union[ResidueUnion, FrobeniusUnion, Weighted, OddIndexed, Procedural]


def _extension(ext_id: str) -> ExtensionCatalogEntry:
    try:
        return get_extension(ext_id)
    except KeyError as exc:
        raise SpecError(f"unknown extension {ext_id!r}") from exc


def _check_classes(entry: ExtensionCatalogEntry, ids) -> list[str]:
    try:
        return entry.check_classes(ids)
    except UnknownClass as exc:
        raise SpecError(str(exc)) from None


def _as_weight(w) -> Weight:
    if isinstance(w, Fraction):
        return w
    if isinstance(w, int):
        return Fraction(w)
    if isinstance(w, float):
        return Fraction(w).limit_denominator(10**9) if math.isfinite(w) else complex(w)
    if isinstance(w, complex):
        return Fraction(w.real).limit_denominator(10**9) if w.imag == 0 else w
    if isinstance(w, str):
        return _parse_weight(w)
    raise SpecError(f"bad weight {w!r}")


def _parse_weight(text: str) -> Weight:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        raise SpecError(f"bad weight {text!r}") from None


def _fmt_weight(w: Weight) -> str:
    if isinstance(w, Fraction):
        return str(w)
    return repr(complex(w)).strip("()")


def _join(items) -> str:
    return ",".join(str(i) for i in items)


# -- jump representation ---------------------------------------------------------------


@dataclass(frozen=True)
class Jumps:
    """A right-continuous step function: sum of ``weights[i]`` over positions <= x."""

    positions: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        order = np.argsort(self.positions, kind="stable")
        pos = np.asarray(self.positions, dtype=np.int64)[order]
        w = np.asarray(self.weights)[order]
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "_prefix", np.concatenate(([0], np.cumsum(w))))

    def __call__(self, x):
        idx = np.searchsorted(self.positions, np.floor(np.asarray(x, dtype=float)), side="right")
        return self._prefix[idx]

    def combine(self, other: Jumps, scale=1.0) -> Jumps:
        """self + scale * other, merging coincident positions."""
        pos = np.concatenate((self.positions, other.positions))
        w = np.concatenate((self.weights.astype(complex), scale * other.weights.astype(complex)))
        if not np.iscomplexobj(scale) and not np.iscomplexobj(self.weights) and not np.iscomplexobj(other.weights):
            w = w.real
        return Jumps(pos, w).merged()

    def merged(self) -> Jumps:
        """Sum weights at equal positions and drop exact zeros."""
        if not self.positions.size:
            return self
        uniq, inv = np.unique(self.positions, return_inverse=True)
        w = np.zeros(uniq.size, dtype=self.weights.dtype)
        np.add.at(w, inv, self.weights)
        keep = w != 0
        return Jumps(uniq[keep], w[keep])

    def count_jumps(self, x: float) -> int:
        m = self.merged()
        return int(np.searchsorted(m.positions, math.floor(x), side="right"))


def _unit_jumps(primes: np.ndarray) -> Jumps:
    return Jumps(primes, np.ones(primes.size, dtype=np.int64))


def _with_exceptions(base: np.ndarray, added, removed, table: PrimeTable) -> np.ndarray:
    if removed:
        base = base[~np.isin(base, np.array(removed, dtype=np.int64))]
    extra = np.array([p for p in added if p <= table.x_max], dtype=np.int64)
    return np.union1d(base, extra) if extra.size else base


def member_primes(spec: PrimeSetSpec, table: PrimeTable) -> np.ndarray:
    """All primes of an unweighted spec up to the table bound."""
    p = table.primes
    if isinstance(spec, ResidueUnion):
        mask = np.isin(p % spec.q, spec.classes) & (np.gcd(p, spec.q) == 1)
        return _with_exceptions(p[mask], spec.added, spec.removed, table)
    if isinstance(spec, FrobeniusUnion):
        entry = spec.entry
        cls = classify_table(table, entry)
        idx = [entry.class_ids.index(c) for c in spec.classes]
        return _with_exceptions(p[np.isin(cls, idx)], spec.added, spec.removed, table)
    if isinstance(spec, OddIndexed):
        return p[::2]
    if isinstance(spec, Procedural):
        return p[np.fromiter((spec.contains(int(v)) for v in p), dtype=bool, count=p.size)]
    raise SpecError(f"{type(spec).__name__} has no membership")


def jumps(spec: PrimeSetSpec, table: PrimeTable) -> Jumps:
    if isinstance(spec, Weighted):
        entry = spec.entry
        cls = classify_table(table, entry)
        lookup = np.zeros(len(entry.class_ids), dtype=complex)
        for c, w in spec.weights:
            lookup[entry.class_ids.index(c)] += complex(w)
        w = np.where(cls >= 0, lookup[np.maximum(cls, 0)], 0)
        if not np.any(w.imag):
            w = w.real
        return Jumps(table.primes, w).merged()
    return _unit_jumps(member_primes(spec, table))


# -- counting ---------------------------------------------------------------------------


def count(spec: PrimeSetSpec, table: PrimeTable, x: float):
    """P(x), or F(x) for a weighted spec (exact Fraction when weights are rational)."""
    table.check(x)
    if isinstance(spec, Weighted):
        entry = spec.entry
        n = table.pi(x)
        cls = classify_table(table, entry)[:n]
        total = sum((w * int(np.count_nonzero(cls == entry.class_ids.index(c)))
                     for c, w in spec.weights), Fraction(0))
        return total
    members = member_primes(spec, table)
    return int(np.searchsorted(members, math.floor(x), side="right"))


def symmetric_difference_count(a: PrimeSetSpec, b: PrimeSetSpec, table: PrimeTable, x: float) -> int:
    table.check(x)
    pa, pb = member_primes(a, table), member_primes(b, table)
    diff = np.setxor1d(pa, pb, assume_unique=True)
    return int(np.searchsorted(diff, math.floor(x), side="right"))


def density_estimate(spec: PrimeSetSpec, table: PrimeTable, x: float):
    """count(x) / pi(x); complex for a weighted spec with complex weights."""
    n = table.pi(x)
    if n == 0:
        raise SpecError("no primes below x")
    value = count(spec, table, x)
    return value / n if isinstance(value, (int, Fraction)) else complex(value) / n


def unify_moduli(pairs, modulus: int | None = None) -> ResidueUnion:
    """Rewrite a union of classes a_j mod q_j over the lcm of the moduli.

    Primes dividing the lcm that belonged to some a_j mod q_j are kept as
    added exceptions, so membership agrees for every prime. ``modulus`` may
    force a multiple of the lcm.
    """
    pairs = [(int(a), int(q)) for a, q in pairs]
    for a, q in pairs:
        if q < 1 or math.gcd(a, q) != 1:
            raise SpecError(f"class {a} mod {q} is not a unit")
    L = math.lcm(*(q for _, q in pairs)) if pairs else 1
    if modulus is not None:
        if modulus % L:
            raise SpecError(f"modulus {modulus} is not a multiple of {L}")
        L = modulus
    classes = sorted({b for b in range(L) if math.gcd(b, L) == 1
                      and any(b % q == a % q for a, q in pairs)})
    lost = sorted({p for p, _ in factorize(L) if any(p % q == a % q for a, q in pairs)})
    return ResidueUnion(L, tuple(classes), added=tuple(lost))


def podd_identity_check(table: PrimeTable, x: float) -> Fraction:
    """P_odd(x) - pi(x)/2, asserted to be 1/2 on [p_{2j-1}, p_{2j}) and 0 otherwise."""
    n = table.pi(x)
    members = int(np.searchsorted(table.primes[::2], math.floor(x), side="right"))
    value = Fraction(members) - Fraction(n, 2)
    expected = Fraction(1, 2) if n % 2 else Fraction(0)
    assert value == expected, f"P_odd identity broken at x={x}: {value} != {expected}"
    return value


def podd_identity_sweep(table: PrimeTable) -> int:
    """Check the P_odd identity on every interval [p_n, p_{n+1}) up to x_max.

    Returns the number of intervals checked. The difference only changes at
    primes, so this covers every real x in range.
    """
    n = table.primes.size
    idx = np.arange(1, n + 1)
    podd = np.searchsorted(table.primes[::2], table.primes, side="right")
    twice = 2 * podd - idx
    expected = idx % 2
    bad = np.flatnonzero(twice != expected)
    assert not bad.size, f"P_odd identity broken at p={int(table.primes[bad[0]])}"
    return int(n)


# -- text format -------------------------------------------------------------------------

_TOKEN = re.compile(r"\S+")


def parse_spec(text: str) -> PrimeSetSpec:
    """Parse the one-line set format, e.g. ``residue q=12 classes=1,5,11 add= remove=``."""
    tokens = [(m.group(), m.start()) for m in _TOKEN.finditer(text)]
    if not tokens:
        raise SpecParseError("empty set specification", text, 0)
    kind, kpos = tokens[0]
    rest = tokens[1:]
    if kind == "podd":
        if rest:
            raise SpecParseError("podd takes no arguments", text, rest[0][1])
        return OddIndexed()
    if kind == "residue":
        fields = _fields(text, rest, {"q", "classes", "add", "remove"}, {"q", "classes"})
        q = _int_field(text, fields, "q")
        classes = _int_list(text, fields, "classes")
        if q < 1:
            raise SpecParseError("q must be positive", text, fields["q"][1])
        _build(text, fields["classes"][1], lambda: ResidueUnion(q, classes))
        return _build(text, _exception_pos(fields, kpos), lambda: ResidueUnion(
            q, classes, _int_list(text, fields, "add"), _int_list(text, fields, "remove")))
    if kind == "frobenius":
        fields = _fields(text, rest, {"ext", "classes", "add", "remove"}, {"ext", "classes"})
        ext = fields["ext"][0]
        classes = tuple(c for c in fields["classes"][0].split(",") if c)
        _build(text, fields["ext"][1], lambda: _extension(ext))
        _build(text, fields["classes"][1], lambda: FrobeniusUnion(ext, classes))
        return _build(text, _exception_pos(fields, kpos), lambda: FrobeniusUnion(
            ext, classes, _int_list(text, fields, "add"), _int_list(text, fields, "remove")))
    if kind == "weighted":
        return _parse_weighted(text, rest, kpos)
    raise SpecParseError(f"unknown set kind {kind!r}", text, kpos)


def _exception_pos(fields, default: int) -> int:
    return fields.get("add", fields.get("remove", (None, default)))[1]


def _build(text: str, pos: int, make):
    try:
        return make()
    except SpecError as exc:
        raise SpecParseError(str(exc), text, pos) from None


def _fields(text, tokens, allowed, required) -> dict[str, tuple[str, int]]:
    out = {}
    for tok, pos in tokens:
        if "=" not in tok:
            raise SpecParseError(f"expected key=value, got {tok!r}", text, pos)
        key, val = tok.split("=", 1)
        if key not in allowed:
            raise SpecParseError(f"unknown key {key!r}", text, pos)
        if key in out:
            raise SpecParseError(f"repeated key {key!r}", text, pos)
        out[key] = (val, pos + len(key) + 1)
    for key in sorted(required - out.keys()):
        raise SpecParseError(f"missing {key}=", text, len(text))
    return out


def _int_field(text, fields, key) -> int:
    val, pos = fields[key]
    try:
        return int(val)
    except ValueError:
        raise SpecParseError(f"{key} must be an integer", text, pos) from None


def _int_list(text, fields, key) -> tuple[int, ...]:
    if key not in fields:
        return ()
    val, pos = fields[key]
    out = []
    for m in re.finditer(r"[^,]+", val):
        try:
            out.append(int(m.group()))
        except ValueError:
            raise SpecParseError(f"bad integer {m.group()!r} in {key}", text, pos + m.start()) from None
    return tuple(out)


def _parse_weighted(text, tokens, kpos) -> Weighted:
    ext, weights, wpos = None, None, kpos
    for tok, pos in tokens:
        if tok.startswith("ext="):
            ext = tok[4:]
        else:
            body = tok[len("weights="):] if tok.startswith("weights=") else tok
            offset = pos + len(tok) - len(body)
            if weights is not None:
                raise SpecParseError("weights given twice", text, pos)
            weights, wpos = [], offset
            for m in re.finditer(r"[^,]+", body):
                item = m.group()
                if ":" not in item:
                    raise SpecParseError(f"expected class:weight, got {item!r}", text, offset + m.start())
                cid, w = item.split(":", 1)
                try:
                    weights.append((cid, _parse_weight(w)))
                except SpecError:
                    raise SpecParseError(f"bad weight {w!r}", text,
                                         offset + m.start() + len(cid) + 1) from None
    if ext is None:
        raise SpecParseError("missing ext=", text, len(text))
    if not weights:
        raise SpecParseError("missing class:weight list", text, len(text))
    return _build(text, wpos, lambda: Weighted(ext, tuple(weights)))

