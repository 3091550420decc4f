"""Segmented prime sieve with counting queries.

A :class:`PrimeTable` holds every prime and prime power up to ``x_max`` and
answers ``pi``, ``psi`` and the higher-power remainder ``R(x, 1)`` by binary
search over the stored sequences.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expi

CACHE_MAGIC = b"CHEBPRIMES1"
_LI2 = float(expi(math.log(2.0)))


class OutOfRange(ValueError):
    """Query point lies beyond the table bound."""


def small_primes(n: int) -> np.ndarray:
    """Plain Eratosthenes sieve, primes <= n."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return np.flatnonzero(flags).astype(np.int64)


def segmented_primes(x_max: int, segment: int | None = None) -> np.ndarray:
    """All primes <= x_max, sieving odd numbers one segment at a time."""
    root = math.isqrt(x_max)
    base = small_primes(root)
    if segment is None:
        segment = max(1 << 15, 32 * (root + 1))
    odd_base = base[1:]
    chunks = [np.array([2], dtype=np.int64)] if x_max >= 2 else []
    low = 3
    while low <= x_max:
        high = min(low + 2 * segment, x_max + 1)  # exclusive, low odd
        count = (high - low + 1) // 2
        mask = np.ones(count, dtype=bool)
        for p in odd_base:
            p = int(p)
            sq = p * p
            if sq >= high:
                break
            start = max(sq, ((low + p - 1) // p) * p)
            if start % 2 == 0:
                start += p
            if start < high:
                mask[(start - low) // 2 :: p] = False
        chunks.append(low + 2 * np.flatnonzero(mask).astype(np.int64))
        low = high if high % 2 == 1 else high + 1
    return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.int64)


def _pairwise_prefix(values: np.ndarray) -> np.ndarray:
    # Prefix sums carried in extended precision, rounded once at the end.
    out = np.zeros(values.size + 1, dtype=np.longdouble)
    np.cumsum(values.astype(np.longdouble), out=out[1:])
    return out.astype(np.float64)


@dataclass(frozen=True)
class PrimeTable:
    """Primes and prime powers up to ``x_max``.

    ``pp_values``/``pp_base``/``pp_exp`` list every prime power p**k <= x_max
    (k >= 1) in increasing order. Built tables are never mutated.
    """

    x_max: int
    primes: np.ndarray
    pp_values: np.ndarray
    pp_base: np.ndarray
    pp_exp: np.ndarray
    _log_prefix: np.ndarray = field(repr=False)
    _higher_prefix: np.ndarray = field(repr=False)

    @property
    def prime_powers(self) -> list[tuple[int, int]]:
        return list(zip(self.pp_values.tolist(), self.pp_exp.tolist()))

    def check(self, x: float) -> None:
        if x > self.x_max:
            raise OutOfRange(f"x={x} exceeds table bound {self.x_max}")

    def pi(self, x: float) -> int:
        self.check(x)
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def pi_array(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if xs.size and xs.max() > self.x_max:
            raise OutOfRange(f"max x={xs.max()} exceeds {self.x_max}")
        return np.searchsorted(self.primes, np.floor(xs), side="right")

    def psi(self, x: float) -> float:
        self.check(x)
        i = int(np.searchsorted(self.pp_values, math.floor(x), side="right"))
        return float(self._log_prefix[i])

    def psi_array(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        if xs.size and xs.max() > self.x_max:
            raise OutOfRange(f"max x={xs.max()} exceeds {self.x_max}")
        return self._log_prefix[np.searchsorted(self.pp_values, np.floor(xs), side="right")]

    def r_x1(self, x: float) -> float:
        """Sum of 1/k over prime powers p**k <= x with k >= 2."""
        self.check(x)
        i = int(np.searchsorted(self.pp_values, math.floor(x), side="right"))
        return float(self._higher_prefix[i])

    def big_pi(self, x: float) -> float:
        """Sum of 1/k over all prime powers p**k <= x."""
        return self.pi(x) + self.r_x1(x)


def _prime_powers(primes: np.ndarray, x_max: int):
    vals, bases, exps = [primes], [primes], [np.ones(primes.size, dtype=np.int64)]
    k = 2
    cur = primes[primes <= math.isqrt(x_max)]
    powk = cur * cur
    while cur.size:
        keep = powk <= x_max
        cur, powk = cur[keep], powk[keep]
        if not cur.size:
            break
        vals.append(powk.copy())
        bases.append(cur.copy())
        exps.append(np.full(cur.size, k, dtype=np.int64))
        # guard against int64 overflow before the next multiply
        ok = powk <= x_max // cur
        cur, powk = cur[ok], powk[ok] * cur[ok]
        k += 1
    v = np.concatenate(vals)
    order = np.argsort(v, kind="stable")
    return v[order], np.concatenate(bases)[order], np.concatenate(exps)[order]


def from_primes(primes: np.ndarray, x_max: int) -> PrimeTable:
    vals, bases, exps = _prime_powers(primes, x_max)
    logs = np.log(bases.astype(np.float64))
    higher = np.where(exps >= 2, 1.0 / exps, 0.0)
    return PrimeTable(
        x_max=int(x_max),
        primes=primes,
        pp_values=vals,
        pp_base=bases,
        pp_exp=exps,
        _log_prefix=_pairwise_prefix(logs),
        _higher_prefix=_pairwise_prefix(higher),
    )


def build_table(x_max: int, segment: int | None = None) -> PrimeTable:
    """Sieve all primes and prime powers up to ``x_max``.

    Raises:
        ValueError: if ``x_max < 2``.
    """
    x_max = int(x_max)
    if x_max < 2:
        raise ValueError(f"x_max must be >= 2, got {x_max}")
    primes = segmented_primes(x_max, segment)
    return from_primes(primes, x_max)


def li(x: float) -> float:
    """Offset logarithmic integral, the integral of dt/log t from 2 to x."""
    if x < 2:
        raise ValueError(f"li requires x >= 2, got {x}")
    if x == 2:
        return 0.0
    return float(expi(math.log(x))) - _LI2


def li_array(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    return expi(np.log(xs)) - _LI2


def von_mangoldt(n: int) -> float:
    if n < 2:
        return 0.0
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            while n % p == 0:
                n //= p
            return math.log(p) if n == 1 else 0.0
    return math.log(n)


# -- binary prime cache ------------------------------------------------------


def _encode_varints(gaps: np.ndarray) -> bytes:
    gaps = gaps.astype(np.uint64)
    nbytes = np.ones(gaps.size, dtype=np.int64)
    g = gaps >> np.uint64(7)
    while g.any():
        nbytes += g > 0
        g >>= np.uint64(7)
    out = np.zeros(int(nbytes.sum()), dtype=np.uint8)
    offsets = np.concatenate(([0], np.cumsum(nbytes)[:-1]))
    rest = gaps.copy()
    for j in range(int(nbytes.max()) if gaps.size else 0):
        live = nbytes > j
        byte = (rest[live] & np.uint64(0x7F)).astype(np.uint8)
        more = nbytes[live] > j + 1
        out[offsets[live] + j] = byte | (more.astype(np.uint8) << 7)
        rest[live] >>= np.uint64(7)
    return out.tobytes()


def _decode_varints(buf: bytes) -> np.ndarray:
    data = np.frombuffer(buf, dtype=np.uint8)
    if not data.size:
        return np.zeros(0, dtype=np.int64)
    ends = np.flatnonzero((data & 0x80) == 0)
    starts = np.concatenate(([0], ends[:-1] + 1))
    values = np.zeros(ends.size, dtype=np.int64)
    lengths = ends - starts + 1
    for j in range(int(lengths.max())):
        live = lengths > j
        values[live] |= (data[starts[live] + j] & 0x7F).astype(np.int64) << (7 * j)
    return values


def save_table(table: PrimeTable, path: str | Path) -> None:
    """Write the prime list as magic, little-endian u64 x_max, varint gaps."""
    gaps = np.diff(np.concatenate(([0], table.primes)))
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<Q", table.x_max))
        fh.write(_encode_varints(gaps))


def load_table(path: str | Path) -> PrimeTable:
    raw = Path(path).read_bytes()
    if not raw.startswith(CACHE_MAGIC):
        raise ValueError(f"{path}: not a CHEBPRIMES1 file")
    (x_max,) = struct.unpack_from("<Q", raw, len(CACHE_MAGIC))
    gaps = _decode_varints(raw[len(CACHE_MAGIC) + 8 :])
    return from_primes(np.cumsum(gaps), int(x_max))
