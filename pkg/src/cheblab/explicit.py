"""Truncated explicit formulas and mean-square statistics for prime-set discrepancies.

A discrepancy compares a prime set with a reference counter scaled to the
same density. Normalised by log(x)/sqrt(x) it is, on GRH,

    Delta(x) ~ sum_rho alpha_rho x^(i gamma)/rho + nu,

where the alpha_rho collect -c_chi over the zeros of each inducing
primitive L(s, chi) and nu comes from the prime-square correction kappa.
Every counting function used here is expanded into the same three pieces
(main density, zero weights per primitive character, constant); the model
for set minus reference is their difference.
"""

from __future__ import annotations

import cmath
import hashlib
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from filelock import FileLock

from .characters import DirichletCharacter, character_group, euler_phi, factorize, principal
from .counting import c_chi, kappa_residue, psi_chi_array
from .frobenius import QuadraticField, dedekind_jumps, get_extension, kronecker
from .lfunc import MERGE_TOL, ZeroSet, find_zeros, l_value, read_zero_file, write_zero_file
from .primesets import (FrobeniusUnion, Jumps, OddIndexed, PrimeSetSpec, Procedural, ResidueUnion,
                        Weighted, jumps, parse_spec)
from .sieve import PrimeTable, li_array

ZERO_ORDINATE = 1e-6


class ExplicitFormulaError(ValueError):
    pass


class NoExplicitFormula(ExplicitFormulaError):
    """The set has no L-function expansion (procedural, P_odd, non-abelian)."""


class UncertifiedZeros(ExplicitFormulaError):
    pass


class ReferenceMismatch(ExplicitFormulaError):
    """Set and reference have different densities, so Delta does not stay bounded."""


class LemmaHypothesisWarning(UserWarning):
    pass


# -- references --------------------------------------------------------------------


@dataclass(frozen=True)
class Reference:
    """A reference counter: ``kind`` in pi, li, dedekind, set, zero.

    ``scale`` of None means "the set's density" and is resolved when the
    discrepancy is assembled.
    """

    kind: str
    scale: Fraction | complex | None = None
    ext: str | None = None
    other: PrimeSetSpec | None = None

    def __post_init__(self):
        if self.kind not in ("pi", "li", "dedekind", "set", "zero"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        if self.kind == "dedekind":
            entry = get_extension(self.ext or "")
            if entry.quadratic is None:
                raise ValueError(f"dedekind reference needs a quadratic field, got {self.ext}")
        if self.kind == "set" and self.other is None:
            raise ValueError("set reference needs another prime set")

    def resolved(self, density) -> Reference:
        if self.scale is not None or self.kind == "zero":
            return self
        if density is None:
            raise ReferenceMismatch("set density unknown; give the reference scale explicitly")
        return Reference(self.kind, density, self.ext, self.other)

    def __str__(self) -> str:
        scale = "" if self.scale is None else f"*{self.scale}"
        if self.kind == "dedekind":
            return f"dedekind:{self.ext}{scale}"
        if self.kind == "set":
            return f"set:{self.other}{scale}"
        return f"{self.kind}{scale}"


def parse_reference(text: str) -> Reference:
    """``pi``, ``pi-half``, ``pi*1/3``, ``li*1/2``, ``dedekind:gauss_i*1/2``,
    ``set:<set spec>*1/2``, ``zero``. Without a scale the set's density is used."""
    text = text.strip()
    if text == "pi-half":
        return Reference("pi", Fraction(1, 2))
    if text == "zero":
        return Reference("zero", Fraction(0))
    body, scale = text, None
    if "*" in text:
        body, _, raw = text.rpartition("*")
        try:
            scale = Fraction(raw)
        except ValueError:
            try:
                scale = complex(raw.replace("i", "j"))
            except ValueError:
                raise ValueError(f"bad reference scale {raw!r}") from None
    if body in ("pi", "li"):
        return Reference(body, scale)
    if body.startswith("dedekind:"):
        return Reference("dedekind", scale, ext=body.split(":", 1)[1])
    if body.startswith("set:"):
        return Reference("set", scale, other=parse_spec(body.split(":", 1)[1]))
    raise ValueError(f"unknown reference {text!r}")


# -- expansions --------------------------------------------------------------------


@dataclass
class Expansion:
    """main * Li(x) - (sqrt(x)/log x) * (sum_chi w_chi sum_rho x^(i gamma)/rho ... )

    Concretely, in units of sqrt(x)/log(x) the oscillating part is
    sum over primitive characters chi of ``zeros[chi]`` times
    sum_rho x^(i gamma)/rho, and ``const`` is the constant offset.
    """

    main: complex = 0
    zeros: dict[str, complex] = field(default_factory=dict)
    const: complex = 0
    kappa: Fraction | None = None

    def scaled(self, c) -> Expansion:
        return Expansion(c * self.main, {k: c * v for k, v in self.zeros.items()}, c * self.const,
                         None if self.kappa is None or not isinstance(c, (int, Fraction))
                         else self.kappa * c)

    def __add__(self, other: Expansion) -> Expansion:
        zeros = dict(self.zeros)
        for k, v in other.zeros.items():
            zeros[k] = zeros.get(k, 0) + v
        kappa = None if self.kappa is None or other.kappa is None else self.kappa + other.kappa
        return Expansion(self.main + other.main, zeros, self.const + other.const, kappa)

    def __sub__(self, other: Expansion) -> Expansion:
        return self + other.scaled(-1)


def residue_expansion(q: int, classes) -> Expansion:
    """pi(x; q, a_1..a_r): density r/phi(q), weight -c_chi at the zeros of
    each inducing primitive character, constant -kappa."""
    zeros: dict[str, complex] = {}
    for chi in character_group(q):
        c = c_chi(classes, q, chi)
        key = chi.inducer().descriptor
        zeros[key] = zeros.get(key, 0) - c
    kappa = kappa_residue(classes, q)
    r = len(classes)
    return Expansion(Fraction(r, euler_phi(q)), zeros, -kappa, kappa)


def quadratic_character(F: QuadraticField) -> DirichletCharacter:
    """The primitive character n -> (D/n) modulo |D|."""
    D = F.discriminant
    for chi in character_group(abs(D)):
        if chi.is_real and not chi.is_principal and all(
                chi(a).real == kronecker(D, a) for a in range(1, abs(D))):
            return chi
    raise ArithmeticError(f"no Kronecker character for discriminant {D}")


def dedekind_expansion(F: QuadraticField) -> Expansion:
    """pi(x, F): zeta(s) L(s, chi_D) gives weight -1 at both zero sets and
    constant -1 from prime ideals of degree one over sqrt(x)."""
    chi_d = quadratic_character(F)
    return Expansion(Fraction(1), {"1:0": -1, chi_d.descriptor: -1}, Fraction(-1), Fraction(1))


def _abelian_classes(spec: FrobeniusUnion | Weighted, class_ids) -> tuple[int, list[int]]:
    entry = get_extension(spec.ext)
    if entry.abelian_reduction is None:
        raise NoExplicitFormula(f"{spec.ext} is not abelian; no Dirichlet L-function expansion")
    q, residues = entry.abelian_reduction
    return q, sorted(a for c in class_ids for a in residues[c])


def expand_set(spec: PrimeSetSpec) -> Expansion:
    """Expansion of the counting function of ``spec``; exceptions only shift
    the count by a bounded amount and are left out."""
    if isinstance(spec, ResidueUnion):
        return residue_expansion(spec.q, spec.classes)
    if isinstance(spec, FrobeniusUnion):
        return residue_expansion(*_abelian_classes(spec, spec.classes))
    if isinstance(spec, Weighted):
        total = Expansion(kappa=Fraction(0))
        for cid, w in spec.weights:
            total = total + residue_expansion(*_abelian_classes(spec, [cid])).scaled(w)
        return total
    if isinstance(spec, (OddIndexed, Procedural)):
        raise NoExplicitFormula(f"{spec} has no explicit formula")
    raise TypeError(f"not a prime set spec: {spec!r}")


def expand_reference(ref: Reference) -> Expansion:
    s = ref.scale
    if ref.kind == "zero":
        return Expansion(kappa=Fraction(0))
    if ref.kind == "pi":
        return residue_expansion(1, (0,)).scaled(s)
    if ref.kind == "li":
        return Expansion(main=s, kappa=Fraction(0))
    if ref.kind == "dedekind":
        return dedekind_expansion(get_extension(ref.ext).quadratic).scaled(s)
    return expand_set(ref.other).scaled(s)


def reference_jumps(ref: Reference, table: PrimeTable) -> Jumps:
    if ref.kind in ("li", "zero"):
        return Jumps(np.zeros(0, dtype=np.int64), np.zeros(0))
    if ref.kind == "pi":
        return Jumps(table.primes, np.ones(table.primes.size))
    if ref.kind == "dedekind":
        return Jumps(*dedekind_jumps(table, get_extension(ref.ext).quadratic))
    return jumps(ref.other, table)


# -- zeros -------------------------------------------------------------------------


class ZeroDatabase:
    """Zero sets of primitive L-functions, computed on demand and cached.

    With ``cache_dir`` the sets are also persisted as zero files named by a
    hash of (character, height, grid step), guarded by a file lock.
    """

    version = "v1"

    def __init__(self, height: float = 100.0, cache_dir: str | Path | None = None,
                 step: float = 0.01, allow_uncertified: bool = False):
        self.height = float(height)
        self.step = step
        self.allow_uncertified = allow_uncertified
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._sets: dict[str, ZeroSet] = {}

    def _path(self, chi: DirichletCharacter) -> Path:
        key = f"{chi.descriptor}|{self.height!r}|{self.step!r}|{self.version}"
        digest = hashlib.sha256(key.encode()).hexdigest()[:16]
        return self.cache_dir / "zeros" / f"q{chi.modulus}i{chi.index}_{digest}.txt"

    def add(self, zs: ZeroSet) -> None:
        self._sets[zs.descriptor] = zs

    def get(self, chi: DirichletCharacter) -> ZeroSet:
        if not chi.is_primitive():
            raise ValueError(f"{chi} is imprimitive; ask for its inducing character")
        hit = self._sets.get(chi.descriptor)
        if hit is not None and hit.height >= self.height:
            return hit
        zs = self._load_or_compute(chi)
        self._sets[chi.descriptor] = zs
        return zs

    def _load_or_compute(self, chi: DirichletCharacter) -> ZeroSet:
        if self.cache_dir is None:
            return find_zeros(chi, self.height, self.step)
        path = self._path(chi)
        path.parent.mkdir(parents=True, exist_ok=True)
        with FileLock(str(path) + ".lock"):
            if path.exists():
                return read_zero_file(path)
            zs = find_zeros(chi, self.height, self.step)
            tmp = path.with_suffix(".tmp")
            write_zero_file(zs, tmp)
            tmp.replace(path)
            return zs

    def __contains__(self, descriptor: str) -> bool:
        return descriptor in self._sets


def _require_certified(zs: ZeroSet, T: float, allow_uncertified: bool) -> None:
    if zs.height + 1e-9 < T:
        raise UncertifiedZeros(f"zeros of {zs.descriptor} only reach T={zs.height}, need {T}")
    if not zs.certified and not allow_uncertified:
        raise UncertifiedZeros(f"zero set for {zs.descriptor} is not certified")


def truncated_psi_chi(chi: DirichletCharacter, x, T: float, zeros: ZeroSet,
                      allow_uncertified: bool = False):
    """-sum_{|gamma| < T} x^rho/rho over the zeros of chi's primitive inducer."""
    if zeros.descriptor != chi.inducer().descriptor:
        raise ValueError(f"zeros belong to {zeros.descriptor}, not {chi.inducer().descriptor}")
    _require_certified(zeros, T, allow_uncertified)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 2):
        raise ValueError("truncated explicit formula needs x >= 2")
    gam = zeros.signed(T)
    rho = 0.5 + 1j * gam
    out = np.empty(xs.size, dtype=complex)
    for lo in range(0, xs.size, 2048):
        lx = np.log(xs[lo:lo + 2048])
        out[lo:lo + 2048] = -(np.exp(np.outer(lx, rho)) / rho).sum(axis=1)
    return out if np.ndim(x) else complex(out[0])


def truncation_envelope(table: PrimeTable, chi: DirichletCharacter, xs, T: float,
                        zeros: ZeroSet) -> dict:
    """Observed error of the truncated formula and the calibrated constant C_q
    in |error| <= C_q (x log(xT)^2/T + log x)."""
    xs = np.asarray(xs, dtype=float)
    err = np.abs(psi_chi_array(table, chi, xs) - truncated_psi_chi(chi, xs, T, zeros))
    shape = xs * np.log(xs * T) ** 2 / T + np.log(xs)
    i = int(np.argmax(err))
    return {"T": T, "max_error": float(err[i]), "argmax_x": float(xs[i]),
            "C_q": float(np.max(err / shape)), "errors": err}


# -- discrepancy ---------------------------------------------------------------------


def _G(t):
    """Antiderivative of log(t)/sqrt(t)."""
    t = np.asarray(t, dtype=float)
    return 2.0 * np.sqrt(t) * (np.log(t) - 2.0)


def _H(t):
    """Antiderivative of Li(t) log(t)/sqrt(t) (by parts, with t^(3/2) substitution)."""
    t = np.asarray(t, dtype=float)
    return li_array(t) * _G(t) - (4.0 / 3.0) * t**1.5 + 4.0 * li_array(t**1.5)


@dataclass
class Discrepancy:
    """P(x) - reference(x) as a step function minus ``li_coeff * Li(x)``."""

    spec: PrimeSetSpec
    reference: Reference
    table: PrimeTable
    step: Jumps
    li_coeff: complex = 0.0

    def __post_init__(self):
        pos = self.step.positions
        pos = pos[(pos > 2)]
        self._breaks = np.concatenate(([2], pos)).astype(float)
        vals = self.step(self._breaks)
        self._vals = vals
        dG = np.diff(_G(self._breaks))
        self._cum = np.concatenate(([0.0], np.cumsum(vals[:-1] * dG)))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.step.weights) and not isinstance(self.li_coeff, complex)

    def _check(self, xs: np.ndarray) -> np.ndarray:
        if xs.size and xs.max() > self.table.x_max * (1 + 1e-12):
            self.table.check(float(xs.max()))
        return np.minimum(xs, self.table.x_max)

    def raw(self, x):
        """P(x) - reference(x), unnormalised."""
        xs = self._check(np.atleast_1d(np.asarray(x, dtype=float)))
        out = self.step(xs)
        if self.li_coeff:
            out = out - self.li_coeff * li_array(np.maximum(xs, 2.0))
        return out if np.ndim(x) else out[0]

    def delta(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if np.any(xs < 2):
            raise ValueError("Delta(x) needs x >= 2")
        out = np.log(xs) / np.sqrt(xs) * self.raw(xs)
        return out if np.ndim(x) else out[0]

    def integral(self, x):
        """int_2^x Delta(t) dt, exactly: on each step interval Delta = c log t/sqrt t."""
        xs = self._check(np.atleast_1d(np.asarray(x, dtype=float)))
        if np.any(xs < 2):
            raise ValueError("integral needs x >= 2")
        k = np.searchsorted(self._breaks, xs, side="right") - 1
        out = self._cum[k] + self._vals[k] * (_G(xs) - _G(self._breaks[k]))
        if self.li_coeff:
            out = out - self.li_coeff * (_H(xs) - _H(2.0))
        return out if np.ndim(x) else out[0]

    def m_average(self, x):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = self.integral(xs) / xs
        return out if np.ndim(x) else out[0]

    def jump_count(self, x: float) -> int:
        return self.step.count_jumps(x)


def _density(spec: PrimeSetSpec):
    return getattr(spec, "density", None)


def discrepancy(spec: PrimeSetSpec, reference: Reference | str, table: PrimeTable) -> Discrepancy:
    """Exact counting difference; works for every set, including P_odd."""
    if isinstance(reference, str):
        reference = parse_reference(reference)
    ref = reference.resolved(_density(spec))
    own = jumps(spec, table)
    other = reference_jumps(ref, table)
    scale = ref.scale if ref.kind != "li" else 0
    step = own.combine(other, scale=-_num(scale)) if other.positions.size else own.merged()
    li_coeff = _num(ref.scale) if ref.kind == "li" else 0.0
    return Discrepancy(spec, ref, table, step, li_coeff)


def _num(v):
    if v is None:
        return 0.0
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, complex) and v.imag == 0:
        return v.real
    return v


@dataclass
class DiscrepancyModel:
    """Explicit-formula data for one set/reference pair, truncated at height T.

    ``ordinates`` are signed zero ordinates with |gamma| < T and ``alpha`` the
    merged coefficients; ``nu`` is the constant. ``char_weights`` holds the
    coefficient attached to each primitive character before merging.
    """

    disc: Discrepancy
    T: float
    ordinates: np.ndarray
    alpha: np.ndarray
    nu: complex
    kappa: Fraction | None
    char_weights: dict[str, complex]
    zero_sets: dict[str, ZeroSet]
    certified: bool
    diagnostics: list[str] = field(default_factory=list)

    @property
    def spec(self) -> PrimeSetSpec:
        return self.disc.spec

    @property
    def reference(self) -> Reference:
        return self.disc.reference

    @property
    def table(self) -> PrimeTable:
        return self.disc.table

    @property
    def is_degenerate(self) -> bool:
        return not self.alpha.size and abs(self.nu) == 0

    def alpha_at(self, gamma: float, tol: float = MERGE_TOL) -> complex:
        i = np.flatnonzero(np.abs(self.ordinates - gamma) <= tol)
        return complex(self.alpha[i[0]]) if i.size else 0j

    def zero_sum(self, y) -> np.ndarray:
        """sum_{|gamma|<T} alpha e^(i gamma y)/rho on a y-grid."""
        ys = np.atleast_1d(np.asarray(y, dtype=float))
        coef = self.alpha / (0.5 + 1j * self.ordinates)
        out = np.zeros(ys.size, dtype=complex)
        for lo in range(0, ys.size, 4096):
            out[lo:lo + 4096] = np.exp(1j * np.outer(ys[lo:lo + 4096], self.ordinates)) @ coef
        return out

    def prediction_unsmoothed(self) -> float:
        g2 = 0.25 + self.ordinates**2
        return float(abs(self.nu) ** 2 + np.sum(np.abs(self.alpha) ** 2 / g2))

    def prediction_smoothed(self) -> float:
        g = self.ordinates
        return float(abs(self.nu) ** 2 + np.sum(np.abs(self.alpha) ** 2 / ((0.25 + g**2) * (1 + g**2))))

    def delta(self, x):
        return self.disc.delta(x)

    def m_average(self, x):
        return self.disc.m_average(x)


def build_model(spec: PrimeSetSpec, reference: Reference | str, zero_db: ZeroDatabase,
                T: float, table: PrimeTable, allow_uncertified: bool | None = None) -> DiscrepancyModel:
    """Assemble alpha_rho and nu for ``spec`` against ``reference`` up to height T."""
    if allow_uncertified is None:
        allow_uncertified = zero_db.allow_uncertified
    if isinstance(reference, str):
        reference = parse_reference(reference)
    expansion_set = expand_set(spec)
    ref = reference.resolved(_density(spec))
    model = expansion_set - expand_reference(ref)
    if abs(complex(model.main)) > 1e-12:
        raise ReferenceMismatch(f"set density {expansion_set.main} is not matched by reference {ref}")

    weights = {k: complex(v) for k, v in model.zeros.items() if abs(complex(v)) > 1e-14}
    diagnostics: list[str] = []
    zero_sets: dict[str, ZeroSet] = {}
    gam_parts, w_parts, src_parts = [], [], []
    for desc, w in sorted(weights.items()):
        q, idx = (int(v) for v in desc.split(":"))
        chi = character_group(q)[idx]
        zs = zero_db.get(chi)
        _require_certified(zs, T, allow_uncertified)
        zero_sets[desc] = zs
        g = zs.signed(T)
        gam_parts.append(g)
        w_parts.append(np.full(g.size, w))
        src_parts.append(np.full(g.size, len(src_parts)))
    nu = complex(model.const)
    if gam_parts:
        gam = np.concatenate(gam_parts)
        wts = np.concatenate(w_parts)
        src = np.concatenate(src_parts)
        order = np.argsort(gam, kind="stable")
        gam, wts, src = gam[order], wts[order], src[order]
        ordinates, alpha = _merge(gam, wts, src, diagnostics)
        central = np.abs(ordinates) < ZERO_ORDINATE
        if central.any():
            nu += 2 * complex(alpha[central].sum())
            diagnostics.append(f"zero at rho=1/2 folded into nu ({int(central.sum())} ordinates)")
            ordinates, alpha = ordinates[~central], alpha[~central]
        keep = np.abs(alpha) > 1e-14
        ordinates, alpha = ordinates[keep], alpha[keep]
    else:
        ordinates, alpha = np.zeros(0), np.zeros(0, dtype=complex)
    certified = all(zs.certified for zs in zero_sets.values())
    disc = discrepancy(spec, ref, table)
    return DiscrepancyModel(disc, float(T), ordinates, alpha, _clean(nu), expansion_set.kappa, weights,
                            zero_sets, certified, diagnostics)


def _merge(gam, wts, src, diagnostics):
    groups = np.concatenate(([True], np.diff(gam) > MERGE_TOL))
    gid = np.cumsum(groups) - 1
    ordinates = np.zeros(gid[-1] + 1)
    alpha = np.zeros(gid[-1] + 1, dtype=complex)
    counts = np.zeros(gid[-1] + 1, dtype=np.int64)
    np.add.at(alpha, gid, wts)
    np.add.at(ordinates, gid, gam)
    np.add.at(counts, gid, 1)
    ordinates /= counts
    shared = np.flatnonzero(counts > 1)
    for g in shared:
        if np.unique(src[gid == g]).size > 1:
            diagnostics.append(f"coincident ordinates across characters merged near {ordinates[g]:.9f}")
    return ordinates, alpha


def _clean(z: complex):
    return z.real if abs(z.imag) < 1e-15 else z


# -- mean squares ----------------------------------------------------------------------


@dataclass
class MeanSquare:
    """Empirical mean square against its zero-sum prediction (None without a model)."""

    empirical: float
    prediction: float | None
    Y: float
    T: float | None
    residual: float | None = None
    hypothesis_ok: bool = True
    ys: np.ndarray = field(default=None, repr=False)
    values: np.ndarray = field(default=None, repr=False)
    predicted_values: np.ndarray = field(default=None, repr=False)

    @property
    def ratio(self) -> float | None:
        if self.prediction is None or self.prediction == 0:
            return None
        return self.empirical / self.prediction


def _y_grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = max(2, int(math.ceil((hi - lo) / step)) + 1)
    return np.linspace(lo, hi, n)


def _split(obj) -> tuple[Discrepancy, DiscrepancyModel | None]:
    if isinstance(obj, DiscrepancyModel):
        return obj.disc, obj
    return obj, None


def _exp_grid(disc: Discrepancy, ys: np.ndarray) -> np.ndarray:
    xs = np.exp(ys)
    over = xs > disc.table.x_max
    if np.any(xs[over] > disc.table.x_max * (1 + 1e-12)):
        disc.table.check(float(xs.max()))
    xs[over] = disc.table.x_max
    return xs


def mean_square_smoothed(obj, Y: float, step: float = 1e-3) -> MeanSquare:
    """(1/Y) int_{log 2}^Y |M(e^y)|^2 dy and sum |alpha|^2/|rho(1+i gamma)|^2 + nu^2."""
    disc, model = _split(obj)
    ys = _y_grid(math.log(2.0), Y, step)
    m = disc.m_average(_exp_grid(disc, ys))
    emp = float(np.trapezoid(np.abs(m) ** 2, ys) / Y)
    pred = model.prediction_smoothed() if model else None
    pv = None
    if model is not None:
        coef = model.alpha / ((0.5 + 1j * model.ordinates) * (1 + 1j * model.ordinates))
        pv = np.exp(1j * np.outer(ys, model.ordinates)) @ coef + model.nu if model.alpha.size \
            else np.full(ys.size, model.nu, dtype=complex)
    return MeanSquare(emp, pred, Y, model.T if model else None, ys=ys, values=m, predicted_values=pv)


def mean_square_unsmoothed(obj, Y: float, T: float | None = None, step: float = 1e-3) -> MeanSquare:
    """(2/Y) int_{Y/2}^Y |Delta(e^y)|^2 dy, the prediction nu^2 + sum |alpha|^2/|rho|^2,
    and the mean square of r(y, T) = Delta(e^y) - sum alpha e^(i gamma y)/rho - nu."""
    disc, model = _split(obj)
    ys = _y_grid(Y / 2, Y, step)
    d = disc.delta(_exp_grid(disc, ys))
    emp = float(np.trapezoid(np.abs(d) ** 2, ys) * 2 / Y)
    if model is None:
        return MeanSquare(emp, None, Y, T, ys=ys, values=d)
    if T is None:
        T = model.T
    if T > model.T + 1e-9:
        raise ValueError(f"model is truncated at {model.T}, asked for T={T}")
    ok = Y > math.sqrt(T) / math.log(T) if T > 1 else False
    if not ok:
        warnings.warn(f"Y={Y} does not exceed sqrt(T)/log(T) for T={T}", LemmaHypothesisWarning,
                      stacklevel=2)
    sub = np.abs(model.ordinates) < T
    g, a = model.ordinates[sub], model.alpha[sub]
    pred = float(abs(model.nu) ** 2 + np.sum(np.abs(a) ** 2 / (0.25 + g**2)))
    zs = np.zeros(ys.size, dtype=complex)
    for lo in range(0, ys.size, 4096):
        zs[lo:lo + 4096] = np.exp(1j * np.outer(ys[lo:lo + 4096], g)) @ (a / (0.5 + 1j * g))
    fit = zs + model.nu
    resid = float(np.trapezoid(np.abs(d - fit) ** 2, ys) * 2 / Y)
    return MeanSquare(emp, pred, Y, T, resid, ok, ys=ys, values=d, predicted_values=fit)


# -- Dirichlet integral -----------------------------------------------------------------


@dataclass(frozen=True)
class DirichletCheck:
    s: complex
    x_cut: float
    lhs: complex
    rhs: complex
    tail_bound: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


def _log_l(chi: DirichletCharacter, s: complex) -> complex:
    """log L(s, chi) for Re s > 1, imprimitive characters via Euler factors."""
    chi1 = chi.inducer()
    value = cmath.log(complex(l_value(chi1, s)))
    for p, _ in factorize(chi.modulus):
        if chi1.modulus % p:
            value += cmath.log(1 - chi1(p) * p ** (-s))
    return value


def dirichlet_integral_check(spec: PrimeSetSpec, reference: Reference | str, s: complex,
                             x_cut: float, table: PrimeTable) -> DirichletCheck:
    """Compare int_1^X [sum_j Pi(x;q,a_j) - c Pi(x)] x^(-s-1) dx with its
    L-function closed form, for reference c*pi (or zero). Exceptions are
    ignored: the identity concerns the residue classes alone.

    The integrand is a step function, so the integral is a finite sum over
    prime powers n <= X of w_n (n^-s - X^-s)/s. The neglected tail beyond X is
    at most 2 X^(1-sigma)/((sigma-1) log X), using Pi(x) <= 2x/log x.
    """
    s = complex(s)
    if s.real < 1.5:
        raise ValueError(f"need Re s >= 1.5, got {s}")
    table.check(x_cut)
    if isinstance(reference, str):
        reference = parse_reference(reference)
    if isinstance(spec, FrobeniusUnion):
        q, classes = _abelian_classes(spec, spec.classes)
    elif isinstance(spec, ResidueUnion):
        q, classes = spec.q, list(spec.classes)
    else:
        raise NoExplicitFormula(f"{spec} is not a residue-class set")
    ref = reference.resolved(Fraction(len(classes), euler_phi(q)))
    if ref.kind not in ("pi", "zero"):
        raise ValueError("the Dirichlet integral check supports pi or zero references")
    c = complex(ref.scale or 0)

    n = int(np.searchsorted(table.pp_values, math.floor(x_cut), side="right"))
    v = table.pp_values[:n]
    k = table.pp_exp[:n].astype(float)
    member = np.isin(v % q, classes) & (np.gcd(v, q) == 1)
    w = (member.astype(float) - c) / k
    term = w * (np.exp(-s * np.log(v.astype(float))) - x_cut ** (-s)) / s
    lhs = complex(math.fsum(term.real.tolist()), math.fsum(term.imag.tolist()))

    rhs = 0j
    for chi in character_group(q):
        cc = c_chi(classes, q, chi)
        if cc:
            rhs += cc * _log_l(chi, s)
    if c:
        rhs -= c * cmath.log(complex(l_value(principal(1), s)))
    rhs /= s
    sigma = s.real
    tail = 2 * x_cut ** (1 - sigma) / ((sigma - 1) * math.log(x_cut))
    return DirichletCheck(s, float(x_cut), lhs, rhs, tail)


__all__ = [
    "Reference", "parse_reference", "Expansion", "expand_set", "expand_reference",
    "residue_expansion", "dedekind_expansion", "quadratic_character", "ZeroDatabase",
    "truncated_psi_chi", "truncation_envelope", "Discrepancy", "discrepancy", "DiscrepancyModel",
    "build_model", "MeanSquare", "mean_square_smoothed", "mean_square_unsmoothed",
    "DirichletCheck", "dirichlet_integral_check", "ExplicitFormulaError", "NoExplicitFormula",
    "UncertifiedZeros", "ReferenceMismatch", "LemmaHypothesisWarning",
]
