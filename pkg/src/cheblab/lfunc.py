"""Dirichlet L-functions on the critical line and their nontrivial zeros.

Values come from Euler-Maclaurin summation of the Hurwitz zeta function,
``L(s, chi) = q**-s * sum_a chi(a) * zeta(s, a/q)``, with the tail corrected
through the B_24 term. Zeros are isolated as sign changes of the rotated
function ``Z(t) = e^{i theta(t)} L(1/2 + it, chi)`` which is real for real
primitive characters; for complex characters the constant root-number
phase is estimated and divided out first.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.optimize import brentq
from scipy.special import loggamma

from .characters import DirichletCharacter, get_character

log = logging.getLogger(__name__)

_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330), Fraction(854513, 138),
    Fraction(-236364091, 2730),
]  # B_2 .. B_24
_EM_COEFF = np.array([float(b / math.factorial(2 * k + 2)) for k, b in enumerate(_BERNOULLI)])

MAX_HEIGHT = 500.0
RESIDUAL_LIMIT = 1e-8
MERGE_TOL = 1e-6


class PoleError(ZeroDivisionError):
    pass


def em_terms(t_max: float) -> int:
    return max(30, math.ceil(1.3 * abs(t_max)))


def _em_sum(s: np.ndarray, q: int, offsets, weights, cancel_pole: bool) -> np.ndarray:
    """sum_b w_b * sum_{n>=0} (q*n + b)**-s by Euler-Maclaurin.

    ``offsets`` are the positive first terms b; when the weights sum to zero
    the 1/(s-1) pole parts cancel and are dropped analytically.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    offsets = np.asarray(offsets, dtype=float)
    weights = np.asarray(weights, dtype=complex)
    n_terms = em_terms(np.max(np.abs(s.imag)) if s.size else 0.0)
    out = np.empty(s.shape, dtype=complex)
    bases = (q * np.arange(n_terms)[:, None] + offsets[None, :]).ravel()
    wts = np.broadcast_to(weights, (n_terms, offsets.size)).ravel()
    logb = np.log(bases)
    W = q * n_terms + offsets
    logW = np.log(W)
    w = W / q
    for lo in range(0, s.size, 256):
        ss = s[lo : lo + 256]
        head = np.exp(-np.outer(ss, logb)) @ wts
        Ws = np.exp(-np.outer(ss, logW))  # W**-s, shape (len, nb)
        # Bernoulli corrections: W**-s * sum_k c_k (s)_{2k-1} w**(1-2k)
        corr = np.zeros((ss.size, offsets.size), dtype=complex)
        rising = ss.copy()[:, None] * np.ones(offsets.size)
        wpow = 1.0 / w
        for k, c in enumerate(_EM_COEFF):
            corr += c * rising * wpow
            rising = rising * (ss[:, None] + 2 * k + 1) * (ss[:, None] + 2 * k + 2)
            wpow = wpow / (w * w)
        tail = Ws * (0.5 + corr)
        if cancel_pole:
            u = np.outer(1 - ss, logW)
            with np.errstate(invalid="ignore", divide="ignore"):
                ratio = np.where(u == 0, 1.0, np.expm1(u) / np.where(u == 0, 1.0, u))
            pole = -logW[None, :] * ratio / q
        else:
            if np.any(ss == 1):
                raise PoleError("pole at s = 1")
            pole = np.exp(np.outer(1 - ss, logW)) / (q * (ss[:, None] - 1))
        out[lo : lo + 256] = head + (tail + pole) @ weights
    return out


def hurwitz_zeta(s, a: float):
    """Hurwitz zeta(s, a) for 0 < a <= 1 and |Im s| <= 500."""
    if not 0 < a <= 1:
        raise ValueError(f"Hurwitz parameter must lie in (0, 1], got {a}")
    arr = np.asarray(s, dtype=complex)
    if np.any(np.abs(arr.imag) > MAX_HEIGHT):
        raise ValueError(f"|Im s| must not exceed {MAX_HEIGHT}")
    if np.any(arr == 1):
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    out = _em_sum(arr.ravel(), 1, [a], [1.0], cancel_pole=False).reshape(arr.shape)
    return complex(out) if out.ndim == 0 else out


def _weights(chi: DirichletCharacter):
    q = chi.modulus
    res = [a for a in range(1, q + 1) if chi.table[a % q] >= 0]
    vals = [chi(a) for a in res]
    return res, vals


def l_value(chi: DirichletCharacter, s):
    """L(s, chi) for a primitive character.

    Raises:
        ValueError: for imprimitive characters (reduce with
            ``conductor_and_inducer`` first) or heights above 500.
        PoleError: for the Riemann zeta function at s = 1.
    """
    if not chi.is_primitive():
        raise ValueError(f"{chi.descriptor} is not primitive (conductor {chi.conductor()})")
    arr = np.asarray(s, dtype=complex)
    if np.any(np.abs(arr.imag) > MAX_HEIGHT):
        raise ValueError(f"|Im s| must not exceed {MAX_HEIGHT}")
    res, vals = _weights(chi)
    out = _em_sum(arr.ravel(), chi.modulus, res, vals, cancel_pole=not chi.is_principal)
    out = out.reshape(arr.shape)
    return complex(out) if out.ndim == 0 else out


def theta(chi: DirichletCharacter, t):
    """Phase of the gamma factor (q/pi)**((s+a)/2) Gamma((s+a)/2) at s = 1/2 + it."""
    t = np.asarray(t, dtype=float)
    a = chi.parity
    return 0.5 * t * math.log(chi.modulus / math.pi) + loggamma((0.5 + a + 1j * t) / 2).imag


def _raw_z(chi: DirichletCharacter, t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(1j * theta(chi, t)) * l_value(chi, 0.5 + 1j * t)


def root_phase(chi: DirichletCharacter) -> complex:
    """Unit complex u with Z(t)/u real on the critical line.

    For real characters u = 1. Otherwise Z(t)**2 / |Z(t)|**2 equals the root
    number at every t, so it is averaged over sample heights where |Z| is
    comfortably away from zero.
    """
    if chi.is_real:
        return 1.0 + 0j
    ts = np.linspace(0.3, 25.0, 200)
    z = _raw_z(chi, ts)
    big = np.abs(z) > 0.25 * np.max(np.abs(z))
    eps = np.mean(z[big] ** 2 / np.abs(z[big]) ** 2)
    eps /= abs(eps)
    return complex(np.sqrt(eps))


def z_function(chi: DirichletCharacter, t, phase: complex | None = None):
    """Real-valued rotation of L on the critical line (imaginary leak dropped)."""
    if phase is None:
        phase = root_phase(chi)
    z = _raw_z(chi, t) / phase
    return z.real if np.ndim(t) else float(z.real[0])


def zero_count_estimate(q: int, T: float) -> float:
    """Smooth main term (T/pi) log(qT/2pi) - T/pi of N(T, chi)."""
    if T <= 0:
        return 0.0
    return T / math.pi * math.log(q * T / (2 * math.pi)) - T / math.pi


def count_window(q: int, T: float) -> float:
    return 3 + math.log(max(T, 1.0)) + math.log(q)


@dataclass
class ZeroSet:
    """Nontrivial zero ordinates of L(s, chi) for a primitive character.

    Real characters store positive ordinates only (zeros come in conjugate
    pairs); complex characters store signed ordinates in [-T, T].
    """

    q: int
    index: int
    conductor: int
    parity: int
    height: float
    ordinates: np.ndarray
    certified: bool
    residual_bound: float
    real: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def descriptor(self) -> str:
        return f"{self.q}:{self.index}"

    @property
    def character(self) -> DirichletCharacter:
        return get_character(self.q, self.index)

    def count(self, T: float | None = None) -> int:
        """N(T, chi): zeros with |gamma| <= T counted with both signs."""
        T = self.height if T is None else T
        g = self.ordinates[np.abs(self.ordinates) <= T]
        return 2 * g.size if self.real else g.size

    def signed(self, T: float | None = None) -> np.ndarray:
        """All ordinates with |gamma| < T, both signs, increasing."""
        T = self.height if T is None else T
        g = self.ordinates
        if self.real:
            g = np.concatenate((-g[::-1], g))
        return g[np.abs(g) < T]

    def truncate(self, T: float) -> ZeroSet:
        if T > self.height + 1e-12:
            raise ValueError(f"zero set only reaches height {self.height}, asked for {T}")
        keep = np.abs(self.ordinates) <= T
        return ZeroSet(self.q, self.index, self.conductor, self.parity, T,
                       self.ordinates[keep], self.certified, self.residual_bound,
                       self.real, dict(self.diagnostics))


def _scan(chi: DirichletCharacter, T: float, step: float, phase: complex) -> tuple[np.ndarray, float]:
    lo = 0.0 if chi.is_real else -T
    n = max(1, math.ceil((T - lo) / step))
    grid = np.linspace(lo, T, n + 1)
    if chi.is_real:
        grid = grid[1:]
    z = z_function(chi, grid, phase)
    zeros = []
    f = lambda t: z_function(chi, t, phase)
    for i in np.flatnonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0):
        zeros.append(brentq(f, grid[i], grid[i + 1], xtol=1e-13, rtol=4 * np.finfo(float).eps))
    zeros.extend(grid[z == 0.0].tolist())
    zeros = np.unique(np.asarray(zeros, dtype=float))
    if zeros.size:
        resid = float(np.max(np.abs(l_value(chi, 0.5 + 1j * zeros))))
    else:
        resid = 0.0
    return zeros, resid


def find_zeros(chi: DirichletCharacter, T: float, step: float = 0.01) -> ZeroSet:
    """Locate all zeros 1/2 + i*gamma of L(s, chi) with 0 < |gamma| <= T.

    The result is certified when the count lies within the O-term window of
    the zero-counting main term and every residual |L(rho)| is at most 1e-8.
    A failed certification is retried once at half the grid step; the
    outcome is reported, never patched.
    """
    if not chi.is_primitive():
        raise ValueError(f"{chi.descriptor} is not primitive")
    if not 0 < T <= 200:
        raise ValueError(f"height must lie in (0, 200], got {T}")
    phase = root_phase(chi)
    q = chi.modulus
    est = zero_count_estimate(q, T)
    window = count_window(q, T)
    for attempt, h in enumerate((step, step / 2)):
        zeros, resid = _scan(chi, T, h, phase)
        count = 2 * zeros.size if chi.is_real else zeros.size
        ok_count = abs(count - est) <= window
        ok_resid = resid <= RESIDUAL_LIMIT
        if ok_count and ok_resid:
            break
        log.warning("zero scan for %s at step %g not certified (count %d vs %.2f, residual %.2e)",
                    chi.descriptor, h, count, est, resid)
    diag = {"estimate": est, "window": window, "step": h, "attempts": attempt + 1, "count": count}
    if not chi.is_real:
        diag["root_phase"] = [phase.real, phase.imag]
    return ZeroSet(q, chi.index, q, chi.parity, float(T), zeros, bool(ok_count and ok_resid),
                   resid, chi.is_real, diag)


# -- zero database files ---------------------------------------------------------

_HEADER = re.compile(
    r"# CHEBZEROS1 q=(\d+) index=(\d+) conductor=(\d+) parity=([01]) T=([0-9.eE+-]+) certified=(True|False|true|false)"
)


def write_zero_file(zs: ZeroSet, path: str | Path) -> None:
    lines = [
        f"# CHEBZEROS1 q={zs.q} index={zs.index} conductor={zs.conductor} "
        f"parity={zs.parity} T={zs.height:g} certified={str(zs.certified).lower()}"
    ]
    lines += [f"{g:.12f}" for g in zs.ordinates]
    Path(path).write_text("\n".join(lines) + "\n")


def read_zero_file(path: str | Path) -> ZeroSet:
    text = Path(path).read_text().splitlines()
    m = _HEADER.match(text[0]) if text else None
    if not m:
        raise ValueError(f"{path}: missing CHEBZEROS1 header")
    q, idx, cond, parity = (int(m.group(i)) for i in range(1, 5))
    T = float(m.group(5))
    certified = m.group(6).lower() == "true"
    ords = np.array([float(line) for line in text[1:] if line.strip()], dtype=float)
    real = get_character(q, idx).is_real
    # residual is not persisted; 12 printed decimals pin the ordinate to 5e-13
    return ZeroSet(q, idx, cond, parity, T, ords, certified, float("nan"), real)
