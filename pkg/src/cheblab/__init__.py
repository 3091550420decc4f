"""Computational lab for Chebotarev sets of primes.

Modules: ``sieve`` (prime tables), ``characters`` (Dirichlet characters),
``lfunc`` (L-values and zeros), ``counting`` (progression counts),
``frobenius`` (Frobenius classes), ``primesets`` (set specs),
``explicit`` (explicit formulas and mean squares) and ``cli``.
"""

from .sieve import PrimeTable, build_table, li
from .characters import DirichletCharacter, character_group, get_character
from .lfunc import ZeroSet, find_zeros, l_value
from .primesets import (FrobeniusUnion, OddIndexed, Procedural, ResidueUnion, Weighted, count,
                        parse_spec)
from .explicit import (ZeroDatabase, build_model, discrepancy, mean_square_smoothed,
                       mean_square_unsmoothed, parse_reference)

__version__ = "0.1.0"
