"""P_odd versus a genuine Chebotarev set.

P_odd = {p_1, p_3, p_5, ...} has density 1/2, yet its counting function
never strays more than 1/2 from pi(x)/2. The primes 3 mod 4 have the same
density but their discrepancy carries the zeros of L(s, chi_4), so its
normalized mean square stays near 1/4 + sum 1/4/|rho|^2.

    python3 demos/podd_witness.py [x_max]
"""

import math
import sys

from cheblab import explicit, primesets, sieve


def main(x_max: int = 10**6) -> None:
    table = sieve.build_table(x_max)
    Y = math.log(x_max)

    checked = primesets.podd_identity_sweep(table)
    print(f"P_odd(x) - pi(x)/2 is 0 or 1/2 on all {checked} prime intervals up to {x_max:.0e}")

    podd = explicit.discrepancy(primesets.OddIndexed(), "pi-half", table)
    race = explicit.build_model(primesets.parse_spec("residue q=4 classes=3"), "pi-half",
                                explicit.ZeroDatabase(100), 100, table)
    rows = [("P_odd", podd), ("3 mod 4", race)]
    print(f"\n{'set':<8} {'unsmoothed':>11} {'smoothed':>9} {'prediction':>11}")
    for name, target in rows:
        uns = explicit.mean_square_unsmoothed(target, Y)
        smo = explicit.mean_square_smoothed(target, Y)
        pred = f"{uns.prediction:.4f}" if uns.prediction is not None else "none"
        print(f"{name:<8} {uns.empirical:>11.5f} {smo.empirical:>9.5f} {pred:>11}")
    print(f"\nM(x_max) for P_odd: {podd.m_average(x_max):+.5f}")


if __name__ == "__main__":
    main(int(float(sys.argv[1])) if len(sys.argv) > 1 else 10**6)
