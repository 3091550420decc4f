"""Frobenius class frequencies for x^3 - 2 and the Gaussian field.

    python3 demos/chebotarev_census.py
"""

from cheblab import frobenius, sieve

table = sieve.build_table(10**6)
for ext_id in ("s3_x3m2", "gauss_i", "cyclo_12"):
    entry = frobenius.get_extension(ext_id)
    print(f"{entry.id}: {entry.description}")
    for x in (1e3, 1e4, 1e5, 1e6):
        result = frobenius.census(table, entry, x)
        cells = "  ".join(f"{cid}={r['frequency']:.4f}" for cid, r in result.items())
        print(f"  x={x:.0e}  {cells}")
    expected = "  ".join(f"{c}={entry.class_size(c)}/{entry.group.order}" for c in entry.class_ids)
    print(f"  expected  {expected}\n")

F = frobenius.QuadraticField(-1)
for x in (1e4, 1e5, 1e6):
    print(f"prime ideals of Q(i) with norm <= {x:.0e}: {frobenius.dedekind_pi(table, F, x)}, "
          f"li(x) = {sieve.li(x):.1f}")
