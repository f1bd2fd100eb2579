# Exact expected CRI lengths L_n, built by enumerating every split of n users.

import math

from sicta import biased, check_yg_relation, expected_cri_table, fair, throughput_estimate, yg_closed_form_mst

policy = fair(3)
tables = {v: expected_cri_table(8, policy, v, exact=True) for v in ("standard", "yg", "corrected")}
print(" n  standard          yg                corrected")
for n in range(9):
    print(f"{n:2d}  " + "  ".join(f"{str(tables[v][n]):16s}" for v in tables))

# The identity (d-1)(L'_n - 1) = d (L_n - 1) linking the standard tree
# algorithm to the SIC variant holds for the yg recursion at every d ...
print("\nidentity for yg, d=3, n<=30:", check_yg_relation(30, 3, variant="yg").holds)
# ... but not for the early-stop recursion once d > 2
for row in check_yg_relation(5, 3, variant="corrected").rows[2:]:
    print(f"  n={row.n}: {row.lhs} vs {row.rhs}")

# n / L_n settles near the stable throughput for large n
for name, pol in (("fair", fair(3)), ("biased", biased(3))):
    curve = throughput_estimate(expected_cri_table(150, pol, "corrected"))
    print(f"\nd=3 {name:6s}: n/L_n at n=150 = {curve.mst_proxy:.4f}")
print(f"claimed ln(3)/2     = {yg_closed_form_mst(3):.4f}")
print(f"binary ln 2         = {math.log(2):.4f}")
