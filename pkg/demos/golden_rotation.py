"""Linearize the quadratic map ``x -> lam x + x**2`` with ``lam`` on the golden-mean circle.

Run with ``python3 demos/golden_rotation.py``.  The script walks from the
normal form computation through the residual check, the divisor table and the
certified radius, and compares the latter with the root-test estimate.
"""
import cmath
import math

from siegel_lie import (AnalyticMap, audit_iteration_lemma, conjugacy_residual, divisor_table,
                        normalize, radius_lower_bound, root_test_radius)
from siegel_lie.bounds import empirical_floor

gamma = (math.sqrt(5) - 1) / 2
lam = cmath.exp(2j * math.pi * gamma)
amap = AnalyticMap.quadratic_1d(lam, 15)

# Step 1: remove the nonlinear terms order by order.
result = normalize(amap)
print("generator norms ||X_r||:")
for r, v in sorted(result.x_norms.items()):
    print(f"  r={r:2d}  {v:.6e}")

# Step 2: the transform should conjugate F to its linear part up to order N.
rep = conjugacy_residual(amap, result)
print(f"\nlargest graded residual relative to the ledger scale: {rep.max_relative:.2e}")

# Step 3: small divisors.  Fibonacci orders give the record lows of beta_r.
plain = divisor_table(amap.spectrum, 1023)
records = [r for r in range(2, 60) if plain.beta[r] < plain.beta[1:r].min()]
print("orders where beta_r reaches a new minimum:", records)

# Step 4: a certified lower bound for the radius.  The floor c / r**2 is
# read off the table, which is an assumption beyond r = 1023.
table = divisor_table(amap.spectrum, 1023, floor=empirical_floor(plain.alpha))
audit = audit_iteration_lemma(result, table)
print(f"\niteration bounds checked: {len(audit.rows)}, violations: {len(audit.violations)}")
cert = radius_lower_bound(table, audit.A, audit.C0)
for line in cert.lines():
    print(" ", line)

# Step 5: the empirical radius from the coefficient growth is much larger.
rt = root_test_radius(result.transform)
print(f"\nroot test radius {rt}, certified {cert.rho_bar:.4g}")
