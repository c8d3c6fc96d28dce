"""Compare the small-divisor sums for a few rotation numbers.

Rotation numbers close to rationals have a small ``beta_r`` at the order of the
approximating denominator, which shows up as a jump in the partial sums of
Gamma and of the dyadic Bruno sum.
"""
import math

from siegel_lie import Spectrum, divisor_table

cases = {
    "golden mean": (math.sqrt(5) - 1) / 2,
    "silver mean": math.sqrt(2) - 1,
    "near 1/3": 1 / 3 + 1e-4,
    "e - 2": math.e - 2,
}
print(f"{'rotation':>12} {'alpha_50':>10} {'Gamma_1023':>11} {'Bruno_1023':>11}")
for name, w in cases.items():
    t = divisor_table(Spectrum.rotation(w), 1023)
    print(f"{name:>12} {t.alpha[50]:10.3e} {t.gamma.lower:11.5f} {t.bruno.lower:11.5f}")
