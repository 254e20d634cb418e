# E[Y_k^2]/E[Y_k]^2 three ways: grid of b(l,s), rationals, and pair enumeration.
from fractions import Fraction

from induced_matching import ModelParams, brute_force_second_moment, build_moment_table, second_moment_ratio
from induced_matching.moments import pz_lower_bound, second_moment_ratio_exact

for n, k, p in [(6, 1, 0.5), (8, 2, 0.3), (10, 2, 0.2), (10, 3, 0.5)]:
    params = ModelParams(n, p, k=k)
    grid = float(second_moment_ratio(params))
    exact = second_moment_ratio_exact(n, Fraction(p).limit_denominator(1000), k)
    brute = brute_force_second_moment(n, k, p)
    print(f"n={n:2d} k={k} p={p}: grid={grid:.12g}  exact={float(exact):.12g}  pairs={brute:.12g}")

table = build_moment_table(ModelParams(8, 0.3, k=2))
print("\nlog a and log b at n=8, k=2, p=0.3")
print(table.to_csv(), end="")

# at fixed c the lower bound decays like exp(-O(n/c)); compare its log with -n/c
for n in (10**3, 10**4, 10**5):
    params = ModelParams(n, 20 / n, 0.3)
    log_bound = pz_lower_bound(params).log_magnitude
    print(f"n={n:6d} c=20 k={params.k:5d}  ln P(Y_k > 0) >= {log_bound:9.2f}   -n/c = {-n / 20:9.1f}")
