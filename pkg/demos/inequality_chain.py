# Every step of the b(l,s) bound chain at n = 1e8, c = 1e4, eps = 0.3.
import math

from induced_matching import (
    CheckConfig,
    ModelParams,
    check_boundary_ratios,
    check_final_assembly,
    check_global_bound,
    check_interior_bound,
    check_talagrand_arithmetic,
)

params = ModelParams.from_c(10**8, 1e4, 0.3)
config = CheckConfig.default(params, 200)
print(f"k = {params.k}, p = {params.p:g}\n")

for check in (check_interior_bound, check_global_bound, check_boundary_ratios):
    print(check(config).to_table())
print(check_final_assembly(params).to_table())

# the concentration exponent needs ln c >= 16 (1 - eps) / eps^2
for ln_c in (90, 96, 100):
    r = check_talagrand_arithmetic(n=10**8, c=math.exp(ln_c), epsilon=1 / 3)
    print(f"ln c = {ln_c}: holds={r.holds} margin={r.margin:+.3g}")
