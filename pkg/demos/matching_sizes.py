# Maximum induced matchings of small random graphs against log_q(np).
import math

import numpy as np

from induced_matching import GnpParams, derive_seed, mim_exact, sample_gnp

for n, p in [(20, 0.5), (30, 0.5), (40, 0.5), (50, 0.4), (60, 0.3)]:
    scale = math.log(n * p) / math.log(1 / (1 - p))
    sizes = np.array([mim_exact(sample_gnp(GnpParams(n, p, derive_seed(1, n, i)))).size for i in range(30)])
    print(f"n={n:3d} p={p:.1f}  log_q(np)={scale:5.2f}  median={np.median(sizes):.1f}  "
          f"range={sizes.min()}..{sizes.max()}  ratio={np.median(sizes) / scale:.2f}")

# a single witness, for a look at what the solver returns
g = sample_gnp(GnpParams(16, 0.4, 3))
res = mim_exact(g)
print("\nn=16 p=0.4:", res.size, "edges", res.witness.pairs, "search nodes", res.nodes_explored)
