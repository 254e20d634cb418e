# Resampling one vertex, and keeping a witness's vertex set fixed.
from induced_matching import ExperimentConfig, run_certificate_property, run_lipschitz_property
from induced_matching.experiments import run_concentration_stats

lip = run_lipschitz_property(300, 12, 0.4, seed=1)
diffs = [t["difference"] for t in lip.cells[0]["trials_detail"]]
print("Lipschitz: differences", {d: diffs.count(d) for d in sorted(set(diffs))}, "violations", lip.cells[0]["violations"])

cert = run_certificate_property(300, 12, 0.4, seed=1)
gains = [t["after"] - t["before"] for t in cert.cells[0]["trials_detail"]]
print("certificate: M(g') - M(g) ranges", min(gains), "..", max(gains), "violations", cert.cells[0]["violations"])

stats = run_concentration_stats(ExperimentConfig((40,), (0.5,), samples=200, master_seed=2, parallelism=4))
cell = stats.cells[0]
print(f"n=40 p=0.5: mean={cell['mean']:.2f} stddev={cell['stddev']:.3f} "
      f"P(M<=a)P(M>=b)={cell['tail_product']:.3f} (a={cell['a']:.2f}, b={cell['b']})")
