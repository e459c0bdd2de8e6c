"""
Are forest predictions approximately normal?
=============================================

Refit a forest on fresh samples many times, record its prediction at one
point and measure the Kolmogorov-Smirnov distance of the studentized
predictions from N(0, 1). A stub that returns exact normal draws shows the
distance to expect from sampling alone.
"""

from rlforest import NormalityConfig, SyntheticSpec, run_normality

stub = run_normality(NormalityConfig(reps=300, seed=1),
                     replicate=lambda cfg, rng: float(rng.generator().normal()))
print(f"normal stub, 300 reps : KS {stub.ks_distance:.4f}")

# Fewer trees and replicates than the acceptance run, for speed
cfg = NormalityConfig(n=500, alpha=0.1, m_trees=50, reps=100, query_point=(0.5,),
                      generator=SyntheticSpec("sine", 500), seed=0)
report = run_normality(cfg)
print(f"RLF at x=0.5, 100 reps: KS {report.ks_distance:.4f}, "
      f"mean {report.mean:.3f}, sd {report.sd:.3f}")
