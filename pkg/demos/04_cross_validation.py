"""
Comparing two forests by cross-validation
=========================================

Ten stratified folds give ten paired test MSEs. The corrected resampled
t-test inflates the variance of their mean difference by n2/n1 = 1/9 to
account for the overlap between training sets.
"""

from rlforest import ForestParams, SyntheticSpec, TreeParams, generate, run_cv_comparison

ds = generate(SyntheticSpec("sine", 400, seed=5))
a = ForestParams(m_trees=20, tree=TreeParams(p_fixed=0.8), seed=1)
b = ForestParams(m_trees=20, tree=TreeParams(p_fixed=1.0), seed=1)

report = run_cv_comparison(ds, V=10, params_a=a, params_b=b, seed=0)
print(f"p~=0.8 : {report.mean_a:.3f} +/- {report.margin_a:.3f}")
print(f"p~=1.0 : {report.mean_b:.3f} +/- {report.margin_b:.3f}")
t = report.ttest
print(f"t = {t.t:.3f}, p-value {t.p_value:.3f}, significant: {t.significant}")
