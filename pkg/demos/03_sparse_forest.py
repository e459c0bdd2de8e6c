"""
Forests on the sparse model
===========================

Thirty-five of the hundred uniform features carry signal. A subagged forest
of RL trees with data-driven p~ is compared with the same forest restricted
to feature cuts (p~ = 1), which is an ordinary subagged random forest.
A smaller ensemble than the acceptance run keeps this demo to a minute or so.
"""

from rlforest import ForestParams, SyntheticSpec, TreeParams, fit_forest, generate, mse

train = generate(SyntheticSpec("sparse", 600, seed=0))
test = generate(SyntheticSpec("sparse", 300, seed=1))

for label, p in (("RLF (data-driven p~)", None), ("RF  (p~ = 1)", 1.0)):
    params = ForestParams(m_trees=40, alpha=0.632, tree=TreeParams(p_fixed=p), seed=0)
    forest = fit_forest(train, params, n_jobs=0)
    stats = forest.stats()
    print(f"{label}: test MSE {mse(forest.predict(test), test.target):.3f}, "
          f"response-cut share {stats['lebesgue_fraction']:.2f}")
