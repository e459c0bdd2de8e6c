"""
Growing a single Riemann-Lebesgue tree
======================================

Each node draws a Bernoulli variable to choose between its best feature cut
and its best response cut. A response-cut node stores a small CART forest;
at prediction time that forest guesses the query's response, and the guess
decides which child the query follows.
"""

import numpy as np

from rlforest import SyntheticSpec, TreeParams, fit_rl_tree, generate, predict_tree, tree_stats

ds = generate(SyntheticSpec("sine", 500, seed=3))

# data-driven p~ (the default), 10 local trees per response-cut node
tree = fit_rl_tree(ds, np.arange(ds.n), TreeParams(min_node=5, m_local=10), rng=1)
print("census:", tree_stats(tree))

# fixed p~ = 1 never cuts on the response: a plain CART tree
cart = fit_rl_tree(ds, np.arange(ds.n), TreeParams(p_fixed=1.0), rng=1)
print("p~ = 1 census:", tree_stats(cart))

for x in (0.05, 0.1, 0.3, 0.5):
    print(f"x = {x:.2f}  truth {np.sin(16 * x):+.3f}  "
          f"RL tree {predict_tree(tree, np.array([x])):+.3f}  "
          f"CART {predict_tree(cart, np.array([x])):+.3f}")
