"""Riemann-Lebesgue forests: regression trees that may cut on the response."""

from .cart import CartForest, fit_cart_forest
from .dataset import (DataError, Dataset, FoldAssignment, load_csv, stratified_folds,
                      subsample_without_replacement)
from .evaluation import (CvReport, TTestResult, TuneGrid, bench_scaling, corrected_t,
                         run_cv_comparison, tune)
from .forest import (ForestParams, ModelFormatError, TrainedForest, fit_forest,
                     load_forest, mse, predict_batch, predict_forest, save_forest)
from .normality_lab import NormalityConfig, NormalityReport, ks_statistic, run_normality
from .rl_tree import (LebesgueNode, Leaf, RiemannNode, TreeParams, fit_rl_tree,
                      predict_tree, tree_stats)
from .rng import RandomState
from .splitters import (LebesgueSplit, NodeView, RiemannSplit, SplitEvaluation,
                        best_lebesgue_split, best_riemann_split, compute_p_tilde)
from .synthgen import SyntheticSpec, gen_mixture, gen_sine, gen_sparse, generate

__version__ = "0.1.0"
