"""
Saving a trained forest
=======================

Models are plain JSON. Response-cut nodes carry their local CART forests as
flat node arrays, so a reloaded model predicts bit for bit like the original.
"""

import tempfile
from pathlib import Path

import numpy as np

from rlforest import ForestParams, SyntheticSpec, fit_forest, generate, load_forest, save_forest

ds = generate(SyntheticSpec("mixture", 300, seed=2))
forest = fit_forest(ds, ForestParams(m_trees=10, seed=4))

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.json"
    save_forest(forest, path)
    print(f"model file: {path.stat().st_size / 1024:.0f} KiB")
    again = load_forest(path)

X = np.linspace(-3, 3, 7)[:, None]
print("predictions:", np.round(forest.predict(X), 3))
print("identical after reload:", np.array_equal(forest.predict(X), again.predict(X)))
