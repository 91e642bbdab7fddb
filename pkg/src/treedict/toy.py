"""The eight 3x3 training patches of the worked toy example.

Patch ``Y_j`` of the example is row ``j - 1`` of :func:`toy_dataset`.
"""

import numpy as np

from .data import DataSet

TOY_PATCHES = np.array([
    [[1, 0, 0], [1, 2, 0], [0, 1, 3]],
    [[1, 0, 0], [1, 2, 0], [0, 1, 5]],
    [[1, 0, 0], [1, 1, 0], [1, 0, 0]],
    [[2, 0, 0], [5, 5, 0], [2, 7, 5]],
    [[1, 0, 0], [0, 2, 0], [0, 0, 5]],
    [[2, 2, 0], [3, 5, 1], [2, 5, 7]],
    [[0, 0, 0], [0, 0, 0], [0, 1, 2]],
    [[1, 0, 0], [1, 2, 0], [0, 0, 0]],
], dtype=float)


def toy_dataset() -> DataSet:
    return DataSet.from_samples(TOY_PATCHES)
