"""The propagation operator and the node-importance utilities.

Each convolution layer propagates representations through the
symmetrically normalized adjacency with self-connections,
D̃^{-1/2}(A+I)D̃^{-1/2}.  On a 3-node path the entries are easy to verify
by hand: diagonal 1/(deg+1), off-diagonal 1/sqrt((deg_i+1)(deg_j+1)).
"""

import numpy as np

from graphadv import SparseMatrix, normalize_adjacency, pagerank

path = SparseMatrix.from_coo(
    3, 3, [0, 1, 1, 2], [1, 0, 2, 1], np.ones(4)
)
a_hat = normalize_adjacency(path)
print("normalized path adjacency:")
print(np.array_str(a_hat.matrix.to_dense(), precision=5))
print(f"expected off-diagonal 1/sqrt(6) = {1 / np.sqrt(6):.5f}")

star = SparseMatrix.from_coo(
    4, 4, [0, 0, 0, 1, 2, 3], [1, 2, 3, 0, 0, 0], np.ones(6)
)
scores = pagerank(star, damping=0.85)
print(f"\nstar pagerank: center {scores[0]:.4f}, leaves {scores[1]:.4f}")
print(f"sums to {scores.sum():.12f}")
