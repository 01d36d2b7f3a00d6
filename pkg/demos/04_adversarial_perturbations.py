"""Crafting the two perturbation families on a toy graph.

Graph perturbations push each node's prediction away from its sampled
neighbors' predictions (one backward pass, row-normalized gradient).
Virtual perturbations push a node away from its own target and need a
power-iteration step, because at the clean input their first-order
gradient vanishes.
"""

import numpy as np

from graphadv import (
    generate_sbm,
    graph_adv_perturbation,
    init_params,
    normalize_adjacency,
    sample_neighbors,
    virtual_adv_perturbation,
)
from graphadv.gcn import gcn_forward
from graphadv.rng import generator

ds = generate_sbm(2, 30, 0.15, 0.02, feature_dim=8, noise_scale=2.0, seed=1)
a_hat = normalize_adjacency(ds.adjacency)
params = init_params(ds.num_features, 8, ds.num_classes, seed=1)
x = ds.dense_features()

sample = sample_neighbors(ds, k=1, rng=generator(0))
print(f"sampled {len(sample)} (node, neighbor) pairs")

pert = graph_adv_perturbation(a_hat, x, params, sample, epsilon=0.05)
norms = pert.row_norms()
print(f"graph perturbation rows at norm 0.05: {(np.abs(norms - 0.05) < 1e-9).sum()}"
      f" of {len(norms)} (zeros: {(norms == 0).sum()})")

# the worst-case direction raises the neighbor divergence more than noise
clean = gcn_forward(a_hat, x, params)[0].value

def divergence(r):
    probs = gcn_forward(a_hat, x + r, params)[0].value
    p = np.clip(probs[sample.targets], 1e-12, 1.0)
    q = np.clip(clean[sample.neighbors], 1e-12, 1.0)
    return (q * (np.log(q) - np.log(p))).sum()

rng = np.random.default_rng(2)
noise = rng.standard_normal(x.shape)
noise = 0.05 * noise / np.linalg.norm(noise, axis=1, keepdims=True)
print(f"divergence: clean {divergence(np.zeros_like(x)):.5f}, "
      f"adversarial {divergence(pert.r):.5f}, random {divergence(noise):.5f}")

vpert = virtual_adv_perturbation(
    a_hat, x, params, ds.labels, ds.train_nodes,
    v_epsilon=0.05, xi=1e-6, rng=generator(3),
)
print(f"virtual perturbation max row norm: {vpert.row_norms().max():.6f}")
