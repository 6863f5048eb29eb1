"""Pure-NumPy fallback for the direction-risk kernel.

Same contract as the compiled extension: given the per-instrument loss
basis on the price grid, the node weights, and a batch of unit quantity
vectors, return each direction's risk measures for the requested orders.
"""

from __future__ import annotations

import numpy as np

# rows per chunk; keeps the loss block around L2-cache size
_CHUNK = 256


def direction_risks(
    loss_basis: np.ndarray,
    node_weights: np.ndarray,
    quantities: np.ndarray,
    orders: np.ndarray,
) -> np.ndarray:
    out = np.empty((quantities.shape[0], orders.shape[0]))
    for start in range(0, quantities.shape[0], _CHUNK):
        stop = min(start + _CHUNK, quantities.shape[0])
        losses = quantities[start:stop] @ loss_basis
        neg = np.where(losses < 0.0, -losses, 0.0)
        for c, order in enumerate(orders):
            if order == 0:
                out[start:stop, c] = (losses < 0.0).astype(np.float64) @ node_weights
            elif order == 1:
                out[start:stop, c] = neg @ node_weights
            else:
                out[start:stop, c] = (neg ** order) @ node_weights
    return out
