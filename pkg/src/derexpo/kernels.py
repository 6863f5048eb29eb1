"""Backend selection for the direction-risk kernel.

The compiled Cython kernel is preferred when the extension built; the
pure-NumPy implementation is the fallback and the reference. Both share
one contract: ``direction_risks(loss_basis, node_weights, quantities,
orders) -> (n_directions, n_orders)`` array of risk measures, where a
profit/loss of exactly zero never counts as a loss.
"""

from __future__ import annotations

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

DEFAULT_BACKEND = "compiled" if _compiled is not None else "numpy"


def available_backends() -> tuple[str, ...]:
    return ("compiled", "numpy") if _compiled is not None else ("numpy",)


def direction_risks(
    loss_basis: np.ndarray,
    node_weights: np.ndarray,
    quantities: np.ndarray,
    orders,
    backend: str | None = None,
) -> np.ndarray:
    """Risk measures of every direction for every requested order.

    ``loss_basis`` is (instruments, nodes), ``node_weights`` (nodes,),
    ``quantities`` (directions, instruments), ``orders`` a sequence of
    integers >= 0. Rows of the result follow ``quantities``, columns follow
    ``orders``.
    """
    backend = backend or DEFAULT_BACKEND
    A = np.ascontiguousarray(loss_basis, dtype=np.float64)
    W = np.ascontiguousarray(node_weights, dtype=np.float64)
    Q = np.ascontiguousarray(quantities, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q[None, :]
    ords = np.ascontiguousarray(orders, dtype=np.int64)
    if ords.ndim != 1 or (ords.size and ords.min() < 0):
        raise ValueError("orders must be a 1-d sequence of integers >= 0")
    if backend == "compiled":
        if _compiled is None:
            raise ValueError("compiled kernel is not available in this installation")
        return _compiled.direction_risks(A, W, Q, ords)
    if backend == "numpy":
        return _kernels_py.direction_risks(A, W, Q, ords)
    raise ValueError(f"unknown backend {backend!r}, expected one of {available_backends()}")
