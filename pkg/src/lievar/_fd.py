"""Finite-difference helpers shared by the residual and flow code."""
from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Callable

import numpy as np

# Fourth-order central first-derivative stencil: offsets -2..2.
_D1_OFFSETS = (-2.0, -1.0, 1.0, 2.0)
_D1_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)


def jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, step: float) -> np.ndarray:
    """Derivative of ``f`` at ``x`` by the fourth-order central stencil.

    Returns an array of shape ``f(x).shape + x.shape``; for scalar ``f`` this
    is the gradient.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    cols = []
    for j in range(flat.size):
        acc = None
        for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
            xp = flat.copy()
            xp[j] += off * step
            val = w * np.asarray(f(xp.reshape(x.shape)), dtype=float)
            acc = val if acc is None else acc + val
        cols.append(acc / step)
    out = np.stack(cols, axis=-1)
    return out.reshape(out.shape[:-1] + x.shape)


def directional(f: Callable[[float], np.ndarray], step: float) -> np.ndarray:
    """d/ds f(s) at s = 0 with the same fourth-order stencil."""
    acc = None
    for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
        val = w * np.asarray(f(off * step), dtype=float)
        acc = val if acc is None else acc + val
    return acc / step


@lru_cache(maxsize=None)
def central_weights(order: int) -> tuple[int, np.ndarray]:
    """Second-order accurate central weights for the ``order``-th derivative.

    Returns ``(p, w)`` where the stencil covers offsets ``-p..p``.
    """
    if order < 0:
        raise ValueError("derivative order must be non-negative")
    if order == 0:
        return 0, np.ones(1)
    p = (order + 1) // 2
    offsets = np.arange(-p, p + 1, dtype=float)
    vander = np.vander(offsets, increasing=True).T
    rhs = np.zeros(2 * p + 1)
    rhs[order] = factorial(order)
    w = np.linalg.solve(vander, rhs)
    w.setflags(write=False)
    return p, w


def time_derivative(values: np.ndarray, h: float, order: int) -> tuple[int, np.ndarray]:
    """Central-difference ``order``-th time derivative along axis 0.

    Returns ``(p, d)``: ``d[j]`` approximates the derivative at node ``p + j``;
    the first and last ``p`` nodes are not covered.
    """
    values = np.asarray(values, dtype=float)
    p, w = central_weights(order)
    n = values.shape[0]
    if n < 2 * p + 1:
        raise ValueError(
            f"need at least {2 * p + 1} samples for a derivative of order {order}, got {n}"
        )
    out = np.zeros((n - 2 * p,) + values.shape[1:])
    for j, wj in enumerate(w):
        if wj != 0.0:
            out += wj * values[j:n - 2 * p + j]
    return p, out / h**order
