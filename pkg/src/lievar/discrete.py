"""Discrete second-order Euler-Poincare mechanics on G x G x G.

A discrete path is a sequence of rotations ``g_0 .. g_N`` with increments
``W_k = g_k^-1 g_{k+1}``.  The discrete action is
``sum_{k=0}^{N-2} L_d(g_k, W_k, W_{k+1})`` and its critical points under
variations ``g_k -> g_k exp(s Sigma_k)`` with ``Sigma_0 = Sigma_1 =
Sigma_{N-1} = Sigma_N = 0`` satisfy :func:`discrete_el_residual` = 0 at every
interior index ``2 <= k <= N-2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, DegenerateError
from .lie import (check_rotation, group_exp, group_log,
                  left_trivialized_group_derivative,
                  right_trivialized_group_derivative)

PartialFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiscretePath:
    """Nodes ``g_0 .. g_N`` of a discrete trajectory on SO(3)."""

    nodes: np.ndarray
    info: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 3 or nodes.shape[1:] != (3, 3):
            raise ValueError(f"nodes must have shape (N+1, 3, 3), got {nodes.shape}")
        if nodes.shape[0] < 5:
            raise ValueError("a discrete path needs N >= 4 (two fixed nodes at each end)")
        for k, g in enumerate(nodes):
            check_rotation(g, tol=1e-9, what=f"node {k}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return self.nodes.shape[0] - 1

    @property
    def increments(self) -> np.ndarray:
        return np.swapaxes(self.nodes[:-1], -1, -2) @ self.nodes[1:]


@dataclass(frozen=True)
class DiscreteLagrangian:
    """Scalar ``L_d(g, W1, W2)`` with optional analytic partials.

    ``d1``, ``d2``, ``d3`` return the left-trivialized partial derivatives
    (``d/ds L_d`` along ``g exp(s e_i)``, ``W1 exp(s e_i)``, ``W2 exp(s e_i)``).
    Right-trivialized partials follow from them through the coadjoint action;
    without analytic partials everything is differenced directly.
    """

    func: Callable[[np.ndarray, np.ndarray, np.ndarray], float]
    d1: PartialFn | None = None
    d2: PartialFn | None = None
    d3: PartialFn | None = None
    step: float = 1e-3

    def __call__(self, g, w1, w2) -> float:
        return float(self.func(g, w1, w2))

    def left_partial(self, slot: int, g, w1, w2) -> np.ndarray:
        analytic = (self.d1, self.d2, self.d3)[slot - 1]
        if analytic is not None:
            return np.asarray(analytic(g, w1, w2), dtype=float)
        args = [g, w1, w2]

        def f(x):
            a = list(args)
            a[slot - 1] = x
            return self.func(*a)

        return left_trivialized_group_derivative(f, args[slot - 1], step=self.step)

    def right_partial(self, slot: int, g, w1, w2) -> np.ndarray:
        analytic = (self.d1, self.d2, self.d3)[slot - 1]
        x = (g, w1, w2)[slot - 1]
        if analytic is not None:
            # exp(s eta) x = x exp(s Ad_{x^-1} eta), and Ad_x = x on so(3)
            return np.asarray(x, dtype=float) @ np.asarray(analytic(g, w1, w2), dtype=float)
        args = [g, w1, w2]

        def f(y):
            a = list(args)
            a[slot - 1] = y
            return self.func(*a)

        return right_trivialized_group_derivative(f, x, step=self.step)


def acceleration_lagrangian(scale: float = 1.0) -> DiscreteLagrangian:
    """``L_d = scale/2 |log(W1^-1 W2)|^2``, a discrete squared acceleration.

    On SO(3) the left and right Jacobians of log fix the rotation vector
    itself, so the partials reduce to ``-phi`` and ``+phi``.
    """

    def phi(w1, w2):
        return group_log(np.asarray(w1).T @ np.asarray(w2))

    def func(g, w1, w2):
        p = phi(w1, w2)
        return 0.5 * scale * float(p @ p)

    return DiscreteLagrangian(
        func=func,
        d1=lambda g, w1, w2: np.zeros(3),
        d2=lambda g, w1, w2: -scale * phi(w1, w2),
        d3=lambda g, w1, w2: scale * phi(w1, w2),
    )


def _nodes(path) -> np.ndarray:
    if isinstance(path, DiscretePath):
        return path.nodes
    return DiscretePath(path).nodes


def discrete_action(ld: DiscreteLagrangian, path) -> float:
    nodes = _nodes(path)
    w = np.swapaxes(nodes[:-1], -1, -2) @ nodes[1:]
    return float(sum(ld(nodes[k], w[k], w[k + 1]) for k in range(nodes.shape[0] - 2)))


def _term_partials(ld: DiscreteLagrangian, nodes: np.ndarray, terms: Sequence[int]):
    w = np.swapaxes(nodes[:-1], -1, -2) @ nodes[1:]
    out = {}
    for j in terms:
        args = (nodes[j], w[j], w[j + 1])
        out[j] = (ld.left_partial(1, *args),
                  ld.left_partial(2, *args),
                  ld.right_partial(2, *args),
                  ld.left_partial(3, *args),
                  ld.right_partial(3, *args))
    return out


def _assemble(parts, k: int) -> np.ndarray:
    l1, _, r2, _, _ = parts[k]
    _, l2_prev, _, _, r3_prev = parts[k - 1]
    l3_prev2 = parts[k - 2][3]
    return l1 + l2_prev - r2 - r3_prev + l3_prev2


def discrete_el_residual(ld: DiscreteLagrangian, path, k: int) -> np.ndarray:
    """Discrete second-order Euler-Lagrange residual at interior index ``k``.

    Equals the derivative of the discrete action along ``g_k exp(s e_i)``.
    """
    nodes = _nodes(path)
    n = nodes.shape[0] - 1
    if not 2 <= k <= n - 2:
        raise IndexError(f"interior index must satisfy 2 <= k <= {n - 2}, got {k}")
    parts = _term_partials(ld, nodes, (k - 2, k - 1, k))
    return _assemble(parts, k)


def discrete_el_residuals(ld: DiscreteLagrangian, path) -> np.ndarray:
    """Residuals at every interior index, shape ``(N - 3, 3)``."""
    return _interior_residuals(ld, _nodes(path))


def _interior_residuals(ld, nodes):
    n = nodes.shape[0] - 1
    parts = _term_partials(ld, nodes, range(n - 1))
    return np.array([_assemble(parts, k) for k in range(2, n - 1)])


def _jacobian(ld, nodes, step):
    """Banded finite-difference Jacobian of the interior residuals.

    Residual ``k`` only sees nodes ``k-2 .. k+2``, so unknowns five apart are
    perturbed together.
    """
    n = nodes.shape[0] - 1
    m = n - 3
    jac = np.zeros((3 * m, 3 * m))
    for color in range(min(5, m)):
        cols = list(range(color, m, 5))
        for i in range(3):
            plus = nodes.copy()
            minus = nodes.copy()
            e = np.zeros(3)
            e[i] = step
            ep, em = group_exp(e), group_exp(-e)
            for c in cols:
                plus[c + 2] = nodes[c + 2] @ ep
                minus[c + 2] = nodes[c + 2] @ em
            diff = (_interior_residuals(ld, plus) - _interior_residuals(ld, minus)) / (2 * step)
            for c in cols:
                lo, hi = max(0, c - 2), min(m, c + 3)
                jac[3 * lo:3 * hi, 3 * c + i] = diff[lo:hi].ravel()
    return jac


def geodesic_guess(boundary, n: int) -> np.ndarray:
    """Initial nodes interpolating ``g_1 -> g_{N-1}`` along a one-parameter subgroup."""
    g0, g1, gm, gn = (check_rotation(b, tol=1e-9, what="boundary node") for b in boundary)
    step = group_log(g1.T @ gm) / (n - 2)
    nodes = np.empty((n + 1, 3, 3))
    nodes[0], nodes[1], nodes[n - 1], nodes[n] = g0, g1, gm, gn
    for k in range(2, n - 1):
        nodes[k] = g1 @ group_exp((k - 1) * step)
    return nodes


def solve_discrete_bvp(ld: DiscreteLagrangian, boundary, n: int, guess=None, *,
                       tol: float = 1e-10, xtol: float = 1e-12, max_iter: int = 50,
                       fd_step: float = 1e-6) -> DiscretePath:
    """Newton solve for the interior nodes ``g_2 .. g_{N-2}``.

    ``boundary`` is ``(g_0, g_1, g_{N-1}, g_N)``.  Updates act on the right,
    ``g_k <- g_k exp(delta_k)``.  Iteration stops once the max-norm residual is
    below ``tol`` and the last update is below ``xtol``.
    """
    if n < 4:
        raise ValueError("need N >= 4 so that at least one node is free")
    if guess is None:
        nodes = geodesic_guess(boundary, n)
    else:
        nodes = np.array(_nodes(guess), dtype=float)
        if nodes.shape[0] != n + 1:
            raise ValueError(f"guess has {nodes.shape[0]} nodes, expected {n + 1}")
        for idx, b in zip((0, 1, n - 1, n), boundary):
            nodes[idx] = check_rotation(b, tol=1e-9, what="boundary node")

    res = _interior_residuals(ld, nodes)
    rnorm = float(np.max(np.abs(res)))
    last_step = np.inf
    for it in range(1, max_iter + 1):
        if rnorm < tol and last_step < xtol:
            return DiscretePath(nodes, info={"iterations": it - 1, "residual": rnorm})
        jac = _jacobian(ld, nodes, fd_step)
        try:
            if np.linalg.cond(jac) > 1e14:
                raise np.linalg.LinAlgError("ill-conditioned")
            delta = -np.linalg.solve(jac, res.ravel()).reshape(-1, 3)
        except np.linalg.LinAlgError as exc:
            raise DegenerateError(f"singular Newton system at iteration {it}: {exc}") from exc
        scale = 1.0
        for _ in range(9):
            trial = nodes.copy()
            for c, d in enumerate(delta):
                trial[c + 2] = nodes[c + 2] @ group_exp(scale * d)
            trial_res = _interior_residuals(ld, trial)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm <= rnorm or rnorm < tol:
                break
            scale *= 0.5
        nodes, res, rnorm = trial, trial_res, trial_norm
        last_step = scale * float(np.max(np.abs(delta)))
    if rnorm < tol:
        return DiscretePath(nodes, info={"iterations": max_iter, "residual": rnorm})
    raise ConvergenceError(f"discrete BVP did not converge in {max_iter} iterations "
                           f"(residual {rnorm:.3e})", best=DiscretePath(nodes), residual=rnorm)
