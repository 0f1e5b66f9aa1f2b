"""Residual operators for the continuous equations of motion.

Lagrangians are functions ``L(g, xi)`` of a group element (``None`` for
reduced Lagrangians) and a ``(k, n)`` array of algebra slots
``xi^(0) .. xi^(k-1)``.  Functional derivatives are differenced unless the
caller supplies analytic partials.  Time derivatives along sampled curves
use central stencils on the curve grid; nodes too close to either end for
the widest stencil are left out of every report.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _fd
from .bundles import PontryaginPoint, PontryaginTangent
from .lie import LieAlgebra, left_trivialized_group_derivative, so3

FD_STEP = 1e-3
RANK_RTOL = 1e-8
RANK_ATOL = 1e-7


def _finite(x, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise FloatingPointError(f"non-finite {what}")
    return x


@dataclass(frozen=True)
class LagrangianDef:
    """Scalar ``L(g, xi)`` on ``G x k g`` with optional analytic partials.

    Parameters
    ----------
    order : int
        Number ``k`` of algebra slots.
    func : callable
        ``func(g, xi) -> float`` with ``xi`` of shape ``(k, n)``.
    dxi : callable, optional
        ``dxi(g, xi) -> (k, n)`` array of ``dL/dxi^(i)``.
    dg : callable, optional
        ``dg(g, xi) -> (n,)`` left-trivialized group derivative.
    hess : callable, optional
        ``hess(g, xi) -> (n, n)`` second derivative in the top slot.
    left_invariant : bool
        Declares that ``L`` ignores ``g``; the group derivative is then zero.
    """

    order: int
    func: Callable[[np.ndarray | None, np.ndarray], float]
    dxi: Callable | None = None
    dg: Callable | None = None
    hess: Callable | None = None
    algebra: LieAlgebra = so3
    left_invariant: bool = False
    xi_step: float = FD_STEP
    g_step: float = FD_STEP

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")

    def _slots(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 1:
            xi = xi[None, :]
        if xi.shape != (self.order, self.algebra.dim):
            raise ValueError(f"expected xi of shape {(self.order, self.algebra.dim)}, got {xi.shape}")
        return xi

    def __call__(self, g, xi) -> float:
        return float(self.func(g, self._slots(xi)))

    def partial_xi(self, g, xi) -> np.ndarray:
        xi = self._slots(xi)
        if self.dxi is not None:
            return _finite(self.dxi(g, xi), "dL/dxi").reshape(xi.shape)
        return _finite(_fd.jacobian(lambda x: self.func(g, x), xi, self.xi_step), "dL/dxi")

    def partial_g(self, g, xi) -> np.ndarray:
        xi = self._slots(xi)
        if self.left_invariant or g is None:
            return np.zeros(self.algebra.dim)
        if self.dg is not None:
            return _finite(self.dg(g, xi), "dL/dg")
        return left_trivialized_group_derivative(lambda h: self.func(h, xi), g, step=self.g_step)

    def hessian_top(self, g, xi) -> np.ndarray:
        """``d^2 L / dxi^(k-1) dxi^(k-1)`` as an ``(n, n)`` matrix."""
        xi = self._slots(xi)
        if self.hess is not None:
            return _finite(self.hess(g, xi), "top Hessian").reshape(xi.shape[1], xi.shape[1])

        def top_gradient(top):
            x = xi.copy()
            x[-1] = top
            return self.partial_xi(g, x)[-1]

        h = _fd.jacobian(top_gradient, xi[-1], self.xi_step)
        return 0.5 * (h + h.T)

    def check_partials(self, g, xi, tol: float = 1e-6) -> float:
        """Max discrepancy between analytic and differenced partials.

        Raises ``ValueError`` above ``tol``.
        """
        xi = self._slots(xi)
        worst = 0.0
        if self.dxi is not None:
            fd = _fd.jacobian(lambda x: self.func(g, x), xi, self.xi_step)
            worst = max(worst, float(np.max(np.abs(fd - self.partial_xi(g, xi)))))
        if self.dg is not None and g is not None and not self.left_invariant:
            fd = left_trivialized_group_derivative(lambda h: self.func(h, xi), g, step=self.g_step)
            worst = max(worst, float(np.max(np.abs(fd - self.partial_g(g, xi)))))
        if self.hess is not None:
            fd = LagrangianDef(self.order, self.func, dxi=self.dxi, algebra=self.algebra,
                               xi_step=self.xi_step).hessian_top(g, xi)
            worst = max(worst, float(np.max(np.abs(fd - self.hessian_top(g, xi)))))
        if worst > tol:
            raise ValueError(f"analytic partials disagree with finite differences by {worst:.3e}")
        return worst


@dataclass(frozen=True)
class ConstraintDef:
    """Vector constraint ``Phi(g, xi) = 0`` with ``m`` components.

    ``dxi`` returns an ``(m, k, n)`` array and ``dg`` an ``(m, n)`` array.
    """

    count: int
    order: int
    func: Callable[[np.ndarray | None, np.ndarray], np.ndarray]
    dxi: Callable | None = None
    dg: Callable | None = None
    algebra: LieAlgebra = so3
    left_invariant: bool = False
    xi_step: float = FD_STEP
    g_step: float = FD_STEP

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("a constraint needs at least one component")

    def __call__(self, g, xi) -> np.ndarray:
        out = np.asarray(self.func(g, np.asarray(xi, dtype=float)), dtype=float).reshape(-1)
        if out.size != self.count:
            raise ValueError(f"constraint returned {out.size} values, expected {self.count}")
        return out

    def partial_xi(self, g, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        if self.dxi is not None:
            return _finite(self.dxi(g, xi), "dPhi/dxi").reshape((self.count,) + xi.shape)
        return _finite(_fd.jacobian(lambda x: self(g, x), xi, self.xi_step), "dPhi/dxi")

    def partial_g(self, g, xi) -> np.ndarray:
        if self.left_invariant or g is None:
            return np.zeros((self.count, self.algebra.dim))
        if self.dg is not None:
            return _finite(self.dg(g, xi), "dPhi/dg").reshape(self.count, self.algebra.dim)
        xi = np.asarray(xi, dtype=float)
        return _finite(left_trivialized_group_derivative(lambda h: self(h, xi), g,
                                                         step=self.g_step), "dPhi/dg")


@dataclass(frozen=True)
class SampledCurve:
    """Uniformly sampled jet curve.

    ``xi`` has shape ``(N, K, n)`` with ``K >= k`` slots per node; only the
    first ``k`` slots are handed to a Lagrangian of order ``k``.
    """

    t: np.ndarray
    xi: np.ndarray
    g: np.ndarray | None = None
    lam: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        xi = np.asarray(self.xi, dtype=float)
        if xi.ndim == 2:
            xi = xi[:, None, :]
        if t.ndim != 1 or xi.ndim != 3 or xi.shape[0] != t.size:
            raise ValueError(f"t of shape (N,) and xi of shape (N, K, n) required, "
                             f"got {t.shape} and {xi.shape}")
        if t.size < 2:
            raise ValueError("a sampled curve needs at least two nodes")
        dt = np.diff(t)
        if np.any(dt <= 0) or np.ptp(dt) > 1e-9 * max(1.0, float(np.max(np.abs(t)))):
            raise ValueError("time grid must be uniform and increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "xi", xi)
        if self.g is not None:
            g = np.asarray(self.g, dtype=float)
            if g.shape[0] != t.size:
                raise ValueError("g must have one entry per node")
            object.__setattr__(self, "g", g)
        if self.lam is not None:
            lam = np.asarray(self.lam, dtype=float)
            if lam.ndim == 1:
                lam = lam[:, None]
            if lam.shape[0] != t.size:
                raise ValueError("lam must have one row per node")
            object.__setattr__(self, "lam", lam)

    @property
    def h(self) -> float:
        return float((self.t[-1] - self.t[0]) / (self.t.size - 1))

    def __len__(self) -> int:
        return self.t.size

    def node(self, j: int, k: int):
        if self.xi.shape[1] < k:
            raise ValueError(f"curve carries {self.xi.shape[1]} slots, order {k} needs {k}")
        return (None if self.g is None else self.g[j]), self.xi[j, :k]


@dataclass(frozen=True)
class NodeValues:
    """Per-node results on the interior nodes ``index`` of a sampled curve."""

    index: np.ndarray
    t: np.ndarray
    values: np.ndarray

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


# ---------------------------------------------------------------- Hamiltonian side

def _grad(f, x, step, analytic=None):
    if analytic is not None:
        return _finite(analytic, "derivative")
    return _finite(_fd.jacobian(f, np.asarray(x, dtype=float), step), "derivative")


def euler_arnold_rhs(H: Callable, g, alpha, *, dH_dalpha=None, dH_dg=None,
                     algebra: LieAlgebra = so3, step: float = FD_STEP):
    """Trivialized Hamilton equations on ``G x g*``.

    Returns ``(xi, alpha_dot)`` with ``xi = dH/dalpha`` (the reconstruction
    velocity, ``g_dot = g xi``) and ``alpha_dot = -dH/dg + ad*_xi alpha``.
    ``dH_dalpha`` and ``dH_dg`` are optional analytic callables of ``(g, alpha)``.
    """
    alpha = algebra.check(alpha, "alpha")
    xi = _grad(lambda a: H(g, a), alpha, step,
               None if dH_dalpha is None else dH_dalpha(g, alpha))
    if g is None:
        dg = np.zeros(algebra.dim)
    elif dH_dg is not None:
        dg = _finite(dH_dg(g, alpha), "dH/dg")
    else:
        dg = left_trivialized_group_derivative(lambda h: H(h, alpha), g, step=step)
    return xi, -dg + algebra.ad_star(xi, alpha)


def lie_poisson_rhs(h: Callable, alpha, *, dh=None, algebra: LieAlgebra = so3,
                    step: float = FD_STEP) -> np.ndarray:
    """``alpha_dot = ad*_{dh/dalpha} alpha`` for a reduced Hamiltonian ``h(alpha)``."""
    alpha = algebra.check(alpha, "alpha")
    xi = _grad(h, alpha, step, None if dh is None else dh(alpha))
    return algebra.ad_star(xi, alpha)


def higher_euler_arnold_rhs(H: Callable, g, xi, alpha, *, dH=None,
                            algebra: LieAlgebra = so3, step: float = FD_STEP):
    """Higher-order Euler-Arnold vector field on ``G x (k-1) g x k g*``.

    Parameters
    ----------
    H : callable
        ``H(g, xi, alpha)`` with ``xi`` of shape ``(k-1, n)`` and ``alpha``
        of shape ``(k, n)``.
    dH : callable, optional
        ``dH(g, xi, alpha) -> (dH_dg, dH_dxi, dH_dalpha)``.

    Returns
    -------
    xi0 : ndarray
        ``dH/dalpha_0``, so that ``g_dot = g xi0``.
    xi_dot : ndarray, shape (k-1, n)
        ``d xi^(i-1)/dt = dH/dalpha_i`` for ``i = 1 .. k-1``.
    alpha_dot : ndarray, shape (k, n)
        ``alpha_0`` evolves by ``-dH/dg + ad*_{xi0} alpha_0``; the others by
        ``alpha_{i+1}' = -dH/dxi^(i)``.
    """
    alpha = np.asarray(alpha, dtype=float).reshape(-1, algebra.dim)
    k = alpha.shape[0]
    xi = np.asarray(xi, dtype=float).reshape(k - 1, algebra.dim)
    if dH is not None:
        dg, dxi, dalpha = (_finite(v, "dH") for v in dH(g, xi, alpha))
        dxi = dxi.reshape(xi.shape)
        dalpha = dalpha.reshape(alpha.shape)
    else:
        dalpha = _grad(lambda a: H(g, xi, a), alpha, step)
        dxi = _grad(lambda x: H(g, x, alpha), xi, step) if k > 1 else np.zeros((0, algebra.dim))
        dg = (np.zeros(algebra.dim) if g is None else
              left_trivialized_group_derivative(lambda h: H(h, xi, alpha), g, step=step))
    xi0 = dalpha[0]
    alpha_dot = np.empty_like(alpha)
    alpha_dot[0] = -dg + algebra.ad_star(xi0, alpha[0])
    alpha_dot[1:] = -dxi
    return xi0, dalpha[1:].copy(), alpha_dot


def dae_rhs(p: PontryaginPoint, L: LagrangianDef):
    """Skinner-Rusk equations at a point of ``W_0``.

    Returns the determined part of the vector field as a
    :class:`PontryaginTangent` whose top slot ``xi1[k]`` is left as NaN, and
    the Legendre constraint ``alpha_{k-1} - dL/dxi^(k-1)`` (zero on ``W_1``).
    """
    k = p.order
    if L.order != k:
        raise ValueError(f"Lagrangian of order {L.order} on a point of order {k}")
    g, xi, alpha = p.jet.g, p.jet.xi, p.alpha
    dxi = L.partial_xi(g, xi)
    dg = L.partial_g(g, xi)
    xi1 = np.full((k + 1, xi.shape[1]), np.nan)
    xi1[:k] = xi
    nu1 = np.empty_like(alpha)
    nu1[0] = dg + L.algebra.ad_star(xi[0], alpha[0])
    nu1[1:] = dxi[:-1] - alpha[:-1]
    return PontryaginTangent(xi1, nu1), alpha[-1] - dxi[-1]


# ---------------------------------------------------------------- Lagrangian side

def _node_partials(curve: SampledCurve, L: LagrangianDef, with_g: bool):
    k, n = L.order, L.algebra.dim
    P = np.empty((len(curve), k, n))
    G = np.zeros((len(curve), n))
    for j in range(len(curve)):
        g, xi = curve.node(j, k)
        P[j] = L.partial_xi(g, xi)
        if with_g:
            G[j] = L.partial_g(g, xi)
    return P, G


def _derivative_at(values, h, order, margin):
    """``order``-th time derivative on nodes ``margin .. N-1-margin``."""
    p, d = _fd.time_derivative(values, h, order)
    cut = margin - p
    return d[cut:d.shape[0] - cut] if cut else d


def _alternating_sum(P, h, margin, shift=0):
    """``sum_i (-1)^i D^(i + shift) P_i`` on the interior nodes."""
    out = None
    for i in range(P.shape[1]):
        term = (-1) ** i * _derivative_at(P[:, i], h, i + shift, margin)
        out = term if out is None else out + term
    return out


def _residual_from_partials(curve, P, G, algebra):
    k = P.shape[1]
    margin = (k + 1) // 2
    n_nodes = len(curve)
    if n_nodes < 2 * margin + 1:
        raise ValueError(f"curve too short: order {k} needs at least {2 * margin + 1} nodes")
    h = curve.h
    alpha0 = _alternating_sum(P, h, margin)
    dalpha0 = _alternating_sum(P, h, margin, shift=1)
    idx = np.arange(margin, n_nodes - margin)
    xi = curve.xi[idx, 0]
    res = dalpha0 - algebra.ad_star(xi, alpha0) - G[idx]
    return NodeValues(idx, curve.t[idx], res)


def euler_lagrange_residual(curve: SampledCurve, L: LagrangianDef) -> NodeValues:
    """``(d/dt - ad*_xi) sum_i (-1)^i d^i/dt^i dL/dxi^(i) - dL/dg`` at interior nodes.

    Each ``d/dt d^i/dt^i`` is taken as one central stencil of order ``i + 1``.
    """
    P, G = _node_partials(curve, L, with_g=curve.g is not None)
    return _residual_from_partials(curve, P, G, L.algebra)


def euler_poincare_residual(curve: SampledCurve, l: LagrangianDef) -> NodeValues:
    """Reduced residual: the group term is dropped."""
    P, G = _node_partials(curve, l, with_g=False)
    return _residual_from_partials(curve, P, G, l.algebra)


def augmented_partials(L: LagrangianDef, Phi: ConstraintDef, g, xi, lam):
    """Partials of ``L - lam_A Phi^A`` as ``(dxi, dg)``."""
    lam = np.asarray(lam, dtype=float).reshape(Phi.count)
    dxi = L.partial_xi(g, xi) - np.einsum("a,a...->...", lam, Phi.partial_xi(g, xi))
    dg = L.partial_g(g, xi)
    if g is not None:
        dg = dg - lam @ Phi.partial_g(g, xi)
    return dxi, dg


def constrained_el_residual(curve: SampledCurve, L: LagrangianDef, Phi: ConstraintDef):
    """Residual of the constrained equations with ``L`` replaced by ``L - lam_A Phi^A``.

    Returns ``(residual, constraint_values)`` where ``constraint_values`` has
    one row of ``m`` values per node of the curve.
    """
    if curve.lam is None:
        raise ValueError("constrained residual needs per-node multipliers on the curve")
    if curve.lam.shape[1] != Phi.count:
        raise ValueError(f"curve carries {curve.lam.shape[1]} multipliers, constraint has {Phi.count}")
    k, n = L.order, L.algebra.dim
    P = np.empty((len(curve), k, n))
    G = np.zeros((len(curve), n))
    values = np.empty((len(curve), Phi.count))
    for j in range(len(curve)):
        g, xi = curve.node(j, k)
        P[j], G[j] = augmented_partials(L, Phi, g, xi, curve.lam[j])
        values[j] = Phi(g, xi)
    return _residual_from_partials(curve, P, G, L.algebra), values


def legendre_alpha(curve: SampledCurve, L: LagrangianDef, method: str = "recursion") -> NodeValues:
    """Momenta ``alpha_0 .. alpha_{k-1}`` along a sampled curve.

    ``method="recursion"`` runs ``alpha_{k-1} = dL/dxi^(k-1)``,
    ``alpha_i = dL/dxi^(i) - d/dt alpha_{i+1}`` with a first-derivative
    stencil per level.  ``method="alternating"`` evaluates
    ``alpha_i = sum_{j >= i} (-1)^(j-i) d^(j-i)/dt^(j-i) dL/dxi^(j)`` with
    direct stencils.  Both report on nodes ``k-1 .. N-k``.
    """
    k = L.order
    margin = k - 1
    if len(curve) < 2 * margin + 1:
        raise ValueError(f"curve too short: order {k} needs at least {2 * margin + 1} nodes")
    P, _ = _node_partials(curve, L, with_g=False)
    h = curve.h
    idx = np.arange(margin, len(curve) - margin)
    out = np.empty((idx.size,) + P.shape[1:])
    if method == "recursion":
        # alpha[i] lives on nodes (k-1-i) .. N-1-(k-1-i)
        cur = P[:, k - 1]
        out[:, k - 1] = cur[margin:len(curve) - margin]
        for i in range(k - 2, -1, -1):
            lo = k - 1 - i
            _, d = _fd.time_derivative(cur, h, 1)
            cur = P[lo:len(curve) - lo, i] - d
            cut = margin - lo
            out[:, i] = cur[cut:cur.shape[0] - cut] if cut else cur
    elif method == "alternating":
        for i in range(k):
            out[:, i] = _alternating_sum(P[:, i:], h, margin)
    else:
        raise ValueError(f"unknown method {method!r}")
    return NodeValues(idx, curve.t[idx], out)


# ---------------------------------------------------------------- regularity

@dataclass(frozen=True)
class RegularityReport:
    nondegenerate: bool
    rank: int
    size: int
    singular_values: np.ndarray = field(repr=False)
    matrix: np.ndarray = field(repr=False)
    probe: tuple = field(repr=False, default=())

    def __str__(self) -> str:
        state = "nondegenerate" if self.nondegenerate else "degenerate"
        return f"{state}, rank = {self.rank}"


def numerical_rank(m, rtol: float = RANK_RTOL, atol: float = RANK_ATOL):
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] <= atol:
        return 0, s
    return int(np.sum((s > rtol * s[0]) & (s > atol))), s


def regularity_test(L: LagrangianDef, g, xi) -> RegularityReport:
    """Nondegeneracy of the top-slot Hessian of ``L`` at a probe jet."""
    hess = L.hessian_top(g, xi)
    rank, s = numerical_rank(hess)
    return RegularityReport(rank == hess.shape[0], rank, hess.shape[0], s, hess,
                            (g, np.asarray(xi, dtype=float)))


def bordered_matrix(L: LagrangianDef, Phi: ConstraintDef, g, xi) -> np.ndarray:
    hess = L.hessian_top(g, xi)
    border = Phi.partial_xi(g, np.asarray(xi, dtype=float))[:, -1, :]
    m = Phi.count
    return np.block([[hess, border.T], [border, np.zeros((m, m))]])


def constrained_regularity_test(L: LagrangianDef, Phi: ConstraintDef, g, xi) -> RegularityReport:
    """Rank of the bordered matrix ``[[L_top_top, Phi_top^T], [Phi_top, 0]]``."""
    mat = bordered_matrix(L, Phi, g, xi)
    rank, s = numerical_rank(mat)
    return RegularityReport(rank == mat.shape[0], rank, mat.shape[0], s, mat,
                            (g, np.asarray(xi, dtype=float)))
