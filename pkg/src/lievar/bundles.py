"""Left-trivialized higher-order tangent and Pontryagin bundles.

A point of ``T^(k)G`` is stored as ``(g, xi)`` with ``xi`` of shape ``(k, n)``
holding ``xi^(0), ..., xi^(k-1)``.  A point of ``W_0 = G x k g x k g*`` adds
the momenta ``alpha`` of shape ``(k, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .lie import LieAlgebra, so3

if TYPE_CHECKING:
    from .variational import LagrangianDef


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HigherJet:
    """``(g, xi^(0), ..., xi^(k-1))``; ``g`` may be ``None`` for reduced jets."""

    g: np.ndarray | None
    xi: np.ndarray
    algebra: LieAlgebra = so3

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        if xi.ndim == 1:
            xi = xi[None, :]
        if xi.ndim != 2 or xi.shape[1] != self.algebra.dim:
            raise ValueError(f"xi must have shape (k, {self.algebra.dim}), got {xi.shape}")
        object.__setattr__(self, "xi", _frozen(xi))
        if self.g is not None:
            object.__setattr__(self, "g", _frozen(self.g))

    @property
    def order(self) -> int:
        return self.xi.shape[0]


@dataclass(frozen=True, eq=False)
class PontryaginPoint:
    jet: HigherJet
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        if alpha.ndim == 1:
            alpha = alpha[None, :]
        if alpha.shape != self.jet.xi.shape:
            raise ValueError(f"alpha must have shape {self.jet.xi.shape}, got {alpha.shape}")
        object.__setattr__(self, "alpha", _frozen(alpha))

    @property
    def order(self) -> int:
        return self.jet.order


@dataclass(frozen=True, eq=False)
class PontryaginTangent:
    """Tangent vector to ``W_0``: ``xi1`` has ``k + 1`` rows, ``nu1`` has ``k``."""

    xi1: np.ndarray
    nu1: np.ndarray

    def __post_init__(self):
        xi1 = np.asarray(self.xi1, dtype=float)
        nu1 = np.asarray(self.nu1, dtype=float)
        if xi1.ndim != 2 or nu1.ndim != 2 or xi1.shape[0] != nu1.shape[0] + 1 \
                or xi1.shape[1] != nu1.shape[1]:
            raise ValueError(f"expected xi1 of shape (k+1, n) and nu1 of shape (k, n), "
                             f"got {xi1.shape} and {nu1.shape}")
        object.__setattr__(self, "xi1", _frozen(xi1))
        object.__setattr__(self, "nu1", _frozen(nu1))

    @property
    def order(self) -> int:
        return self.nu1.shape[0]


def projection_tau(jet: HigherJet, l: int) -> HigherJet:
    """Truncate a ``k``-jet to its first ``l`` algebra slots (``l = 0`` keeps only ``g``)."""
    if not 0 <= l <= jet.order:
        raise ValueError(f"projection order must be in [0, {jet.order}], got {l}")
    if l == 0:
        return _BareJet(jet.g, np.zeros((0, jet.algebra.dim)), jet.algebra)
    return HigherJet(jet.g, jet.xi[:l], jet.algebra)


@dataclass(frozen=True, eq=False)
class _BareJet(HigherJet):
    """Order-0 jet: just the group element."""

    def __post_init__(self):
        object.__setattr__(self, "xi", _frozen(np.zeros((0, self.algebra.dim))))
        if self.g is not None:
            object.__setattr__(self, "g", _frozen(self.g))


def canonical_immersion(jet: HigherJet) -> tuple[HigherJet, np.ndarray]:
    """``j_k: T^(k)G -> T(T^(k-1)G)``.

    Returns the base point ``(g, xi, ..., xi^(k-2))`` and the fiber
    ``(xi, ..., xi^(k-1))``: the first fiber entry is the velocity of ``g``,
    the others are the velocities of the base algebra slots.
    """
    if jet.order < 2:
        raise ValueError("canonical immersion needs a jet of order k >= 2")
    base = HigherJet(jet.g, jet.xi[:-1], jet.algebra)
    return base, jet.xi.copy()


def symplectic_form_cotangent(alpha0, t1: tuple, t2: tuple, algebra: LieAlgebra = so3) -> float:
    """Canonical 2-form of ``T*(T^(k-1)G) = G x (k-1) g x k g*``.

    Tangents are pairs ``(xi, nu)`` of shape ``(k, n)`` each, where ``xi[0]``
    is the left-trivialized velocity of ``g`` and ``xi[i]`` that of
    ``xi^(i-1)``.  Only ``alpha_0`` enters the value.
    """
    xi1, nu1 = (np.asarray(a, dtype=float) for a in t1)
    xi2, nu2 = (np.asarray(a, dtype=float) for a in t2)
    if not (xi1.shape == nu1.shape == xi2.shape == nu2.shape) or xi1.ndim != 2:
        raise ValueError("tangent components must all share one (k, n) shape")
    alpha0 = algebra.check(alpha0, "alpha_0")
    canonical = -np.sum(nu1 * xi2) + np.sum(nu2 * xi1)
    return float(canonical + algebra.pairing(alpha0, algebra.bracket(xi1[0], xi2[0])))


def presymplectic_form(p: PontryaginPoint, t1: PontryaginTangent, t2: PontryaginTangent) -> float:
    """Pull-back of :func:`symplectic_form_cotangent` to ``W_0``.

    The ``xi^(k)`` slot of each tangent is dropped, which is what makes the
    form degenerate.
    """
    k = p.order
    for t in (t1, t2):
        if t.order != k or t.xi1.shape[1] != p.jet.algebra.dim:
            raise ValueError(f"tangent of order {t.order} does not match point of order {k}")
    return symplectic_form_cotangent(p.alpha[0], (t1.xi1[:k], t1.nu1), (t2.xi1[:k], t2.nu1),
                                     p.jet.algebra)


def liouville_form(alpha, xi1) -> float:
    """``theta(xi1, nu1) = <alpha, xi1>`` on the trivialized cotangent bundle."""
    return LieAlgebra.pairing(alpha, xi1)


def hamiltonian_H(p: PontryaginPoint, lagrangian: "LagrangianDef") -> float:
    """``sum_i <alpha_i, xi^(i)> - L(g, xi)``."""
    if lagrangian.order != p.order:
        raise ValueError(f"Lagrangian of order {lagrangian.order} on a point of order {p.order}")
    return float(np.sum(p.alpha * p.jet.xi)) - lagrangian(p.jet.g, p.jet.xi)
