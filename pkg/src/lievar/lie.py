"""Lie algebra kernel and SO(3) group utilities.

Algebra elements and dual elements are plain coordinate vectors in a fixed
basis ``e_i`` and its dual basis ``e^i``.  A :class:`LieAlgebra` is defined by
structure constants ``C[i, j, k]`` with ``[e_i, e_j] = C[i, j, k] e_k``.
SO(3) ships as :data:`so3` with a cross-product fast path, plus the group
maps (:func:`hat`, :func:`vee`, :func:`group_exp`, :func:`group_log`).
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ._fd import directional

SKEW_TOL = 1e-10
ROTATION_TOL = 1e-10
SMALL_ANGLE = 1e-6


class LieAlgebra:
    """Finite-dimensional Lie algebra given by its structure constants.

    Parameters
    ----------
    structure_constants : array_like, shape (n, n, n)
        ``C[i, j, k]`` is the ``e_k`` coefficient of ``[e_i, e_j]``.
    name : str, optional
    tol : float
        Tolerance for the antisymmetry and Jacobi checks done on construction.
    """

    def __init__(self, structure_constants, name: str | None = None, tol: float = 1e-12):
        c = np.array(structure_constants, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]) or c.shape[0] < 1:
            raise ValueError(f"structure constants must have shape (n, n, n), got {c.shape}")
        c.setflags(write=False)
        self._c = c
        self.name = name or f"lie_algebra_{c.shape[0]}"
        asym = np.max(np.abs(c + c.transpose(1, 0, 2)))
        if asym > tol:
            raise ValueError(f"structure constants are not antisymmetric (defect {asym:.3g})")
        jac = np.max(np.abs(self.jacobi_defect()))
        if jac > tol:
            raise ValueError(f"structure constants violate the Jacobi identity (defect {jac:.3g})")

    @property
    def dim(self) -> int:
        return self._c.shape[0]

    @property
    def structure_constants(self) -> np.ndarray:
        return self._c

    def __repr__(self):
        return f"LieAlgebra({self.name!r}, dim={self.dim})"

    def check(self, v, what="vector") -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape[-1:] != (self.dim,):
            raise ValueError(f"{what} must have trailing dimension {self.dim}, got shape {v.shape}")
        return v

    def jacobi_defect(self) -> np.ndarray:
        """Cyclic Jacobi sum for every index quadruple (i, j, k, l)."""
        c = self._c
        return (np.einsum("ijm,mkl->ijkl", c, c)
                + np.einsum("jkm,mil->ijkl", c, c)
                + np.einsum("kim,mjl->ijkl", c, c))

    def bracket(self, xi, eta) -> np.ndarray:
        xi = self.check(xi)
        eta = self.check(eta)
        return np.einsum("ijk,...i,...j->...k", self._c, xi, eta)

    def ad(self, xi) -> np.ndarray:
        """Matrix of ``ad_xi`` acting on coordinate vectors."""
        xi = self.check(xi)
        return np.einsum("ijk,i->kj", self._c, xi)

    def ad_star(self, xi, mu) -> np.ndarray:
        """``ad*_xi mu`` defined by ``<ad*_xi mu, eta> = <mu, [xi, eta]>``."""
        xi = self.check(xi)
        mu = self.check(mu, "dual vector")
        return np.einsum("ijk,...i,...k->...j", self._c, xi, mu)

    @staticmethod
    def pairing(mu, xi) -> float:
        mu = np.asarray(mu, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if mu.shape != xi.shape:
            raise ValueError(f"pairing shape mismatch: {mu.shape} vs {xi.shape}")
        return float(np.sum(mu * xi))


def _levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[j, i, k] = -1.0
    return eps


def cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """3-vector cross product; cheaper than ``np.cross`` for single vectors."""
    if a.ndim == 1 and b.ndim == 1:
        a0, a1, a2 = a
        b0, b1, b2 = b
        return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    return np.cross(a, b)


class SO3Algebra(LieAlgebra):
    """so(3) with ``[e_i, e_j] = eps_ijk e_k``; bracket is the cross product."""

    def __init__(self):
        super().__init__(_levi_civita(), name="so3")

    def bracket(self, xi, eta) -> np.ndarray:
        return cross(self.check(xi), self.check(eta))

    def ad(self, xi) -> np.ndarray:
        return hat(xi)

    def ad_star(self, xi, mu) -> np.ndarray:
        # <mu, xi x eta> = <mu x xi, eta>
        return cross(self.check(mu, "dual vector"), self.check(xi))


so3 = SO3Algebra()


def _algebra(algebra: LieAlgebra | None) -> LieAlgebra:
    return so3 if algebra is None else algebra


def bracket(xi, eta, algebra: LieAlgebra | None = None) -> np.ndarray:
    return _algebra(algebra).bracket(xi, eta)


def ad_star(xi, mu, algebra: LieAlgebra | None = None) -> np.ndarray:
    return _algebra(algebra).ad_star(xi, mu)


def pairing(mu, xi) -> float:
    return LieAlgebra.pairing(mu, xi)


# -- SO(3) group maps -------------------------------------------------------

E1 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
E2 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
E3 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
for _m in (E1, E2, E3):
    _m.setflags(write=False)


def hat(v) -> np.ndarray:
    """``v1 E1 + v2 E2 + v3 E3``; broadcasts over leading axes."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1:] != (3,):
        raise ValueError(f"hat expects a 3-vector, got shape {v.shape}")
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def vee(m, tol: float = SKEW_TOL) -> np.ndarray:
    """Inverse of :func:`hat`.  Raises ``ValueError`` on non-skew input."""
    m = np.asarray(m, dtype=float)
    if m.shape[-2:] != (3, 3):
        raise ValueError(f"vee expects 3x3 matrices, got shape {m.shape}")
    defect = np.max(np.abs(m + np.swapaxes(m, -1, -2))) if m.size else 0.0
    if defect > tol:
        raise ValueError(f"matrix is not skew-symmetric (defect {defect:.3g})")
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


def is_rotation(r, tol: float = ROTATION_TOL) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or not np.all(np.isfinite(r)):
        return False
    orth = np.linalg.norm(r.T @ r - np.eye(3))
    return bool(orth <= tol and abs(np.linalg.det(r) - 1.0) <= tol)


def check_rotation(r, tol: float = ROTATION_TOL, what: str = "rotation") -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if not is_rotation(r, tol):
        raise ValueError(f"{what} is not in SO(3) within {tol:g}")
    return r


def _exp_single(x: float, y: float, z: float) -> np.ndarray:
    th2 = x * x + y * y + z * z
    if not math.isfinite(th2):
        raise FloatingPointError("non-finite rotation vector")
    if th2 < SMALL_ANGLE * SMALL_ANGLE:
        a, b = 1.0 - th2 / 6.0, 0.5 - th2 / 24.0
    else:
        th = math.sqrt(th2)
        a, b = math.sin(th) / th, (1.0 - math.cos(th)) / th2
    bxy, bxz, byz = b * x * y, b * x * z, b * y * z
    return np.array([[1.0 - b * (y * y + z * z), bxy - a * z, bxz + a * y],
                     [bxy + a * z, 1.0 - b * (x * x + z * z), byz - a * x],
                     [bxz - a * y, byz + a * x, 1.0 - b * (x * x + y * y)]])


def group_exp(xi) -> np.ndarray:
    """Rotation ``exp(hat(xi))`` by the Rodrigues formula; broadcasts."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape == (3,):
        return _exp_single(*xi.tolist())
    if xi.shape[-1:] != (3,):
        raise ValueError(f"group_exp expects a 3-vector, got shape {xi.shape}")
    th2 = np.sum(xi * xi, axis=-1)
    if not np.all(np.isfinite(th2)):
        raise FloatingPointError("non-finite rotation vector")
    th = np.sqrt(th2)
    small = th < SMALL_ANGLE
    safe = np.where(small, 1.0, th)
    a = np.where(small, 1.0 - th2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - th2 / 24.0, (1.0 - np.cos(safe)) / (safe * safe))
    k = hat(xi)
    return np.eye(3) + a[..., None, None] * k + b[..., None, None] * (k @ k)


def group_log(r) -> np.ndarray:
    """Rotation vector ``phi`` with ``group_exp(phi) = r`` and ``|phi| <= pi``.

    Uses the skew part away from pi and the symmetric part near pi, where the
    skew part loses the axis.  Broadcasts over leading axes.
    """
    r = np.asarray(r, dtype=float)
    if r.shape[-2:] != (3, 3):
        raise ValueError(f"group_log expects 3x3 matrices, got shape {r.shape}")
    a = 0.5 * np.stack([r[..., 2, 1] - r[..., 1, 2],
                        r[..., 0, 2] - r[..., 2, 0],
                        r[..., 1, 0] - r[..., 0, 1]], axis=-1)
    s = np.linalg.norm(a, axis=-1)
    c = 0.5 * (np.trace(r, axis1=-2, axis2=-1) - 1.0)
    th = np.arctan2(s, c)
    small = th < SMALL_ANGLE
    safe_s = np.where(small, 1.0, s)
    scale = np.where(small, 1.0 + th * th / 6.0, th / safe_s)
    phi = scale[..., None] * a

    near_pi = c < -0.9
    if np.any(near_pi):
        sym = 0.5 * (r + np.swapaxes(r, -1, -2))
        one_minus_c = np.where(near_pi, 1.0 - c, 1.0)
        nn = (sym - c[..., None, None] * np.eye(3)) / one_minus_c[..., None, None]
        diag = np.diagonal(nn, axis1=-2, axis2=-1)
        col = np.argmax(diag, axis=-1)
        n = np.take_along_axis(nn, col[..., None, None], axis=-1)[..., 0]
        n = n / np.sqrt(np.take_along_axis(diag, col[..., None], axis=-1))
        sign = np.where(np.sum(n * a, axis=-1) < 0.0, -1.0, 1.0)
        phi_pi = (sign * th)[..., None] * n
        phi = np.where(near_pi[..., None], phi_pi, phi)
    return phi


def dexp_inv(theta, v) -> np.ndarray:
    """Inverse of the right-trivialized differential of exp on so(3).

    ``v - [theta, v]/2 + B(theta) [theta, [theta, v]]`` with the closed-form
    Bernoulli coefficient ``B = (1 - (t/2) cot(t/2)) / t^2``.
    """
    theta = np.asarray(theta, dtype=float)
    v = np.asarray(v, dtype=float)
    t2 = float(theta @ theta)
    if t2 < 1e-8:
        coef = 1.0 / 12.0 + t2 / 720.0
    else:
        t = np.sqrt(t2)
        coef = (1.0 - 0.5 * t / np.tan(0.5 * t)) / t2
    tv = cross(theta, v)
    return v - 0.5 * tv + coef * cross(theta, tv)


def adjoint(r) -> np.ndarray:
    """Matrix of ``Ad_r`` on so(3) coordinates (equal to ``r`` itself)."""
    return np.asarray(r, dtype=float)


def left_trivialized_group_derivative(f: Callable[..., float], g, *args,
                                      step: float = 1e-3) -> np.ndarray:
    """Coordinates of the left-trivialized derivative of ``f`` at ``g``.

    ``d_i = d/ds f(g exp(s e_i), *args)`` at ``s = 0``, by a fourth-order
    central difference.
    """
    g = np.asarray(g, dtype=float)
    out = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        out[i] = directional(lambda s: f(g @ group_exp(s * e), *args), step)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite values while differentiating along the group")
    return out


def right_trivialized_group_derivative(f: Callable[..., float], g, *args,
                                       step: float = 1e-3) -> np.ndarray:
    """``d_i = d/ds f(exp(s e_i) g, *args)`` at ``s = 0``."""
    g = np.asarray(g, dtype=float)
    out = np.empty(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = 1.0
        out[i] = directional(lambda s: f(group_exp(s * e) @ g, *args), step)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite values while differentiating along the group")
    return out
