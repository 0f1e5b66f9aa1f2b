"""Lie-group ODE integration, Skinner-Rusk flows and single shooting."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _fd
from .errors import ConvergenceError, DegenerateError, IntegrationError
from .lie import dexp_inv, group_exp, so3
from .variational import LagrangianDef, higher_euler_arnold_rhs, regularity_test


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    ``method`` is informational: the only scheme is ``"rkmk4"``, classical RK4
    on vector components with a Munthe-Kaas update of the group component.
    """

    step: float = 1e-3
    method: str = "rkmk4"
    drift_tol: float = 1e-6
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.step > 0 or not math.isfinite(self.step):
            raise ValueError(f"step must be positive, got {self.step}")
        if self.method != "rkmk4":
            raise ValueError(f"unknown method {self.method!r}")

    def grid(self, t_span) -> np.ndarray:
        t0, t1 = (float(v) for v in t_span)
        if t1 < t0:
            raise ValueError("t_span must be increasing")
        n = int(math.floor((t1 - t0) / self.step + 1e-9))
        if n > self.max_steps:
            raise ValueError(f"{n} steps exceed max_steps={self.max_steps}")
        return t0 + self.step * np.arange(n + 1)


@dataclass(frozen=True)
class SampledTrajectory:
    t: np.ndarray
    g: np.ndarray | None
    y: np.ndarray
    info: dict = field(default_factory=dict, compare=False, repr=False)


def reconstruct_step(g, xi, h: float, t: float = 0.0) -> np.ndarray:
    """One RKMK4 step of ``g_dot = g xi(t)``.

    ``xi`` is either a constant algebra vector or a callable of time.
    """
    g = np.asarray(g, dtype=float)
    if not callable(xi):
        return g @ group_exp(h * np.asarray(xi, dtype=float))
    k1 = np.asarray(xi(t), dtype=float)
    k2 = dexp_inv(-0.5 * h * k1, xi(t + 0.5 * h))
    k3 = dexp_inv(-0.5 * h * k2, xi(t + 0.5 * h))
    k4 = dexp_inv(-h * k3, xi(t + h))
    return g @ group_exp(h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4))


def _rkmk4(rhs, t, g, y, h):
    xi1, f1 = rhs(t, g, y)
    if g is None:
        _, f2 = rhs(t + 0.5 * h, None, y + 0.5 * h * f1)
        _, f3 = rhs(t + 0.5 * h, None, y + 0.5 * h * f2)
        _, f4 = rhs(t + h, None, y + h * f3)
        return None, y + h / 6.0 * (f1 + 2 * f2 + 2 * f3 + f4), (xi1, f1)
    th = 0.5 * h * xi1
    xi2, f2 = rhs(t + 0.5 * h, g @ group_exp(th), y + 0.5 * h * f1)
    k2 = dexp_inv(-th, xi2)
    th = 0.5 * h * k2
    xi3, f3 = rhs(t + 0.5 * h, g @ group_exp(th), y + 0.5 * h * f2)
    k3 = dexp_inv(-th, xi3)
    th = h * k3
    xi4, f4 = rhs(t + h, g @ group_exp(th), y + h * f3)
    k4 = dexp_inv(-th, xi4)
    g_new = g @ group_exp(h / 6.0 * (xi1 + 2 * k2 + 2 * k3 + k4))
    return g_new, y + h / 6.0 * (f1 + 2 * f2 + 2 * f3 + f4), (xi1, f1)


def flow_ode(rhs: Callable, state0, t_span, config: IntegratorConfig | None = None,
             callback: Callable | None = None) -> SampledTrajectory:
    """Integrate ``g_dot = g xi``, ``y_dot = f`` with ``(xi, f) = rhs(t, g, y)``.

    ``state0`` is ``(g0, y0)``; pass ``g0=None`` for a purely vector state, in
    which case the first return value of ``rhs`` is ignored.  ``callback(t, g,
    y)`` may return a replacement ``y`` after each step.
    """
    config = config or IntegratorConfig()
    g, y = state0
    y = np.array(y, dtype=float)
    g = None if g is None else np.array(g, dtype=float)
    t = config.grid(t_span)
    ys = np.empty((t.size,) + y.shape)
    gs = None if g is None else np.empty((t.size,) + g.shape)
    ys[0] = y
    if gs is not None:
        gs[0] = g
    h = config.step
    with np.errstate(over="ignore", invalid="ignore"):
        _run(rhs, callback, t, h, g, y, gs, ys)
    return SampledTrajectory(t, gs, ys)


def _run(rhs, callback, t, h, g, y, gs, ys):
    for j in range(t.size - 1):
        try:
            g_new, y_new, _ = _rkmk4(rhs, t[j], g, y, h)
        except FloatingPointError:
            g_new, y_new = None, np.full_like(y, np.nan)
        if not np.all(np.isfinite(y_new)) or (g_new is not None and not np.all(np.isfinite(g_new))):
            raise IntegrationError(f"non-finite state after t = {t[j]:.6g}", last_good_time=float(t[j]))
        if callback is not None:
            replaced = callback(t[j + 1], g_new, y_new)
            if replaced is not None:
                y_new = np.asarray(replaced, dtype=float)
        g, y = g_new, y_new
        ys[j + 1] = y
        if gs is not None:
            gs[j + 1] = g


def higher_euler_arnold_flow(H: Callable, g0, xi0, alpha0, t_span,
                             config: IntegratorConfig | None = None, *, dH=None,
                             algebra=so3) -> SampledTrajectory:
    """Flow of :func:`higher_euler_arnold_rhs`.

    ``y`` stacks ``xi^(0) .. xi^(k-2)`` followed by ``alpha_0 .. alpha_{k-1}``;
    ``info["xi"]`` and ``info["alpha"]`` hold the unpacked arrays.
    """
    alpha0 = np.asarray(alpha0, dtype=float).reshape(-1, algebra.dim)
    k, n = alpha0.shape
    xi0 = np.asarray(xi0, dtype=float).reshape(k - 1, n)

    def rhs(t, g, y):
        xi, alpha = y[:(k - 1) * n].reshape(k - 1, n), y[(k - 1) * n:].reshape(k, n)
        v, xi_dot, alpha_dot = higher_euler_arnold_rhs(H, g, xi, alpha, dH=dH, algebra=algebra)
        return v, np.concatenate([xi_dot.ravel(), alpha_dot.ravel()])

    traj = flow_ode(rhs, (g0, np.concatenate([xi0.ravel(), alpha0.ravel()])), t_span, config)
    m = traj.t.size
    traj.info["xi"] = traj.y[:, :(k - 1) * n].reshape(m, k - 1, n)
    traj.info["alpha"] = traj.y[:, (k - 1) * n:].reshape(m, k, n)
    return traj


@dataclass(frozen=True)
class DAETrajectory:
    """Flow on ``W_1``: ``xi`` has ``k + 1`` slots (the last one solved for)."""

    t: np.ndarray
    g: np.ndarray | None
    xi: np.ndarray
    alpha: np.ndarray
    constraint: np.ndarray
    reprojections: int = 0


def _top_rate(L: LagrangianDef, g, xi, alpha):
    """Solve the differentiated Legendre constraint for ``xi^(k)``.

    ``alpha_{k-1}' = d/dt dL/dxi^(k-1)`` splits into the Hessian times
    ``xi^(k)`` plus a directional derivative along the known velocities.
    """
    k, alg = L.order, L.algebra
    if k == 1:
        alpha_rate = L.partial_g(g, xi) + alg.ad_star(xi[0], alpha[0])
    else:
        alpha_rate = L.partial_xi(g, xi)[k - 2] - alpha[k - 2]
    shift = np.zeros_like(xi)
    shift[:-1] = xi[1:]

    def along(s):
        gs = g @ group_exp(s * xi[0]) if moves_g else g
        return L.partial_xi(gs, xi + s * shift)[-1]

    moves_g = g is not None and not L.left_invariant
    known = _fd.directional(along, L.xi_step) if (k > 1 or moves_g) else 0.0
    hess = L.hessian_top(g, xi)
    try:
        if np.linalg.cond(hess) > 1e12:
            raise np.linalg.LinAlgError("ill-conditioned")
        return np.linalg.solve(hess, alpha_rate - known), alpha_rate
    except np.linalg.LinAlgError as exc:
        raise DegenerateError("degenerate, unresolved: top-order Hessian is singular") from exc


def flow_dae_W1(p0, L: LagrangianDef, t_span, config: IntegratorConfig | None = None, *,
                reproject: bool = True) -> DAETrajectory:
    """Integrate the Skinner-Rusk equations on the Legendre submanifold.

    The top slot ``xi^(k)`` is recovered at every stage from the
    time-differentiated constraint.  After each step the constraint
    ``alpha_{k-1} - dL/dxi^(k-1)`` is checked against ``config.drift_tol``;
    on violation ``alpha_{k-1}`` is re-projected, or ``IntegrationError`` is
    raised when ``reproject`` is false.
    """
    config = config or IntegratorConfig()
    k, n = L.order, L.algebra.dim
    g0, xi0, alpha0 = p0.jet.g, np.array(p0.jet.xi), np.array(p0.alpha)
    if L.order != p0.order:
        raise ValueError(f"Lagrangian of order {L.order} on a point of order {p0.order}")
    if not regularity_test(L, g0, xi0).nondegenerate:
        raise DegenerateError("degenerate, unresolved: Lagrangian is singular at the initial point")
    c0 = alpha0[-1] - L.partial_xi(g0, xi0)[-1]
    if np.max(np.abs(c0)) > 1e-10:
        raise ValueError(f"initial point is off the Legendre submanifold by {np.max(np.abs(c0)):.3e}")

    def unpack(y):
        return y[:k * n].reshape(k, n), y[k * n:].reshape(k, n)

    def rhs(t, g, y):
        xi, alpha = unpack(y)
        top, alpha_rate = _top_rate(L, g, xi, alpha)
        xi_dot = np.empty_like(xi)
        xi_dot[:-1] = xi[1:]
        xi_dot[-1] = top
        alpha_dot = np.empty_like(alpha)
        dxi = L.partial_xi(g, xi)
        alpha_dot[0] = L.partial_g(g, xi) + L.algebra.ad_star(xi[0], alpha[0])
        alpha_dot[1:] = dxi[:-1] - alpha[:-1]
        return xi[0], np.concatenate([xi_dot.ravel(), alpha_dot.ravel()])

    count = [0]

    def callback(t, g, y):
        xi, alpha = unpack(y)
        drift = alpha[-1] - L.partial_xi(g, xi)[-1]
        if np.max(np.abs(drift)) <= config.drift_tol:
            return None
        if not reproject:
            raise IntegrationError(f"Legendre constraint drift {np.max(np.abs(drift)):.3e} "
                                   f"at t = {t:.6g}", last_good_time=float(t - config.step))
        count[0] += 1
        alpha = alpha.copy()
        alpha[-1] -= drift
        return np.concatenate([xi.ravel(), alpha.ravel()])

    traj = flow_ode(rhs, (g0, np.concatenate([xi0.ravel(), alpha0.ravel()])), t_span,
                    config, callback=callback)
    m = traj.t.size
    xi = np.empty((m, k + 1, n))
    alpha = traj.y[:, k * n:].reshape(m, k, n)
    xi[:, :k] = traj.y[:, :k * n].reshape(m, k, n)
    constraint = np.empty(m)
    for j in range(m):
        gj = None if traj.g is None else traj.g[j]
        xi[j, k] = _top_rate(L, gj, xi[j, :k], alpha[j])[0]
        constraint[j] = np.max(np.abs(alpha[j, -1] - L.partial_xi(gj, xi[j, :k])[-1]))
    return DAETrajectory(traj.t, traj.g, xi, alpha, constraint, count[0])


@dataclass
class ShootingProblem:
    """Single-shooting setup.

    The residual of an unknown vector ``x`` is
    ``terminal_residual(flow(initial_state(x)))`` and must have the same
    length as ``x``.
    """

    initial_state: Callable[[np.ndarray], object]
    flow: Callable[[object], object]
    terminal_residual: Callable[[object], np.ndarray]
    guess: np.ndarray
    tol: float = 1e-10
    max_iter: int = 50
    fd_step: float = 1e-7
    workers: int = 1

    def residual(self, x) -> np.ndarray:
        return np.asarray(self.terminal_residual(self.flow(self.initial_state(x))),
                          dtype=float).ravel()


@dataclass(frozen=True)
class ShootingResult:
    x: np.ndarray
    iterations: int
    residual_norm: float
    residual: np.ndarray


def _jacobian(problem: ShootingProblem, x, r0):
    def column(j):
        step = problem.fd_step * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += step
        return (problem.residual(xp) - r0) / step

    if problem.workers > 1:
        with ThreadPoolExecutor(problem.workers) as pool:
            cols = list(pool.map(column, range(x.size)))
    else:
        cols = [column(j) for j in range(x.size)]
    return np.stack(cols, axis=1)


def shoot(problem: ShootingProblem) -> ShootingResult:
    """Damped Newton on the shooting residual with a forward-difference Jacobian.

    A step is halved up to 8 times while the residual norm increases.  Stops
    when the max-norm residual drops below ``problem.tol``.
    """
    x = np.array(problem.guess, dtype=float).ravel()
    r = problem.residual(x)
    if r.size != x.size:
        raise ValueError(f"residual has {r.size} components for {x.size} unknowns")
    if not np.all(np.isfinite(r)):
        raise ConvergenceError("residual is not finite at the initial guess", best=x, residual=np.inf)
    norm = float(np.linalg.norm(r))
    best = (x.copy(), r.copy())
    for it in range(problem.max_iter + 1):
        if np.max(np.abs(r)) < problem.tol:
            return ShootingResult(x, it, float(np.max(np.abs(r))), r)
        if it == problem.max_iter:
            break
        jac = _jacobian(problem, x, r)
        try:
            if not np.all(np.isfinite(jac)) or np.linalg.cond(jac) > 1e13:
                raise np.linalg.LinAlgError("ill-conditioned")
            dx = -np.linalg.solve(jac, r)
        except np.linalg.LinAlgError as exc:
            raise DegenerateError(f"shooting Jacobian is singular at iteration {it}") from exc
        scale = 1.0
        for _ in range(9):
            xt = x + scale * dx
            try:
                rt = problem.residual(xt)
            except (IntegrationError, FloatingPointError):
                rt = np.full_like(r, np.inf)
            nt = float(np.linalg.norm(rt)) if np.all(np.isfinite(rt)) else np.inf
            if nt < norm:
                break
            scale *= 0.5
        if not nt < np.inf:
            raise ConvergenceError(f"shooting diverged at iteration {it}",
                                   best=best[0], residual=float(np.max(np.abs(best[1]))))
        x, r, norm = xt, rt, nt
        if np.max(np.abs(r)) < np.max(np.abs(best[1])):
            best = (x.copy(), r.copy())
    raise ConvergenceError(f"shooting did not converge in {problem.max_iter} iterations "
                           f"(residual {np.max(np.abs(best[1])):.3e})",
                           best=best[0], residual=float(np.max(np.abs(best[1]))))
