"""Underactuated optimal control reduced to a constrained second-order problem.

The controlled equations of a Lagrangian system ``L(g, y)`` on ``G x g`` read
``E(g, y, y_dot) = u`` with ``u`` supported on the actuated basis directions.
Minimizing ``int C(g, y, u) dt`` is then a second-order variational problem
with Lagrangian ``C(g, y, E_a)`` subject to ``E_A = 0`` on the unactuated
directions.  The first-order form used here carries ``(g, y, alpha_1, p)``
where ``alpha_1`` is the momentum conjugate to ``y_dot`` and ``p = alpha_0``;
``y_dot`` and the multipliers are recovered from the bordered system.

The rigid body on SO(3) with torques about the first two body axes has a
closed-form right-hand side in :func:`rigid_body_rhs` and a shooting driver
in :func:`solve_ocp`.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _fd
from .errors import ConvergenceError, DegenerateError, IntegrationError
from .integrate import IntegratorConfig, ShootingProblem, flow_ode, shoot
from .lie import check_rotation, cross, group_log
from .variational import (ConstraintDef, LagrangianDef, NodeValues, RegularityReport,
                          SampledCurve, augmented_partials, constrained_regularity_test)

SINGULAR_MESSAGE = "singular OCP (degenerate bordered Hessian)"


@dataclass(frozen=True)
class UnderactuatedSystem:
    """Controlled system ``E(g, y, y_dot) = u`` with cost ``C(g, y, u_a)``.

    ``lagrangian`` is a first-order :class:`LagrangianDef` in ``y``;
    ``cost(g, y, u)`` receives the actuated controls only.
    """

    lagrangian: LagrangianDef
    actuated: tuple[int, ...]
    cost: Callable[[np.ndarray | None, np.ndarray, np.ndarray], float]
    horizon: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        n = self.lagrangian.algebra.dim
        act = tuple(int(a) for a in self.actuated)
        if len(set(act)) != len(act) or any(not 0 <= a < n for a in act):
            raise ValueError(f"actuated indices must be distinct and in [0, {n})")
        if self.lagrangian.order != 1:
            raise ValueError("the base Lagrangian must be first order")
        object.__setattr__(self, "actuated", act)

    @property
    def unactuated(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.lagrangian.algebra.dim) if i not in self.actuated)

    def left_side(self, g, y, y_dot) -> np.ndarray:
        """``d/dt dL/dy - ad*_y dL/dy - dL/dg`` at ``(g, y, y_dot)``."""
        L = self.lagrangian
        y = np.asarray(y, dtype=float)
        y_dot = np.asarray(y_dot, dtype=float)
        moves_g = g is not None and not L.left_invariant
        if L.hess is not None and not moves_g:
            rate = L.hessian_top(g, y) @ y_dot
        else:
            from .lie import group_exp

            def along(s):
                gs = g @ group_exp(s * y) if moves_g else g
                return L.partial_xi(gs, (y + s * y_dot)[None])[0]

            rate = _fd.directional(along, L.xi_step)
        mom = L.partial_xi(g, y[None])[0]
        return rate - L.algebra.ad_star(y, mom) - L.partial_g(g, y[None])


def controlled_residual(sys: UnderactuatedSystem, curve: SampledCurve, u) -> NodeValues:
    """``E(g, y, y_dot) - u`` per node; ``u`` holds the actuated controls.

    ``curve.xi`` must carry ``y`` and ``y_dot`` slots.
    """
    u = np.asarray(u, dtype=float).reshape(len(curve), len(sys.actuated))
    if curve.xi.shape[1] < 2:
        raise ValueError("curve must carry y and y_dot slots")
    out = np.empty((len(curve), sys.lagrangian.algebra.dim))
    for j in range(len(curve)):
        g = None if curve.g is None else curve.g[j]
        e = sys.left_side(g, curve.xi[j, 0], curve.xi[j, 1])
        e[list(sys.actuated)] -= u[j]
        out[j] = e
    return NodeValues(np.arange(len(curve)), curve.t, out)


@dataclass(frozen=True)
class VakonomicProblem:
    """Second-order Lagrangian on ``G x 2g`` with constraints ``Phi^A``."""

    lagrangian: LagrangianDef
    constraint: ConstraintDef
    system: UnderactuatedSystem | None = None


def to_vakonomic(sys: UnderactuatedSystem) -> VakonomicProblem:
    """Substitute the actuated controlled equations into the cost."""
    act, unact = list(sys.actuated), list(sys.unactuated)
    if not unact:
        raise ValueError("system is fully actuated; there is nothing to constrain")
    alg = sys.lagrangian.algebra

    def lagrangian(g, xi):
        return float(sys.cost(g, xi[0], sys.left_side(g, xi[0], xi[1])[act]))

    def constraint(g, xi):
        return sys.left_side(g, xi[0], xi[1])[unact]

    left_inv = sys.lagrangian.left_invariant
    return VakonomicProblem(
        LagrangianDef(2, lagrangian, algebra=alg, left_invariant=left_inv),
        ConstraintDef(len(unact), 2, constraint, algebra=alg, left_invariant=left_inv),
        sys)


@dataclass(frozen=True)
class Elimination:
    """Unactuated accelerations ``y_dot^A = G^A(g, y, y_dot^a)``."""

    system: UnderactuatedSystem
    W: np.ndarray

    def __call__(self, g, y, y_dot_act) -> np.ndarray:
        sys = self.system
        n = sys.lagrangian.algebra.dim
        y_dot = np.zeros(n)
        y_dot[list(sys.actuated)] = y_dot_act
        # E is affine in y_dot with the unactuated block W
        e0 = sys.left_side(g, y, y_dot)[list(sys.unactuated)]
        return -np.linalg.solve(self.W, e0)

    def full_rate(self, g, y, y_dot_act) -> np.ndarray:
        sys = self.system
        out = np.zeros(sys.lagrangian.algebra.dim)
        out[list(sys.actuated)] = y_dot_act
        out[list(sys.unactuated)] = self(g, y, y_dot_act)
        return out


def eliminate_unactuated(sys: UnderactuatedSystem, g, y, max_cond: float = 1e8) -> Elimination:
    """Build ``G^A`` after checking that the unactuated Hessian block is regular at the probe."""
    unact = list(sys.unactuated)
    hess = sys.lagrangian.hessian_top(g, np.asarray(y, dtype=float)[None])
    W = hess[np.ix_(unact, unact)]
    cond = np.linalg.cond(W) if W.size else 1.0
    if not np.isfinite(cond) or cond > max_cond:
        raise DegenerateError(f"unactuated block W_AB over indices {tuple(unact)} is singular "
                              f"(condition number {cond:.3e})")
    return Elimination(sys, W)


def _bordered_solve(vak: VakonomicProblem, g, y, alpha1, z0=None, lam0=None,
                    tol: float = 1e-12, max_iter: int = 30):
    """Solve ``dL/dz - lam Phi_z = alpha1``, ``Phi = 0`` for ``(z, lam)`` by Newton."""
    L, Phi = vak.lagrangian, vak.constraint
    n, m = L.algebra.dim, Phi.count
    z = np.zeros(n) if z0 is None else np.array(z0, dtype=float)
    lam = np.zeros(m) if lam0 is None else np.array(lam0, dtype=float)
    for _ in range(max_iter):
        xi = np.stack([y, z])
        dz = L.partial_xi(g, xi)[1]
        phi_z = Phi.partial_xi(g, xi)[:, 1, :]
        r = np.concatenate([dz - lam @ phi_z - alpha1, Phi(g, xi)])
        if np.max(np.abs(r)) < tol:
            break
        phi_zz = _fd.jacobian(lambda w: Phi.partial_xi(g, np.stack([y, w]))[:, 1, :], z, Phi.xi_step)
        top = L.hessian_top(g, xi) - np.einsum("a,aij->ij", lam, phi_zz)
        mat = np.block([[top, -phi_z.T], [phi_z, np.zeros((m, m))]])
        if np.linalg.cond(mat) > 1e12:
            raise DegenerateError(SINGULAR_MESSAGE)
        d = np.linalg.solve(mat, -r)
        z, lam = z + d[:n], lam + d[n:]
    return z, lam


def assembled_ode_rhs(vak: VakonomicProblem, g, y, alpha1, p):
    """First-order form of the vakonomic equations.

    Returns ``(y, y_dot, alpha1_dot, p_dot, lam)``: the group velocity is
    ``y`` itself, ``y_dot`` and ``lam`` come from the bordered system, and
    ``alpha1_dot = P_0 - p``, ``p_dot = ad*_y p + dL/dg`` with every partial
    taken of ``L - lam Phi``.
    """
    y = np.asarray(y, dtype=float)
    z, lam = _bordered_solve(vak, g, y, np.asarray(alpha1, dtype=float))
    dxi, dg = augmented_partials(vak.lagrangian, vak.constraint, g, np.stack([y, z]), lam)
    p = np.asarray(p, dtype=float)
    return y, z, dxi[0] - p, vak.lagrangian.algebra.ad_star(y, p) + dg, lam


# ---------------------------------------------------------------- rigid body


def rigid_body_system(inertia, c1: float, c2: float, horizon=(0.0, 4.0)) -> UnderactuatedSystem:
    """Rigid body with torques about the first two body axes."""
    inertia = np.asarray(inertia, dtype=float)
    L = LagrangianDef(1, lambda g, x: 0.5 * float(np.sum(inertia * x[0] ** 2)),
                      dxi=lambda g, x: (inertia * x[0])[None],
                      hess=lambda g, x: np.diag(inertia), left_invariant=True)
    cost = lambda g, y, u: c1 * float(u @ u) + c2 * float(y @ y)  # noqa: E731
    return UnderactuatedSystem(L, (0, 1), cost, tuple(horizon))


@dataclass(frozen=True)
class RigidBodyParams:
    inertia: np.ndarray
    c1: float
    c2: float

    def __post_init__(self):
        inertia = np.asarray(self.inertia, dtype=float).reshape(3)
        if np.any(inertia <= 0):
            raise ValueError("principal moments of inertia must be positive")
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("cost weights must be non-negative")
        object.__setattr__(self, "inertia", inertia)

    def controls(self, y, z) -> np.ndarray:
        """``u_1, u_2`` as the actuated controlled left sides; broadcasts."""
        i1, i2, i3 = self.inertia
        y, z = np.asarray(y, dtype=float), np.asarray(z, dtype=float)
        u1 = i1 * z[..., 0] - (i2 - i3) * y[..., 1] * y[..., 2]
        u2 = i2 * z[..., 1] - (i3 - i1) * y[..., 2] * y[..., 0]
        return np.stack([u1, u2], axis=-1)

    def constraint(self, y, z):
        i1, i2, i3 = self.inertia
        y, z = np.asarray(y, dtype=float), np.asarray(z, dtype=float)
        return i3 * z[..., 2] - (i1 - i2) * y[..., 0] * y[..., 1]

    def unactuated_rate(self, y):
        i1, i2, i3 = self.inertia
        y = np.asarray(y, dtype=float)
        return (i1 - i2) / i3 * y[..., 0] * y[..., 1]

    def integrand(self, y, z):
        u = self.controls(y, z)
        return self.c1 * np.sum(u * u, axis=-1) + self.c2 * np.sum(np.asarray(y) ** 2, axis=-1)


def rigid_body_vakonomic(params: RigidBodyParams) -> VakonomicProblem:
    """Vakonomic Lagrangian and constraint of the rigid body with analytic partials."""
    i1, i2, i3 = params.inertia
    c1, c2 = params.c1, params.c2

    def u_and_grads(y, z):
        u = params.controls(y, z)
        du_dy = np.array([[0.0, -(i2 - i3) * y[2], -(i2 - i3) * y[1]],
                          [-(i3 - i1) * y[2], 0.0, -(i3 - i1) * y[0]]])
        du_dz = np.array([[i1, 0.0, 0.0], [0.0, i2, 0.0]])
        return u, du_dy, du_dz

    def func(g, xi):
        return float(params.integrand(xi[0], xi[1]))

    def dxi(g, xi):
        u, du_dy, du_dz = u_and_grads(xi[0], xi[1])
        return np.stack([2 * c1 * u @ du_dy + 2 * c2 * xi[0], 2 * c1 * u @ du_dz])

    def hess(g, xi):
        return 2 * c1 * np.diag([i1 * i1, i2 * i2, 0.0])

    def phi(g, xi):
        return np.array([params.constraint(xi[0], xi[1])])

    def dphi(g, xi):
        y = xi[0]
        return np.array([[[-(i1 - i2) * y[1], -(i1 - i2) * y[0], 0.0], [0.0, 0.0, i3]]])

    system = rigid_body_system(params.inertia, c1, c2)
    return VakonomicProblem(
        LagrangianDef(2, func, dxi=dxi, hess=hess, left_invariant=True),
        ConstraintDef(1, 2, phi, dxi=dphi, left_invariant=True),
        system)


def rigid_body_rhs(params: RigidBodyParams, x) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form vakonomic vector field of the rigid body.

    ``x = (Omega (3), Omega_dot_1, Omega_dot_2, p (3), pt3)`` where ``p`` is
    the momentum ``alpha_0`` and ``pt3`` the unactuated component of
    ``alpha_1``; the multiplier of the constraint is ``-pt3 / I_3``.  Returns
    ``(Omega, x_dot)``, the first entry being the body velocity for the
    attitude reconstruction.
    """
    c1, c2 = params.c1, params.c2
    if not c1 > 0:
        raise DegenerateError(SINGULAR_MESSAGE)
    i1, i2, i3 = params.inertia
    y0, y1, y2 = x[0], x[1], x[2]
    z0, z1 = x[3], x[4]
    p = x[5:8]
    pt3 = x[8]
    z2 = (i1 - i2) / i3 * y0 * y1
    lam = -pt3 / i3
    v1 = i1 * z0 - (i2 - i3) * y1 * y2
    v2 = i2 * z1 - (i3 - i1) * y2 * y0
    a, b, c = i2 - i3, i3 - i1, i1 - i2
    P0 = np.array([
        -2 * c1 * v2 * b * y2 + 2 * c2 * y0 + lam * c * y1,
        -2 * c1 * v1 * a * y2 + 2 * c2 * y1 + lam * c * y0,
        -2 * c1 * (v1 * a * y1 + v2 * b * y0) + 2 * c2 * y2,
    ])
    f = P0 - p
    v1_dot = f[0] / (2 * c1 * i1)
    v2_dot = f[1] / (2 * c1 * i2)
    y = np.array([y0, y1, y2])
    dx = np.empty(9)
    dx[0], dx[1], dx[2] = z0, z1, z2
    dx[3] = (v1_dot + a * (z1 * y2 + y1 * z2)) / i1
    dx[4] = (v2_dot + b * (z2 * y0 + y2 * z0)) / i2
    dx[5:8] = cross(p, y)
    dx[8] = f[2]
    return y, dx


def rigid_body_momenta(params: RigidBodyParams, x) -> np.ndarray:
    """``alpha_1`` from the fast-path state; used to cross-check the generic path."""
    x = np.asarray(x, dtype=float)
    y, z = x[:3], np.array([x[3], x[4], params.unactuated_rate(x[:3])])
    u = params.controls(y, z)
    return np.array([2 * params.c1 * params.inertia[0] * u[0],
                     2 * params.c1 * params.inertia[1] * u[1], x[8]])


@dataclass(frozen=True)
class RigidBodyScenario:
    """Boundary data for the rigid-body problem.

    ``omega0`` / ``omegaf`` may hold NaN in the third (unactuated) entry,
    which leaves that velocity free at that end; the matching natural
    condition is that the unactuated momentum vanishes there.
    """

    inertia: np.ndarray
    c1: float
    c2: float
    R0: np.ndarray
    Rf: np.ndarray
    omega0: np.ndarray
    omegaf: np.ndarray
    horizon: float = 4.0

    def __post_init__(self):
        params = RigidBodyParams(self.inertia, float(self.c1), float(self.c2))
        object.__setattr__(self, "inertia", params.inertia)
        object.__setattr__(self, "R0", check_rotation(self.R0, what="R0"))
        object.__setattr__(self, "Rf", check_rotation(self.Rf, what="Rf"))
        for name in ("omega0", "omegaf"):
            w = np.asarray(getattr(self, name), dtype=float).reshape(3)
            if np.any(~np.isfinite(w[:2])):
                raise ValueError(f"{name}: actuated velocities must be prescribed")
            object.__setattr__(self, name, w)
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")

    @property
    def params(self) -> RigidBodyParams:
        return RigidBodyParams(self.inertia, self.c1, self.c2)

    @property
    def free_start(self) -> bool:
        return bool(np.isnan(self.omega0[2]))

    @property
    def free_end(self) -> bool:
        return bool(np.isnan(self.omegaf[2]))

    def probe(self) -> np.ndarray:
        return np.stack([np.nan_to_num(self.omega0), np.zeros(3)])


def classify_rigid_body(scenario: RigidBodyScenario) -> RegularityReport:
    vak = rigid_body_vakonomic(scenario.params)
    return constrained_regularity_test(vak.lagrangian, vak.constraint, scenario.R0, scenario.probe())


@dataclass(frozen=True)
class OCPConfig:
    step: float = 0.01
    tol: float = 1e-10
    max_iter: int = 40
    restarts: int = 10
    seed: int = 0
    fd_step: float = 1e-7
    workers: int = 1


@dataclass(frozen=True)
class OCPSolution:
    t: np.ndarray
    R: np.ndarray
    omega: np.ndarray
    omega_dot: np.ndarray
    p: np.ndarray
    pt3: np.ndarray
    u: np.ndarray
    cost: float
    boundary_residual: float
    info: dict = field(default_factory=dict, repr=False)

    @property
    def multiplier(self) -> np.ndarray:
        """Constraint multiplier ``lam`` of ``L - lam Phi`` along the solution."""
        return -self.pt3 / self.info["inertia"][2]


def _initial(scenario: RigidBodyScenario, s) -> np.ndarray:
    x = np.empty(9)
    x[:3] = scenario.omega0
    x[3:5] = s[0:2]
    x[5:8] = s[2:5]
    if scenario.free_start:
        x[2], x[8] = s[5], 0.0
    else:
        x[8] = s[5]
    return x


def _terminal(scenario: RigidBodyScenario, R, x) -> np.ndarray:
    r = np.empty(6)
    r[0:2] = x[0:2] - scenario.omegaf[0:2]
    r[2:5] = group_log(R.T @ scenario.Rf)
    r[5] = x[8] if scenario.free_end else x[2] - scenario.omegaf[2]
    return r


def _flow(scenario: RigidBodyScenario, x0, step: float):
    params = scenario.params
    return flow_ode(lambda t, g, x: rigid_body_rhs(params, x), (scenario.R0, x0),
                    (0.0, scenario.horizon), IntegratorConfig(step))


def singular_report(scenario: RigidBodyScenario) -> dict:
    """Structure of the degenerate case ``c1 = 0``.

    With no control penalty the actuated momenta become algebraic,
    ``p_a = 2 c2 Omega_a - lam dPhi/dOmega_a``, and the remaining equations
    are first order in ``Omega`` and in ``pt3``.  Boundary values of the
    actuated velocities can then not be prescribed freely; for ``I1 = I2``
    the quantity ``Omega_1^2 + Omega_2^2`` is conserved.
    """
    report = classify_rigid_body(scenario)
    i1, i2, i3 = scenario.inertia
    c2 = scenario.c2
    eqs = [
        f"p_a = {2 * c2:g}*Omega_a - lam*dPhi/dOmega_a (a = 1, 2), lam = -pt3/{i3:g}",
        f"p_3 = {2 * c2:g}*Omega_3 - d(pt3)/dt",
        "dp/dt = p x Omega",
        f"dOmega_3/dt = {(i1 - i2) / i3:g}*Omega_1*Omega_2",
    ]
    if i1 == i2 == i3:
        eqs += [f"Omega_2*d(pt3)/dt - {2 * c2:g}*dOmega_1/dt = 0",
                f"Omega_1*d(pt3)/dt + {2 * c2:g}*dOmega_2/dt = 0"]
    return {
        "regular": report.nondegenerate,
        "rank": report.rank,
        "size": report.size,
        "equations": eqs,
        "note": ("degenerate vakonomic problem: the reduced system is lower order, "
                 "arbitrary velocity boundary data may be infeasible; no boundary "
                 "value solve is attempted"),
    }


def singular_residual(scenario: RigidBodyScenario, t, omega, pt3) -> np.ndarray:
    """Residual of the ``c1 = 0`` reduced system on a sampled ``(Omega, pt3)`` curve.

    Columns are the three components of ``dp/dt - p x Omega`` followed by
    the constraint ``I3 dOmega_3/dt - (I1 - I2) Omega_1 Omega_2``, on the
    interior nodes.
    """
    params = scenario.params
    i1, i2, i3 = params.inertia
    c2 = params.c2
    t, omega, pt3 = (np.asarray(a, dtype=float) for a in (t, omega, pt3))
    h = float(t[1] - t[0])
    _, d_pt3 = _fd.time_derivative(pt3, h, 1)
    _, d_om = _fd.time_derivative(omega, h, 1)
    y = omega[1:-1]
    lam = -pt3[1:-1] / i3
    c = i1 - i2
    p = np.stack([2 * c2 * y[:, 0] + lam * c * y[:, 1],
                  2 * c2 * y[:, 1] + lam * c * y[:, 0],
                  2 * c2 * y[:, 2] - d_pt3], axis=-1)
    _, dp = _fd.time_derivative(p, h, 1)
    inner = slice(1, -1)
    res = dp - np.cross(p[inner], y[inner])
    phi = i3 * d_om[inner, 2] - c * y[inner, 0] * y[inner, 1]
    return np.column_stack([res, phi])


def solve_ocp(scenario: RigidBodyScenario, config: OCPConfig | None = None) -> OCPSolution:
    """Single shooting on :func:`rigid_body_rhs`.

    Unknowns are ``Omega_dot_a(0)``, ``p(0)`` and either ``Omega_3(0)`` (free
    start, ``pt3(0) = 0``) or ``pt3(0)``.  Terminal conditions are
    ``Omega_a(T)``, ``log(R(T)^T R_f)`` and either ``pt3(T) = 0`` (free end)
    or ``Omega_3(T)``.  The zero guess is tried first, then up to
    ``config.restarts`` seeded random guesses.
    """
    config = config or OCPConfig()
    params = scenario.params
    if not params.c1 > 0:
        report = singular_report(scenario)
        err = DegenerateError(f"{SINGULAR_MESSAGE}: {report['note']}")
        err.report = report
        raise err
    if not scenario.free_start and not scenario.free_end and \
            params.inertia[0] == params.inertia[1]:
        raise ValueError("Omega_3 is conserved when I1 = I2; leave it free at one end at least")

    problem = ShootingProblem(
        initial_state=lambda s: _initial(scenario, s),
        flow=lambda x0: _flow(scenario, x0, config.step),
        terminal_residual=lambda tr: _terminal(scenario, tr.g[-1], tr.y[-1]),
        guess=np.zeros(6), tol=config.tol, max_iter=config.max_iter,
        fd_step=config.fd_step, workers=config.workers)
    rng = np.random.default_rng(config.seed)
    start = time.perf_counter()
    last: Exception | None = None
    for attempt in range(config.restarts + 1):
        if attempt:
            problem.guess = rng.normal(scale=0.5, size=6)
        try:
            res = shoot(problem)
            break
        except (ConvergenceError, DegenerateError, IntegrationError) as exc:
            last = exc
    else:
        raise ConvergenceError(f"shooting failed after {config.restarts} restarts: {last}",
                               best=getattr(last, "best", None),
                               residual=getattr(last, "residual", None))

    tr = _flow(scenario, _initial(scenario, res.x), config.step)
    x = tr.y
    omega = x[:, :3]
    omega_dot = np.column_stack([x[:, 3], x[:, 4], params.unactuated_rate(omega)])
    u = params.controls(omega, omega_dot)
    integrand = params.integrand(omega, omega_dot)
    cost = float(np.sum(0.5 * (integrand[1:] + integrand[:-1])) * config.step)
    bnd = [np.linalg.norm(tr.g[-1] - scenario.Rf),
           np.max(np.abs(omega[-1, :2] - scenario.omegaf[:2])),
           np.max(np.abs(omega[0, :2] - scenario.omega0[:2]))]
    if not scenario.free_end:
        bnd.append(abs(omega[-1, 2] - scenario.omegaf[2]))
    if not scenario.free_start:
        bnd.append(abs(omega[0, 2] - scenario.omega0[2]))
    return OCPSolution(
        tr.t, tr.g, omega, omega_dot, x[:, 5:8], x[:, 8], u, cost, float(max(bnd)),
        info={"iterations": res.iterations, "restarts": attempt,
              "shooting_residual": res.residual_norm, "unknowns": res.x,
              "inertia": params.inertia, "seconds": time.perf_counter() - start})


def vakonomic_curve(sol: OCPSolution) -> SampledCurve:
    """Solution as a sampled curve with ``(Omega, Omega_dot)`` slots and multipliers."""
    return SampledCurve(sol.t, np.stack([sol.omega, sol.omega_dot], axis=1), g=sol.R,
                        lam=sol.multiplier[:, None])


def scenario_from_angles(inertia: Sequence[float], c1: float, c2: float, rotation_vector,
                         horizon: float = 4.0) -> RigidBodyScenario:
    """Rest-to-rest style scenario: ``R(0) = I``, ``R(T) = exp(rotation_vector)``,
    actuated velocities zero at both ends and ``Omega_3`` free."""
    from .lie import group_exp
    free = np.array([0.0, 0.0, np.nan])
    return RigidBodyScenario(np.asarray(inertia, dtype=float), c1, c2, np.eye(3),
                             group_exp(np.asarray(rotation_vector, dtype=float)),
                             free, free.copy(), horizon)
