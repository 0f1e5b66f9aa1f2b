import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lievar import _fd
from lievar.errors import DegenerateError
from lievar.integrate import IntegratorConfig, flow_ode
from lievar.lie import group_exp
from lievar.ocp import (SINGULAR_MESSAGE, OCPConfig, RigidBodyParams, RigidBodyScenario,
                        UnderactuatedSystem, assembled_ode_rhs, classify_rigid_body,
                        controlled_residual, eliminate_unactuated, rigid_body_momenta,
                        rigid_body_rhs, rigid_body_system, rigid_body_vakonomic,
                        scenario_from_angles, singular_report, singular_residual, solve_ocp,
                        to_vakonomic, vakonomic_curve)
from lievar.variational import LagrangianDef, SampledCurve, constrained_el_residual

from strategies import vec

ROTATION = (1.0, -0.5, 0.8)


def reduced_lagrangian(inertia, c1, c2, y, z):
    i1, i2, i3 = inertia
    return (c1 * ((i1 * z[0] - (i2 - i3) * y[1] * y[2]) ** 2 + (i2 * z[1] - (i3 - i1) * y[2] * y[0]) ** 2)
            + c2 * float(y @ y))


def derivative(values, h, order):
    """Central derivative reported on nodes 2 .. N-3 for every order used here."""
    p, d = _fd.time_derivative(values, h, order)
    cut = 2 - p
    return d[cut:d.shape[0] - cut] if cut else d


@pytest.fixture(scope="module")
def solutions():
    out = {}
    for weights in ((0.5, 0.5), (0.5, 0.0)):
        out[weights] = solve_ocp(scenario_from_angles(np.ones(3), *weights, ROTATION), OCPConfig(seed=7))
    return out


class TestControlledEquations:
    def test_rigid_body_residual(self):
        sys = rigid_body_system([1.0, 2.0, 3.0], 0.5, 0.5)
        curve = SampledCurve(np.linspace(0, 1, 5), np.tile([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]], (5, 1, 1)))
        res = controlled_residual(sys, curve, np.zeros((5, 2)))
        assert np.allclose(res.values, [1.0, -2.0, 1.0], atol=1e-12)

    def test_symmetric_body(self, rng):
        sys = rigid_body_system(np.ones(3), 0.5, 0.5)
        y = rng.normal(size=3)
        curve = SampledCurve(np.linspace(0, 1, 4), np.tile(np.stack([y, np.zeros(3)]), (4, 1, 1)))
        assert np.allclose(controlled_residual(sys, curve, np.zeros((4, 2))).values, 0.0, atol=1e-12)

    def test_fully_actuated_control_cancels(self, rng):
        inertia = np.array([1.0, 2.0, 3.0])
        L = LagrangianDef(1, lambda g, x: 0.5 * float(np.sum(inertia * x[0] ** 2)))
        sys = UnderactuatedSystem(L, (0, 1, 2), lambda g, y, u: float(u @ u))
        t = np.linspace(0, 1, 6)
        y = np.stack([np.sin(t + a) for a in rng.normal(size=3)], axis=1)
        y_dot = np.stack([np.cos(t + a) for a in rng.normal(size=3)], axis=1)
        g = np.stack([group_exp(v) for v in rng.normal(size=(6, 3))])
        curve = SampledCurve(t, np.stack([y, y_dot], axis=1), g=g)
        u = controlled_residual(sys, curve, np.zeros((6, 3))).values
        assert np.allclose(controlled_residual(sys, curve, u).values, 0.0, atol=1e-12)

    def test_differenced_rate_matches_hessian(self, rng):
        inertia = np.array([1.0, 2.0, 3.0])
        plain = LagrangianDef(1, lambda g, x: 0.5 * float(np.sum(inertia * x[0] ** 2)))
        sys_fd = UnderactuatedSystem(plain, (0, 1), lambda g, y, u: 0.0)
        sys = rigid_body_system(inertia, 0.5, 0.5)
        y, z = rng.normal(size=(2, 3))
        g = group_exp(rng.normal(size=3))
        assert np.allclose(sys_fd.left_side(g, y, z), sys.left_side(g, y, z), atol=1e-9)

    def test_invalid_actuation(self):
        L = LagrangianDef(1, lambda g, x: 0.0)
        with pytest.raises(ValueError):
            UnderactuatedSystem(L, (0, 0), lambda g, y, u: 0.0)
        with pytest.raises(ValueError):
            UnderactuatedSystem(L, (3,), lambda g, y, u: 0.0)


class TestVakonomic:
    @given(vec(bound=2.0), vec(bound=2.0), st.sampled_from([(1.0, 1.0, 1.0), (1.0, 2.0, 3.0), (2.0, 0.5, 1.5)]),
           st.floats(0.0, 2.0), st.floats(0.0, 2.0))
    def test_lagrangian_and_constraint(self, y, z, inertia, c1, c2):
        vak = to_vakonomic(rigid_body_system(inertia, c1, c2))
        xi = np.stack([y, z])
        ref = reduced_lagrangian(inertia, c1, c2, y, z)
        assert vak.lagrangian(None, xi) == pytest.approx(ref, rel=1e-10, abs=1e-10)
        i1, i2, i3 = inertia
        assert vak.constraint(None, xi)[0] == pytest.approx(i3 * z[2] - (i1 - i2) * y[0] * y[1], abs=1e-10)

    def test_zero_weights(self, rng):
        vak = to_vakonomic(rigid_body_system([1.0, 2.0, 3.0], 0.0, 0.0))
        assert vak.lagrangian(None, rng.normal(size=(2, 3))) == 0.0

    def test_fully_actuated_rejected(self):
        L = LagrangianDef(1, lambda g, x: 0.0)
        with pytest.raises(ValueError):
            to_vakonomic(UnderactuatedSystem(L, (0, 1, 2), lambda g, y, u: 0.0))

    def test_analytic_partials(self, rng):
        params = RigidBodyParams(np.array([1.0, 2.0, 3.0]), 0.7, 0.3)
        vak = rigid_body_vakonomic(params)
        generic = to_vakonomic(rigid_body_system(params.inertia, 0.7, 0.3))
        for _ in range(5):
            xi = rng.normal(size=(2, 3))
            assert vak.lagrangian.check_partials(None, xi) < 1e-6
            assert vak.lagrangian(None, xi) == pytest.approx(generic.lagrangian(None, xi))
            assert np.allclose(vak.constraint.partial_xi(None, xi), generic.constraint.partial_xi(None, xi),
                               atol=1e-8)


class TestElimination:
    @given(vec(), vec(), st.sampled_from([(1.0, 2.0, 3.0), (3.0, 1.0, 2.0), (2.0, 2.0, 1.0)]))
    def test_unactuated_rate(self, y, za, inertia):
        sys = rigid_body_system(inertia, 0.5, 0.5)
        elim = eliminate_unactuated(sys, None, y)
        i1, i2, i3 = inertia
        expected = (i1 - i2) / i3 * y[0] * y[1]
        assert elim(None, y, za[:2])[0] == pytest.approx(expected, abs=1e-10 * (1 + abs(expected)))
        # the eliminated acceleration satisfies the constraint
        vak = to_vakonomic(sys)
        assert abs(vak.constraint(None, np.stack([y, elim.full_rate(None, y, za[:2])]))[0]) <= 1e-9 * (
            1 + np.abs(y).max() ** 2)

    def test_symmetric_body(self, rng):
        sys = rigid_body_system([2.0, 2.0, 1.0], 0.5, 0.5)
        y = rng.normal(size=3)
        assert eliminate_unactuated(sys, None, y)(None, y, rng.normal(size=2))[0] == pytest.approx(0.0, abs=1e-12)

    def test_singular_block_named(self):
        L = LagrangianDef(1, lambda g, x: 0.5 * float(x[0, 0] ** 2 + x[0, 1] ** 2))
        sys = UnderactuatedSystem(L, (0, 1), lambda g, y, u: 0.0)
        with pytest.raises(DegenerateError, match=r"W_AB over indices \(2,\)"):
            eliminate_unactuated(sys, None, np.zeros(3))


class TestAssembledSystem:
    @pytest.mark.parametrize("inertia", [(1.0, 1.0, 1.0), (1.0, 2.0, 3.0)])
    def test_fast_path_matches_generic(self, rng, inertia):
        params = RigidBodyParams(np.array(inertia), 0.5, 0.3)
        vak = rigid_body_vakonomic(params)
        for _ in range(5):
            x = rng.normal(size=9)
            y, dx = rigid_body_rhs(params, x)
            alpha1 = rigid_body_momenta(params, x)
            y_out, z, alpha1_dot, p_dot, lam = assembled_ode_rhs(vak, None, x[:3], alpha1, x[5:8])
            assert np.allclose(z, [dx[0], dx[1], dx[2]], atol=1e-9)
            assert np.allclose(p_dot, dx[5:8], atol=1e-9)
            assert alpha1_dot[2] == pytest.approx(dx[8], abs=1e-9)
            assert lam[0] == pytest.approx(-x[8] / inertia[2], abs=1e-9)
            # alpha1 in the actuated slots is 2 c1 I_a u_a, so its rate fixes u_a'
            u_dot = alpha1_dot[:2] / (2 * params.c1 * params.inertia[:2])
            eps = 1e-6
            _, dx2 = rigid_body_rhs(params, x + eps * dx)
            u_now = params.controls(x[:3], [x[3], x[4], dx[2]])
            u_next = params.controls(x[:3] + eps * dx[:3], [x[3] + eps * dx[3], x[4] + eps * dx[4], dx2[2]])
            assert np.allclose((u_next - u_now) / eps, u_dot, atol=1e-4)

    def test_closed_form_system_for_unit_inertia(self, rng):
        c1 = c2 = 0.5
        params = RigidBodyParams(np.ones(3), c1, c2)
        h = 1e-3
        traj = flow_ode(lambda t, g, x: rigid_body_rhs(params, x), (np.eye(3), 0.5 * rng.normal(size=9)),
                        (0.0, 1.0), IntegratorConfig(h))
        om, pt = traj.y[:, :3], traj.y[:, 8]
        O = om[2:-2]
        d1, d2, d3 = (derivative(om, h, o) for o in (1, 2, 3))
        dp, dp2 = derivative(pt, h, 1), derivative(pt, h, 2)
        eqs = [O[:, 1] * dp - 2 * (c2 * d1[:, 0] + c1 * O[:, 2] * d2[:, 1] - c1 * d3[:, 0]),
               -O[:, 0] * dp - 2 * (c2 * d1[:, 1] - c1 * O[:, 2] * d2[:, 0] - c1 * d3[:, 1]),
               dp2 - 2 * c2 * d1[:, 2] - 2 * c1 * O[:, 1] * d2[:, 0] + 2 * c1 * O[:, 0] * d2[:, 1]]
        for eq in eqs:
            assert np.max(np.abs(eq)) <= 1e-5
        assert np.ptp(om[:, 2]) <= 1e-10

    def test_equilibrium(self):
        _, dx = rigid_body_rhs(RigidBodyParams(np.array([1.0, 2.0, 3.0]), 0.5, 0.0), np.zeros(9))
        assert np.array_equal(dx, np.zeros(9))

    def test_singular_refused(self):
        with pytest.raises(DegenerateError, match="singular OCP"):
            rigid_body_rhs(RigidBodyParams(np.ones(3), 0.0, 1.0), np.zeros(9))
        vak = rigid_body_vakonomic(RigidBodyParams(np.ones(3), 0.0, 1.0))
        with pytest.raises(DegenerateError, match="singular OCP"):
            assembled_ode_rhs(vak, None, np.ones(3), np.ones(3), np.zeros(3))


class TestClassifier:
    @pytest.mark.parametrize("c1,regular", [(0.0, False), (1e-3, True), (0.5, True), (1.0, True)])
    def test_degenerate_iff_no_control_weight(self, c1, regular):
        scen = scenario_from_angles(np.ones(3), c1, 0.5, ROTATION)
        report = classify_rigid_body(scen)
        assert report.nondegenerate is regular
        assert report.rank == (4 if regular else 2)
        # same decision from differenced Hessians of the generic construction
        vak = to_vakonomic(rigid_body_system(np.ones(3), c1, 0.5))
        from lievar.variational import constrained_regularity_test
        fd = constrained_regularity_test(vak.lagrangian, vak.constraint, None, scen.probe())
        assert fd.rank == report.rank

    def test_bordered_matrix(self):
        report = classify_rigid_body(scenario_from_angles([1.0, 2.0, 3.0], 0.5, 0.5, ROTATION))
        expected = np.zeros((4, 4))
        expected[:3, :3] = np.diag([1.0, 4.0, 0.0])
        expected[2, 3] = expected[3, 2] = 3.0
        assert np.allclose(report.matrix, expected, atol=1e-12)

    def test_tiny_weight_below_threshold(self):
        assert not classify_rigid_body(scenario_from_angles(np.ones(3), 1e-9, 0.5, ROTATION)).nondegenerate


class TestSolve:
    @pytest.mark.parametrize("weights", [(0.5, 0.5), (0.5, 0.0)])
    def test_contract(self, solutions, weights):
        sol = solutions[weights]
        scen = scenario_from_angles(np.ones(3), *weights, ROTATION)
        assert sol.boundary_residual <= 1e-6
        assert np.linalg.norm(sol.R[-1] - scen.Rf) <= 1e-6
        assert np.ptp(sol.omega[:, 2]) <= 1e-8
        assert np.max(np.abs(sol.omega[[0, -1], :2])) <= 1e-6
        phi = sol.omega_dot[:, 2]  # I1 = I2 = I3 = 1
        assert np.max(np.abs(phi)) <= 1e-6
        # free Omega_3 at both ends: the unactuated momentum vanishes there
        assert abs(sol.pt3[0]) <= 1e-12 and abs(sol.pt3[-1]) <= 1e-6
        assert sol.t.size == 401

    def test_effort_only_cost(self, solutions):
        sol = solutions[(0.5, 0.0)]
        effort = 0.5 * np.sum(sol.u ** 2, axis=1)
        assert sol.cost == pytest.approx(np.sum(0.5 * (effort[1:] + effort[:-1])) * 0.01, rel=1e-12)

    def test_effort_optimality(self, solutions):
        mixed = solutions[(0.5, 0.5)]
        effort = 0.5 * np.sum(mixed.u ** 2, axis=1)
        mixed_effort = float(np.sum(0.5 * (effort[1:] + effort[:-1])) * 0.01)
        assert solutions[(0.5, 0.0)].cost <= mixed_effort

    @pytest.mark.parametrize("weights", [(0.5, 0.5), (0.5, 0.0)])
    def test_consistent_with_constrained_residual(self, solutions, weights):
        sol = solutions[weights]
        vak = rigid_body_vakonomic(RigidBodyParams(np.ones(3), *weights))
        res, values = constrained_el_residual(vakonomic_curve(sol), vak.lagrangian, vak.constraint)
        assert res.max_norm() <= 1e-4
        assert np.max(np.abs(values)) <= 1e-10

    def test_asymmetric_body_fixed_third_velocity(self):
        # the zero guess has a singular Jacobian here (no p~3 sensitivity when Omega = 0),
        # so this also exercises the seeded restarts
        scen = RigidBodyScenario([1.0, 2.0, 3.0], 0.5, 0.5, np.eye(3), group_exp([0.3, -0.2, 0.2]),
                                 [0.0, 0.0, 0.05], [0.0, 0.0, np.nan], horizon=3.0)
        sol = solve_ocp(scen, OCPConfig(step=0.02))
        assert sol.info["restarts"] >= 1
        assert sol.boundary_residual <= 1e-6
        phi = 3.0 * sol.omega_dot[:, 2] - (1.0 - 2.0) * sol.omega[:, 0] * sol.omega[:, 1]
        assert np.max(np.abs(phi)) <= 1e-12
        assert sol.omega[0, 2] == pytest.approx(0.05, abs=1e-12)

    def test_symmetric_both_fixed_rejected(self):
        scen = RigidBodyScenario(np.ones(3), 0.5, 0.5, np.eye(3), group_exp([0.3, 0.0, 0.0]),
                                 [0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
        with pytest.raises(ValueError, match="conserved"):
            solve_ocp(scen)

    def test_scenario_validation(self):
        with pytest.raises(ValueError):
            RigidBodyScenario(np.ones(3), 0.5, 0.5, np.eye(3), np.eye(3), [np.nan, 0, 0], [0, 0, 0])
        with pytest.raises(ValueError):
            RigidBodyScenario([1.0, -1.0, 1.0], 0.5, 0.5, np.eye(3), np.eye(3), [0, 0, 0], [0, 0, 0])
        with pytest.raises(ValueError):
            RigidBodyScenario(np.ones(3), -0.5, 0.5, np.eye(3), np.eye(3), [0, 0, 0], [0, 0, 0])
        with pytest.raises(ValueError):
            RigidBodyScenario(np.ones(3), 0.5, 0.5, 2 * np.eye(3), np.eye(3), [0, 0, 0], [0, 0, 0])


class TestSingular:
    def scenario(self):
        return scenario_from_angles(np.ones(3), 0.0, 1.0, ROTATION)

    def test_solve_refuses_with_report(self):
        with pytest.raises(DegenerateError, match="singular OCP") as info:
            solve_ocp(self.scenario())
        report = info.value.report
        assert report["regular"] is False and report["rank"] == 2 and report["size"] == 4
        assert "Omega_2*d(pt3)/dt - 2*dOmega_1/dt = 0" in report["equations"]
        assert "Omega_1*d(pt3)/dt + 2*dOmega_2/dt = 0" in report["equations"]
        assert "infeasible" in report["note"]
        assert SINGULAR_MESSAGE == "singular OCP (degenerate bordered Hessian)"

    def test_reduced_system_solution(self):
        # Omega rotates in the actuated plane at rate w while pt3 decreases linearly
        r, w, om3, c2 = 0.7, 1.3, 0.4, 1.0
        t = np.linspace(0.0, 2.0, 2001)
        omega = np.stack([r * np.cos(w * t), r * np.sin(w * t), np.full_like(t, om3)], axis=1)
        pt3 = -2 * c2 * w * t + 0.2
        res = singular_residual(self.scenario(), t, omega, pt3)
        assert np.max(np.abs(res)) <= 1e-5
        assert np.ptp(omega[:, 0] ** 2 + omega[:, 1] ** 2) <= 1e-12
        # a wrong rotation rate violates it
        bad = singular_residual(self.scenario(), t, omega, pt3 * 1.5)
        assert np.max(np.abs(bad)) > 1e-2
