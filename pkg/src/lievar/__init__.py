"""Higher-order variational mechanics on Lie groups."""
from .bundles import (HigherJet, PontryaginPoint, PontryaginTangent, canonical_immersion,
                      hamiltonian_H, presymplectic_form, projection_tau,
                      symplectic_form_cotangent)
from .discrete import (DiscreteLagrangian, DiscretePath, acceleration_lagrangian,
                       discrete_action, discrete_el_residual, discrete_el_residuals,
                       solve_discrete_bvp)
from .errors import ConfigError, ConvergenceError, DegenerateError, IntegrationError, LievarError
from .integrate import (IntegratorConfig, ShootingProblem, flow_dae_W1, flow_ode,
                        higher_euler_arnold_flow, reconstruct_step, shoot)
from .lie import (E1, E2, E3, LieAlgebra, ad_star, bracket, group_exp, group_log, hat,
                  left_trivialized_group_derivative, pairing, so3, vee)
from .ocp import (RigidBodyScenario, UnderactuatedSystem, VakonomicProblem, assembled_ode_rhs,
                  controlled_residual, eliminate_unactuated, solve_ocp, to_vakonomic)
from .variational import (ConstraintDef, LagrangianDef, SampledCurve, constrained_el_residual,
                          constrained_regularity_test, dae_rhs, euler_arnold_rhs,
                          euler_lagrange_residual, euler_poincare_residual,
                          higher_euler_arnold_rhs, legendre_alpha, lie_poisson_rhs,
                          regularity_test)

__version__ = "0.1.0"
