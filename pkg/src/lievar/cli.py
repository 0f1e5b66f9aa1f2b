"""Command-line scenario runner.

``lievar run CONFIG --out DIR`` writes ``trajectory.csv`` and
``summary.json``; ``lievar classify CONFIG`` prints the regularity verdict.
Exit codes: 0 success, 2 solver failure, 3 configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from .bundles import HigherJet, PontryaginPoint
from .config import ScenarioConfig, load_config
from .discrete import acceleration_lagrangian, discrete_el_residuals, solve_discrete_bvp
from .errors import ConfigError, LievarError
from .integrate import IntegratorConfig, flow_dae_W1, flow_ode
from .lie import cross, group_exp
from .ocp import OCPConfig, RigidBodyScenario, classify_rigid_body, singular_report, solve_ocp
from .variational import LagrangianDef, SampledCurve, euler_poincare_residual, regularity_test

EXIT_OK, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3


def rigid_body_lagrangian(inertia) -> LagrangianDef:
    inertia = np.asarray(inertia, dtype=float)
    return LagrangianDef(1, lambda g, x: 0.5 * float(np.sum(inertia * x[0] ** 2)),
                         dxi=lambda g, x: (inertia * x[0])[None],
                         hess=lambda g, x: np.diag(inertia), left_invariant=True)


def acceleration_cost() -> LagrangianDef:
    """``l = |xi_dot|^2 / 2`` on ``2 so(3)``."""
    return LagrangianDef(2, lambda g, x: 0.5 * float(x[1] @ x[1]),
                         dxi=lambda g, x: np.stack([np.zeros(3), x[1]]),
                         hess=lambda g, x: np.eye(3), left_invariant=True)


def _drift(values) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.max(np.abs(values / values[0] - 1.0))) if values[0] != 0 else \
        float(np.max(np.abs(values - values[0])))


def _orthogonality(R) -> float:
    eye = np.eye(3)
    return float(max(np.linalg.norm(r.T @ r - eye) for r in R))


def _run_free_body(cfg: ScenarioConfig):
    inertia = cfg["inertia"]
    icfg = IntegratorConfig(cfg["step"])

    def rhs(t, g, m):
        omega = m / inertia
        return omega, cross(m, omega)

    tr = flow_ode(rhs, (cfg["R0"], inertia * cfg["omega0"]), (0.0, cfg["horizon"]), icfg)
    omega = tr.y / inertia
    energy = 0.5 * np.sum(inertia * omega ** 2, axis=1)
    casimir = np.sum(tr.y ** 2, axis=1)
    rows = np.column_stack([tr.t, omega, energy, casimir])
    summary = {"energy_drift": _drift(energy), "casimir_drift": _drift(casimir),
               "orthogonality_error": _orthogonality(tr.g)}
    return ["t", "Omega1", "Omega2", "Omega3", "energy", "casimir"], rows, summary


def _run_lie_poisson(cfg: ScenarioConfig):
    inertia = cfg["inertia"]
    tr = flow_ode(lambda t, g, a: (None, cross(a, a / inertia)), (None, cfg["alpha0"]),
                  (0.0, cfg["horizon"]), IntegratorConfig(cfg["step"]))
    casimir = np.sum(tr.y ** 2, axis=1)
    energy = 0.5 * np.sum(tr.y ** 2 / inertia, axis=1)
    rows = np.column_stack([tr.t, tr.y, casimir, energy])
    summary = {"casimir_drift": _drift(casimir), "energy_drift": _drift(energy)}
    return ["t", "alpha1", "alpha2", "alpha3", "casimir", "energy"], rows, summary


def _dae_start(cfg: ScenarioConfig):
    if cfg["lagrangian"] == "rigid_body":
        L = rigid_body_lagrangian(cfg["inertia"])
        xi = cfg["omega0"][None]
        alpha = (cfg["inertia"] * cfg["omega0"])[None]
    else:
        L = acceleration_cost()
        xi = np.stack([cfg["xi0"], cfg["xi1"]])
        alpha = np.stack([-cfg["xi2"], cfg["xi1"]])
    return L, PontryaginPoint(HigherJet(cfg["R0"], xi), alpha)


def _run_dae_flow(cfg: ScenarioConfig):
    L, p0 = _dae_start(cfg)
    tr = flow_dae_W1(p0, L, (0.0, cfg["horizon"]), IntegratorConfig(cfg["step"]))
    rows = np.column_stack([tr.t, tr.xi[:, 0], tr.alpha[:, 0], tr.constraint])
    summary = {"max_constraint_residual": float(np.max(tr.constraint)),
               "reprojections": tr.reprojections, "orthogonality_error": _orthogonality(tr.g)}
    cols = ["t", "xi1", "xi2", "xi3", "alpha0_1", "alpha0_2", "alpha0_3", "constraint"]
    return cols, rows, summary


def _ocp_scenario(cfg: ScenarioConfig) -> RigidBodyScenario:
    return RigidBodyScenario(cfg["inertia"], cfg["c1"], cfg["c2"], cfg["R0"], cfg["Rf"],
                             cfg["omega0"], cfg["omegaf"], cfg["horizon"])


def _run_ocp(cfg: ScenarioConfig):
    scenario = _ocp_scenario(cfg)
    sol = solve_ocp(scenario, OCPConfig(step=cfg["step"], tol=cfg["tol"],
                                        restarts=cfg["restarts"], seed=cfg.seed))
    half_omega = 0.5 * np.sum(sol.omega ** 2, axis=1)
    half_u = 0.5 * np.sum(sol.u ** 2, axis=1)
    rows = np.column_stack([sol.t, sol.omega, sol.u, half_omega, half_u])
    phi = scenario.params.constraint(sol.omega, sol.omega_dot)
    summary = {"iterations": sol.info["iterations"], "restarts": sol.info["restarts"],
               "shooting_residual": sol.info["shooting_residual"],
               "boundary_residual": sol.boundary_residual, "cost": sol.cost,
               "omega3_variation": float(np.ptp(sol.omega[:, 2])),
               "max_constraint_residual": float(np.max(np.abs(phi)))}
    cols = ["t", "Omega1", "Omega2", "Omega3", "u1", "u2", "half_omega_sq", "half_u_sq"]
    return cols, rows, summary


def _discrete_n(cfg: ScenarioConfig, step_override):
    if step_override is None:
        return cfg["N"]
    n = int(math.floor(cfg["horizon"] / step_override + 1e-9))
    if n < 4:
        raise ConfigError("step override leaves fewer than 4 discrete intervals")
    return n


def _run_discrete(cfg: ScenarioConfig, step_override=None):
    n = _discrete_n(cfg, step_override)
    ld = acceleration_lagrangian(cfg["scale"])
    path = solve_discrete_bvp(ld, (cfg["G0"], cfg["G1"], cfg["G_N1"], cfg["G_N"]), n)
    res = np.full(n + 1, np.nan)
    res[2:n - 1] = np.max(np.abs(discrete_el_residuals(ld, path)), axis=1)
    t = cfg["horizon"] / n * np.arange(n + 1)
    rows = np.column_stack([t, path.nodes.reshape(n + 1, 9), res])
    summary = {"iterations": path.info["iterations"], "max_residual": float(np.nanmax(res)),
               "N": n, "orthogonality_error": _orthogonality(path.nodes)}
    cols = ["t"] + [f"g{i}{j}" for i in range(1, 4) for j in range(1, 4)] + ["residual"]
    return cols, rows, summary


def _run_ep_check(cfg: ScenarioConfig):
    inertia, h = cfg["inertia"], cfg["step"]
    icfg = IntegratorConfig(h)
    t = icfg.grid((0.0, cfg["horizon"]))
    if t.size < 3:
        raise ConfigError("euler_poincare_check needs at least 3 grid nodes")
    if cfg["curve"] == "constant":
        omega = np.tile(cfg["omega0"], (t.size, 1))
    else:
        tr = flow_ode(lambda s, g, m: (None, cross(m, m / inertia)), (None, inertia * cfg["omega0"]),
                      (0.0, cfg["horizon"]), icfg)
        omega = tr.y / inertia
    res = euler_poincare_residual(SampledCurve(t, omega), rigid_body_lagrangian(inertia))
    full = np.full((t.size, 3), np.nan)
    full[res.index] = res.values
    rows = np.column_stack([t, omega, full])
    summary = {"max_residual": res.max_norm(), "residual_at_first_interior_node": res.values[0].tolist()}
    cols = ["t", "Omega1", "Omega2", "Omega3", "residual1", "residual2", "residual3"]
    return cols, rows, summary


RUNNERS = {"free_body": _run_free_body, "lie_poisson": _run_lie_poisson, "dae_flow": _run_dae_flow,
           "ocp_rigid_body": _run_ocp, "discrete_bvp": _run_discrete,
           "euler_poincare_check": _run_ep_check}


def _apply_overrides(cfg: ScenarioConfig, seed, step) -> ScenarioConfig:
    values = dict(cfg.values)
    if step is not None:
        if not step > 0 or not math.isfinite(step):
            raise ConfigError("--step must be positive")
        if "step" in values:
            values["step"] = float(step)
    return ScenarioConfig(cfg.kind, values, cfg.seed if seed is None else seed, cfg.source)


def format_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    lines += [",".join("%.17g" % v for v in row) for row in np.asarray(rows, dtype=float)]
    return "\n".join(lines) + "\n"


def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _json(obj) -> str:
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple, np.ndarray)):
            return [clean(x) for x in v]
        if isinstance(v, (np.floating, float)):
            return None if not math.isfinite(v) else float(v)
        if isinstance(v, np.integer):
            return int(v)
        return v

    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


def cmd_run(args) -> int:
    try:
        cfg = _apply_overrides(load_config(args.config), args.seed, args.step)
        if cfg.kind == "discrete_bvp":
            _discrete_n(cfg, args.step)
        if cfg.kind == "ocp_rigid_body":
            _ocp_scenario(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    start = time.perf_counter()
    try:
        if cfg.kind == "discrete_bvp":
            columns, rows, stats = _run_discrete(cfg, args.step)
        else:
            columns, rows, stats = RUNNERS[cfg.kind](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LievarError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        out.mkdir(parents=True, exist_ok=True)
        summary = {"kind": cfg.kind, "status": "failed", "error": str(exc),
                   "config": cfg.echo(), "seed": cfg.seed}
        report = getattr(exc, "report", None)
        if report is not None:
            summary["singular_report"] = report
        _write_atomic(out / "summary.json", _json(summary))
        return EXIT_SOLVER
    out.mkdir(parents=True, exist_ok=True)
    _write_atomic(out / "trajectory.csv", format_csv(columns, rows))
    summary = {"kind": cfg.kind, "status": "ok", "config": cfg.echo(), "seed": cfg.seed,
               "rows": int(rows.shape[0]), "columns": columns, "stats": stats,
               "seconds": time.perf_counter() - start}
    _write_atomic(out / "summary.json", _json(summary))
    return EXIT_OK


def classify_config(cfg: ScenarioConfig):
    """Regularity report for the Lagrangian a scenario defines."""
    if cfg.kind == "ocp_rigid_body":
        scenario = _ocp_scenario(cfg)
        return classify_rigid_body(scenario), scenario.R0, scenario.probe()
    if cfg.kind == "discrete_bvp":
        raise ConfigError("discrete_bvp defines no continuous Lagrangian to classify")
    if cfg.kind == "dae_flow":
        L, p0 = _dae_start(cfg)
        return regularity_test(L, p0.jet.g, p0.jet.xi), p0.jet.g, np.array(p0.jet.xi)
    xi = (cfg["alpha0"] / cfg["inertia"] if cfg.kind == "lie_poisson" else cfg["omega0"])[None]
    g = cfg.values.get("R0", np.eye(3))
    return regularity_test(rigid_body_lagrangian(cfg["inertia"]), g, xi), g, xi


def cmd_classify(args) -> int:
    try:
        cfg = _apply_overrides(load_config(args.config), args.seed, args.step)
        report, g, xi = classify_config(cfg)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LievarError, FloatingPointError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(str(report))
    fmt = lambda a: " ".join("%.17g" % v for v in np.asarray(a).ravel())  # noqa: E731
    print(f"probe: g = [{fmt(g)}]; xi = [{fmt(xi)}]")
    if cfg.kind == "ocp_rigid_body" and not report.nondegenerate:
        for line in singular_report(_ocp_scenario(cfg))["equations"]:
            print(f"  {line}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--step", type=float, default=None, help="override the time step")
    parser = argparse.ArgumentParser(prog="lievar", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", parents=[common], help="run a scenario")
    run.add_argument("config")
    run.add_argument("--out", required=True, help="output directory")
    run.set_defaults(func=cmd_run)
    cls = sub.add_parser("classify", parents=[common], help="regularity of the scenario Lagrangian")
    cls.add_argument("config")
    cls.set_defaults(func=cmd_classify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.seed is not None and args.seed < 0:
        print("config error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
