"""Experiment runner: parse a config, dispatch one subcommand, emit reports.

Outputs per run: ``report.csv`` (comma-separated check rows), ``manifest.txt``
(config echo, versions, derived constants, tolerances), and optional
``plotdata_*.dat`` two/three-column numeric text.

Exit status: 0 all checks pass, 1 any fail, 2 inconclusive only,
3 configuration/argument errors, 4 runtime errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .config import ExperimentConfig, load_config
from .errors import ConfigError, HarnackLabError
from .growth import (ap2_estimate, build_profile, dump_profile, phi,
                     psi, q_bound)
from .harnack import ball_harnack, chain_harnack, coefficient_fields, r0_constant
from .nonlinearity import (check_C1_C2, check_C3_C4, check_condition_P,
                           check_g_zero, check_KO)
from .radial import solve_ivp, verify_lo_ul, verify_Ra
from .solver import (check_comparison, check_global_bound, coefficient_problem,
                     dirichlet_values, nonlinear_problem, residual,
                     solve_dirichlet)

FMT = "%.9g"


def f9(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return FMT % x


class _Runner:
    def __init__(self, cfg: ExperimentConfig, out_dir: str, seed: int, threads: int):
        self.cfg = cfg
        self.out = out_dir
        self.seed = seed
        self.threads = threads
        self.rows: list[str] = []
        self.notes: dict[str, str] = {}
        self.verdicts: list[str] = []
        os.makedirs(out_dir, exist_ok=True)

    def row(self, *cells):
        self.rows.append(",".join(str(c) for c in cells))

    def verdict(self, v: str):
        self.verdicts.append(v)

    def report_condition(self, rep):
        leafs = rep.parts if rep.parts else (rep,)
        for leaf in leafs:
            witness = ";".join(f"{f9(t)}:{f9(v)}" for t, v in leaf.evidence[:4])
            self.row("condition", leaf.condition_id, leaf.verdict, witness)
            self.verdict(leaf.verdict)

    def exit_code(self) -> int:
        if any(v == "fail" for v in self.verdicts):
            return 1
        if any(v == "inconclusive" for v in self.verdicts):
            return 2
        return 0

    def write(self, command: str, extra_manifest: dict):
        with open(os.path.join(self.out, "report.csv"), "w") as fh:
            fh.write("\n".join(self.rows) + "\n")
        lines = [f"command = {command}",
                 f"harnacklab = {__version__}",
                 f"numpy = {np.__version__}",
                 f"seed = {self.seed}",
                 f"threads = {self.threads}"]
        import numba
        import scipy
        lines.append(f"scipy = {scipy.__version__}")
        lines.append(f"numba = {numba.__version__}")
        for key in sorted(extra_manifest):
            lines.append(f"{key} = {extra_manifest[key]}")
        for section, key, value in self.cfg.items():
            lines.append(f"config.{section}.{key} = {value}")
        with open(os.path.join(self.out, "manifest.txt"), "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def plotdata(self, name: str, columns):
        path = os.path.join(self.out, f"plotdata_{name}.dat")
        arr = np.column_stack(columns)
        with open(path, "w") as fh:
            for row in arr:
                fh.write(" ".join(f9(v) for v in row) + "\n")
        return path


def _solver_kwargs(cfg: ExperimentConfig):
    return dict(tol=cfg.get_float("solver", "tol", 1e-9),
                max_iter=cfg.get_int("solver", "max_iter", 200000),
                damping=cfg.get_float("solver", "damping", 1.0),
                method=cfg.get_str("solver", "method", "gauss_seidel"))


def _grid_cfg(cfg: ExperimentConfig):
    return (cfg.get_int("grid", "rho_mult", 3),
            cfg.get_int("grid", "directions", 16))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check_conditions(run: _Runner):
    cfg = run.cfg
    pair = cfg.pair()
    theta = cfg.get_float("conditions", "theta", 2.0)
    lo = cfg.get_float("conditions", "window_lo", 1.0)
    hi = cfg.get_float("conditions", "window_hi", 1e4)
    samples = cfg.get_int("conditions", "samples", 64)
    margin = cfg.get_float("conditions", "margin", 0.05)

    grid = np.geomspace(max(lo, 1e-3), hi, samples)
    run.report_condition(check_condition_P(pair, grid))
    run.report_condition(check_C1_C2(pair, theta, (lo, hi), samples, margin))
    if pair.q == 1.0:
        run.report_condition(check_C3_C4(
            pair, (max(lo, 2.0), hi), samples,
            cap=cfg.get_float("conditions", "c4_cap", 10.0)))
    else:
        run.report_condition(check_g_zero(pair))
    run.report_condition(check_KO(pair))
    manifest = {"C2.margin": f9(margin), "theta": f9(theta),
                "KO.slope_margin": f9(0.05)}
    return manifest


def cmd_profile(run: _Runner):
    cfg = run.cfg
    pair = cfg.pair()
    prof = build_profile(
        pair,
        quadrature_tol=cfg.get_float("profile", "quadrature_tol", 1e-9),
        t_lo=cfg.get_float("profile", "t_lo", 1e-2),
        t_hi=cfg.get_float("profile", "t_hi", 1e4),
        nodes_per_decade=cfg.get_int("profile", "nodes_per_decade", 8),
        cap=cfg.get_float("profile", "cap", 1e8))
    run.report_condition(prof.ko_report)
    run.row("profile", "C_q", f9(prof.C_q))
    run.row("profile", "psi_zero_plus", f9(prof.psi_zero_plus))
    for t, v in zip(prof.psi_t, prof.psi_values):
        run.row("psi", f9(t), f9(v))
    paths = dump_profile(prof, run.out)
    if prof.psi_t.size:
        run.plotdata("psi", (prof.psi_t, prof.psi_values))
    manifest = {"C_q": f9(prof.C_q),
                "quadrature_tol": f9(prof.quadrature_tol),
                "psi_zero_plus": f9(prof.psi_zero_plus)}
    return manifest


def cmd_radial(run: _Runner):
    cfg = run.cfg
    pair = cfg.pair()
    prof = build_profile(pair,
                         quadrature_tol=cfg.get_float("profile", "quadrature_tol", 1e-9),
                         t_lo=cfg.get_float("profile", "t_lo", 1e-2),
                         t_hi=cfg.get_float("profile", "t_hi", 1e4))
    a_list = cfg.get_floats("radial", "a_list", required=True)
    width_cap = cfg.get_float("radial", "bracket_width", 1e-3)
    for a in a_list:
        sol = solve_ivp(pair, a,
                        phi_cap=cfg.get_float("radial", "phi_cap", 1e6),
                        r_max=cfg.get_float("radial", "r_max", 10.0),
                        rtol=cfg.get_float("radial", "rtol", 1e-11),
                        max_step=cfg.get_float("radial", "max_step", 0.05))
        sol.save(os.path.join(run.out, f"radial_a{f9(a)}.dat"))
        if sol.status == "reached_rmax":
            run.row("radial", f9(a), sol.status, "", "", "inconclusive")
            run.verdict("inconclusive")
            continue
        lo, hi = sol.R_bracket
        ra = verify_Ra(sol, prof)
        lu = verify_lo_ul(sol, prof)
        ok = ra["passed"] and lu["passed"] and (hi - lo) <= width_cap
        run.row("radial", f9(a), sol.status, f9(lo), f9(hi),
                "pass" if ok else "fail")
        run.verdict("pass" if ok else "fail")
    return {"bracket_width_cap": f9(width_cap)}


def _build_problem(cfg: ExperimentConfig, grid):
    rho_mult, K = _grid_cfg(cfg)
    pair = cfg.pair()
    data = cfg.boundary_data()
    return nonlinear_problem(grid, pair, data, rho_mult, K), pair


def cmd_solve(run: _Runner):
    cfg = run.cfg
    grid = cfg.grid()
    problem, _ = _build_problem(cfg, grid)
    res = solve_dirichlet(problem, **_solver_kwargs(cfg))
    sup, _ = residual(problem, res.u)
    res.u.save(os.path.join(run.out, "solution.dat"))
    run.row("solve", res.method, res.iterations, int(res.converged), f9(sup))
    run.verdict("pass" if res.converged else "fail")
    return {"rho": f9(problem.rho), "stencil.K": problem.K,
            "solver.tol": f9(_solver_kwargs(cfg)["tol"])}


def cmd_compare(run: _Runner):
    cfg = run.cfg
    grid = cfg.grid()
    problem, pair = _build_problem(cfg, grid)
    offsets = cfg.get_floats("compare", "offsets", required=True)
    tol = cfg.get_float("compare", "tol", 1e-8)
    kwargs = _solver_kwargs(cfg)
    rho_mult, K = _grid_cfg(cfg)
    base = solve_dirichlet(problem, **kwargs)
    data = cfg.boundary_data()
    for off in offsets:
        if off < 0:
            raise ConfigError("offsets must be non-negative")
        if callable(data):
            shifted = lambda X, Y, o=off: data(X, Y) + o
        else:
            shifted = data + off
        prob2 = nonlinear_problem(grid, pair, shifted, rho_mult, K)
        res2 = solve_dirichlet(prob2, **kwargs)
        rep = check_comparison(base.u, res2.u, tol + kwargs["tol"])
        run.row("compare", f9(off), f9(rep.worst_violation),
                "pass" if rep.passed else "fail")
        run.verdict("pass" if rep.passed else "fail")
    return {"compare.tol": f9(tol)}


def cmd_global_bound(run: _Runner):
    cfg = run.cfg
    grid = cfg.grid()
    rho_mult, K = _grid_cfg(cfg)
    pair = cfg.pair()
    prof = build_profile(pair,
                         quadrature_tol=cfg.get_float("profile", "quadrature_tol", 1e-9),
                         t_lo=cfg.get_float("profile", "t_lo", 1e-2),
                         t_hi=cfg.get_float("profile", "t_hi", 1e4))
    m_list = cfg.get_floats("globalbound", "m_list", required=True)
    slack_coeff = cfg.get_float("globalbound", "slack_coeff", 10.0)
    tol = cfg.get_float("globalbound", "tol", 1e-6)
    kwargs = _solver_kwargs(cfg)
    solutions = []
    for M in m_list:
        prob = nonlinear_problem(grid, pair, M, rho_mult, K)
        res = solve_dirichlet(prob, **kwargs)
        rep = check_global_bound(res.u, prof, prob.rho, tol, slack_coeff)
        solutions.append(res.u)
        run.row("globalbound", f9(M), f9(rep.worst_margin),
                "pass" if rep.passed else "fail")
        run.verdict("pass" if rep.passed else "fail")
    if len(solutions) >= 2:
        dist = grid.distance_field()
        sel = grid.interior & (dist >= 0.1)
        last, prev = solutions[-1].values[sel], solutions[-2].values[sel]
        change = float(np.max(np.abs(last - prev) / np.maximum(np.abs(prev), 1e-12)))
        run.row("globalbound", "profile_change", f9(change),
                "pass" if change < 0.01 else "fail")
        run.verdict("pass" if change < 0.01 else "fail")
    return {"globalbound.slack_coeff": f9(slack_coeff), "globalbound.tol": f9(tol)}


def cmd_harnack(run: _Runner):
    cfg = run.cfg
    grid = cfg.grid()
    rho_mult, K = _grid_cfg(cfg)
    pair = cfg.pair()
    pair.require_pde_range()
    spec = cfg.get_str("balls", "list", required=True)
    slack_coeff = cfg.get_float("balls", "slack_coeff", 2.0)
    residual_tol = cfg.get_float("balls", "residual_tol", 1e-4)
    # supersolutions of the coefficient equation with the structural bounds
    A0 = cfg.get_float("balls", "a0", 1.0)
    B0 = cfg.get_float("balls", "b0", 1.0)
    prob = coefficient_problem(grid, A0, B0, pair.q, cfg.boundary_data(),
                               rho_mult, K)
    res = solve_dirichlet(prob, **_solver_kwargs(cfg))
    r0 = r0_constant(pair.q, A0, B0)
    for tok in spec.split(";"):
        x, y, r = (float(v) for v in tok.split(","))
        rep = ball_harnack(res.u, (x, y), r, slack_coeff, prob, residual_tol)
        run.row("ball", rep.csv_row())
        run.verdict("pass" if rep.passed else "fail")
    return {"r0": f9(r0), "ball.slack_coeff": f9(slack_coeff), "rho": f9(prob.rho)}


def cmd_chain(run: _Runner):
    cfg = run.cfg
    grid = cfg.grid()
    rho_mult, K_dirs = _grid_cfg(cfg)
    pair = cfg.pair()
    prof = build_profile(pair,
                         quadrature_tol=cfg.get_float("profile", "quadrature_tol", 1e-9),
                         t_lo=cfg.get_float("profile", "t_lo", 1e-2),
                         t_hi=cfg.get_float("profile", "t_hi", 1e4))
    prob, _ = _build_problem(cfg, grid)
    res = solve_dirichlet(prob, **_solver_kwargs(cfg))

    cx = cfg.get_float("chain", "center_x", 0.5)
    cy = cfg.get_float("chain", "center_y", 0.5)
    o_spec = {"kind": cfg.get_str("chain", "region", "annulus"),
              "center": (cx, cy),
              "r_inner": cfg.get_float("chain", "r_inner", 0.15),
              "r_outer": cfg.get_float("chain", "r_outer", 0.3)}
    dist = grid.distance_field()
    o_mask_dist = float(np.min(dist[_region_nodes(grid, o_spec)]))

    eps = cfg.get_float("chain", "eps", 1e-6) * (1 + float(np.max(res.u.values)))
    r_grid = np.geomspace(cfg.get_float("chain", "ap2_r_lo", 1e-2),
                          max(o_mask_dist, 0.5), cfg.get_int("chain", "ap2_points", 24))
    ap2 = ap2_estimate(prof, r_grid)
    fields = coefficient_fields(res.u, pair, eps, o_mask_dist, prof, ap2.C_estimate)
    run.row("est00", f9(fields.A0), f9(fields.B0), f9(fields.worst_margin),
            "pass" if fields.est00_pass else "fail")
    run.verdict("pass" if fields.est00_pass else "fail")

    r0 = r0_constant(pair.q, max(fields.A0, 1e-300), max(fields.B0, 1e-300))
    ball_r = cfg.get_float("chain", "ball_r", 0.0)
    if ball_r <= 0:
        ball_r = 0.9 * min(r0, o_mask_dist) / 6.0
    K_const = cfg.get_float("chain", "k_const", 6.0)
    cprob = coefficient_problem(grid, fields.A, fields.B, pair.q,
                                _boundary_echo(grid, res.u), rho_mult, K_dirs)
    chain = chain_harnack(res.u, o_spec, ball_r, K_const, cprob,
                          residual_tol=cfg.get_float("balls", "residual_tol", 1e-3)
                          if run.cfg.parser.has_section("balls") else 1e-3,
                          n_pairs=cfg.get_int("chain", "pairs", 10), seed=run.seed)
    run.row("chain", chain.csv_summary())
    run.verdict("pass" if chain.passed else "fail")
    return {"chain.m": chain.ball_count,
            "chain.K": f9(K_const),
            "chain.log10_K_pow_bound": f9(chain.log10_global_bound),
            "chain.K_pow_bound": f9(chain.global_bound),
            "chain.ball_r": f9(ball_r),
            "r0": f9(r0),
            "ap2.C": f9(ap2.C_estimate),
            "eps": f9(eps),
            "rho": f9(prob.rho)}


def _region_nodes(grid, o_spec):
    from .harnack import _o_mask
    return _o_mask(grid, o_spec)


def _boundary_echo(grid, u):
    return lambda X, Y: u.values


COMMANDS = {
    "check-conditions": cmd_check_conditions,
    "profile": cmd_profile,
    "radial": cmd_radial,
    "solve": cmd_solve,
    "compare": cmd_compare,
    "global-bound": cmd_global_bound,
    "harnack": cmd_harnack,
    "chain": cmd_chain,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def main(argv=None) -> int:
    parser = _Parser(prog="harnacklab", description=__doc__)
    parser.add_argument("subcommand", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default="out")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    try:
        cfg = load_config(args.config, args.subcommand)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    run = _Runner(cfg, args.out, args.seed, args.threads)
    try:
        manifest = COMMANDS[args.subcommand](run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except HarnackLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    run.write(args.subcommand, manifest)
    code = run.exit_code()
    print(f"{args.subcommand}: {len(run.rows)} rows, exit {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
