"""east: experiment orchestration for the East-like model laboratory.

Usage: east <subcommand> --config file.json [--seed N] [--out dir]

Subcommands: gap, hit, persist, sim, snapshot, bottleneck, reach, block,
knight, tree, renorm, flow and accept (the acceptance suite).  Every run
leaves CSV artifacts (floats at 17 significant digits) plus a manifest with
file hashes in the output directory; outputs are byte-stable for a fixed
seed.  Exit codes: 0 ok, 2 config error, 3 infeasible size, 4 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .lattice import Box, BoundaryCondition, ModelParams
from . import reporting
from .reporting import slope_fit, slope_row, write_csv, write_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4

MC_HEADER = ["experiment", "d", "L", "bc", "q", "seed", "replicas", "observable", "value", "stderr"]
GAP_HEADER = ["d", "L", "bc", "q", "theta_q", "gap", "t_rel", "method", "residual"]


def _L(box: Box) -> int:
    return max(box.shape)


def _site_opt(cfg: ExperimentConfig, key: str, default):
    v = cfg.options.get(key, None)
    if v is None:
        return default
    return tuple(int(c) for c in v)


def run_gap(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .exact import build_generator, spectral_gap

    sigma = cfg.boundary()
    rows, pts = [], []
    for q in cfg.q_values:
        mp = ModelParams(q)
        res = spectral_gap(build_generator(cfg.box, sigma, mp))
        rows.append(
            (cfg.box.d, _L(cfg.box), cfg.bc_label, q, mp.theta_q, res.gap,
             res.relaxation_time, res.method, res.residual)
        )
        pts.append((mp.theta_q, np.log2(res.relaxation_time)))
    files = [write_csv(out / "gap.csv", GAP_HEADER, rows)]
    if len(pts) >= 4:
        fit = slope_fit(pts)
        files.append(
            write_csv(out / "slope.csv", reporting.SLOPE_HEADER, [slope_row(cfg.experiment, fit)])
        )
    return files


def run_hit(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .exact import build_generator, hitting_set_vacancy, mean_hitting_time
    from .mc import estimate_hitting

    sigma = cfg.boundary()
    x = _site_opt(cfg, "x", cfg.box.upper)
    files = []
    if cfg.engine in ("exact", "both"):
        rows, pts = [], []
        for q in cfg.q_values:
            mp = ModelParams(q)
            R = build_generator(cfg.box, sigma, mp)
            h = mean_hitting_time(R, R.n_states - 1, hitting_set_vacancy(R, x))
            rows.append(
                (cfg.box.d, _L(cfg.box), cfg.bc_label, q, mp.theta_q,
                 " ".join(map(str, x)), h.value)
            )
            pts.append((mp.theta_q, np.log2(h.value)))
        files.append(
            write_csv(out / "hit_exact.csv",
                      ["d", "L", "bc", "q", "theta_q", "x", "mean_hitting_time"], rows)
        )
        if len(pts) >= 4:
            fit = slope_fit(pts)
            files.append(
                write_csv(out / "slope.csv", reporting.SLOPE_HEADER,
                          [slope_row(cfg.experiment, fit)])
            )
    if cfg.engine in ("mc", "both"):
        rows = []
        for q in cfg.q_values:
            est = estimate_hitting(
                cfg.box, sigma, ModelParams(q), x, cfg.replicas, cfg.seed
            )
            rows.append(
                (cfg.experiment, cfg.box.d, _L(cfg.box), cfg.bc_label, q, cfg.seed,
                 cfg.replicas, "hitting_time", est.mean, est.stderr)
            )
        files.append(write_csv(out / "hit_mc.csv", MC_HEADER, rows))
    return files


def run_persist(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .exact import autocorrelation, persistence_exact
    from .mc import estimate_persistence

    sigma = cfg.boundary()
    t_grid = [float(t) for t in cfg.options.get("t_grid", [0.5, 1.0, 2.0, 5.0])]
    tracked = _site_opt(cfg, "x", cfg.box.upper)
    files = []
    if cfg.engine in ("exact", "both"):
        rows = []
        for q in cfg.q_values:
            mp = ModelParams(q)
            F = persistence_exact(cfg.box, sigma, mp, t_grid, tracked)
            A = autocorrelation(cfg.box, sigma, mp, t_grid, tracked)
            for t, f, a in zip(t_grid, F, A):
                rows.append((cfg.box.d, _L(cfg.box), cfg.bc_label, q, t, f, a))
        files.append(
            write_csv(out / "persist_exact.csv",
                      ["d", "L", "bc", "q", "t", "persistence", "autocorrelation"], rows)
        )
    if cfg.engine in ("mc", "both"):
        rows = []
        for q in cfg.q_values:
            est = estimate_persistence(
                cfg.box, sigma, ModelParams(q), t_grid, cfg.replicas, cfg.seed, tracked
            )
            for t, f, se in zip(est.t_grid, est.survival, est.stderr):
                rows.append(
                    (cfg.experiment, cfg.box.d, _L(cfg.box), cfg.bc_label, q, cfg.seed,
                     cfg.replicas, f"persistence@{reporting.fmt(float(t))}", f, se)
                )
        files.append(write_csv(out / "persist_mc.csv", MC_HEADER, rows))
    return files


def run_sim(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .mc import simulate

    sigma = cfg.boundary()
    t_end = float(cfg.options.get("t_end", 10.0))
    rows = []
    for q in cfg.q_values:
        tr = simulate(cfg.box, sigma, ModelParams(q), None, t_end, cfg.seed)
        rows.append(
            (cfg.experiment, cfg.box.d, _L(cfg.box), cfg.bc_label, q, cfg.seed, t_end,
             tr.rings, tr.legal_rings, int(np.sum(tr.state == 0)))
        )
    return [
        write_csv(out / "sim.csv",
                  ["experiment", "d", "L", "bc", "q", "seed", "t_end", "rings",
                   "legal_rings", "vacancies"], rows)
    ]


def run_snapshot(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .mc import simulate, snapshot, snapshot_extents, write_pgm

    sigma = cfg.boundary()
    q = cfg.single_q()
    mp = ModelParams(q)
    L = _L(cfg.box)
    span_target = cfg.options.get("span_target")
    t_end = float(cfg.options.get("t_end", 3.5 * L))
    tr = simulate(cfg.box, sigma, mp, None, t_end, cfg.seed)
    if span_target is not None:
        while cfg.box.d == 2 and snapshot_extents(tr).span < int(span_target):
            t_end *= 1.5
            tr = simulate(cfg.box, sigma, mp, None, t_end, cfg.seed)
    snap = snapshot(tr)
    name = f"snap_{reporting.fmt(q)}_{L}_{reporting.fmt(t_end)}.pgm"
    write_pgm(snap, out / name)
    files = [out / name]
    if cfg.box.d == 2:
        ext = snapshot_extents(tr)
        files.append(
            write_csv(out / "extents.csv",
                      ["experiment", "d", "L", "bc", "q", "seed", "t_end",
                       "diagonal_extent", "axis_extent", "span"],
                      [(cfg.experiment, cfg.box.d, L, cfg.bc_label, q, cfg.seed, t_end,
                        ext.diagonal, ext.axis, ext.span)])
        )
    return files


def run_bottleneck(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .bottleneck import (
        bottleneck_boundary,
        core_states,
        special_vacancies,
    )
    from .exact import (
        bottleneck_lower_bound,
        build_generator,
        dirichlet_form_indicator,
        spectral_gap,
    )

    box = cfg.box
    sigma = BoundaryCondition.maximal(box)
    core = core_states(box)
    boundary = bottleneck_boundary(box)
    member = np.zeros(1 << box.site_count, dtype=bool)
    member[core] = True
    rows, traces = [], []
    for q in cfg.q_values:
        mp = ModelParams(q)
        R = build_generator(box, sigma, mp)
        pi_core = float(R.pi[member].sum())
        distinct = sorted({s for s, _ in boundary})
        pi_bd = float(R.pi[distinct].sum())
        dform = dirichlet_form_indicator(R, member)
        lower = bottleneck_lower_bound(R, member)
        trel = spectral_gap(R).relaxation_time
        rows.append(
            (cfg.box.d, _L(box), q, len(core), len(distinct), pi_core, pi_bd, dform,
             lower, trel)
        )
    for bits, x in boundary:
        tr = special_vacancies(box, bits, x)
        traces.append(
            {
                "eta": bits,
                "witness": list(x),
                "S": tr.S,
                "z": [list(z) for z in tr.z_sites],
                "eps": list(tr.eps),
                "xi": [list(v) for v in tr.xi],
                "gamma": list(tr.gamma),
                "ell": list(tr.ell),
                "u": [list(u) for u in tr.u_seq],
                "d": list(tr.d_seq),
            }
        )
    files = [
        write_csv(out / "bottleneck.csv",
                  ["d", "L", "q", "core_size", "boundary_size", "pi_core",
                   "pi_boundary", "dirichlet_indicator", "t_rel_lower_bound",
                   "t_rel_exact"], rows)
    ]
    tr_path = out / "traces.json"
    tr_path.write_text(json.dumps(traces, indent=1, sort_keys=True) + "\n")
    files.append(tr_path)
    return files


def run_reach(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .renorm import reachable_set

    ms = cfg.options.get("m", 2)
    ms = ms if isinstance(ms, list) else [ms]
    rows = []
    for m in ms:
        rs = reachable_set(cfg.box, int(m))
        rows.append((cfg.box.d, _L(cfg.box), m, len(rs.states), rs.X, rs.Y))
    return [
        write_csv(out / "reach.csv",
                  ["d", "L", "m", "reachable_states", "X", "Y"], rows)
    ]


def run_block(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .renorm import gap_equality_check

    ell = int(cfg.options.get("ell", 2))
    rows = []
    for q in cfg.q_values:
        rep = gap_equality_check(cfg.box, ell, ModelParams(q))
        rows.append(
            (cfg.box.d, cfg.box.site_count, ell, q, rep.spec.q_star,
             rep.block_gap.gap, rep.east_gap.gap, rep.difference)
        )
    return [
        write_csv(out / "block.csv",
                  ["d", "blocks", "ell", "q", "q_star", "gap_block", "gap_east",
                   "difference"], rows)
    ]


def run_knight(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .renorm import knight_classes

    kc = knight_classes(cfg.box)
    files = [
        write_csv(out / "knight.csv",
                  ["d", "window", "classes", "window_components", "edges"],
                  [(cfg.box.d, "x".join(map(str, cfg.box.shape)), kc.class_count,
                    kc.window_components, len(kc.edges))])
    ]
    wit = {
        ",".join(map(str, site)): {"class": cid, "coords": list(coords)}
        for site, (cid, coords) in sorted(kc.witness.items())
    }
    wpath = out / "knight_witness.json"
    wpath.write_text(json.dumps(wit, indent=1, sort_keys=True) + "\n")
    files.append(wpath)
    return files


def run_tree(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .renorm import tree_gap_comparison

    rows = []
    for q in cfg.q_values:
        rep = tree_gap_comparison(cfg.box, ModelParams(q))
        rows.append(
            (cfg.box.d, _L(cfg.box), q, rep.longest_branch_vertices,
             rep.tree_gap.gap, rep.east_min_gap.gap, int(rep.tree_no_faster))
        )
    return [
        write_csv(out / "tree.csv",
                  ["d", "L", "q", "longest_branch_vertices", "gap_tree",
                   "gap_east_min", "tree_no_faster"], rows)
    ]


def run_renorm(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .renorm import renorm_iterate

    map_name = cfg.options.get("map", "theorem-coefficient")
    lam0 = float(cfg.options.get("lam0", 1.0))
    iters = int(cfg.options.get("iterations", 50))
    tr = renorm_iterate(map_name, lam0, cfg.box.d, iters)
    rows = [
        (tr.map_name, tr.d, k, v, abs(v - tr.fixed_point),
         k * abs(v - tr.fixed_point))
        for k, v in enumerate(tr.values)
    ]
    return [
        write_csv(out / "renorm.csv",
                  ["map", "d", "k", "lambda", "abs_error", "k_abs_error"], rows)
    ]


def run_flow(cfg: ExperimentConfig, out: Path) -> list[Path]:
    from .renorm import flow_recursion

    x = _site_opt(cfg, "x", cfg.box.upper)
    vops = cfg.options.get("V")
    if vops is None:
        raise ConfigError("flow needs options.V = {lower: [...], upper: [...]}")
    V = Box(tuple(vops["lower"]), tuple(vops["upper"]))
    rows = []
    for q in cfg.q_values:
        rep = flow_recursion(x, V, ModelParams(q))
        for p in rep.pieces:
            rows.append(
                (q, " ".join(map(str, x)), " ".join(map(str, p.y)),
                 rep.resistance_x, p.resistance_y, p.resistance_shifted,
                 p.energy_mimic, p.energy_reversal, p.energy_carry,
                 rep.total_energy, rep.recursion_rhs, int(rep.recursion_holds),
                 rep.max_divergence_off, rep.strength,
                 int(rep.energy_precondition), int(p.energy_bounds_hold(q)))
            )
    return [
        write_csv(out / "flow.csv",
                  ["q", "x", "y", "R_x", "R_y", "R_shifted", "E_mimic",
                   "E_reversal", "E_carry", "E_total", "recursion_rhs",
                   "recursion_holds", "max_divergence_off", "strength",
                   "energy_precondition", "energy_bounds_hold"], rows)
    ]


RUNNERS = {
    "gap": run_gap,
    "hit": run_hit,
    "persist": run_persist,
    "sim": run_sim,
    "snapshot": run_snapshot,
    "bottleneck": run_bottleneck,
    "reach": run_reach,
    "block": run_block,
    "knight": run_knight,
    "tree": run_tree,
    "renorm": run_renorm,
    "flow": run_flow,
}


def run_experiment(command: str, cfg: ExperimentConfig) -> Path:
    """Run one subcommand, write artifacts and the manifest; returns out dir."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files = RUNNERS[command](cfg, out)
    write_manifest(out, cfg.raw, files)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="east", description="East-like model laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(RUNNERS) + ["accept"]:
        p = sub.add_parser(name)
        if name == "accept":
            p.add_argument("--criteria", type=str, default=None,
                           help="comma-separated criterion numbers (default: all)")
            p.add_argument("--out", type=str, default=None)
        else:
            p.add_argument("--config", required=True)
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--out", type=str, default=None)
    args = parser.parse_args(argv)

    if args.command == "accept":
        from . import acceptance

        numbers = (
            [int(v) for v in args.criteria.split(",")] if args.criteria else None
        )
        results = acceptance.run_all(numbers=numbers)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            lines = [acceptance.format_result(r) for r in results]
            (Path(args.out) / "acceptance.txt").write_text("\n".join(lines) + "\n")
        return EXIT_OK if all(r.passed for r in results) else 1

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        if args.out is not None:
            cfg = dataclasses.replace(cfg, out=args.out)
        run_experiment(args.command, cfg)
        return EXIT_OK
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except RuntimeError as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
