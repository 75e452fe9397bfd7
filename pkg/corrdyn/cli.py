"""
Command-line surface
Subcommands tie the services into reproducible experiments; results go to stdout or
files, diagnostics to stderr
"""
import argparse
import json
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from corrdyn.config import RunConfig, parse_word, settings
from corrdyn.errors import CorrDynError, NumericError, ParameterError
from corrdyn.logging_config import setup_logging
from corrdyn.parallel import resolve_workers
from corrdyn.schemas import BundlePoint, CorrespondenceParams, MotionConfig, TorusPoint
from corrdyn.services.bundle import bundle_point_from_orbit, choose_bundle_params
from corrdyn.services.correspondence import annulus_bounds
from corrdyn.services.cycles import (
    attracting_cycles_search,
    continue_cycle,
    cycle_from_symbols,
    default_grid,
    periodic_word,
    unit_circle_periodic_points,
)
from corrdyn.services.export import (
    cycle_to_dict,
    find_cached_cycle,
    write_c2,
    write_curve,
    write_cycles,
    write_points,
    write_torus,
)
from corrdyn.services.motion import (
    circle_samples,
    conjugacy_defect,
    curve_dilatation,
    curve_sample,
    estimate_motion_config,
    hausdorff_distance,
    holomorphy_residual,
    lipschitz_estimate,
    roundtrip_error,
    shadow_orbit,
)
from corrdyn.services.render import (
    default_viewport,
    dual_ifs_sample,
    inverse_ifs_sample,
    membership_grid,
    rasterize_points,
    write_image,
)
from corrdyn.services.solenoid import random_addresses, symbolic_point, torus_iterate_arrays
from corrdyn.verification import print_report, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFECT_TOL = 1e-8
HOLOMORPHY_TOL = 1e-4
HOLOMORPHY_HALF_TOL = 2.5e-5


def _params(cfg: RunConfig, c: Optional[complex] = None) -> CorrespondenceParams:
    return CorrespondenceParams(p=cfg.p, q=cfg.q, c=cfg.c if c is None else c)


def _emit_points(points: np.ndarray, cfg: RunConfig, default_out: str, bounds) -> str:
    """CSV by default; a .pgm target rasterizes the cloud over the default view"""
    out = cfg.out or default_out
    if out.endswith(".pgm"):
        vp = default_viewport(bounds, cfg.size, cfg.view_width, cfg.center)
        write_image(rasterize_points(points, vp), out)
    else:
        write_points(out, points)
    return out


def _motion_config(params: CorrespondenceParams, cfg: RunConfig) -> MotionConfig:
    if params.c == 0:
        samples = circle_samples(64)
    else:
        samples = list(inverse_ifs_sample(params, 256, 100, cfg.seed, annulus_bounds(params)))
    return estimate_motion_config(params, samples, eps=cfg.eps)


# --- commands ---

def cmd_bounds(cfg: RunConfig, workers: int) -> int:
    b = annulus_bounds(_params(cfg))
    print(
        f"r_c={b.r_c:.10g} R_c={b.R_c:.10g} s_c={b.s_c:.10g} "
        f"escape_radius={b.escape_radius:.10g} valid={str(b.valid).lower()}"
    )
    return EXIT_OK


def cmd_render_julia(cfg: RunConfig, workers: int) -> int:
    params = _params(cfg)
    bounds = annulus_bounds(params)
    vp = default_viewport(bounds, cfg.size, cfg.view_width, cfg.center)
    grid = membership_grid(params, vp, cfg.depth, bounds, cfg.tol, workers=workers)
    out = cfg.out or "julia.pgm"
    write_image(grid, out)
    print(
        f"wrote {out} ({vp.nx}x{vp.ny}, {int(grid.surviving.sum())} surviving pixels, "
        f"heuristic={str(grid.metadata['heuristic']).lower()})"
    )
    return EXIT_OK


def cmd_sample_julia(cfg: RunConfig, workers: int) -> int:
    params = _params(cfg)
    bounds = annulus_bounds(params)
    points = inverse_ifs_sample(params, cfg.n_points, cfg.burn_in, cfg.seed, bounds)
    out = _emit_points(points, cfg, "julia.csv", bounds)
    print(f"wrote {out} ({len(points)} points)")
    return EXIT_OK


def cmd_dual_julia(cfg: RunConfig, workers: int) -> int:
    params = _params(cfg)
    grid = default_grid(cfg.grid)
    for cycle in attracting_cycles_search(params, cfg.max_period, grid, workers=workers):
        print(json.dumps(cycle_to_dict(cycle, params)))
    points = dual_ifs_sample(params, cfg.n_points, cfg.seed, max_period=cfg.max_period, grid=grid, workers=workers)
    out = _emit_points(points, cfg, "dual.csv", annulus_bounds(params))
    print(f"wrote {out} ({len(points)} points)")
    return EXIT_OK


def cmd_cycles(cfg: RunConfig, workers: int) -> int:
    params = _params(cfg)
    if cfg.period is not None:
        cycles = []
        for z in unit_circle_periodic_points(params, cfg.period):
            word = periodic_word(params, z, cfg.period)
            if word is None:
                # with a common factor some roots are not reached by any branch word
                logger.info("cycles: no branch word of length %d closes at %s, skipped", cfg.period, z)
                continue
            cycles.append(cycle_from_symbols(params, word, z))
        owner = params
    elif cfg.symbols:
        word = parse_word(cfg.symbols)
        cycle = find_cached_cycle(cfg.cache, params, word) if cfg.cache else None
        if cycle is None:
            cycle = cycle_from_symbols(params, word, cfg.cycle_seed)
        else:
            logger.info("cycles: reusing cached cycle %s", word)
        owner = params
        if cfg.target_c is not None:
            owner = _params(cfg, cfg.target_c)
            cycle = continue_cycle(params, owner, cycle, cfg.max_step)
        cycles = [cycle]
    else:
        raise ParameterError("cycles needs --period or --symbols")

    if cfg.cache:
        write_cycles(cfg.cache, cycles, owner, append=True)
    if cfg.out:
        write_cycles(cfg.out, cycles, owner)
    for cycle in cycles:
        print(json.dumps(cycle_to_dict(cycle, owner)))
    return EXIT_OK


def cmd_solenoid(cfg: RunConfig, workers: int) -> int:
    params = _params(cfg)
    bp = choose_bundle_params(params, annulus_bounds(params))
    out = cfg.out or "solenoid.csv"
    if cfg.mode == "torus":
        seeds = [TorusPoint(t=2 * math.pi * j / cfg.samples, disk=0j) for j in range(cfg.samples)]
        t, disk = torus_iterate_arrays(bp, params, seeds, cfg.iterations, workers=workers)
        write_torus(out, t, disk)
        count = len(t)
    else:
        rows = []
        for t, tau in random_addresses(params, cfg.samples, cfg.truncation, cfg.seed):
            x = symbolic_point(bp, params, t, tau, cfg.truncation)
            rows.append(x.c2)
        write_c2(out, rows)
        count = len(rows)
    print(f"wrote {out} ({count} points, r={bp.r:.6g}, delta={bp.delta:.6g})")
    return EXIT_OK


def cmd_curve(cfg: RunConfig, workers: int) -> int:
    params = _params(cfg)
    base = params.with_c(0)
    motion = _motion_config(base, cfg)
    bp = choose_bundle_params(base, annulus_bounds(base))
    curve = curve_sample(
        params, bp, parse_word(cfg.tau), (cfg.t0, cfg.t1), cfg.points, motion, cfg.truncation, cfg.buffer,
        workers=workers,
    )
    out = cfg.out or "curve.csv"
    write_curve(out, curve)
    print(
        f"wrote {out} ({len(curve.samples)} samples, K={curve_dilatation(curve):.6g}, "
        f"certified={str(curve.metadata['certified']).lower()})"
    )
    return EXIT_OK


def _base_points(cfg: RunConfig, base: CorrespondenceParams, count: int) -> List[BundlePoint]:
    """Random symbolic points at c = 0, shadowed to the base parameter when it differs"""
    origin = base.with_c(0)
    bp = choose_bundle_params(origin, annulus_bounds(origin))
    length = cfg.truncation + cfg.buffer + 1
    points = [symbolic_point(bp, origin, t, tau, length) for t, tau in random_addresses(origin, count, length, cfg.seed)]
    if base.c == 0:
        return points
    motion = _motion_config(origin, cfg)
    return [bundle_point_from_orbit(bp, shadow_orbit(origin, base, x.orbit, motion)) for x in points]


def cmd_motion_check(cfg: RunConfig, workers: int) -> int:
    target = _params(cfg)
    base = target.with_c(cfg.base_c)
    motion = _motion_config(base, cfg)
    origin = base.with_c(0)
    bp = choose_bundle_params(origin, annulus_bounds(origin))
    points = _base_points(cfg, base, cfg.samples)
    n, buffer = cfg.truncation, cfg.buffer

    defect = max(conjugacy_defect(base, target, bp, x, motion, n, buffer) for x in points)
    trip = max(roundtrip_error(base, target, x, motion, n) for x in points)
    reach = max(abs(target.c - base.c), 1e-3)
    axis = np.linspace(-reach, reach, 5)
    grid = [base.c + complex(a, b) for a in axis for b in axis]
    lipschitz = max(lipschitz_estimate(base, grid, bp, x, motion, n, buffer) for x in points[:4])
    residual = max(holomorphy_residual(base, bp, x, [target.c], motion, n, 1e-3, buffer) for x in points[:4])
    residual_half = max(holomorphy_residual(base, bp, x, [target.c], motion, n, 5e-4, buffer) for x in points[:4])
    curve = curve_sample(target, bp, parse_word(cfg.tau), (cfg.t0, cfg.t1), cfg.points, motion, n, buffer, workers=workers)
    dilatation = curve_dilatation(curve)
    spread = hausdorff_distance(base, target, bp, points, motion, n, buffer)
    spread_bound = motion.c0 * abs(target.c - base.c) + 1e-12

    print(f"eps={motion.eps:.6g} lambda={motion.lam:.6g} C0={motion.c0:.6g} U={motion.u_radius:.6g}")
    print(f"conjugacy_defect={defect:.3g}")
    print(f"roundtrip_error={trip:.3g}")
    print(f"lipschitz={lipschitz:.6g}")
    print(f"holomorphy_residual={residual:.3g} (h=1e-3) {residual_half:.3g} (h=5e-4)")
    print(f"dilatation={dilatation:.6g}")
    print(f"hausdorff={spread:.3g} (bound {spread_bound:.3g})")
    ok = (
        defect <= DEFECT_TOL
        and lipschitz <= motion.c0
        and residual <= HOLOMORPHY_TOL
        and residual_half <= HOLOMORPHY_HALF_TOL
        and spread <= spread_bound
    )
    return EXIT_OK if ok else EXIT_INVARIANT


def cmd_verify(cfg: RunConfig, workers: int) -> int:
    params = _params(cfg)
    return print_report(run_suite(params, seed=cfg.seed, workers=workers), params)


COMMANDS: Dict[str, Callable[[RunConfig, int], int]] = {
    "render-julia": cmd_render_julia,
    "sample-julia": cmd_sample_julia,
    "dual-julia": cmd_dual_julia,
    "bounds": cmd_bounds,
    "cycles": cmd_cycles,
    "solenoid": cmd_solenoid,
    "curve": cmd_curve,
    "motion-check": cmd_motion_check,
    "verify": cmd_verify,
}


# --- parser ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key=value file; flags override it")
    common.add_argument("--p", type=int, default=None, help="exponent of z (default 6)")
    common.add_argument("--q", type=int, default=None, help="exponent of (w - c) (default 2)")
    common.add_argument("--c", default=None, help="parameter as a+bi, e.g. 0+0.2i")
    common.add_argument("--seed", type=int, default=None, help="random stream seed (default 0)")
    common.add_argument("--threads", type=int, default=None, help="worker cap (default CORRDYN_THREADS or all cores)")
    common.add_argument("--out", default=None, help="output path")

    view = argparse.ArgumentParser(add_help=False)
    view.add_argument("--size", type=int, default=None, help="pixels per side (default 512)")
    view.add_argument("--view-width", dest="view_width", type=float, default=None, help="viewport side (default 2.2 s_c)")
    view.add_argument("--center", default=None, help="viewport center as a+bi")

    motion = argparse.ArgumentParser(add_help=False)
    motion.add_argument("--tau", default=None, help="comma separated address, extended by zeros")
    motion.add_argument("--t0", type=float, default=None)
    motion.add_argument("--t1", type=float, default=None)
    motion.add_argument("--points", type=int, default=None, help="curve samples M (default 400)")
    motion.add_argument("--truncation", type=int, default=None, help="series truncation N")
    motion.add_argument("--buffer", type=int, default=None, help="shadow buffer")
    motion.add_argument("--eps", type=float, default=None, help="shadowing radius override")

    parser = argparse.ArgumentParser(
        prog="corrdyn",
        description="Dynamics of the holomorphic correspondences (w - c)^q = z^p",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_render = sub.add_parser("render-julia", parents=[common, view], help="survival raster of J_c as PGM")
    p_render.add_argument("--depth", type=int, default=None, help="survival depth (default 24)")
    p_render.add_argument("--tol", type=float, default=None, help="relative annulus fattening (default 0.01)")

    for name, helptext in (("sample-julia", "backward chaos game on J_c"), ("dual-julia", "forward chaos game on J*_c")):
        p_sample = sub.add_parser(name, parents=[common, view], help=helptext)
        p_sample.add_argument("--n-points", dest="n_points", type=int, default=None)
        p_sample.add_argument("--burn-in", dest="burn_in", type=int, default=None)
        if name == "dual-julia":
            p_sample.add_argument("--max-period", dest="max_period", type=int, default=None)
            p_sample.add_argument("--grid", type=int, default=None, help="seeds per side of the search grid")

    sub.add_parser("bounds", parents=[common], help="trapping annulus radii")

    p_cycles = sub.add_parser("cycles", parents=[common], help="periodic points, Newton cycles and continuation")
    p_cycles.add_argument("--period", type=int, default=None, help="c = 0 census period")
    p_cycles.add_argument("--symbols", default=None, help="comma separated branch word")
    p_cycles.add_argument("--cycle-seed", dest="cycle_seed", default=None, help="Newton seed as a+bi")
    p_cycles.add_argument("--target-c", dest="target_c", default=None, help="continue the cycle to this c")
    p_cycles.add_argument("--max-step", dest="max_step", type=float, default=None)
    p_cycles.add_argument("--cache", default=None, help="JSON-lines cycle cache")

    p_sol = sub.add_parser("solenoid", parents=[common], help="solid-torus or symbolic solenoid points as CSV")
    p_sol.add_argument("--mode", choices=("torus", "symbolic"), default=None)
    p_sol.add_argument("--iterations", type=int, default=None)
    p_sol.add_argument("--samples", type=int, default=None)
    p_sol.add_argument("--truncation", type=int, default=None)

    sub.add_parser("curve", parents=[common, motion], help="moved solenoid leaf as CSV")

    p_check = sub.add_parser("motion-check", parents=[common, motion], help="holomorphic motion diagnostics")
    p_check.add_argument("--base-c", dest="base_c", default=None, help="base parameter as a+bi (default 0)")
    p_check.add_argument("--samples", type=int, default=None, help="random bundle points (default 64)")

    sub.add_parser("verify", parents=[common], help="run the invariant suite")
    return parser


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split())


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one subcommand and map failures to exit codes"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    setup_logging(settings.log_level, settings.log_file)
    flags: Dict[str, Any] = {k: v for k, v in vars(args).items() if k in RunConfig.model_fields}
    try:
        settings.validate_runtime()
        cfg = RunConfig.from_sources(flags, args.config)
        workers = resolve_workers(cfg.threads)
        return COMMANDS[args.command](cfg, workers)
    except (NumericError, OverflowError) as exc:
        print(f"corrdyn: numeric failure: {_one_line(exc)}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, CorrDynError, ValueError) as exc:
        print(f"corrdyn: error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
