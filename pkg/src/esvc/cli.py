"""Command line: ``esvc {design,sweep,walk,profile} --config FILE [--out DIR]``.

Exit codes: 0 ok, 1 configuration error, 2 infeasible design, 3 fall.

Output files (all CSV files start with ``#`` comment lines carrying the
config hash; floats are written with ``repr`` so reruns are bit-identical):

design   design_solution.ini   solution, constraint residuals, foot constants
         profile.csv           y, z, segment   (foot frame, meters)
sweep    sweep.csv             arc_id, theta, lambda, exact, chord, approx,
                               comp, err_chord_pct, err_approx_pct, err_comp_pct
         sweep_summary.csv     lambda_star / max_pct / mean_pct per arc and estimator
walk     walk_samples.csv      t, step, theta, com_y, com_rel, contact_y,
                               rollover, swing_y, swing_z
         walk_steps.csv        one row per support phase
         walk_summary.ini      steps, fall flag, convergence index, max slip
profile  profile.csv           as for design
         transforms.csv        theta, T00 .. T23 (foot -> contact, row-major),
                               rollover_length
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, accuracy, config, contact, design, hlip
from .ellipse import calibrate_compensation, make_arc

log = logging.getLogger("esvc")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_FALL = 0, 1, 2, 3


def _r(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _header(cfg: config.RunConfig, command: str, seed) -> list[str]:
    return [f"esvc {__version__} {command}", f"config {cfg.path.name} sha256:{cfg.digest} seed {'-' if seed is None else seed}"]


def _write_csv(path: Path, header, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_r(x) for x in row])


def _write_ini(path: Path, header, sections: dict) -> None:
    with open(path, "w") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for name, items in sections.items():
            fh.write(f"\n[{name}]\n")
            for k, v in items.items():
                fh.write(f"{k} = {_r(v)}\n")


# -- commands ------------------------------------------------------------------


def _build_design(cfg: config.RunConfig):
    d = cfg["design"]
    spec = config.design_spec(d)
    sol = design.solve_fore_ellipse(spec, starts=d["starts"])
    foot = design.assemble_foot(spec, sol, d["l_foot"])
    return spec, sol, foot


def _profile_rows(foot, n):
    pts, tags = design.export_profile(foot, n)
    return [(y, z, tag) for (y, z), tag in zip(pts, tags)]


def cmd_design(cfg, out: Path, seed) -> int:
    hdr = _header(cfg, "design", seed)
    spec, sol, foot = _build_design(cfg)
    resid = design.constraint_residuals(spec, sol)
    _write_ini(out / "design_solution.ini", hdr, {
        "solution": {k: getattr(sol, k) for k in sol.__dataclass_fields__},
        "residuals": resid,
        "foot": {
            "mid_r_a": foot.mid.r_a, "mid_r_b": foot.mid.r_b, "fore_r_a": foot.fore.r_a,
            "fore_r_b": foot.fore.r_b, "h_foot": foot.h_foot, "w_foot": foot.w_foot,
            "l_foot": foot.l_foot, "theta_m_star": foot.theta_m_star, "phi_m_star": foot.phi_m_star,
            "d0": foot.d0, "alpha6": foot.alpha6, "alpha8": foot.alpha8, "b_s": foot.b_s,
            "alpha10": foot.alpha10, "roll_limit": foot.roll_limit, "l_m_star": foot.l_m_star,
            "l_f_quarter": foot.l_f_quarter,
        },
    })
    _write_csv(out / "profile.csv", hdr, ("y", "z", "segment"), _profile_rows(foot, cfg["design"]["profile_n"]))
    log.info("design feasible: r_fa=%.6g r_fb=%.6g w_foot=%.6g objective=%.6g",
             sol.r_fa, sol.r_fb, sol.w_foot, sol.objective)
    return EXIT_OK


def cmd_sweep(cfg, out: Path, seed) -> int:
    s = cfg["sweep"]
    sweeps = []
    for arc_id, r_a, r_b in s["arcs"]:
        arc = make_arc(r_a, r_b)
        sweeps.append(accuracy.sweep(arc, calibrate_compensation(arc, s["grid_n"], s["K_e"]), s["n"], arc_id))
    accuracy.report(sweeps, out / "sweep.csv", _header(cfg, "sweep", seed))
    for sw in sweeps:
        summ = accuracy.summarize(sw)
        log.info("%s: %s", sw.arc_id, ", ".join(f"{k} max {v[0]:+.3f}% mean {v[1]:+.3f}%" for k, v in summ.items()))
    return EXIT_OK


def _walk_foot(cfg):
    w = cfg["walk"]
    if w["foot"] == "line":
        return contact.LineFoot(w["line_h_foot"])
    if w["foot"] == "circle":
        return design.circle_foot(w["circle_r"])
    if not cfg.has("design"):
        raise config.ConfigError("design", "section required for walk.foot = esvc")
    return _build_design(cfg)[2]


def cmd_walk(cfg, out: Path, seed) -> int:
    w = cfg["walk"]
    seed = w["seed"] if seed is None else seed
    try:
        params = hlip.HlipParams(w["z0"], w["T_ssp"], w["g"], 0.0, w["u_max"], w["v_max"])
    except ValueError as exc:
        raise config.ConfigError("walk", str(exc)) from None
    if abs(w["v_des"]) > params.v_max:
        raise config.ConfigError("walk.v_des", f"|v_des| exceeds v_max={params.v_max}")
    n_steps = w["n_steps"] or hlip.steps_for_horizon(w["horizon"], params.T_ssp)
    if n_steps < 1:
        raise config.ConfigError("walk.horizon", "shorter than one step")
    foot = _walk_foot(cfg)
    X0 = None
    if not (math.isnan(w["p0"]) and math.isnan(w["v0"])):
        X_h, u_h = hlip.desired_orbit(params, w["v_des"])
        p0 = X_h.p - u_h if math.isnan(w["p0"]) else w["p0"]
        v0 = X_h.v if math.isnan(w["v0"]) else w["v0"]
        X0 = hlip.HlipState(p0, v0)
    noise = hlip.NoiseConfig(w["noise_p"], w["noise_v"], w["noise_swing"], seed)
    wl = hlip.simulate_walk(
        foot, params, w["v_des"], n_steps, noise, X0, w["samples_per_step"], w["K_swa"], w["z_clear"],
    )
    hdr = _header(cfg, "walk", seed)
    _write_csv(out / "walk_samples.csv", hdr, hlip.WalkLog.SAMPLE_COLUMNS, wl.sample_rows())
    _write_csv(out / "walk_steps.csv", hdr, hlip.WalkLog.STEP_COLUMNS, wl.step_rows())
    conv = hlip.convergence_index(wl)
    _write_ini(out / "walk_summary.ini", hdr, {"walk": {
        "steps_requested": n_steps, "steps_completed": len(wl.steps), "fell": wl.fell,
        "message": wl.message or "ok", "convergence_index": -1 if conv is None else conv,
        "max_slip": wl.max_slip, "u_h": wl.u_h, "p_h": wl.X_h[0], "v_h": wl.X_h[1],
        "saturated_steps": sum(s.saturated for s in wl.steps),
    }})
    if wl.fell:
        log.error("fall: %s", wl.message)
        return EXIT_FALL
    log.info("walk: %d steps, convergence index %s, max slip %.3g m", len(wl.steps), conv, wl.max_slip)
    return EXIT_OK


def cmd_profile(cfg, out: Path, seed) -> int:
    _, _, foot = _build_design(cfg)
    hdr = _header(cfg, "profile", seed)
    p = cfg["profile"] if cfg.has("profile") else {k: d for k, (_, d, _) in config.SCHEMA["profile"].items()}
    _write_csv(out / "profile.csv", hdr, ("y", "z", "segment"), _profile_rows(foot, p["n"]))
    lim = foot.roll_limit * (1.0 - 1e-9)
    thetas = np.linspace(-lim, lim, p["dump_n"])
    _write_csv(out / "transforms.csv", hdr, contact.DUMP_COLUMNS, contact.transform_dump(foot, thetas))
    return EXIT_OK


COMMANDS = {"design": cmd_design, "sweep": cmd_sweep, "walk": cmd_walk, "profile": cmd_profile}


def run_one(command: str, cfg_path: str, out: str, seed) -> int:
    """Validate, resolve paths, then compute.  Returns the exit code."""
    try:
        cfg = config.load(cfg_path, command)
        out_dir = Path(out).resolve()
        if out_dir.exists() and not out_dir.is_dir():
            raise config.ConfigError("--out", f"{out_dir} is not a directory")
    except config.ConfigError as exc:
        log.error("config error in %s: %s", cfg_path, exc)
        return EXIT_CONFIG
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[command](cfg, out_dir, seed)
    except config.ConfigError as exc:
        log.error("config error in %s: %s", cfg_path, exc)
        return EXIT_CONFIG
    except design.InfeasibleSpec as exc:
        log.error("infeasible design (max violation %.3g on %s): %s", exc.max_violation, exc.constraint or "-", exc)
        return EXIT_INFEASIBLE
    except design.DesignNotConverged as exc:
        log.error("design did not converge: %s", exc)
        return EXIT_INFEASIBLE
    except contact.FootInvariantError as exc:
        log.error("assembled foot rejected, invariant %s: %s", exc.invariant, exc)
        return EXIT_INFEASIBLE


def _job(args):
    command, cfg_path, out, seed, level = args
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")
    return run_one(command, cfg_path, out, seed)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="esvc", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"esvc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", action="append", required=True, help="INI file; repeat for a batch")
        p.add_argument("--out", default="out", help="output directory (one subdirectory per config in a batch)")
        p.add_argument("--seed", type=int, default=None, help="RNG seed, overrides walk.seed")
        p.add_argument("--jobs", type=int, default=1, help="parallel configs in batch mode")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        log.error("config error: --seed must be an unsigned 64-bit integer")
        return EXIT_CONFIG
    if args.jobs < 1:
        log.error("config error: --jobs must be >= 1")
        return EXIT_CONFIG
    if len(args.config) == 1:
        return run_one(args.command, args.config[0], args.out, args.seed)
    stems = [Path(c).stem for c in args.config]
    if len(set(stems)) != len(stems):
        log.error("config error: batch configs must have distinct file names")
        return EXIT_CONFIG
    jobs = [(args.command, c, str(Path(args.out) / s), args.seed, level) for c, s in zip(args.config, stems)]
    if args.jobs == 1:
        codes = [_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_job, jobs))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
