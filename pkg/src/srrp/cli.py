"""Batch command-line driver.

Subcommands:

* ``run``      -- evolve a configured problem, writing snapshots, slice
                  CSVs, a perturbation-norm series, and provenance files
                  into the output directory.
* ``exact``    -- dump the sampled exact Riemann solution at a given time
                  on a 1D grid as CSV.
* ``classify`` -- print the wave pattern (SS/RR/RS/SR) of one reference
                  problem, or of all six.
* ``norms``    -- recompute a norm series from two snapshot directories
                  (perturbed run vs unperturbed reference).

Flags mirror config keys and override the config file; the output
directory resolves flag > SRRP_OUTDIR environment variable > config.
"""

import argparse
import glob
import os
import sys

from .config import DEFAULT_EXTENTS, ConfigError, parse_config
from .snapshots import SnapshotError

#: environment variable overriding the output directory (beaten by --out)
OUTDIR_ENV = "SRRP_OUTDIR"

_LABELS = "abcdef"


def _add_config_flags(sub, run_flags=False):
    sub.add_argument("--config", metavar="PATH",
                     help="configuration file (key = value lines)")
    sub.add_argument("--problem", metavar="LABEL",
                     help="reference problem label a-f")
    if run_flags:
        sub.add_argument("--scale", type=int, metavar="N",
                         help="divide the full 1800x600x300 grid by N")
        sub.add_argument("--seed", type=int, metavar="N",
                         help="perturbation sampling seed")
        sub.add_argument("--dim", type=int, choices=(1, 3),
                         help="1 for planar runs, 3 for corrugated")
        sub.add_argument("--flux", choices=("marquina", "hlle"),
                         help="numerical flux")
        sub.add_argument("--rk", type=int, choices=(2, 4),
                         help="Runge-Kutta order")
        sub.add_argument("--out", metavar="DIR", help="output directory")
        sub.add_argument("--unperturbed", action="store_true",
                         help="planar interface even in 3D")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="srrp",
        description="Special-relativistic Riemann-problem runs: exact "
                    "solutions, shock-capturing evolution, diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evolve a configured problem")
    _add_config_flags(p_run, run_flags=True)
    p_run.set_defaults(func=_cmd_run)

    p_exact = sub.add_parser("exact", help="dump the exact solution as CSV")
    _add_config_flags(p_exact)
    p_exact.add_argument("--t", type=float, required=True, metavar="T",
                         help="time at which to sample (>= 0)")
    p_exact.add_argument("--nx", type=int, default=800, metavar="N",
                         help="number of sample zones (default 800)")
    p_exact.add_argument("--out", metavar="FILE",
                         help="CSV path (default: stdout)")
    p_exact.set_defaults(func=_cmd_exact)

    p_cls = sub.add_parser("classify", help="print the wave pattern")
    _add_config_flags(p_cls)
    p_cls.set_defaults(func=_cmd_classify)

    p_norms = sub.add_parser("norms",
                             help="recompute norms from two snapshot sets")
    p_norms.add_argument("--perturbed", required=True, metavar="DIR",
                         help="directory with perturbed-run snapshots")
    p_norms.add_argument("--reference", required=True, metavar="DIR",
                         help="directory with reference-run snapshots")
    p_norms.add_argument("--out", required=True, metavar="FILE",
                         help="norm-series CSV to write")
    p_norms.set_defaults(func=_cmd_norms)
    return parser


def _config_from_args(args):
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    overrides = {}
    for key in ("problem", "scale", "seed", "dim", "flux", "rk"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = str(value)
    if getattr(args, "unperturbed", False):
        overrides["unperturbed"] = "on"
    out = getattr(args, "out", None) or os.environ.get(OUTDIR_ENV)
    if out:
        overrides["out"] = out
    return parse_config(text, overrides)


def _problem_from_args(args):
    """RiemannProblemSpec plus extents from --problem or --config."""
    from .initial_data import table1_problem

    if args.problem and not args.config:
        return table1_problem(args.problem), DEFAULT_EXTENTS
    if args.config:
        cfg = _config_from_args(args)
        return cfg.problem_spec(), cfg.extents
    raise ConfigError("need --problem or --config")


def _write_bumps(path, pert):
    with open(path, "w") as fh:
        fh.write("A,R,ybar,zbar\n")
        if pert is not None:
            for row in pert.bumps:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _cmd_run(args):
    cfg = _config_from_args(args)
    from . import diagnostics, snapshots
    from .evolution import Observer, evolve
    from .initial_data import initialize_grid

    outdir = cfg.out
    os.makedirs(outdir, exist_ok=True)
    with open(os.path.join(outdir, "config_resolved.txt"), "w") as fh:
        fh.write("\n".join(cfg.resolved_lines()) + "\n")
    pert = cfg.perturbation()
    _write_bumps(os.path.join(outdir, "perturbations.csv"), pert)

    problem = cfg.problem_spec()
    field = initialize_grid(problem, pert, cfg.geometry(), dim=cfg.dim,
                            boundaries=cfg.boundaries())

    observers = []
    norm_rows = []
    if pert is not None:
        series = diagnostics.ReferenceSeries(
            problem, cfg.geometry(), method=cfg.reference,
            cfl=cfg.cfl, order=cfg.rk, flux_kind=cfg.flux)

        def record_norms(f):
            norm_rows.append(
                diagnostics.perturbation_norms(f, series.energy(f.t)))

        observers.append(Observer(record_norms, every=cfg.norms_every))

    if cfg.snapshots:
        def save_snapshot(f):
            tag = f"{min(cfg.snapshots, key=lambda s: abs(s - f.t)):g}"
            snapshots.write_snapshot(
                f, os.path.join(outdir, f"snap_t{tag}.bin"))
            snapshots.write_slice_csv(
                f, os.path.join(outdir, f"slice_t{tag}.csv"))

        observers.append(Observer(save_snapshot, times=cfg.snapshots))

    _, stats = evolve(field, cfg.t_end, cfl=cfg.cfl, order=cfg.rk,
                      flux_kind=cfg.flux, reconstruction=cfg.reconstruction,
                      observers=observers)
    if norm_rows:
        diagnostics.write_norm_series(
            os.path.join(outdir, "norms.csv"), norm_rows)
    print(f"problem {cfg.problem}: {stats.steps} steps to "
          f"t = {cfg.t_end:g} in {stats.wall_time:.1f} s; wrote {outdir}")
    return 0


def _cmd_exact(args):
    import numpy as np

    from .diagnostics import profile_energy
    from .exact_riemann import sample_profile, solve_star_state

    if args.t < 0:
        raise ConfigError(f"t must be >= 0, got {args.t}")
    if args.nx < 1:
        raise ConfigError(f"nx must be >= 1, got {args.nx}")
    problem, extents = _problem_from_args(args)
    x0, x1 = extents[0]
    x = x0 + (np.arange(args.nx) + 0.5) * (x1 - x0) / args.nx
    sol = solve_star_state(problem.left, problem.right, problem.eos)
    prof = sample_profile(sol, x, args.t)
    e = profile_energy(prof, problem.eos)
    names = ("rho",) if problem.eos.system == "I" else ("n", "eps")
    cols = [("x", x)] + [(k, prof[k]) for k in names] \
        + [(k, prof[k]) for k in ("p", "vx", "vy", "vz")] + [("e", e)]
    lines = [",".join(name for name, _ in cols)]
    for i in range(args.nx):
        lines.append(",".join(f"{col[i]:.17g}" for _, col in cols))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_classify(args):
    from .exact_riemann import classify_pattern
    from .initial_data import table1_problem

    if args.problem or args.config:
        problem, _ = _problem_from_args(args)
        print(classify_pattern(problem.left, problem.right, problem.eos))
        return 0
    for label in _LABELS:
        problem = table1_problem(label)
        print(f"{label}: "
              f"{classify_pattern(problem.left, problem.right, problem.eos)}")
    return 0


def _cmd_norms(args):
    from . import snapshots
    from .diagnostics import (conserved_energy_field, perturbation_norms,
                              write_norm_series)

    def load_all(directory):
        paths = sorted(glob.glob(os.path.join(directory, "snap_t*.bin")))
        if not paths:
            raise ConfigError(f"no snap_t*.bin files in {directory}")
        return [snapshots.read_snapshot(p) for p in paths]

    refs = load_all(args.reference)
    rows = []
    for field in load_all(args.perturbed):
        ref = min(refs, key=lambda r: abs(r.t - field.t))
        if abs(ref.t - field.t) > 1e-9 * max(1.0, abs(field.t)):
            raise ConfigError(f"no reference snapshot at t = {field.t:g} "
                              f"(closest is t = {ref.t:g})")
        rows.append(perturbation_norms(field, conserved_energy_field(ref)))
    rows.sort(key=lambda r: r.t)
    write_norm_series(args.out, rows)
    print(f"wrote {len(rows)} norm rows to {args.out}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError, SnapshotError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
