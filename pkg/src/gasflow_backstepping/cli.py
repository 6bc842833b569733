"""Command line entry point.

    gasflow run <preset|file> --out DIR [--grid N] [--horizon S] [--plant nonlinear|linear]
    gasflow kernels <preset|file> --out DIR [--grid N]
    gasflow validate <preset|file>

Exit status is 0 on success, 1 for I/O errors, 2 for invalid input and 3
for numerical failure (a diverged run still writes its outputs up to the
failure).  ``GASFLOW_LOG`` sets the log level (default ``WARNING``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .errors import BlowUpError, PipelineError, SolverDivergenceError
from .kernels import boundary_defects, export_kernels_csv, kernel_residual
from .kernels import solve_controller_kernels, solve_observer_kernels
from .plotting import write_panels
from .scenario import PRESETS, load_scenario, scenario_to_dict
from .simulate import prepare, run_closed_loop, summarize

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("gasflow")


def _configure_logging():
    level = os.environ.get("GASFLOW_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _apply_overrides(sc, args):
    changes = {}
    if getattr(args, "grid", None) is not None:
        changes["N"] = args.grid
    if getattr(args, "horizon", None) is not None:
        changes["horizon"] = args.horizon
    if getattr(args, "plant", None) is not None:
        changes["plant"] = args.plant
        if args.plant == "linear":
            # theorem-level runs are unsaturated
            changes["saturation"] = None
    return sc.with_changes(**changes) if changes else sc


def write_outputs(sc, ts, out_dir, failure=None):
    """Write CSV, summary and plots for a run; returns the summary.

    ``failure`` is recorded in the summary when ``ts`` is the partial record
    of a run that diverged.
    """
    os.makedirs(out_dir, exist_ok=True)
    ts.to_csv(os.path.join(out_dir, "timeseries.csv"))
    band = sc.settle_band if sc.settle_band is not None else 0.005 * ts.meta["rho_star_out"]
    summary = summarize(ts, sc.transient_time, band)
    summary["scenario"] = scenario_to_dict(sc)
    if failure is not None:
        summary["failure"] = failure
        summary["failed_at"] = ts.meta.get("failed_at")
    with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    hours = ts["t"] / 3600.0
    p = sc.params
    write_panels(
        os.path.join(out_dir, "disturbance.svg"),
        hours,
        [("Outlet flow variation", "kg/m^2/s", [("s(t)", ts["s"]), ("s(t) + eps(t)", ts["s"] + ts["eps"])])],
    )
    write_panels(
        os.path.join(out_dir, "density.svg"),
        hours,
        [
            ("Density at x = 0", "kg/m^3", [("rho(t, 0)", ts["rho_in"])]),
            (f"Density at x = {p.ell / 2:g} m", "kg/m^3", [("rho(t, l/2)", ts["rho_mid"])]),
            ("Density at x = l", "kg/m^3", [("rho(t, l)", ts["rho_out"])]),
        ],
    )
    write_panels(
        os.path.join(out_dir, "flow.svg"),
        hours,
        [
            ("Mass flux at x = 0", "kg/m^2/s", [("phi(t, 0)", ts["phi_in"])]),
            (f"Mass flux at x = {p.ell / 2:g} m", "kg/m^2/s", [("phi(t, l/2)", ts["phi_mid"])]),
            ("Mass flux at x = l", "kg/m^2/s", [("phi(t, l)", ts["phi_out"])]),
        ],
    )
    return summary


def cmd_run(args):
    sc = _apply_overrides(load_scenario(args.scenario), args)
    log.info("running %s: controller=%s plant=%s N=%d horizon=%g", sc.name, sc.controller, sc.plant, sc.N, sc.horizon)
    try:
        ts = run_closed_loop(sc, prepare(sc))
    except BlowUpError as exc:
        partial = getattr(exc, "partial", None)
        if partial is not None and len(partial):
            # leave the trajectory up to the failure behind for inspection
            write_outputs(sc, partial, args.out, failure=str(exc))
        raise
    summary = write_outputs(sc, ts, args.out)
    print(
        f"{sc.name}: peak |drho(l)| = {summary['peak_abs_drho_out']:.6g} kg/m^3, "
        f"steady residual = {summary['steady_residual']}, settling time = {summary['settling_time']}"
    )
    return EXIT_OK


def cmd_kernels(args):
    sc = _apply_overrides(load_scenario(args.scenario), args)
    p, N = sc.params, sc.N
    ck = solve_controller_kernels(p, N, rule=sc.kernel_rule)
    ok = solve_observer_kernels(p, N, rule=sc.kernel_rule)
    kernels = [ck.K11, ck.K12, ck.K21, ck.K22, ok.P11, ok.P12, ok.P21, ok.P22]
    export_kernels_csv(kernels, args.out)
    grids = {k.name: k for k in kernels}
    report = {}
    for fam in ("K21/K22", "K11/K12", "P11/P21", "P12/P22"):
        report[fam] = {
            "residual": kernel_residual(fam, grids, p),
            "boundary_defect": boundary_defects(fam, grids, p),
        }
        print(f"{fam}: interior residual {report[fam]['residual']:.4g}, boundary defect {report[fam]['boundary_defect']:.3g}")
    report["max_abs"] = {k.name: float(np.nanmax(np.abs(k.values))) for k in kernels}
    with open(os.path.join(args.out, "kernels.json"), "w", encoding="utf-8") as fh:
        json.dump({"N": N, "rule": sc.kernel_rule, **report}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def cmd_validate(args):
    sc = load_scenario(args.scenario)
    print(f"{sc.name}: ok (controller={sc.controller}, plant={sc.plant}, N={sc.N}, horizon={sc.horizon:g} s)")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="gasflow", description="Backstepping outlet-pressure regulation of a gas pipeline.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("scenario", help=f"preset ({', '.join(PRESETS)}) or scenario JSON file")
        p.add_argument("--grid", type=int, help="number of grid cells N")

    run = sub.add_parser("run", help="simulate a scenario and write CSV, summary and plots")
    add_common(run)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--horizon", type=float, help="simulated time [s]")
    run.add_argument("--plant", choices=("nonlinear", "linear"), help="plant model")
    run.set_defaults(func=cmd_run)

    ker = sub.add_parser("kernels", help="solve and export the kernel grids")
    add_common(ker)
    ker.add_argument("--out", required=True, help="output directory")
    ker.set_defaults(func=cmd_kernels)

    val = sub.add_parser("validate", help="check a scenario without running it")
    val.add_argument("scenario")
    val.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (BlowUpError, SolverDivergenceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PipelineError as exc:
        field = getattr(exc, "field", None)
        where = f" [{field}]" if field else ""
        print(f"invalid input{where}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
