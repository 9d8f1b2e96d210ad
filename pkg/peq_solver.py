#!/usr/bin/python3
# Pressure-eliminated primitive equations solver with energy-certificate monitoring
# Command line: run, certify, verify {mms,oracle,twin,calibration}, plot
import argparse
import csv
import os
import sys
import time

from modules.log import logger, getPrettyTime
import modules.settings as my_settings
from modules.errors import PEQError, ConfigError, VerificationFailure, InsufficientDataError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def cmd_run(args):
    from modules.energetics import compute_forcing_norms
    from modules.geometry import domain_constants
    from modules.ledger import LedgerWriter
    from modules.runconfig import load_config
    from modules.snapshot import write_snapshot
    from modules.timestepper import Observer, integrate, surface_fields

    config = load_config(args.config)
    out_dir = args.out or config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "run.cfg"), "w", encoding="utf-8") as f:
        f.write(config.to_text())

    grid = config.build_grid()
    params = config.build_params()
    forcing = config.build_forcing(grid)
    control = config.build_control()
    state = config.build_initial_state(grid)
    constants = domain_constants(grid)
    C_M = constants.C_M
    logger.info(f"System: run {grid.Nx}x{grid.Ny}x{grid.Nz} to t={control.t_end} C_M={C_M:.6e} "
                f"volume={constants.volume:.6g} area={constants.area:.6g} out={out_dir}")

    writer = LedgerWriter(os.path.join(out_dir, "ledger.csv"), grid, params, compute_forcing_norms(forcing, grid),
                          C_M, config.exp_cap, config.kappa())
    observers = writer.observers(config.ledger_every)

    def dump(step, current, name=None):
        p_s, w = surface_fields(current, params, forcing, grid, config.poisson_tol)
        write_snapshot(current, p_s, w, os.path.join(out_dir, name or f"snapshot_{step:06d}.peq"), grid)

    if config.snapshot_every > 0:
        observers.append(Observer(dump, every=config.snapshot_every))
    final = integrate(state, params, forcing, grid, control, observers, config.poisson_tol)
    dump(None, final, "final.peq")
    logger.info(f"System: {len(writer.records)} ledger rows in {out_dir}")
    return EXIT_OK


def cmd_certify(args):
    from modules.energetics import (MonitorTolerances, certificate_series, check_inequalities,
                                    compute_forcing_norms)
    from modules.ledger import read_ledger
    from modules.runconfig import load_config

    config = load_config(args.config)
    grid = config.build_grid()
    params = config.build_params()
    records, stored = read_ledger(args.ledger)
    if not records:
        raise InsufficientDataError(f"Certify: ledger {args.ledger} has no rows")
    C_M = stored[0].C_M
    forcing_norms = compute_forcing_norms(config.build_forcing(grid), grid)
    certs = certificate_series(records, forcing_norms, params, C_M, grid.h, config.exp_cap, config.kappa())
    report = check_inequalities(records, certs, params, grid, forcing_norms, C_M,
                                MonitorTolerances(slack=my_settings.quant_slack, min_rows=args.min_rows))
    print(report.as_table())
    if args.report:
        rows = report.rows()
        with open(args.report, "w", encoding="utf-8", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_verify(args):
    from modules import verification
    from modules.geometry import build_domain

    if args.study == "oracle":
        ok = True
        for n in (4, 6):
            _, grid = build_domain(1.0, 1.3, 0.7, n, n, n)
            report = verification.dense_oracle_check(grid)
            print(report.as_table())
            ok = ok and report.passed
        return EXIT_OK if ok else EXIT_FAILED

    if args.study == "mms":
        levels = [args.base * 2**i for i in range(args.levels)]
        profile = verification.ManufacturedProfile(time_profile=args.profile)
        try:
            report = verification.mms_run(levels, profile=profile, t_end=args.t_end)
        except VerificationFailure as e:
            if e.report is not None:
                print(e.report.as_table())
            raise
        print(report.as_table())
        return EXIT_OK

    if args.config is None:
        raise ConfigError(f"verify {args.study} needs --config", key="config")
    from modules.runconfig import load_config
    config = load_config(args.config)
    if args.study == "calibration":
        report = verification.calibration_stability(config, range(args.seeds), args.fine, args.tolerance)
    else:
        report = verification.twin_run(config, args.eps, args.record_every)
    print(report.as_table())
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_plot(args):
    from modules.ledger import read_ledger
    from modules.plotting import plot_ledger

    records, certs = read_ledger(args.ledger)
    for path in plot_ledger(records, certs, args.out):
        print(path)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="peq_solver", description=my_settings.SOLVER_BANNER)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate, writing a ledger and snapshots")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (default: out_dir from the config)")
    run.set_defaults(func=cmd_run)

    certify = sub.add_parser("certify", help="re-evaluate the bounds along a ledger")
    certify.add_argument("--ledger", required=True)
    certify.add_argument("--config", required=True)
    certify.add_argument("--report", help="also write the report rows as CSV")
    certify.add_argument("--min-rows", type=int, default=10)
    certify.set_defaults(func=cmd_certify)

    verify = sub.add_parser("verify", help="oracle, manufactured-solution, twin-run or calibration studies")
    verify.add_argument("study", choices=("mms", "oracle", "twin", "calibration"))
    verify.add_argument("--levels", type=int, default=3)
    verify.add_argument("--base", type=int, default=16, help="coarsest horizontal cell count for mms")
    verify.add_argument("--t-end", type=float, default=0.05)
    verify.add_argument("--profile", choices=("steady", "cos"), default="steady", help="time dependence of the mms fields")
    verify.add_argument("--config")
    verify.add_argument("--eps", type=float, default=1e-3)
    verify.add_argument("--record-every", type=int, default=1)
    verify.add_argument("--seeds", type=int, default=5, help="initial conditions in the calibration family")
    verify.add_argument("--fine", type=int, default=48, help="cells per axis of the refined calibration grid")
    verify.add_argument("--tolerance", type=float, default=0.1, help="allowed relative change of kappa under refinement")
    verify.set_defaults(func=cmd_verify)

    plot = sub.add_parser("plot", help="norm-vs-bound figures from a ledger")
    plot.add_argument("--ledger", required=True)
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=cmd_plot)
    return parser


def cli_main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return EXIT_USAGE if e.code else EXIT_OK
    started = time.monotonic()
    try:
        code = args.func(args)
    except ConfigError as e:
        logger.error(f"System: config error: {e}")
        return EXIT_USAGE
    except VerificationFailure as e:
        logger.error(f"Verify: {e}")
        return EXIT_FAILED
    except PEQError as e:
        logger.error(f"System: {type(e).__name__}: {e}")
        return EXIT_FAILED
    logger.debug(f"System: {args.command} finished in {getPrettyTime(time.monotonic() - started)}")
    return code


if __name__ == "__main__":
    try:
        sys.exit(cli_main())
    except KeyboardInterrupt:
        logger.info("System: interrupted")
        sys.exit(EXIT_FAILED)
# EOF
