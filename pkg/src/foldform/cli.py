"""Command-line interface: ``foldform verify | profile check | flow | list | schema``.

Exit codes: 0 all checks pass, 1 a check fails, 2 configuration error,
3 numeric failure (integration breakdown, singular solve, diverged search).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import _rk
from .config import SCENARIO_IDS, ConfigError, config_schema, load_config
from .dynamics import DomainExit, detect_periodic, integrate, winding_vector

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="foldform", description="Verify bundle and folded contact forms.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification scenario")
    v.add_argument("--scenario", choices=SCENARIO_IDS)
    v.add_argument("--config", help="JSON config file")
    v.add_argument("--n", type=int)
    v.add_argument("--K", type=float)
    v.add_argument("--grid", type=int, help="grid points per coordinate")
    v.add_argument("--out", help="write the JSON report here (default: stdout)")
    v.add_argument("--csv", help="directory for CSV tables")
    v.add_argument("--no-timestamp", action="store_true", help="zero the timings for byte-identical reports")

    pr = sub.add_parser("profile", help="gluing profile tools")
    psub = pr.add_subparsers(dest="action", required=True)
    pc = psub.add_parser("check", help="certify a gluing profile")
    pc.add_argument("--config")
    pc.add_argument("--f", help="f(t) expression")
    pc.add_argument("--g", help="g(t) expression")
    pc.add_argument("--K", type=float)
    pc.add_argument("--eps", type=float)
    pc.add_argument("--out")

    f = sub.add_parser("flow", help="integrate the scenario's Reeb field")
    f.add_argument("--scenario", choices=SCENARIO_IDS)
    f.add_argument("--config")
    f.add_argument("--n", type=int)
    f.add_argument("--K", type=float)
    f.add_argument("--x0", required=True, help="comma-separated start point")
    f.add_argument("--T", type=float, required=True, help="integration time")
    f.add_argument("--tol", type=float, default=1e-10)
    f.add_argument("--csv", help="write the trajectory here (default: stdout)")
    f.add_argument("--detect", action="store_true", help="search for a closed orbit up to time T")

    sub.add_parser("list", help="list the built-in scenarios")
    sub.add_parser("schema", help="print the JSON schema of the config")
    return p


def _err(msg: str):
    print(f"foldform: {msg}", file=sys.stderr)


def _config(args, **extra):
    over = {"scenario": getattr(args, "scenario", None), "n": getattr(args, "n", None),
            "K": getattr(args, "K", None)}
    over.update(extra)
    return load_config(args.config, **over)


def _write_csv(report, directory: str):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "checks.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "anchor", "metric", "threshold", "samples", "passed"])
        for c in report.checks:
            w.writerow([c.name, c.anchor, repr(c.metric), repr(c.threshold), c.samples, c.passed])
    for c in report.checks:
        orbits = c.detail.get("orbits")
        if orbits:
            with open(d / "orbits.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["x0", "period", "winding"])
                for o in orbits:
                    w.writerow([" ".join(repr(x) for x in o["x0"]), repr(o["period"]),
                                " ".join(str(k) for k in o["winding"])])


def cmd_verify(args) -> int:
    from .scenarios import has_numeric_failure, pool_size, run_scenario

    try:
        cfg = _config(args, **{"grid.per_coord": args.grid})
        threads = pool_size()
    except (ConfigError, ValueError) as e:
        _err(str(e))
        return EXIT_CONFIG
    report = run_scenario(cfg, threads)
    text = report.to_json(timestamps=not args.no_timestamp)
    out = args.out or cfg.output.out
    if out:
        Path(out).write_text(text)
        print(report.summary())
    else:
        sys.stdout.write(text)
    csv_dir = args.csv or cfg.output.csv
    if csv_dir:
        _write_csv(report, csv_dir)
    if has_numeric_failure(report):
        return EXIT_NUMERIC
    return EXIT_OK if report.overall else EXIT_FAIL


def cmd_profile(args) -> int:
    from .folding import certify_profile, make_gluing_profile
    from .exterior.parse import ParseError, parse_expr

    data = {}
    if args.f or args.g:
        data = {"kind": "custom", "f": args.f, "g": args.g}
    try:
        cfg = load_config(args.config, **({"scenario": "folded_spheres"} if args.config is None else {}),
                          K=args.K, eps=args.eps, **{f"profile.{k}": v for k, v in data.items()})
    except ConfigError as e:
        _err(str(e))
        return EXIT_CONFIG
    p = cfg.profile
    try:
        if p.kind == "custom":
            f, g = parse_expr(p.f, ["t"]), parse_expr(p.g, ["t"])
            rep = certify_profile(f, g, cfg.K, cfg.eps, cfg.grid.profile_resolution)
        else:
            from .folding import ProfileError
            try:
                rep = make_gluing_profile(cfg.K, cfg.eps, tuple(p.blend), cfg.grid.profile_resolution).report
            except ProfileError as e:
                rep = e.report
    except (ParseError, ValueError) as e:
        _err(f"bad profile: {e}")
        return EXIT_CONFIG
    rep.scenario = "profile"
    rep.config = {"K": cfg.K, "eps": cfg.eps, "profile": p.model_dump(mode="json")}
    text = rep.to_json(timestamps=False)
    if args.out:
        Path(args.out).write_text(text)
        print(rep.summary())
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep.overall else EXIT_FAIL


def cmd_flow(args) -> int:
    from .scenarios import scenario_flow_field

    try:
        cfg = _config(args)
        x0 = np.array([float(s) for s in args.x0.split(",")])
    except (ConfigError, ValueError) as e:
        _err(str(e))
        return EXIT_CONFIG
    try:
        v = scenario_flow_field(cfg)
    except (ValueError, ArithmeticError) as e:
        _err(f"cannot build the flow field: {e}")
        return EXIT_CONFIG
    if x0.size != v.chart.dim:
        _err(f"--x0 needs {v.chart.dim} coordinates ({', '.join(v.chart.names)}), got {x0.size}")
        return EXIT_CONFIG
    try:
        if args.detect:
            rec = detect_periodic(v, x0, args.T, tol=args.tol)
            traj = rec.trajectory
            info = {"period": rec.period, "closure": rec.closure, "stationary": rec.stationary}
            if rec.periodic:
                w = rec.winding or winding_vector(rec)
                info.update(winding=list(w.vector), verdict=w.verdict)
            print(json.dumps(info), file=sys.stderr)
        else:
            traj = integrate(v, x0, args.T, tol=args.tol, raise_on_exit=False)
            if traj.exit is not None:
                _err(str(traj.exit))
    except (DomainExit, _rk.IntegrationError, ArithmeticError) as e:
        _err(f"integration failed: {e}")
        return EXIT_NUMERIC
    except ValueError as e:
        _err(str(e))
        return EXIT_CONFIG
    if args.csv:
        traj.to_csv(args.csv)
    else:
        traj.to_csv(sys.stdout)
    return EXIT_OK


def cmd_list(args) -> int:
    from .scenarios import DESCRIPTIONS

    for sid in SCENARIO_IDS:
        print(f"{sid:16s} {DESCRIPTIONS[sid]}")
    return EXIT_OK


def cmd_schema(args) -> int:
    print(json.dumps(config_schema(), indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "verify":
        return cmd_verify(args)
    if args.command == "profile":
        return cmd_profile(args)
    if args.command == "flow":
        return cmd_flow(args)
    if args.command == "list":
        return cmd_list(args)
    return cmd_schema(args)


if __name__ == "__main__":
    sys.exit(main())
