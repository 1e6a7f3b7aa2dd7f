"""Command-line surface.

Subcommands: run, sweep, verify-initial, verify-barriers, benchmark-circle,
extract-interface. Exit codes: 0 ok, 1 property failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import RunConfig, default_config, load_config
from .geometry import ConfigError


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfob",
                                description="Phase-field flow around obstacles")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", type=Path, default=None,
                            help="YAML run configuration (default: built-in)")
        sp.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory")
        sp.add_argument("--threads", type=int, default=1,
                        help="parallel workers for sweeps")
        sp.add_argument("--checkpoint-every", type=int, default=None,
                        help="steps between diagnostics checkpoints")

    common(sub.add_parser("run", help="run the finest eps of the config"))
    common(sub.add_parser("sweep", help="run every eps and fit the decay law"))
    common(sub.add_parser("verify-initial", help="check the prepared initial data"))
    common(sub.add_parser("verify-barriers", help="check the obstacle barriers"))
    common(sub.add_parser("benchmark-circle",
                          help="shrinking-circle law with forcing disabled"))
    ei = sub.add_parser("extract-interface",
                        help="marching-squares zero level set of a snapshot")
    ei.add_argument("snapshot", type=Path)
    ei.add_argument("--out", type=Path, default=None,
                    help="write vertices as CSV here")
    return p


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if getattr(args, "checkpoint_every", None) is not None:
        cfg.checkpoint_every = args.checkpoint_every
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "extract-interface":
        return _extract_interface(args)

    cfg = _load(args)

    if args.command == "run":
        from .runner import run_single
        eps = min(cfg.eps_list)
        result = run_single(cfg, eps, args.out)
        print(f"run eps={eps:g}: {result.n_steps} steps, dt={result.dt:.3e}, "
              f"sup|u|={result.sup_abs_u:.12f}, outputs in {args.out}")
        return 0

    if args.command == "sweep":
        from .runner import run_sweep
        summary = run_sweep(cfg, args.out, args.threads)
        failed = [r for r in summary.rows if r["status"] != "ok"]
        for row in summary.rows:
            print(f"eps={row['eps']:g}: {row['status']}")
        print(f"log-log discrepancy slope: {summary.slope:.4f}")
        print(f"sweep outputs in {args.out}")
        return 1 if failed else 0

    from . import verify
    if args.command == "verify-initial":
        report = verify.verify_initial(cfg)
    elif args.command == "verify-barriers":
        report = verify.verify_barriers(cfg)
    else:
        report = verify.benchmark_circle(cfg)
    print("\n".join(report.lines()))
    return 0 if report.all_passed else 1


def _extract_interface(args) -> int:
    from .diagnostics import extract_interface
    from .geometry import Grid, Rectangle
    from .snapshots import SnapshotFormatError, read_snapshot

    try:
        u, h, eps, t = read_snapshot(args.snapshot)
    except (SnapshotFormatError, FileNotFoundError) as exc:
        print(f"snapshot error: {exc}", file=sys.stderr)
        return 2
    ny, nx = u.shape
    grid = Grid(Rectangle(0.0, nx * h, 0.0, ny * h), nx, ny, h)
    polylines, total, closed = extract_interface(u, grid)
    print(f"t={t:g} eps={eps:g}: {len(polylines)} polyline(s), "
          f"{sum(closed)} closed, total length {total:.6f}")
    if args.out is not None:
        lines = ["polyline,vertex,x,y"]
        for pi, poly in enumerate(polylines):
            for vi, (x, y) in enumerate(poly):
                lines.append(f"{pi},{vi},{x:.17g},{y:.17g}")
        args.out.write_text("\n".join(lines) + "\n")
        print(f"vertices written to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
