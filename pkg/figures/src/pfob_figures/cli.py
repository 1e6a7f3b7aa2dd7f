"""figures <kind> --in INPUT [INPUT...] --out IMAGE [--manifest M]

Exit codes: 0 ok, 2 schema/usage error. Kinds: energy, discrepancy-sweep,
density, snapshot-overlay.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .plots import KINDS, plot_snapshot_overlay
from .readers import SchemaError, read_manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figures")
    parser.add_argument("kind", choices=sorted(KINDS))
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        type=Path, help="input artifact file(s)")
    parser.add_argument("--out", required=True, type=Path,
                        help="output image (png/svg by extension)")
    parser.add_argument("--manifest", type=Path, default=None,
                        help="manifest for geometry overlays (snapshot kind)")
    args = parser.parse_args(argv)

    for p in args.inputs:
        if not p.exists():
            print(f"input not found: {p}", file=sys.stderr)
            return 2
    try:
        if args.kind == "snapshot-overlay":
            manifest = read_manifest(args.manifest) if args.manifest else None
            plot_snapshot_overlay(args.inputs, args.out, manifest)
        else:
            KINDS[args.kind](args.inputs, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
