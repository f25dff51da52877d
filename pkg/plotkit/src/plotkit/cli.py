"""Plot script: render one figure kind from one solver CSV file."""

from __future__ import annotations

import argparse
import os
import sys

from .figures import plot_convergence, plot_error_evolution, plot_profile
from .io import SchemaError

KINDS = {
    "profile": plot_profile,
    "error-evolution": plot_error_evolution,
    "convergence": plot_convergence,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="timobeam-plot", description=__doc__)
    parser.add_argument("--input", required=True, help="CSV file from the solver")
    parser.add_argument("--kind", required=True, choices=sorted(KINDS))
    parser.add_argument("--out", required=True,
                        help="output base path; .png and .svg are appended")
    args = parser.parse_args(argv)
    out_dir = os.path.dirname(args.out)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    try:
        raster, vector = KINDS[args.kind](args.input, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    print(f"{args.kind}: {raster} {vector}")
    return 0


def console_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_entry()
