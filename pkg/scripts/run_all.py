#!/usr/bin/env python3
"""Run every shipped experiment config through the CLI.

Usage: python3 scripts/run_all.py [--out-root OUT]

Each config is run under the subcommand named in its header comment; exit
status is nonzero if any run fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from fracdual.cli import main as cli_main

ROOT = Path(__file__).resolve().parent.parent

# config file -> CLI subcommand(s) that reproduce the corresponding check
RUNS = [
    ("c01_duality_disc.toml", ["duality-check"]),
    ("c02_convergence_ball.toml", ["convergence"]),
    ("c03_integrability.toml", ["regularity"]),
    ("c04_fundamental.toml", ["fundamental"]),
    ("c05_maximum_principle.toml", ["assemble", "solve"]),
    ("c06_ellipticity.toml", ["assemble"]),
    ("c07_embedding.toml", ["regularity"]),
    ("c08_riesz.toml", ["riesz"]),
    ("c09_exterior.toml", ["solve"]),
    ("c10_exponents.toml", ["regularity"]),
    ("c11_geometry.toml", ["geometry"]),
]


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-root", default="out")
    args = parser.parse_args()
    failures = []
    for name, subcommands in RUNS:
        cfg = ROOT / "configs" / name
        for sub in subcommands:
            out = Path(args.out_root) / f"{cfg.stem}_{sub}"
            print(f"== {sub} {name} -> {out}")
            status = cli_main([sub, "--config", str(cfg), "--out", str(out)])
            if status != 0:
                failures.append((name, sub, status))
    if failures:
        print("FAILURES:", failures, file=sys.stderr)
        return 1
    print(f"all {sum(len(s) for _, s in RUNS)} runs passed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
