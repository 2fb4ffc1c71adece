#!/usr/bin/env python3
"""Emit trajectory CSVs of the multifractional limit process for plotting.

Two index profiles by default (one increasing, one periodic); the local
roughness of each trajectory tracks the profile.
"""
import argparse
import sys
from pathlib import Path

from lrwave.cli import run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config",
                        default=Path(__file__).resolve().parents[1]
                        / "configs" / "figures.json")
    parser.add_argument("--out", default="out/figures")
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()
    overrides = {"output_dir": args.out}
    if args.seed is not None:
        overrides["seed"] = args.seed
    return run(args.config, overrides=overrides)


if __name__ == "__main__":
    sys.exit(main())
