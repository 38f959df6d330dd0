#!/usr/bin/env python3
"""Run every shipped config through the dlab CLI into out/<experiment>/."""

import argparse
import sys
import time
from pathlib import Path

from dlab.cli import run

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=ROOT / "out")
    ap.add_argument("--seed", type=int, default=0, help="seed for kdv-endpoint")
    ap.add_argument("--exact", action="store_true", help="also run nls-line with exact solutions")
    ap.add_argument("only", nargs="*", help="experiment names (default: all)")
    args = ap.parse_args()
    configs = sorted((ROOT / "configs").glob("*.cfg"))
    if args.only:
        configs = [c for c in configs if c.stem in args.only]
    status = 0
    for cfg in configs:
        name = cfg.stem
        argv = [name, "--config", str(cfg), "--out", str(args.out / name)]
        if name == "kdv-endpoint":
            argv += ["--seed", str(args.seed)]
        runs = [argv]
        if args.exact and name == "nls-line":
            runs.append([name, "--config", str(cfg), "--out", str(args.out / "nls-line-exact"), "--exact"])
        for a in runs:
            t0 = time.perf_counter()
            code = run(a)
            print(f"{a[0]:<16} exit {code}  {time.perf_counter() - t0:6.1f} s  -> {a[4]}")
            status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
