"""Wigner grids of |1>, |2> and their balanced beam-splitter output at t = 0, 0.1, 1."""

import argparse
import sys

from qepi.cli import main as cli

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="results/wigner")
    p.add_argument("--points", type=int, default=241)
    a = p.parse_args()
    sys.exit(cli(["wigner", "--out", a.out, "--points", str(a.points), "--format", "csv", "--format", "svg"]))
