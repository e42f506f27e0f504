"""Entropy production s(t) along the diffusion semigroup for a few input pairs."""

import argparse
import sys

from qepi.cli import main as cli

PAIRS = [("fock:1", "fock:2"), ("fock:0", "fock:3"), ("thermal:0.5", "coherent:1,0.5"), ("random:3:1", "fock:1")]

if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="results/scurve")
    p.add_argument("--tmax", type=float, default=5.0)
    a = p.parse_args()
    codes = []
    for i, (x, y) in enumerate(PAIRS):
        codes.append(cli(["scurve", "--x", x, "--y", y, "--t", str(a.tmax), "--out", f"{a.out}/pair{i}",
                          "--format", "csv", "--format", "json", "--format", "svg"]))
    sys.exit(max(codes))
