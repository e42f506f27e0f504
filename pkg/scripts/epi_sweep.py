"""Entropy-inequality margins over the seeded random corpus, plus a margin-vs-lambda table for one pair.

The table shows how the linear margin varies with transmissivity for a
fixed Fock pair; the corpus run is the same one ``qepi epi-test`` performs.
"""

import argparse
import sys

import numpy as np

from qepi.cli import main as cli
from qepi.epi import epi_margins
from qepi.fock import make_fock


def table(k1: int, k2: int) -> None:
    x, y = make_fock(k1, k1 + 3), make_fock(k2, k2 + 3)
    print(f"lambda  S(Z)      linear    power(general, unproven)   for |{k1}>, |{k2}>")
    for lam in np.linspace(0.05, 0.95, 19):
        m = epi_margins(x, y, float(lam))
        print(f"{lam:5.2f}  {m.S_z:8.5f}  {m.linear:8.5f}  {m.power_general:9.5f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="results/epi")
    p.add_argument("--corpus", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    a = p.parse_args()
    table(1, 2)
    sys.exit(cli(["epi-test", "--corpus", str(a.corpus), "--seed", str(a.seed), "--out", a.out,
                  "--format", "json", "--format", "csv"]))
