"""Dimension estimates and plot data for the horse mussel data.

The data are not distributed with this package. Supply a CSV with columns
H, L, W, S (shell height, length, width, mass) and M (muscle mass), e.g. the
``mussels`` data set accompanying Cook and Weisberg (1999):

    python3 scripts/mussel_analysis.py path/to/mussels.csv --out results/mussels

For every SIR variant and H in {5, 10} it prints the sequential-test and BIC
dimensions; it also runs T-MAVE with the RSS criterion and writes plot data
for the five-slice T-SIR and YJ-SIR fits.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from tsdr.cli import main as tsdr


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv")
    parser.add_argument("--response", default="M")
    parser.add_argument("--out", default="results/mussels")
    args = parser.parse_args(argv)
    out = Path(args.out)

    status = 0
    for method in ("SIR", "T-SIR", "YJ-SIR"):
        for H in (5, 10):
            target = out / f"{method}_H{H}"
            print(f"== {method}, H = {H}")
            status |= tsdr(["analyze", args.csv, "--response", args.response, "--method", method,
                            "--slices", str(H), "--out", str(target)])
            if H == 5 and method != "SIR":
                status |= tsdr(["plotdata", "--out", str(target)])
    print("== T-MAVE")
    status |= tsdr(["analyze", args.csv, "--response", args.response, "--method", "T-MAVE",
                    "--out", str(out / "T-MAVE")])
    return status


if __name__ == "__main__":
    sys.exit(main())
