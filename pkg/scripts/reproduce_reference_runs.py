#!/usr/bin/env python3
"""Run every experiment family at its reference defaults and write CSV tables.

The qPIC scans default to the published Fock cutoff N = 10 and the slow-light
scan samples 10^4 trajectories per lossy point, so the full set takes tens of
minutes on one core. --fast shrinks grids and cutoffs for a smoke run.
"""

import argparse
import sys
import time
from pathlib import Path

from qpicsim.cli import main as cli_main

SCENARIOS = [
    "mzi_free_space",
    "mzi_lossy",
    "mzi_theta_phi_map",
    "mzi_integrated",
    "qpic_kscan",
    "qpic_slowlight",
    "qpic_phase_sweep",
]

FAST_OVERRIDES = {
    "mzi_free_space": ["--cutoff", "8"],
    "mzi_lossy": ["--cutoff", "8"],
    "mzi_theta_phi_map": ["--cutoff", "8"],
    "mzi_integrated": ["--cutoff", "8"],
    "qpic_kscan": ["--cutoff", "4"],
    "qpic_slowlight": ["--cutoff", "4", "--trajectories", "200"],
    "qpic_phase_sweep": ["--cutoff", "4"],
}


def run(out_root: Path, fast: bool) -> int:
    for name in SCENARIOS:
        args = ["--scenario", name, "--out", str(out_root / name), "--emit-plot-script"]
        if fast:
            args += FAST_OVERRIDES[name]
        t0 = time.perf_counter()
        rc = cli_main(args)
        print(f"== {name}: exit {rc} in {time.perf_counter() - t0:.1f}s")
        if rc != 0:
            return rc
    return 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--fast", action="store_true", help="small grids and cutoffs")
    ns = ap.parse_args()
    sys.exit(run(ns.out, ns.fast))
