"""Command-line runner.

Exit codes: 0 success, 2 configuration error, 3 numerical contract violation,
4 convergence-check failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .config import SCENARIOS, load_config
from .errors import ConfigError, ContractViolation
from .output import emit_plot_script, write_csv, write_sidecar
from .scenarios import convergence_check, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONTRACT = 3
EXIT_CONVERGENCE = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qpicsim",
        description="Simulate pulsed nonlinear polaritonic circuits and their photon statistics.",
    )
    p.add_argument("--scenario", choices=SCENARIOS, help="experiment family to run")
    p.add_argument("--config", type=Path, help="TOML or JSON scenario configuration")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--cutoff", type=int, help="Fock cutoff override")
    p.add_argument("--trajectories", type=int, help="sampling trajectory count override")
    p.add_argument("--branch-threshold", type=float, help="branch-enumeration pruning threshold")
    p.add_argument("--out", type=Path, help="output directory (default from config)")
    p.add_argument("--emit-plot-script", action="store_true", help="write a plotting script next to the CSVs")
    p.add_argument(
        "--check-convergence", action="store_true",
        help="rerun at cutoff N-2 and compare instead of emitting tables",
    )
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.scenario)
        if args.seed is not None:
            cfg.engine.seed = args.seed
        if args.cutoff is not None:
            cfg.engine.cutoff = args.cutoff
        if args.trajectories is not None:
            cfg.engine.trajectories = args.trajectories
        if args.branch_threshold is not None:
            cfg.engine.threshold = args.branch_threshold
        if args.out is not None:
            cfg.output.dir = str(args.out)
        if args.emit_plot_script:
            cfg.output.emit_plot_script = True
        cfg.engine.__post_init__()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(cfg.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    try:
        if args.check_convergence:
            result = convergence_check(cfg)
            sidecar = out_dir / f"{cfg.scenario}_convergence.json"
            write_sidecar([], cfg.to_dict(), sidecar, extra={"convergence": result})
            print(
                f"convergence {cfg.scenario}: cutoff {result['cutoff_hi']} vs "
                f"{result['cutoff_lo']}: max |dn| = {result['max_delta_n']:.3e}, "
                f"max |dg2| = {result['max_delta_g2']:.3e} "
                f"(tolerance {result['tolerance']:g}) -> "
                + ("PASS" if result["passed"] else "FAIL")
            )
            return EXIT_OK if result["passed"] else EXIT_CONVERGENCE

        t0 = time.perf_counter()
        timings = {}
        tables = run_scenario(cfg)
        timings["total"] = time.perf_counter() - t0
        for table in tables:
            path = write_csv(table, out_dir / f"{table.name}.csv")
            print(f"wrote {path}")
        sidecar = write_sidecar(tables, cfg.to_dict(), out_dir / f"{cfg.scenario}_meta.json", timings)
        print(f"wrote {sidecar}")
        if cfg.output.emit_plot_script:
            print(f"wrote {emit_plot_script(tables, out_dir)}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"numerical contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
