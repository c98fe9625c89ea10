#!/usr/bin/env python3
"""Run every bundled scenario, verify its certificates, and print a summary.

Usage::

    python3 scripts/run_scenarios.py [--outdir OUT]

Writes the usual per-scenario output files (trajectory.csv, events.csv,
summary.json, plot.gp) under ``OUT/<scenario>/`` and prints one line per
scenario with impulse counts, total delta-v, convergence time, and the
certificate verdict.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hybrid_rendezvous import analysis
from hybrid_rendezvous.cli import flow_drift_tolerance, run_scenario, write_outputs
from hybrid_rendezvous.config import parse_config, replace

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "scenarios"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="out", help="output root directory")
    args = ap.parse_args()

    header = f"{'scenario':<14} {'status':<10} {'impulses':<22} {'dv [m/s]':>9} {'conv [orb]':>10} {'cert':>5} {'wall [s]':>8}"
    print(header)
    print("-" * len(header))
    ok = True
    for path in sorted(SCENARIO_DIR.glob("*.cfg")):
        cfg = replace(parse_config(path), output_dir=str(Path(args.outdir) / path.stem))
        t0 = time.perf_counter()
        sol, p, spec = run_scenario(cfg)
        wall = time.perf_counter() - t0
        write_outputs(Path(cfg.output_dir), cfg, cfg.subsystem, sol, p, spec)

        flow = analysis.check_flow_invariance(sol, p, tol=flow_drift_tolerance(cfg))
        jump = analysis.check_jump_decrease(sol)
        cert = "PASS" if flow.passed and jump.passed else "FAIL"
        ok = ok and cert == "PASS"

        bud = analysis.budget(sol)
        ht = analysis.convergence_time(sol, p, spec)
        conv = f"{ht.t * p.n / (2 * 3.141592653589793):10.3f}" if ht else "     never"
        counts = " ".join(f"{k}={v}" for k, v in sorted(bud.impulse_counts.items())) or "-"
        print(
            f"{path.stem:<14} {sol.status:<10} {counts:<22} {bud.total_delta_v:9.4f} "
            f"{conv} {cert:>5} {wall:8.2f}"
        )
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
