#!/usr/bin/env python3
"""Sweep the out-of-plane dwell threshold and tabulate the trade-off.

A larger dwell threshold forces longer waits between firings: fewer, later
impulses and slower convergence, but each firing happens closer to the ideal
zero-crossing, so the total delta-v drops.  This script sweeps tau^M for the
vertical channel on the bundled fast scenario and prints the resulting
impulse count, convergence time, and delta-v per value.

Usage::

    python3 scripts/dwell_tradeoff.py [--values 0.01,0.05,0.1,0.25,0.5]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from hybrid_rendezvous import analysis
from hybrid_rendezvous.cli import run_scenario
from hybrid_rendezvous.config import parse_config, replace

SCENARIO = Path(__file__).resolve().parents[1] / "scenarios" / "z_fast.cfg"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--values",
        default="0.01,0.05,0.1,0.25,0.5",
        help="comma-separated dwell thresholds in (0, 2)",
    )
    args = ap.parse_args()
    values = [float(v) for v in args.values.split(",")]

    base = parse_config(SCENARIO)
    print(f"{'tau_m_z':>8} {'impulses':>8} {'conv [orbits]':>13} {'dv [m/s]':>9}")
    for tau_m in values:
        cfg = replace(base, tau_m_z=tau_m, t_max_orbits=10.0)
        sol, p, spec = run_scenario(cfg)
        bud = analysis.budget(sol)
        ht = analysis.convergence_time(sol, p, spec)
        conv = f"{ht.t / p.period:13.3f}" if ht else f"{'never':>13}"
        print(
            f"{tau_m:8.3f} {bud.impulse_counts.get('z', 0):8d} {conv} "
            f"{bud.total_delta_v:9.4f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
