"""Command-line front end.

Three subcommands over scenario files (see :mod:`hybrid_rendezvous.config`
for the format):

* ``simulate --config <path> --subsystem z|inplane|full`` — run one scenario
  and write ``trajectory.csv``, ``events.csv``, ``summary.json`` and a
  gnuplot script ``plot.gp`` into the scenario's output directory;
* ``verify --config <path>`` — run the scenario and check the Lyapunov
  certificates (flow invariance and jump decrease), printing a per-check
  pass/fail table;
* ``sweep --config <path> --param <name> --values a,b,c`` — rerun the
  scenario for each parameter value and tabulate impulse counts, delta-v and
  convergence time (the dwell-time trade-off study).

Exit codes: 0 success, 1 usage/configuration error, 2 numerical failure,
3 certificate violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    budget,
    check_flow_invariance,
    check_jump_decrease,
    convergence_time,
)
from .closed_loop import (
    QA,
    QZ,
    TAUA,
    TAUB,
    TAUZ,
    build_system,
    lyapunov_values,
    zeta_of,
)
from .config import ConfigError, ScenarioConfig, parse_config, replace
from .engine import HybridSolution, IntegrationFailure, simulate
from .hcw import RX, RY, RZ, VX, VY, VZ, OrbitParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_CERTIFICATE = 3

SWEEPABLE = ("tau_m_z", "tau_m_beta", "tau_m_alpha", "umax")


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage errors with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(x: float) -> str:
    """Shortest round-trip decimal form, for byte-stable CSV output."""
    return repr(float(x))


def run_scenario(cfg: ScenarioConfig, subsystem: str | None = None):
    """Simulate one scenario; returns (solution, params, attractor spec)."""
    which = subsystem or cfg.subsystem
    p = cfg.params()
    system = build_system(p, cfg.thresholds(), subsystem=which)
    sol = simulate(system, cfg.initial_state(), cfg.options())
    return sol, p, cfg.attractor(which)


def flow_drift_tolerance(cfg: ScenarioConfig) -> float:
    """Flow-invariance drift budget: exact propagation must hold 1e-12;
    fixed-step integration is allowed 1e-8 per simulated orbit."""
    if cfg.integrator == "closed_form":
        return 1e-12
    return 1e-8 * max(1.0, cfg.t_max_orbits)


def classify_z_event(h3: float, p: OrbitParams, event_tol: float) -> str:
    """Label a z firing: dwell-delayed (timer margin at zero up to the event
    localization resolution) or triggered by an ``r_z`` zero crossing."""
    h3_tol = 4.0 * (p.n / (2.0 * np.pi)) * event_tol
    return "dwell_delayed" if h3 <= h3_tol else "zero_crossing"


# ---------------------------------------------------------------------------
# file writers
# ---------------------------------------------------------------------------

TRAJECTORY_COLUMNS = (
    "t,t_orbits,j,r_x,r_y,r_z,v_x,v_y,v_z,q_z,tau_z,tau_beta,q_alpha,tau_alpha,"
    "x,y,alpha,beta,V_z,V_beta,V_alpha"
)
EVENT_COLUMNS = (
    "t,t_orbits,j,channel,u_commanded,u_applied,delta_lyap,bound,h1,h2,h3,"
    "lyap_pre,lyap_post,classification,"
    "r_x_pre,r_y_pre,r_z_pre,v_x_pre,v_y_pre,v_z_pre"
)


def write_trajectory(path: Path, sol: HybridSolution, p: OrbitParams) -> None:
    lines = [TRAJECTORY_COLUMNS]
    orbit = 2.0 * np.pi / p.n
    for t, j, s in zip(sol.t, sol.j, sol.states):
        zeta = zeta_of(s, p)
        lyap = lyapunov_values(s, p)
        row = (
            [_fmt(t), _fmt(t / orbit), str(int(j))]
            + [_fmt(s[i]) for i in (RX, RY, RZ, VX, VY, VZ)]
            + [_fmt(s[QZ]), _fmt(s[TAUZ]), _fmt(s[TAUB]), _fmt(s[QA]), _fmt(s[TAUA])]
            + [_fmt(z) for z in zeta]
            + [_fmt(lyap["z"]), _fmt(lyap["beta"]), _fmt(lyap["alpha"])]
        )
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def write_events(
    path: Path, sol: HybridSolution, p: OrbitParams, event_tol: float
) -> None:
    lines = [EVENT_COLUMNS]
    orbit = 2.0 * np.pi / p.n
    for ev in sol.events:
        if ev.channel == "beta":
            h1, h2, h3 = "", "", _fmt(ev.margins[0])
            classification = ""
        else:
            h1, h2, h3 = _fmt(ev.margins[0]), _fmt(ev.margins[1]), _fmt(ev.margins[2])
            classification = (
                classify_z_event(float(ev.margins[2]), p, event_tol)
                if ev.channel == "z"
                else ""
            )
        row = [
            _fmt(ev.t),
            _fmt(ev.t / orbit),
            str(ev.j_pre + 1),
            ev.channel,
            _fmt(ev.u_commanded),
            _fmt(ev.u_applied),
            _fmt(ev.delta_lyap),
            _fmt(ev.bound),
            h1,
            h2,
            h3,
            _fmt(ev.lyap_pre),
            _fmt(ev.lyap_post),
            classification,
        ] + [_fmt(ev.state_pre[i]) for i in (RX, RY, RZ, VX, VY, VZ)]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")


def build_summary(
    cfg: ScenarioConfig, subsystem: str, sol: HybridSolution, p: OrbitParams, spec
) -> dict:
    bud = budget(sol)
    conv = convergence_time(sol, p, spec)
    flow_report = check_flow_invariance(sol, p, tol=flow_drift_tolerance(cfg))
    jump_report = check_jump_decrease(sol)
    orbit = 2.0 * np.pi / p.n
    return {
        "version": __version__,
        "subsystem": subsystem,
        "integrator": cfg.integrator,
        "n": cfg.n,
        "umax": cfg.umax,
        "thresholds": {
            "z": cfg.tau_m_z,
            "beta": cfg.tau_m_beta,
            "alpha": cfg.tau_m_alpha,
        },
        "status": sol.status,
        "t_final": float(sol.t[-1]),
        "t_final_orbits": float(sol.t[-1]) / orbit,
        "j_final": int(sol.j[-1]),
        "budget": {
            "impulse_counts": bud.impulse_counts,
            "event_counts": bud.event_counts,
            "delta_v": bud.delta_v,
            "total_delta_v": bud.total_delta_v,
            "last_impulse_time": bud.last_impulse_time,
        },
        "convergence": {
            "epsilon": spec.epsilon,
            "converged": conv is not None,
            "t": None if conv is None else conv.t,
            "t_orbits": None if conv is None else conv.t / orbit,
            "j": None if conv is None else conv.j,
        },
        "certificates": {
            "flow_invariance": {
                "passed": flow_report.passed,
                "tolerance": flow_drift_tolerance(cfg),
                "worst_drift": flow_report.arc_drift,
                "violations": len(flow_report.violations),
            },
            "jump_decrease": {
                "passed": jump_report.passed,
                "events_checked": len(sol.events),
                "min_margin": (
                    min(jump_report.jump_margins) if jump_report.jump_margins else None
                ),
                "violations": len(jump_report.violations),
            },
        },
    }


PLOT_TEMPLATE = """\
# gnuplot script over trajectory.csv / events.csv in this directory.
# Layout: relative position, velocity, Lyapunov values, impulse magnitudes.
set datafile separator ','
set terminal pngcairo size 1200,900
set output 'scenario.png'
set multiplot layout 2,2
set key autotitle columnhead
set xlabel 'orbits'

set title 'relative position [m]'
plot 'trajectory.csv' using 2:4 with lines title 'r_x', \\
     '' using 2:5 with lines title 'r_y', \\
     '' using 2:6 with lines title 'r_z'

set title 'relative velocity [m/s]'
plot 'trajectory.csv' using 2:7 with lines title 'v_x', \\
     '' using 2:8 with lines title 'v_y', \\
     '' using 2:9 with lines title 'v_z'

set title 'Lyapunov functions'
set logscale y
plot 'trajectory.csv' using 2:($19 + 1e-18) with lines title 'V_z', \\
     '' using 2:($20 + 1e-18) with lines title 'V_beta', \\
     '' using 2:($21 + 1e-18) with lines title 'V_alpha'
unset logscale y

set title 'applied impulses [m/s]'
plot 'events.csv' using 2:(abs($6)) with impulses title '|u|'
unset multiplot
"""


def write_outputs(
    out_dir: Path, cfg: ScenarioConfig, subsystem: str, sol, p, spec
) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory(out_dir / "trajectory.csv", sol, p)
    write_events(out_dir / "events.csv", sol, p, cfg.event_tol)
    summary = build_summary(cfg, subsystem, sol, p, spec)
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    (out_dir / "plot.gp").write_text(PLOT_TEMPLATE)
    return summary


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    subsystem = args.subsystem or cfg.subsystem
    start = time.perf_counter()
    try:
        sol, p, spec = run_scenario(cfg, subsystem)
    except IntegrationFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    elapsed = time.perf_counter() - start
    if sol.status == "jump_budget_exhausted":
        print("numerical failure: jump budget exhausted (possible Zeno)", file=sys.stderr)
        return EXIT_NUMERICAL
    out_dir = Path(args.out or cfg.output_dir)
    summary = write_outputs(out_dir, cfg, subsystem, sol, p, spec)
    certs = summary["certificates"]
    print(
        f"{subsystem}: status={sol.status} t={summary['t_final_orbits']:.3f} orbits "
        f"jumps={summary['j_final']} dv={summary['budget']['total_delta_v']:.4f} m/s "
        f"({elapsed:.2f} s) -> {out_dir}"
    )
    if not (certs["flow_invariance"]["passed"] and certs["jump_decrease"]["passed"]):
        print("certificate violation: see summary.json", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = parse_config(args.config)
    try:
        sol, p, spec = run_scenario(cfg, cfg.subsystem)
    except IntegrationFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if sol.status == "jump_budget_exhausted":
        print("numerical failure: jump budget exhausted (possible Zeno)", file=sys.stderr)
        return EXIT_NUMERICAL
    flow_report = check_flow_invariance(sol, p, tol=flow_drift_tolerance(cfg))
    jump_report = check_jump_decrease(sol)
    rows = [
        (
            "flow invariance",
            flow_report.passed,
            f"worst drift {max(flow_report.arc_drift.values()):.3e} "
            f"(tol {flow_drift_tolerance(cfg):.0e})",
        ),
        (
            "jump decrease",
            jump_report.passed,
            f"{len(sol.events)} events, min margin "
            + (
                f"{min(jump_report.jump_margins):.3e}"
                if jump_report.jump_margins
                else "n/a"
            ),
        ),
    ]
    for name, passed, detail in rows:
        print(f"{'PASS' if passed else 'FAIL'}  {name:<16} {detail}")
    for rep in (flow_report, jump_report):
        for v in rep.violations:
            print(
                f"      violation at t={v.t:.3f} j={v.j}: {v.quantity} "
                f"observed {v.observed:.6e} vs bound {v.bound:.6e}"
            )
    return EXIT_OK if all(r[1] for r in rows) else EXIT_CERTIFICATE


def cmd_sweep(args) -> int:
    cfg = parse_config(args.config)
    if args.param not in SWEEPABLE:
        print(
            f"error: field 'param': must be one of {', '.join(SWEEPABLE)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        print(f"error: field 'values': cannot parse {args.values!r}", file=sys.stderr)
        return EXIT_USAGE
    if not values:
        print("error: field 'values': empty list", file=sys.stderr)
        return EXIT_USAGE
    header = (
        f"{args.param:>12} {'impulses':>9} {'total_dv':>10} "
        f"{'conv_orbits':>12} {'status':>10}"
    )
    print(header)
    csv_lines = [f"{args.param},impulse_count,total_delta_v,convergence_orbits,status"]
    for value in values:
        try:
            case = replace(cfg, **{args.param: value})
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        try:
            sol, p, spec = run_scenario(case, case.subsystem)
        except IntegrationFailure as exc:
            print(f"numerical failure at {args.param}={value}: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        bud = budget(sol)
        conv = convergence_time(sol, p, spec)
        orbit = 2.0 * np.pi / p.n
        count = sum(bud.impulse_counts.values())
        conv_orbits = None if conv is None else conv.t / orbit
        conv_str = "never" if conv_orbits is None else f"{conv_orbits:.3f}"
        print(
            f"{value:>12.6g} {count:>9d} {bud.total_delta_v:>10.4f} "
            f"{conv_str:>12} {sol.status:>10}"
        )
        csv_lines.append(
            f"{_fmt(value)},{count},{_fmt(bud.total_delta_v)},"
            f"{'' if conv_orbits is None else _fmt(conv_orbits)},{sol.status}"
        )
    out_dir = Path(args.out or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "sweep.csv").write_text("\n".join(csv_lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hybrid-rdv",
        description="Impulsive hybrid-control rendezvous simulator and verifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a scenario and export results")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--subsystem", choices=("z", "inplane", "full"), default=None)
    p_sim.add_argument("--out", default=None, help="output directory override")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="run a scenario and check certificates")
    p_ver.add_argument("--config", required=True)
    p_ver.set_defaults(func=cmd_verify)

    p_swp = sub.add_parser("sweep", help="rerun a scenario over parameter values")
    p_swp.add_argument("--config", required=True)
    p_swp.add_argument("--param", required=True)
    p_swp.add_argument("--values", required=True, help="comma-separated list")
    p_swp.add_argument("--out", default=None, help="output directory override")
    p_swp.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
