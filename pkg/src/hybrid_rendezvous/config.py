"""Scenario configuration: a flat, commentable key-value text format.

A scenario file is plain text, one ``key = value`` pair per line; ``#``
starts a comment; blank lines are ignored.  Unknown keys are rejected with
the offending name.  Example::

    # orbit and actuator
    n = 0.0011            # mean motion, rad/s
    umax = 0.2            # impulse bound, m/s

    # dwell thresholds, in (0, 2)
    tau_m_z = 0.01
    tau_m_beta = 0.02
    tau_m_alpha = 0.01

    # initial plant state, m and m/s
    r_x = -60.0
    r_y = 1000.0
    v_x = 0.0
    v_y = 0.0

    subsystem = inplane
    t_max_orbits = 20

Initial timers default to the channel's own threshold (written as
``threshold``), so the first firing is not dwell-delayed; set a number in
[0, 2] to override.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .closed_loop import AttractorSpec, DwellThresholds, make_state
from .engine import SimulationOptions
from .hcw import OrbitParams


class ConfigError(ValueError):
    """A scenario file failed to parse or validate; message names the field."""


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully-specified simulation scenario."""

    # orbit and actuator
    n: float = 0.0011
    umax: float = 0.2
    # dwell thresholds
    tau_m_z: float = 0.01
    tau_m_beta: float = 0.02
    tau_m_alpha: float = 0.01
    # initial plant state
    r_x: float = 0.0
    r_y: float = 0.0
    r_z: float = 0.0
    v_x: float = 0.0
    v_y: float = 0.0
    v_z: float = 0.0
    # initial controller state; None timers mean "at threshold"
    q_z: float = 1.0
    q_alpha: float = 1.0
    tau_z: float | None = None
    tau_beta: float | None = None
    tau_alpha: float | None = None
    # execution
    subsystem: str = "full"
    integrator: str = "closed_form"
    step_h: float = 30.0
    t_max_orbits: float = 10.0
    j_max: int = 100_000
    event_tol: float = 1e-6
    # convergence radius; None means 1e-3 of the initial attractor distance
    convergence_eps: float | None = None
    output_dir: str = "out"

    def params(self) -> OrbitParams:
        return OrbitParams(n=self.n, umax=self.umax)

    def thresholds(self) -> DwellThresholds:
        return DwellThresholds(z=self.tau_m_z, beta=self.tau_m_beta, alpha=self.tau_m_alpha)

    def initial_state(self) -> np.ndarray:
        return make_state(
            r=(self.r_x, self.r_y, self.r_z),
            v=(self.v_x, self.v_y, self.v_z),
            q_z=self.q_z,
            tau_z=self.tau_m_z if self.tau_z is None else self.tau_z,
            tau_beta=self.tau_m_beta if self.tau_beta is None else self.tau_beta,
            q_alpha=self.q_alpha,
            tau_alpha=self.tau_m_alpha if self.tau_alpha is None else self.tau_alpha,
        )

    def options(self, subsystem: str | None = None) -> SimulationOptions:
        del subsystem  # options are subsystem-independent; kept for symmetry
        return SimulationOptions(
            step_h=self.step_h,
            t_max=self.t_max_orbits * 2.0 * np.pi / self.n,
            j_max=self.j_max,
            event_tol=self.event_tol,
            integrator=self.integrator,
        )

    def attractor(self, subsystem: str | None = None) -> AttractorSpec:
        """Attractor spec for the given subsystem, resolving the default
        convergence radius (1e-3 of the initial distance) if unset."""
        which = subsystem or self.subsystem
        if self.convergence_eps is not None:
            return AttractorSpec(which=which, epsilon=self.convergence_eps)
        from .closed_loop import distance_to_attractor

        d0 = distance_to_attractor(
            self.initial_state(), self.params(), AttractorSpec(which=which, epsilon=1.0)
        )
        eps = 1e-3 * d0 if d0 > 0 else 1e-9
        return AttractorSpec(which=which, epsilon=eps)


_FLOAT_KEYS = {
    "n", "umax", "tau_m_z", "tau_m_beta", "tau_m_alpha",
    "r_x", "r_y", "r_z", "v_x", "v_y", "v_z",
    "q_z", "q_alpha", "step_h", "t_max_orbits", "event_tol", "convergence_eps",
}
_TIMER_KEYS = {"tau_z", "tau_beta", "tau_alpha"}
_INT_KEYS = {"j_max"}
_STR_KEYS = {"subsystem", "integrator", "output_dir"}
_ALL_KEYS = _FLOAT_KEYS | _TIMER_KEYS | _INT_KEYS | _STR_KEYS


def parse_config(path: str | Path) -> ScenarioConfig:
    """Parse and validate a scenario file; raises :class:`ConfigError`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in _ALL_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = _convert(key, value, path, lineno)
    try:
        cfg = ScenarioConfig(**values)
        _validate(cfg)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return cfg


def _convert(key: str, value: str, path: Path, lineno: int) -> object:
    if key in _STR_KEYS:
        return value
    if key in _TIMER_KEYS and value == "threshold":
        return None
    try:
        if key in _INT_KEYS:
            return int(value)
        return float(value)
    except ValueError as exc:
        raise ConfigError(
            f"{path}:{lineno}: field {key!r}: cannot parse {value!r}"
        ) from exc


def _validate(cfg: ScenarioConfig) -> None:
    # Constructing the derived objects runs their own range checks and
    # surfaces the offending field in the message.
    try:
        cfg.params()
        cfg.thresholds()
        cfg.initial_state()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.subsystem not in ("z", "inplane", "full"):
        raise ConfigError(f"field 'subsystem': must be z, inplane or full, got {cfg.subsystem!r}")
    if cfg.integrator not in ("closed_form", "rk4"):
        raise ConfigError(f"field 'integrator': must be closed_form or rk4, got {cfg.integrator!r}")
    if cfg.t_max_orbits < 0:
        raise ConfigError(f"field 't_max_orbits': must be non-negative, got {cfg.t_max_orbits}")
    if cfg.step_h <= 0:
        raise ConfigError(f"field 'step_h': must be positive, got {cfg.step_h}")
    if cfg.event_tol <= 0 or cfg.event_tol >= cfg.step_h:
        raise ConfigError(
            f"field 'event_tol': must satisfy 0 < event_tol < step_h, got {cfg.event_tol}"
        )
    if cfg.j_max <= 0:
        raise ConfigError(f"field 'j_max': must be positive, got {cfg.j_max}")
    if cfg.convergence_eps is not None and cfg.convergence_eps <= 0:
        raise ConfigError(
            f"field 'convergence_eps': must be positive, got {cfg.convergence_eps}"
        )


def replace(cfg: ScenarioConfig, **overrides) -> ScenarioConfig:
    """A copy of ``cfg`` with fields overridden (re-validated)."""
    import dataclasses

    new = dataclasses.replace(cfg, **overrides)
    _validate(new)
    return new
