"""Composition of the three stabilizer channels with the HCW plant.

The full closed-loop state is a flat 11-vector: the plant ``(r, v)`` followed
by the controller variables of each channel::

    index  0    1    2    3    4    5    6    7      8         9        10
    value  r_x  r_y  r_z  v_x  v_y  v_z  q_z  tau_z  tau_beta  q_alpha  tau_alpha

The transformed in-plane view (x, y, alpha, beta) is always recomputed from
the plant, never stored.  Subsystem variants (z only, in-plane only) run on
the same 11-vector with the unused channels simply absent from the jump list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import controllers as ctl
from .engine import GuardConjunction, HybridSystem, JumpChannel, JumpOutcome
from .hcw import (
    INPLANE,
    RX,
    RY,
    RZ,
    VX,
    VY,
    VZ,
    OrbitParams,
    hcw_derivative,
    hcw_stm,
    to_zeta,
)

QZ, TAUZ, TAUB, QA, TAUA = 6, 7, 8, 9, 10
DIM = 11

SUBSYSTEM_CHANNELS = {
    "z": ("z",),
    "inplane": ("beta", "alpha"),
    "full": ("z", "beta", "alpha"),
}


@dataclass(frozen=True)
class DwellThresholds:
    """Per-channel dwell-time thresholds tau^M, each in (0, 2)."""

    z: float = 0.01
    beta: float = 0.02
    alpha: float = 0.01

    def __post_init__(self):
        for name in ("z", "beta", "alpha"):
            v = getattr(self, name)
            if not (0.0 < v < 2.0):
                raise ValueError(
                    f"dwell threshold for {name} channel must lie in (0, 2), got {v}"
                )


@dataclass(frozen=True)
class AttractorSpec:
    """Which rest set to measure distance to, and the convergence radius.

    ``which`` selects the zeroed components: ``z`` -> (r_z, v_z),
    ``inplane`` -> (x, y, alpha, beta), ``full`` -> both.  Logic variables and
    timers are unconstrained.  The distance is the Lyapunov-consistent
    quadratic form, so ``distance**2`` equals the sum of the corresponding
    Lyapunov functions.
    """

    which: str = "full"
    epsilon: float = 1e-3

    def __post_init__(self):
        if self.which not in SUBSYSTEM_CHANNELS:
            raise ValueError(f"unknown attractor {self.which!r}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


def make_state(
    r=(0.0, 0.0, 0.0),
    v=(0.0, 0.0, 0.0),
    q_z: float = 1.0,
    tau_z: float = 0.0,
    tau_beta: float = 0.0,
    q_alpha: float = 1.0,
    tau_alpha: float = 0.0,
) -> np.ndarray:
    """Assemble a full closed-loop state vector."""
    if q_z not in (-1.0, 1.0) or q_alpha not in (-1.0, 1.0):
        raise ValueError("logic variables must be exactly -1 or 1")
    for name, tau in (("tau_z", tau_z), ("tau_beta", tau_beta), ("tau_alpha", tau_alpha)):
        if not (0.0 <= tau <= 2.0):
            raise ValueError(f"{name} must lie in [0, 2], got {tau}")
    state = np.zeros(DIM)
    state[RX], state[RY], state[RZ] = r
    state[VX], state[VY], state[VZ] = v
    state[QZ], state[TAUZ] = q_z, tau_z
    state[TAUB] = tau_beta
    state[QA], state[TAUA] = q_alpha, tau_alpha
    return state


def zeta_of(state: np.ndarray, p: OrbitParams) -> np.ndarray:
    """Transformed in-plane view (x, y, alpha, beta) of a full state."""
    return to_zeta(state[list(INPLANE)], p)


def full_flow(state: np.ndarray, p: OrbitParams) -> np.ndarray:
    """Closed-loop vector field: HCW plant, frozen logic variables, timer
    flows."""
    out = np.zeros(DIM)
    out[:6] = hcw_derivative(state[:6], p)
    out[TAUZ] = ctl.timer_rate(state[TAUZ], p.n)
    out[TAUB] = ctl.timer_rate(state[TAUB], p.n)
    out[TAUA] = ctl.timer_rate(state[TAUA], p.n)
    return out


def make_flow(p: OrbitParams):
    """Derivative callable for the fixed-step integrator."""

    def flow(state: np.ndarray) -> np.ndarray:
        return full_flow(state, p)

    return flow


def make_flow_to(p: OrbitParams):
    """Exact flow propagator: HCW transition matrix on the plant, closed-form
    timer advance, constant logic variables."""

    def flow_to(state: np.ndarray, dt: float) -> np.ndarray:
        out = np.array(state)
        out[:6] = hcw_stm(p, dt) @ state[:6]
        out[TAUZ] = ctl.timer_advance(state[TAUZ], dt, p.n)
        out[TAUB] = ctl.timer_advance(state[TAUB], dt, p.n)
        out[TAUA] = ctl.timer_advance(state[TAUA], dt, p.n)
        return out

    return flow_to


# ---------------------------------------------------------------------------
# Lyapunov functions and attractor distance
# ---------------------------------------------------------------------------


def v_z(state: np.ndarray, p: OrbitParams) -> float:
    return ctl.z_lyapunov(state[RZ], state[VZ], p.n)


def v_beta(state: np.ndarray, p: OrbitParams) -> float:
    return ctl.beta_lyapunov(zeta_of(state, p)[3])


def v_alpha(state: np.ndarray, p: OrbitParams) -> float:
    x, y, al, _ = zeta_of(state, p)
    return ctl.alpha_lyapunov(x, y, al, p.n)


def lyapunov_values(state: np.ndarray, p: OrbitParams) -> dict[str, float]:
    """All three per-channel Lyapunov values at a state."""
    return {"z": v_z(state, p), "beta": v_beta(state, p), "alpha": v_alpha(state, p)}


def distance_to_attractor(
    state: np.ndarray,
    p: OrbitParams,
    spec: AttractorSpec,
    weighted: bool = True,
) -> float:
    """Distance of a state to the rest set named by ``spec.which``.

    With ``weighted=True`` (default) this is the Lyapunov-consistent form:
    ``distance**2`` is the sum of the selected channels' Lyapunov functions,
    which makes convergence thresholds scale-free across orbit rates.  With
    ``weighted=False`` it is the plain Euclidean norm of the zeroed
    components (r_z, v_z, x, y, alpha, beta as applicable).
    """
    zeta = zeta_of(state, p)
    if weighted:
        total = 0.0
        if spec.which in ("z", "full"):
            total += v_z(state, p)
        if spec.which in ("inplane", "full"):
            total += ctl.beta_lyapunov(zeta[3])
            total += ctl.alpha_lyapunov(zeta[0], zeta[1], zeta[2], p.n)
        return float(np.sqrt(total))
    comps = []
    if spec.which in ("z", "full"):
        comps += [state[RZ], state[VZ]]
    if spec.which in ("inplane", "full"):
        comps += list(zeta)
    return float(np.linalg.norm(comps))


# ---------------------------------------------------------------------------
# channel adapters over the 11-vector
# ---------------------------------------------------------------------------


def make_z_channel(p: OrbitParams, tau_m: float) -> JumpChannel:
    guard = GuardConjunction(
        terms=(
            lambda s: s[RZ] * (s[VZ] - p.n * s[RZ]),
            lambda s: s[QZ] * s[VZ],
            lambda s: s[TAUZ] - tau_m,
        )
    )

    def jump(state: np.ndarray) -> JumpOutcome:
        vz = state[VZ]
        vz_plus, q_plus, u_applied = ctl.z_jump(state[RZ], vz, state[QZ], p)
        out = np.array(state)
        out[VZ] = vz_plus
        out[QZ] = q_plus
        out[TAUZ] = 0.0
        u_cmd = -vz
        return JumpOutcome(
            state=out,
            u_commanded=u_cmd,
            u_applied=u_applied,
            lyap_pre=v_z(state, p),
            lyap_post=v_z(out, p),
            bound=-u_cmd * u_applied,  # -v_z * sat(v_z)
        )

    return JumpChannel(name="z", guard=guard, jump=jump)


def make_beta_channel(p: OrbitParams, tau_m: float) -> JumpChannel:
    guard = GuardConjunction(terms=(lambda s: s[TAUB] - tau_m,))

    def jump(state: np.ndarray) -> JumpOutcome:
        beta = zeta_of(state, p)[3]
        u_cmd = beta / 3.0
        u_applied = ctl.beta_input(beta, p.umax)
        out = np.array(state)
        out[VY] += u_applied
        out[TAUB] = 0.0
        return JumpOutcome(
            state=out,
            u_commanded=u_cmd,
            u_applied=u_applied,
            lyap_pre=v_beta(state, p),
            lyap_post=v_beta(out, p),
            bound=-u_applied * u_cmd,  # -sat(beta/3) * (beta/3)
        )

    return JumpChannel(name="beta", guard=guard, jump=jump)


def make_alpha_channel(
    p: OrbitParams, tau_m: float, corrupt_sign: bool = False
) -> JumpChannel:
    """Alpha channel adapter.

    ``corrupt_sign`` is a test hook that flips the sign of the applied
    radial impulse, breaking the jump-decrease certificate on purpose so the
    verifier's violation path can be exercised.
    """

    def h1(s: np.ndarray) -> float:
        x, y, al, _ = zeta_of(s, p)
        return (y - p.n * al / 2.0 - p.n * x) * x

    def h2(s: np.ndarray) -> float:
        _, y, al, _ = zeta_of(s, p)
        return s[QA] * (y - p.n * al / 2.0)

    guard = GuardConjunction(terms=(h1, h2, lambda s: s[TAUA] - tau_m))

    def jump(state: np.ndarray) -> JumpOutcome:
        _, y, al, _ = zeta_of(state, p)
        u_cmd = ctl.alpha_input(y, al, p)
        _, _, q_plus, s = ctl.alpha_jump(y, al, state[QA], p)
        applied = -s if corrupt_sign else s
        out = np.array(state)
        out[VX] += applied
        out[QA] = q_plus
        out[TAUA] = 0.0
        return JumpOutcome(
            state=out,
            u_commanded=u_cmd,
            u_applied=applied,
            lyap_pre=v_alpha(state, p),
            lyap_post=v_alpha(out, p),
            bound=-2.0 * s * u_cmd,  # -2 sat(u_x) * u_x
        )

    return JumpChannel(name="alpha", guard=guard, jump=jump)


def full_jump_sets(
    state: np.ndarray, p: OrbitParams, thresholds: DwellThresholds
) -> set[str]:
    """Names of the channels whose guard conjunction is satisfied at a state."""
    channels = (
        make_z_channel(p, thresholds.z),
        make_beta_channel(p, thresholds.beta),
        make_alpha_channel(p, thresholds.alpha),
    )
    return {ch.name for ch in channels if ch.guard.margin(state) >= 0.0}


def build_system(
    p: OrbitParams,
    thresholds: DwellThresholds,
    subsystem: str = "full",
    attractor: AttractorSpec | None = None,
    corrupt_alpha_sign: bool = False,
) -> HybridSystem:
    """Assemble the closed-loop hybrid system for a subsystem variant.

    ``subsystem`` selects the active channels: ``"z"``, ``"inplane"``
    (beta + alpha), or ``"full"``.  The flow is always the full 11-vector
    field; inactive channels simply never jump.
    """
    if subsystem not in SUBSYSTEM_CHANNELS:
        raise ValueError(f"unknown subsystem {subsystem!r}")
    factories = {
        "z": lambda: make_z_channel(p, thresholds.z),
        "beta": lambda: make_beta_channel(p, thresholds.beta),
        "alpha": lambda: make_alpha_channel(
            p, thresholds.alpha, corrupt_sign=corrupt_alpha_sign
        ),
    }
    channels = tuple(factories[name]() for name in SUBSYSTEM_CHANNELS[subsystem])
    spec = attractor or AttractorSpec(which=subsystem)

    def distance(state: np.ndarray) -> float:
        return distance_to_attractor(state, p, spec)

    return HybridSystem(
        flow=make_flow(p),
        channels=channels,
        flow_to=make_flow_to(p),
        distance=distance,
    )
