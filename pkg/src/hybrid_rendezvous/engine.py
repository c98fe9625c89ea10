"""Generic hybrid-automaton execution.

A hybrid system here is a continuous flow plus a list of jump channels.  Each
channel owns a guard (a conjunction of scalar margins; the state is in the
channel's jump set iff the smallest margin is >= 0) and a jump map.  The
executor alternates fixed-step flow integration with jump application:

* jumps preempt flow — whenever any guard is satisfied, jumps are applied
  before integrating further;
* among simultaneously active channels, a fixed priority order picks one
  jump at a time, re-evaluating the remaining guards on the post-jump state;
* guard activations inside a flow step are localized in time by left-biased
  bisection, re-integrating from the step's start state at each probe.

Jump sets are closed: margins are compared against zero with exact
floating-point ``>=`` after localization, with no epsilon inflation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np


class SimulationError(Exception):
    """Base class for executor failures."""


class IntegrationFailure(SimulationError):
    """A flow step produced a non-finite state or derivative."""

    def __init__(self, message: str, state: np.ndarray | None = None):
        super().__init__(message)
        self.state = state


class EventBracketError(ValueError):
    """Bisection preconditions violated (bad bracket or no crossing)."""


class HybridTime(NamedTuple):
    """A point (t, j) of a hybrid time domain: continuous time in seconds
    and cumulative jump count."""

    t: float
    j: int


@dataclass(frozen=True)
class GuardConjunction:
    """A jump-set membership test: conjunction of scalar margin functions.

    The state is in the jump set iff ``min_i terms[i](state) >= 0``.
    """

    terms: tuple[Callable[[np.ndarray], float], ...]

    def margins(self, state: np.ndarray) -> np.ndarray:
        return np.array([g(state) for g in self.terms])

    def margin(self, state: np.ndarray) -> float:
        return min(g(state) for g in self.terms)


@dataclass(frozen=True)
class JumpOutcome:
    """What a channel's jump map reports back to the executor."""

    state: np.ndarray
    u_commanded: float
    u_applied: float
    lyap_pre: float
    lyap_post: float
    bound: float  # theorem upper bound on lyap_post - lyap_pre


@dataclass(frozen=True)
class JumpChannel:
    """One impulse channel: a named guard conjunction plus a jump map."""

    name: str
    guard: GuardConjunction
    jump: Callable[[np.ndarray], JumpOutcome]


@dataclass(frozen=True)
class ImpulseEvent:
    """Record of one applied jump.

    ``j_pre`` is the jump counter before the event (the event itself is jump
    number ``j_pre + 1``).  ``margins`` are the guard margins evaluated at the
    trigger state.  ``delta_lyap`` is the observed change of the channel's
    Lyapunov function and ``bound`` the theorem bound it must not exceed.
    """

    channel: str
    t: float
    j_pre: int
    u_commanded: float
    u_applied: float
    state_pre: np.ndarray
    state_post: np.ndarray
    margins: np.ndarray
    lyap_pre: float
    lyap_post: float
    bound: float

    @property
    def delta_lyap(self) -> float:
        return self.lyap_post - self.lyap_pre


@dataclass(frozen=True)
class SimulationOptions:
    """Fixed-step executor knobs.

    ``jump_priority`` orders channel names for resolving simultaneous guard
    activations; channels not listed keep their construction order after the
    listed ones.  ``convergence_eps`` (paired with a system distance function)
    enables early stopping once the distance stays below the threshold.
    """

    step_h: float
    t_max: float
    j_max: int = 100_000
    event_tol: float = 1e-6
    jump_priority: tuple[str, ...] = ("z", "beta", "alpha")
    integrator: str = "closed_form"
    convergence_eps: float | None = None

    def __post_init__(self):
        if self.step_h <= 0:
            raise ValueError(f"step_h must be positive, got {self.step_h}")
        if self.t_max < 0:
            raise ValueError(f"t_max must be non-negative, got {self.t_max}")
        if self.event_tol <= 0 or self.event_tol >= self.step_h:
            raise ValueError(
                f"event_tol must satisfy 0 < event_tol < step_h, got {self.event_tol}"
            )
        if self.j_max <= 0:
            raise ValueError(f"j_max must be a positive integer, got {self.j_max}")
        if self.integrator not in ("closed_form", "rk4"):
            raise ValueError(f"unknown integrator {self.integrator!r}")


@dataclass(frozen=True)
class HybridSystem:
    """Flow + jump channels + optional exact propagator and distance metric."""

    flow: Callable[[np.ndarray], np.ndarray]
    channels: tuple[JumpChannel, ...]
    flow_to: Callable[[np.ndarray, float], np.ndarray] | None = None
    distance: Callable[[np.ndarray], float] | None = None


@dataclass
class HybridSolution:
    """A sampled hybrid arc: states indexed by hybrid time, plus events.

    Samples include every integration step endpoint and the pre/post state of
    every jump (jumps contribute two samples at the same ``t`` with ``j``
    incremented).  ``status`` is one of ``"t_max"``, ``"converged"``,
    ``"jump_budget_exhausted"``.
    """

    t: np.ndarray
    j: np.ndarray
    states: np.ndarray
    events: list[ImpulseEvent]
    status: str
    options: SimulationOptions

    def arcs(self) -> list[tuple[int, int]]:
        """Index ranges [start, stop) of maximal constant-``j`` sample runs
        (the flow arcs, including zero-duration ones between immediate
        jumps)."""
        out = []
        start = 0
        for i in range(1, len(self.j)):
            if self.j[i] != self.j[i - 1]:
                out.append((start, i))
                start = i
        out.append((start, len(self.j)))
        return out

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> HybridTime:
        return HybridTime(float(self.t[-1]), int(self.j[-1]))


def rk4_step(state: np.ndarray, derivative_fn, h: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta update of step ``h``."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    k1 = derivative_fn(state)
    k2 = derivative_fn(state + 0.5 * h * k1)
    k3 = derivative_fn(state + 0.5 * h * k2)
    k4 = derivative_fn(state + h * k3)
    if not np.all(np.isfinite(k4)):
        raise IntegrationFailure("non-finite derivative encountered", state)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def locate_event(
    margin: Callable[[np.ndarray], float],
    flow_to: Callable[[np.ndarray, float], np.ndarray],
    state_a: np.ndarray,
    state_b: np.ndarray,
    t_a: float,
    t_b: float,
    event_tol: float,
) -> tuple[float, np.ndarray]:
    """Localize the first guard activation inside a flow step by bisection.

    Requires ``margin(state_a) < 0 <= margin(state_b)``.  Each probe
    re-integrates from ``state_a`` (no guard interpolation).  The bisection is
    left-biased: it keeps the earliest sign change found, so a guard that is
    non-monotone within the bracket resolves to its first crossing at the
    bracket resolution.  Returns the first probed ``(t, state)`` with
    ``margin >= 0`` once the bracket is narrower than ``event_tol``.
    """
    if t_a >= t_b:
        raise EventBracketError(f"need t_a < t_b, got [{t_a}, {t_b}]")
    if margin(state_a) >= 0.0:
        raise EventBracketError("bracket precondition violated: margin(state_a) >= 0")
    if margin(state_b) < 0.0:
        raise EventBracketError("no guard crossing inside the bracket")
    lo, hi = t_a, t_b
    state_hi = state_b
    while hi - lo > event_tol:
        mid = 0.5 * (lo + hi)
        state_mid = flow_to(state_a, mid - t_a)
        if margin(state_mid) >= 0.0:
            hi, state_hi = mid, state_mid
        else:
            lo = mid
    return hi, state_hi


def order_channels(
    channels: Sequence[JumpChannel], priority: Sequence[str]
) -> list[JumpChannel]:
    """Sort channels by the priority list; unlisted names keep their relative
    order after the listed ones."""
    rank = {name: i for i, name in enumerate(priority)}
    decorated = sorted(
        enumerate(channels), key=lambda kv: (rank.get(kv[1].name, len(rank)), kv[0])
    )
    return [ch for _, ch in decorated]


def resolve_jumps(
    state: np.ndarray,
    t: float,
    j: int,
    channels: Sequence[JumpChannel],
    priority: Sequence[str],
    j_max: int,
) -> tuple[np.ndarray, list[ImpulseEvent], bool]:
    """Apply jumps while any guard is active, one at a time by priority.

    Guards are re-evaluated on the post-jump state after every applied jump,
    so a lower-priority channel still active after a higher-priority jump
    fires next at the same ``t``.  Returns the post-jump state, the events in
    application order, and a flag set when ``j_max`` was hit while guards were
    still active (the Zeno guard).
    """
    ordered = order_channels(channels, priority)
    active = [ch for ch in ordered if ch.guard.margin(state) >= 0.0]
    if not active:
        raise ValueError("resolve_jumps requires at least one active channel")
    events: list[ImpulseEvent] = []
    budget_hit = False
    while active:
        if j + len(events) >= j_max:
            budget_hit = True
            break
        ch = active[0]
        margins = ch.guard.margins(state)
        outcome = ch.jump(state)
        events.append(
            ImpulseEvent(
                channel=ch.name,
                t=t,
                j_pre=j + len(events),
                u_commanded=outcome.u_commanded,
                u_applied=outcome.u_applied,
                state_pre=state,
                state_post=outcome.state,
                margins=margins,
                lyap_pre=outcome.lyap_pre,
                lyap_post=outcome.lyap_post,
                bound=outcome.bound,
            )
        )
        state = outcome.state
        active = [ch for ch in ordered if ch.guard.margin(state) >= 0.0]
    return state, events, budget_hit


def simulate(
    system: HybridSystem, x0: np.ndarray, opts: SimulationOptions
) -> HybridSolution:
    """Run the hybrid executor from ``x0`` until ``t_max``, ``j_max``, or the
    optional convergence criterion.

    Deterministic: identical ``(x0, opts)`` produce bit-identical solutions.
    """
    if opts.integrator == "closed_form":
        if system.flow_to is None:
            raise ValueError("closed_form integrator requires system.flow_to")
        flow_to = system.flow_to
    else:
        flow = system.flow

        def flow_to(state: np.ndarray, dt: float) -> np.ndarray:
            return rk4_step(state, flow, dt)

    state = np.array(x0, dtype=float)
    if not np.all(np.isfinite(state)):
        raise IntegrationFailure("non-finite initial state", state)
    t, j = 0.0, 0
    ts, js, samples = [t], [j], [state]
    events: list[ImpulseEvent] = []
    status = "t_max"

    def union_margin(s: np.ndarray) -> float:
        return max(ch.guard.margin(s) for ch in system.channels)

    def converged(s: np.ndarray) -> bool:
        return (
            opts.convergence_eps is not None
            and system.distance is not None
            and system.distance(s) <= opts.convergence_eps
        )

    while True:
        if t >= opts.t_max:
            status = "t_max"
            break
        # Jumps preempt flow: drain the active set before integrating.
        if any(ch.guard.margin(state) >= 0.0 for ch in system.channels):
            state, new_events, budget_hit = resolve_jumps(
                state, t, j, system.channels, opts.jump_priority, opts.j_max
            )
            for ev in new_events:
                events.append(ev)
                j += 1
                ts.append(t)
                js.append(j)
                samples.append(ev.state_post)
            if budget_hit:
                status = "jump_budget_exhausted"
                break
        if converged(state):
            status = "converged"
            break
        h = min(opts.step_h, opts.t_max - t)
        candidate = flow_to(state, h)
        if not np.all(np.isfinite(candidate)):
            raise IntegrationFailure("non-finite state during flow", candidate)
        if union_margin(candidate) >= 0.0:
            # A guard activates inside this step; land exactly on it.  The
            # top-of-loop drain guarantees union_margin(state) < 0 here.
            t_star, state = locate_event(
                union_margin, flow_to, state, candidate, t, t + h, opts.event_tol
            )
            t = t_star
        else:
            state = candidate
            t += h
        ts.append(t)
        js.append(j)
        samples.append(state)

    return HybridSolution(
        t=np.array(ts),
        j=np.array(js, dtype=int),
        states=np.array(samples),
        events=events,
        status=status,
        options=opts,
    )
