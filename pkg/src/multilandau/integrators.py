"""Forward Euler and implicit midpoint time stepping of particle velocities."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import SystemState
from .errors import NonConvergence
from .interaction import rhs


class Scheme(str, enum.Enum):
    FORWARD_EULER = "forward_euler"
    IMPLICIT_MIDPOINT = "implicit_midpoint"


@dataclass(frozen=True)
class StepControl:
    dt: float
    scheme: Scheme = Scheme.FORWARD_EULER
    fp_tolerance: float = 1e-8
    fp_max_iters: int = 200
    euler_predictor: bool = False

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.fp_tolerance > 0:
            raise ValueError("fp_tolerance must be positive")
        if int(self.fp_max_iters) < 1:
            raise ValueError("fp_max_iters must be >= 1")


def step_forward_euler(state: SystemState, grids, dt: float) -> SystemState:
    field = rhs(state, grids)
    new_v = [e.velocities + dt * f for e, f in zip(state.ensembles, field)]
    return state.with_velocities(new_v, state.time + dt)


def step_implicit_midpoint(state: SystemState, grids, control: StepControl, dt: float | None = None):
    """One implicit midpoint step solved by fixed-point iteration.

    Iterates ``v <- v^n + dt * rhs((v + v^n)/2)`` from ``v = v^n`` (or an
    Euler predictor if requested) until the max-norm change over all particle
    velocity components is at most ``fp_tolerance``.

    Returns
    -------
    (SystemState, int)
        The advanced state and the number of iterations used.

    Raises
    ------
    NonConvergence
        If ``fp_max_iters`` iterations do not reach the tolerance.
    """
    dt = control.dt if dt is None else dt
    v0 = [e.velocities for e in state.ensembles]
    if control.euler_predictor:
        guess = [v + dt * f for v, f in zip(v0, rhs(state, grids))]
    else:
        guess = v0
    residual = math.inf
    for it in range(1, int(control.fp_max_iters) + 1):
        mid = state.with_velocities([0.5 * (a + b) for a, b in zip(guess, v0)], state.time + 0.5 * dt)
        field = rhs(mid, grids)
        new = [v + dt * f for v, f in zip(v0, field)]
        residual = max(float(np.max(np.abs(a - b))) for a, b in zip(new, guess))
        guess = new
        if residual <= control.fp_tolerance:
            return state.with_velocities(guess, state.time + dt), it
    raise NonConvergence(int(control.fp_max_iters), residual, state.time)


def step(state: SystemState, grids, control: StepControl, dt: float | None = None):
    """Advance by one step of the configured scheme; returns ``(state, iterations)``."""
    dt = control.dt if dt is None else dt
    if control.scheme is Scheme.FORWARD_EULER:
        return step_forward_euler(state, grids, dt), 0
    return step_implicit_midpoint(state, grids, control, dt)


def step_schedule(t_start: float, t_final: float, dt: float) -> list:
    """``(step_size, time_after_step)`` pairs; the last step is shortened to hit ``t_final``."""
    if t_final < t_start:
        raise ValueError("t_final precedes the current time")
    span = t_final - t_start
    slack = 1e-12 * max(1.0, abs(t_final))
    n_full = int(math.floor(span / dt + 1e-9))
    sched = [(dt, t_start + k * dt) for k in range(1, n_full + 1)]
    remainder = span - n_full * dt
    if remainder > slack:
        sched.append((remainder, t_final))
    elif sched:
        sched[-1] = (sched[-1][0], t_final)
    return sched


def integrate(state: SystemState, grids, control: StepControl, t_final: float, observer=None):
    """March ``state`` to ``t_final``.

    ``observer(step_index, state, iterations)`` is called after every step,
    in time order. Returns the final state.
    """
    for k, (h, t_next) in enumerate(step_schedule(state.time, t_final, control.dt), start=1):
        state, iters = step(state, grids, control, h)
        state = state.with_velocities([e.velocities for e in state.ensembles], t_next)
        if observer is not None:
            observer(k, state, iters)
    return state
