"""Integrating-factor Runge-Kutta time stepping.

Diffusion of omega and theta is diagonal in Fourier space and is absorbed in
exact exponential factors. Everything else, including the kappa couplings and
``-4 kappa omega``, is advanced explicitly (Lawson-type IFRK2 / IFRK4). The
k = 0 modes of omega and theta and the mean velocity are overwritten with
their exact flow after each step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import dynamics
from .dynamics import FIELD_NAMES, Params, State, mean_mode_flow
from .spectral import Grid, inverse_real

SCHEMES = ("IFRK2", "IFRK4")
SCHEME_ORDER = {"IFRK2": 2, "IFRK4": 4}

Explicit = Callable[[Grid, Params, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]


class IntegrationError(RuntimeError):
    def __init__(self, time: float, field: str):
        super().__init__(f"non-finite values in {field} at t = {time:.6g}")
        self.time = time
        self.field = field


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float = 1.0
    dt: float | str = "auto"
    cfl_safety: float = 0.4
    scheme: str = "IFRK4"

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.dt != "auto" and not (isinstance(self.dt, (int, float)) and self.dt > 0):
            raise ValueError(f"dt must be positive or 'auto', got {self.dt!r}")

    @property
    def order(self) -> int:
        return SCHEME_ORDER[self.scheme]


class Stepper:
    """Caches the exponential factors for one (grid, params, dt) triple."""

    def __init__(self, grid: Grid, p: Params, dt: float, scheme: str = "IFRK4", explicit: Explicit | None = None):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        self.grid, self.p, self.dt, self.scheme = grid, p, float(dt), scheme
        self.explicit = explicit or dynamics.explicit_terms
        rates = dynamics.diffusion_rates(grid, p)
        self.E = np.exp(rates * dt)
        self.E2 = np.exp(rates * (0.5 * dt))

    def _n(self, w, m):
        return self.explicit(self.grid, self.p, w, m)

    def advance(self, w: np.ndarray, m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        h, E, E2 = self.dt, self.E, self.E2
        if self.scheme == "IFRK2":
            k1, l1 = self._n(w, m)
            k2, l2 = self._n(E * (w + h * k1), m + h * l1)
            return E * w + 0.5 * h * (E * k1 + k2), m + 0.5 * h * (l1 + l2)
        k1, l1 = self._n(w, m)
        k2, l2 = self._n(E2 * (w + 0.5 * h * k1), m + 0.5 * h * l1)
        k3, l3 = self._n(E2 * w + 0.5 * h * k2, m + 0.5 * h * l2)
        k4, l4 = self._n(E * w + h * (E2 * k3), m + h * l3)
        w_new = E * w + (h / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)
        m_new = m + (h / 6.0) * (l1 + 2.0 * (l2 + l3) + l4)
        return w_new, m_new

    def __call__(self, state: State) -> State:
        w = state.stacked()
        m0 = np.asarray(state.mean_u, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            w_new, _ = self.advance(w, m0)
        t_new = state.time + self.dt
        for i, name in enumerate(FIELD_NAMES):
            if not np.all(np.isfinite(w_new[i])):
                raise IntegrationError(t_new, name)
        mean_u, th_bar, om_bar = mean_mode_flow(
            state.mean_u, state.theta.mean, state.omega_small.mean, self.p, self.dt
        )
        w_new[1, 0, 0] = om_bar
        w_new[2, 0, 0] = th_bar
        w_new *= self.grid.dealias_mask
        return State.from_stacked(self.grid, w_new, mean_u, t_new)


def step(
    state: State, dt: float, p: Params, cfg: IntegratorConfig | None = None, explicit: Explicit | None = None
) -> State:
    scheme = cfg.scheme if cfg is not None else "IFRK4"
    dynamics.check_state(state)
    return Stepper(state.grid, p, dt, scheme, explicit)(state)


def max_speed(state: State) -> float:
    g = state.grid
    u1h, u2h = dynamics.velocity_coeffs(g, state.omega_big.coeffs, state.mean_u)
    u = inverse_real(np.stack([u1h, u2h]))
    return float(np.max(np.sqrt(u[0] ** 2 + u[1] ** 2)))


def auto_dt(state: State, p: Params, cfg: IntegratorConfig) -> float:
    """cfl_safety * min(dx / max(1, ||u||_inf), 1 / (1 + 4 kappa))."""
    adv = state.grid.dx / max(1.0, max_speed(state))
    return cfg.cfl_safety * min(adv, 1.0 / (1.0 + 4.0 * p.kappa))


Hook = Callable[[int, State], None]
StepHook = Callable[[State, State, float], None]


def step_plan(t0: float, t_end: float, dt: float) -> tuple[int, float]:
    """Number of uniform steps and the step size that lands exactly on ``t_end``."""
    span = t_end - t0
    if span <= 1e-12 * max(1.0, abs(t_end)):
        return 0, dt
    n = max(1, math.ceil(span / dt - 1e-9))
    return n, span / n


def run(
    initial: State,
    p: Params,
    cfg: IntegratorConfig,
    hooks: Sequence[Hook] = (),
    step_hooks: Iterable[StepHook] = (),
    cadence: int = 10,
    explicit: Explicit | None = None,
) -> State:
    """Integrate from ``initial.time`` to ``cfg.t_end``.

    ``hooks`` are called as ``hook(step, state)`` at step 0, every ``cadence``
    steps and at the final step. ``step_hooks`` see every step as
    ``hook(before, after, dt)``.
    """
    if cadence < 1:
        raise ValueError(f"cadence must be >= 1, got {cadence}")
    dynamics.check_state(initial)
    step_hooks = tuple(step_hooks)
    dt = auto_dt(initial, p, cfg) if cfg.dt == "auto" else float(cfg.dt)
    nsteps, h = step_plan(initial.time, cfg.t_end, dt)
    for hook in hooks:
        hook(0, initial)
    if nsteps == 0:
        return initial
    stepper = Stepper(initial.grid, p, h, cfg.scheme, explicit)
    t0 = initial.time
    state = initial
    for i in range(1, nsteps + 1):
        new = stepper(state)
        new = new.replace(time=cfg.t_end if i == nsteps else t0 + i * h)
        for sh in step_hooks:
            sh(state, new, h)
        state = new
        if i % cadence == 0 or i == nsteps:
            for hook in hooks:
                hook(i, state)
    return state
