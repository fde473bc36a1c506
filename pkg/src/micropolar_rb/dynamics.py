"""Right-hand side of the micropolar convection system in vorticity form.

Prognostic variables are the vorticity ``Omega``, the microrotation ``omega``,
the temperature ``theta`` and the spatial mean of the velocity. With
``u = mean_u + perp-grad(laplacian^-1 Omega)``::

    Omega_t = -u.grad Omega - 2 kappa lap(omega) + d1 theta
    omega_t = -u.grad omega + gamma lap(omega) - 4 kappa omega + 2 kappa Omega
    theta_t = -u.grad theta + mu lap(theta) + u2
    mean_u_t = (0, mean(theta))

Every product is dealiased as soon as it is formed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    derivative,
    forward,
    inverse_real,
    is_dealiased,
    velocity_from_vorticity,
)

FIELD_NAMES = ("omega_big", "omega_small", "theta")


@dataclass(frozen=True)
class Params:
    kappa: float
    gamma: float
    mu: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.mu > 0):
            raise ValueError(
                f"well-posedness requires γ > 0, μ > 0 (got gamma={self.gamma}, mu={self.mu})"
            )
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")


@dataclass(frozen=True, eq=False)
class State:
    omega_big: SpectralField
    omega_small: SpectralField
    theta: SpectralField
    mean_u: tuple[float, float] = (0.0, 0.0)
    time: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.theta.grid

    def stacked(self) -> np.ndarray:
        return np.stack([self.omega_big.coeffs, self.omega_small.coeffs, self.theta.coeffs])

    @classmethod
    def from_stacked(cls, grid: Grid, w: np.ndarray, mean_u, time: float) -> State:
        return cls(
            SpectralField(grid, w[0]),
            SpectralField(grid, w[1]),
            SpectralField(grid, w[2]),
            (float(mean_u[0]), float(mean_u[1])),
            float(time),
        )

    def velocity(self) -> tuple[SpectralField, SpectralField]:
        return velocity_from_vorticity(self.omega_big, self.mean_u)

    def replace(self, **changes) -> State:
        return replace(self, **changes)

    @classmethod
    def zeros(cls, grid: Grid) -> State:
        z = SpectralField.zeros
        return cls(z(grid), z(grid), z(grid))


@dataclass(frozen=True, eq=False)
class Tendency:
    d_omega_big: SpectralField
    d_omega_small: SpectralField
    d_theta: SpectralField
    d_mean_u: tuple[float, float] = field(default=(0.0, 0.0))


class DealiasingError(ValueError):
    pass


def velocity_coeffs(grid: Grid, omega_hat: np.ndarray, mean_u) -> tuple[np.ndarray, np.ndarray]:
    psi = -grid.inv_ksq * omega_hat
    u1 = -1j * grid.k2_odd * psi
    u2 = 1j * grid.k1_odd * psi
    u1[0, 0] = mean_u[0]
    u2[0, 0] = mean_u[1]
    return u1, u2


def transport(grid: Grid, u1: np.ndarray, u2: np.ndarray, w: np.ndarray) -> np.ndarray:
    """dealias(u . grad f) for a stack of fields ``w`` given physical velocity."""
    d1 = inverse_real(1j * grid.k1_odd * w)
    d2 = inverse_real(1j * grid.k2_odd * w)
    return forward(u1 * d1 + u2 * d2) * grid.dealias_mask


def explicit_terms(grid: Grid, p: Params, w: np.ndarray, mean_u) -> tuple[np.ndarray, np.ndarray]:
    """Everything except gamma lap(omega) and mu lap(theta), on stacked coefficients."""
    om, sm, th = w
    u1h, u2h = velocity_coeffs(grid, om, mean_u)
    u = inverse_real(np.stack([u1h, u2h]))
    adv = transport(grid, u[0], u[1], w)
    k = p.kappa
    d = np.empty_like(w)
    d[0] = -adv[0] + 2.0 * k * grid.ksq * sm + 1j * grid.k1_odd * th
    d[1] = -adv[1] - 4.0 * k * sm + 2.0 * k * om
    d[2] = -adv[2] + u2h
    return d, np.array([0.0, th[0, 0].real])


def diffusion_rates(grid: Grid, p: Params) -> np.ndarray:
    """Diagonal linear operator per field: (0, -gamma |k|^2, -mu |k|^2)."""
    return np.stack([np.zeros_like(grid.ksq), -p.gamma * grid.ksq, -p.mu * grid.ksq])


def full_terms(grid: Grid, p: Params, w: np.ndarray, mean_u) -> tuple[np.ndarray, np.ndarray]:
    d, dm = explicit_terms(grid, p, w, mean_u)
    return d + diffusion_rates(grid, p) * w, dm


def check_state(state: State) -> None:
    g = state.grid
    for name in FIELD_NAMES:
        if not is_dealiased(getattr(state, name).coeffs, g):
            raise DealiasingError(f"{name} has content beyond the dealiasing radius")


def _tendency(grid: Grid, d: np.ndarray, dm) -> Tendency:
    return Tendency(
        SpectralField(grid, d[0]),
        SpectralField(grid, d[1]),
        SpectralField(grid, d[2]),
        (float(dm[0]), float(dm[1])),
    )


def rhs(state: State, p: Params) -> Tendency:
    check_state(state)
    d, dm = full_terms(state.grid, p, state.stacked(), state.mean_u)
    return _tendency(state.grid, d, dm)


def compute_Z(state: State, p: Params) -> SpectralField:
    """Z = Omega + (2 kappa / gamma) omega."""
    return state.omega_big + (2.0 * p.kappa / p.gamma) * state.omega_small


def rhs_Z(state: State, p: Params) -> SpectralField:
    """Transport-free source of Z: Z_t + u.grad Z, assembled from the component tendencies."""
    t = rhs(state, p)
    g = state.grid
    u1h, u2h = velocity_coeffs(g, state.omega_big.coeffs, state.mean_u)
    u = inverse_real(np.stack([u1h, u2h]))
    z = compute_Z(state, p)
    adv = transport(g, u[0], u[1], z.coeffs[None])[0]
    c = 2.0 * p.kappa / p.gamma
    return SpectralField(g, t.d_omega_big.coeffs + c * t.d_omega_small.coeffs + adv)


def z_source_closed_form(state: State, p: Params) -> SpectralField:
    """Hand-derived form of the Z source.

    Substituting Omega = Z - (2 kappa/gamma) omega into the component equations::

        Z_t + u.grad Z = (4 kappa^2/gamma) Z - (8 kappa^2/gamma)(1 + kappa/gamma) omega + d1 theta
    """
    k, g = p.kappa, p.gamma
    z = compute_Z(state, p)
    return (
        (4.0 * k * k / g) * z
        - (8.0 * k * k / g) * (1.0 + k / g) * state.omega_small
        + derivative(state.theta, 1)
    )


def z_source_coefficients(p: Params) -> tuple[float, float]:
    """(coefficient of Z, magnitude of the omega coefficient) in the Z source."""
    k, g = p.kappa, p.gamma
    return 4.0 * k * k / g, 8.0 * k * k / g * (1.0 + k / g)


def rhs_grad_theta_perp(state: State, p: Params) -> tuple[SpectralField, SpectralField]:
    """Tendency of G = perp-grad(theta) = (-d2 theta, d1 theta).

    G_t = -u.grad G + (G.grad) u + mu lap(G) + perp-grad(u2)
    """
    g = state.grid
    th = state.theta.coeffs
    G = np.stack([-1j * g.k2_odd * th, 1j * g.k1_odd * th])
    u1h, u2h = velocity_coeffs(g, state.omega_big.coeffs, state.mean_u)
    U = np.stack([u1h, u2h])
    u = inverse_real(U)
    Gp = inverse_real(G)
    stretch = transport(g, Gp[0], Gp[1], U)
    adv = transport(g, u[0], u[1], G)
    forcing = np.stack([-1j * g.k2_odd * u2h, 1j * g.k1_odd * u2h])
    out = -adv + stretch - p.mu * g.ksq * G + forcing
    return SpectralField(g, out[0]), SpectralField(g, out[1])


def mean_mode_flow(
    mean_u: tuple[float, float], theta_bar: float, omega_bar: float, p: Params, dt: float
) -> tuple[tuple[float, float], float, float]:
    """Exact k = 0 dynamics over ``dt``: u1' = 0, (u2, theta)' = (theta, u2), omega' = -4 kappa omega."""
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    ch, sh = math.cosh(dt), math.sinh(dt)
    u2 = mean_u[1] * ch + theta_bar * sh
    th = theta_bar * ch + mean_u[1] * sh
    return (mean_u[0], u2), th, omega_bar * math.exp(-4.0 * p.kappa * dt)
