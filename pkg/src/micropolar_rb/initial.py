"""Named initial conditions."""
from __future__ import annotations

import numpy as np

from .dynamics import State
from .paley import sobolev_norm
from .spectral import Grid, PhysicalField, SpectralField, dealias, to_spectral

IC_NAMES = ("taylor-green", "thermal-blob", "random-band", "zero")
RANDOM_ICS = ("random-band",)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; the only source of randomness in a run."""
    return np.random.Generator(np.random.Philox(int(seed)))


def _from_values(grid: Grid, values: np.ndarray) -> SpectralField:
    return dealias(to_spectral(PhysicalField(grid, values)))


def thermal_blob(grid: Grid, amplitude: float = 1.0, width: float | None = None, center=None) -> SpectralField:
    """Periodized Gaussian bump, truncated to the dealiasing radius."""
    L = grid.length
    width = 0.1 * L if width is None else width
    c1, c2 = (0.5 * L, 0.5 * L) if center is None else center
    x1, x2 = grid.x
    v = np.zeros_like(x1)
    for a in (-1, 0, 1):
        for b in (-1, 0, 1):
            v += np.exp(-((x1 - c1 + a * L) ** 2 + (x2 - c2 + b * L) ** 2) / (2 * width**2))
    return _from_values(grid, amplitude * v)


def taylor_green(grid: Grid, amplitude: float = 1.0) -> SpectralField:
    """Omega = 2 A sin(k0 x1) sin(k0 x2)."""
    x1, x2 = grid.x
    k = grid.k0
    return _from_values(grid, 2 * amplitude * np.sin(k * x1) * np.sin(k * x2))


def random_band(
    grid: Grid, rng: np.random.Generator, j0: int = 0, j1: int = 3, s: float = 1.0, norm: float = 1.0
) -> SpectralField:
    """Gaussian coefficients on integer shells 2^j0 <= |m| < 2^(j1+1), scaled to ||f||_{H^s} = norm."""
    n = grid.n
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    idx = grid.neg_index
    c = 0.5 * (c + np.conj(c[np.ix_(idx, idx)]))
    mod = np.sqrt(grid.msq)
    band = (mod >= 2.0**j0) & (mod < 2.0 ** (j1 + 1))
    c = np.where(band & grid.dealias_mask, c, 0.0)
    c[0, 0] = 0.0
    f = SpectralField(grid, c)
    h = sobolev_norm(f, s)
    if h == 0:
        raise ValueError(f"empty band j0={j0}, j1={j1} on n={n}")
    return f * (norm / h)


def make_ic(name: str, params: dict | None, seed: int | None, grid: Grid) -> State:
    params = dict(params or {})
    zero = SpectralField.zeros(grid)
    if name == "zero":
        return State(zero, SpectralField.zeros(grid), SpectralField.zeros(grid))
    if name == "taylor-green":
        om = taylor_green(grid, params.pop("amplitude", 1.0))
        eps = params.pop("theta_perturbation", 0.0)
        th = thermal_blob(grid, eps)
        th.coeffs[0, 0] = 0.0
        _no_extra(name, params)
        return State(om, SpectralField.zeros(grid), th)
    if name == "thermal-blob":
        th = thermal_blob(
            grid,
            params.pop("amplitude", 1.0),
            params.pop("width", None),
            params.pop("center", None),
        )
        if params.pop("subtract_mean", False):
            th.coeffs[0, 0] = 0.0
        _no_extra(name, params)
        return State(zero, SpectralField.zeros(grid), th)
    if name == "random-band":
        if seed is None:
            raise ValueError("random-band needs a seed")
        rng = make_rng(seed)
        kw = {k: params.pop(k) for k in ("j0", "j1", "s", "norm") if k in params}
        _no_extra(name, params)
        fields = [random_band(grid, rng, **kw) for _ in range(3)]
        return State(*fields)
    raise ValueError(f"unknown initial condition {name!r}; known: {', '.join(IC_NAMES)}")


def _no_extra(name: str, params: dict) -> None:
    if params:
        raise ValueError(f"unknown parameter(s) for {name}: {', '.join(sorted(params))}")
