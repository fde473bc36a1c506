"""Periodic-grid spectral infrastructure.

Fields live on the torus [0, L)^2 sampled on an n x n uniform grid. Spectral
coefficients use the full (n, n) FFT layout with the normalization
``coeff(0) = mean(f)``, so Parseval reads ``mean(f g) = sum f_hat conj(g_hat)``.
Array index ``[i1, i2]`` corresponds to ``(x1, x2) = (i1 dx, i2 dx)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


class SymmetryError(ValueError):
    """Coefficients do not describe a real field."""

    def __init__(self, max_asymmetry: float):
        super().__init__(f"coefficients are not Hermitian: max |c(k) - conj c(-k)| = {max_asymmetry:.3e}")
        self.max_asymmetry = max_asymmetry


class MeanError(ValueError):
    """Operation requires a zero-mean field."""

    def __init__(self, mean: complex):
        super().__init__(f"field must have zero mean, got mean = {mean:.3e}")
        self.mean = mean


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` modes per axis.

    ``dealias_radius`` is given in integer wavenumber units; the default is the
    2/3 rule, ``n / 3``.
    """

    n: int
    length: float = TWO_PI
    dealias_radius: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.dealias_radius is None:
            object.__setattr__(self, "dealias_radius", self.n / 3.0)
        r = float(self.dealias_radius)
        if not 0 < r <= self.n / 2:
            raise ValueError(f"dealias_radius must lie in (0, n/2], got {r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "dealias_radius", r)

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def area(self) -> float:
        return self.length**2

    @property
    def k0(self) -> float:
        """Fundamental wavenumber 2 pi / L."""
        return TWO_PI / self.length

    @cached_property
    def m1(self) -> np.ndarray:
        """Integer wavenumbers along axis 1, broadcastable to (n, n)."""
        return np.fft.fftfreq(self.n, 1.0 / self.n)[:, None]

    @cached_property
    def m2(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, 1.0 / self.n)[None, :]

    @cached_property
    def k1(self) -> np.ndarray:
        return np.broadcast_to(self.k0 * self.m1, (self.n, self.n))

    @cached_property
    def k2(self) -> np.ndarray:
        return np.broadcast_to(self.k0 * self.m2, (self.n, self.n))

    @cached_property
    def k1_odd(self) -> np.ndarray:
        # Nyquist row zeroed: odd derivatives of a real field must stay real.
        k = self.k1.copy()
        k[self.n // 2, :] = 0.0
        return k

    @cached_property
    def k2_odd(self) -> np.ndarray:
        k = self.k2.copy()
        k[:, self.n // 2] = 0.0
        return k

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    @cached_property
    def kmod(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        out = np.zeros_like(self.ksq)
        nz = self.ksq > 0
        out[nz] = 1.0 / self.ksq[nz]
        return out

    @cached_property
    def msq(self) -> np.ndarray:
        """Squared integer wavenumber modulus."""
        return self.m1**2 + self.m2**2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        return self.cutoff_mask(self.dealias_radius * self.k0)

    @property
    def max_wavenumber(self) -> float:
        """Largest Euclidean wavenumber modulus on the grid."""
        return self.k0 * np.sqrt(2.0) * self.n / 2

    def cutoff_mask(self, n_cut: float) -> np.ndarray:
        # Compared in integer units so ties |k| = n_cut are kept exactly.
        r = n_cut / self.k0
        return self.msq <= r * r * (1 + 1e-12)

    @cached_property
    def neg_index(self) -> np.ndarray:
        return (-np.arange(self.n)) % self.n

    @cached_property
    def x(self) -> tuple[np.ndarray, np.ndarray]:
        """Collocation coordinates (x1, x2), each (n, n)."""
        s = np.arange(self.n) * self.dx
        return np.meshgrid(s, s, indexing="ij")


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: Grid
    coeffs: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.coeffs[0, 0].real)

    def __add__(self, other: SpectralField) -> SpectralField:
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __neg__(self) -> SpectralField:
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar: float) -> SpectralField:
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid: Grid) -> SpectralField:
        return cls(grid, np.zeros((grid.n, grid.n), dtype=complex))


@dataclass(frozen=True, eq=False)
class PhysicalField:
    grid: Grid
    values: np.ndarray


def forward(values: np.ndarray) -> np.ndarray:
    """Mean-normalized FFT over the last two axes."""
    n = values.shape[-1]
    return np.fft.fft2(values, axes=(-2, -1)) / (n * n)


def inverse_real(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`forward`, keeping the real part without checks."""
    n = coeffs.shape[-1]
    return np.fft.ifft2(coeffs, axes=(-2, -1)).real * (n * n)


def to_spectral(f: PhysicalField) -> SpectralField:
    return SpectralField(f.grid, forward(np.asarray(f.values, dtype=float)))


def max_asymmetry(coeffs: np.ndarray, grid: Grid) -> float:
    idx = grid.neg_index
    mirrored = coeffs[np.ix_(idx, idx)]
    return float(np.max(np.abs(coeffs - np.conj(mirrored))))


def to_physical(f: SpectralField, rtol: float = 1e-12) -> PhysicalField:
    """Inverse transform; raises :class:`SymmetryError` if the result is not real."""
    n = f.grid.n
    z = np.fft.ifft2(f.coeffs) * (n * n)
    scale = float(np.sum(np.abs(f.coeffs)))
    if np.max(np.abs(z.imag), initial=0.0) > rtol * scale:
        raise SymmetryError(max_asymmetry(f.coeffs, f.grid))
    return PhysicalField(f.grid, z.real.copy())


def derivative(f: SpectralField, axis: int, order: int = 1) -> SpectralField:
    """Multiply by ``(i k_axis)**order``."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    if order < 1:
        raise ValueError(f"order must be positive, got {order}")
    g = f.grid
    if order % 2:
        k = g.k1_odd if axis == 1 else g.k2_odd
    else:
        k = g.k1 if axis == 1 else g.k2
    return SpectralField(g, f.coeffs * (1j * k) ** order)


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, -f.grid.ksq * f.coeffs)


def gradient(f: SpectralField) -> tuple[SpectralField, SpectralField]:
    return derivative(f, 1), derivative(f, 2)


def perp_gradient(f: SpectralField) -> tuple[SpectralField, SpectralField]:
    """(-d2 f, d1 f)."""
    return -derivative(f, 2), derivative(f, 1)


def divergence(v: tuple[SpectralField, SpectralField]) -> SpectralField:
    return derivative(v[0], 1) + derivative(v[1], 2)


def curl(v: tuple[SpectralField, SpectralField]) -> SpectralField:
    """Scalar curl d1 v2 - d2 v1."""
    return derivative(v[1], 1) - derivative(v[0], 2)


def inverse_laplacian(f: SpectralField, atol: float = 1e-12) -> SpectralField:
    m = f.coeffs[0, 0]
    if abs(m) > atol:
        raise MeanError(complex(m))
    return SpectralField(f.grid, -f.grid.inv_ksq * f.coeffs)


def velocity_from_vorticity(
    omega: SpectralField, mean_u: tuple[float, float] = (0.0, 0.0)
) -> tuple[SpectralField, SpectralField]:
    """Biot-Savart: u = mean_u + perp-grad(psi) with laplacian(psi) = omega."""
    psi = inverse_laplacian(omega)
    u1, u2 = perp_gradient(psi)
    u1.coeffs[0, 0] = mean_u[0]
    u2.coeffs[0, 0] = mean_u[1]
    return u1, u2


def helmholtz_project(v: tuple[SpectralField, SpectralField]) -> tuple[SpectralField, SpectralField]:
    """Leray projection onto divergence-free fields; the k = 0 mode is kept."""
    g = v[0].grid
    a, b = v[0].coeffs, v[1].coeffs
    kdotv = (g.k1 * a + g.k2 * b) * g.inv_ksq
    return SpectralField(g, a - g.k1 * kdotv), SpectralField(g, b - g.k2 * kdotv)


def friedrichs_cutoff(f: SpectralField, n_cut: float) -> SpectralField:
    """Sharp ball truncation |k| <= n_cut (physical wavenumber units)."""
    if not n_cut > 0:
        raise ValueError(f"n_cut must be positive, got {n_cut}")
    return SpectralField(f.grid, np.where(f.grid.cutoff_mask(n_cut), f.coeffs, 0.0))


def dealias(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, np.where(f.grid.dealias_mask, f.coeffs, 0.0))


def is_dealiased(coeffs: np.ndarray, grid: Grid, rtol: float = 1e-13) -> bool:
    outside = np.abs(coeffs[..., ~grid.dealias_mask])
    scale = max(float(np.max(np.abs(coeffs), initial=0.0)), 1e-300)
    return float(np.max(outside, initial=0.0)) <= rtol * scale


def inner(f: SpectralField, g: SpectralField) -> float:
    """L2 inner product over the torus, via Parseval."""
    return float(f.grid.area * np.sum(f.coeffs * np.conj(g.coeffs)).real)


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(f.grid.area * np.sum(np.abs(f.coeffs) ** 2)))


def lp_norm(values: np.ndarray, p: float, area: float) -> float:
    """Grid-quadrature L^p norm; ``p = inf`` gives the grid maximum."""
    a = np.abs(values)
    if np.isinf(p):
        return float(np.max(a))
    if p == 2:
        return float(np.sqrt(np.mean(a * a) * area))
    return float((np.mean(a**p) * area) ** (1.0 / p))


def random_field(
    grid: Grid, rng: np.random.Generator, radius: float | None = None, zero_mean: bool = True
) -> SpectralField:
    """Hermitian random field with Gaussian coefficients inside ``|m| <= radius``."""
    n = grid.n
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    idx = grid.neg_index
    c = 0.5 * (c + np.conj(c[np.ix_(idx, idx)]))
    r = grid.dealias_radius if radius is None else radius
    c = np.where(grid.msq <= r * r * (1 + 1e-12), c, 0.0)
    if zero_mean:
        c[0, 0] = 0.0
    return SpectralField(grid, c)
