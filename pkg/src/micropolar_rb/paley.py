"""Littlewood-Paley blocks and frequency-space norms on the torus.

The low-frequency profile ``chi`` is a radial smoothstep equal to 1 on
``|xi| <= 3/4`` and 0 on ``|xi| >= 4/3``; shells use
``phi(xi) = chi(xi / 2) - chi(xi)``. Block ``j = -1`` is ``chi``, block
``j >= 0`` is ``phi(2**-j xi)``. ``xi`` is the physical wavenumber.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import (
    Grid,
    SpectralField,
    dealias,
    forward,
    inverse_real,
    lp_norm,
)

CHI_INNER = 3.0 / 4.0
CHI_OUTER = 4.0 / 3.0


def _g(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    a, b = _g(t), _g(1.0 - t)
    return a / (a + b)


def chi(xi) -> np.ndarray:
    xi = np.abs(np.asarray(xi, dtype=float))
    return smoothstep((CHI_OUTER - xi) / (CHI_OUTER - CHI_INNER))


def phi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return chi(xi / 2.0) - chi(xi)


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    grid: Grid
    j_max: int
    chi_table: np.ndarray
    phi_tables: np.ndarray  # shape (j_max + 1, n, n)

    def multiplier(self, j: int) -> np.ndarray:
        if j < -1:
            raise ValueError(f"block index must be >= -1, got {j}")
        if j == -1:
            return self.chi_table
        if j > self.j_max:
            return np.zeros_like(self.chi_table)
        return self.phi_tables[j]

    @property
    def indices(self) -> range:
        return range(-1, self.j_max + 1)


@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float
    r: float

    def __post_init__(self):
        if not (self.p >= 1 and self.r >= 1):
            raise ValueError(f"Besov exponents need p, r >= 1, got p={self.p}, r={self.r}")


def build_partition(grid: Grid) -> DyadicPartition:
    kmax = grid.max_wavenumber
    j_max = max(math.ceil(math.log2(kmax)), 0) + 1
    kmod = grid.kmod
    chi_table = chi(kmod)
    phi_tables = np.stack([phi(kmod / 2.0**j) for j in range(j_max + 1)])
    return DyadicPartition(grid, j_max, chi_table, phi_tables)


def dyadic_block(f: SpectralField, j: int, part: DyadicPartition) -> SpectralField:
    return SpectralField(f.grid, f.coeffs * part.multiplier(j))


def low_pass(f: SpectralField, j: int, part: DyadicPartition) -> SpectralField:
    """S_j f = sum of blocks -1 .. j-1."""
    if j < 0:
        raise ValueError(f"low_pass needs j >= 0, got {j}")
    mult = part.chi_table.copy()
    for q in range(0, min(j, part.j_max + 1)):
        mult = mult + part.phi_tables[q]
    return SpectralField(f.grid, f.coeffs * mult)


def block_lp_norms(f: SpectralField, p: float, part: DyadicPartition) -> np.ndarray:
    """||Delta_j f||_p for j = -1 .. j_max."""
    mults = np.concatenate([part.chi_table[None], part.phi_tables])
    vals = inverse_real(f.coeffs[None] * mults)
    return np.array([lp_norm(v, p, f.grid.area) for v in vals])


def _seq_norm(a: np.ndarray, r: float) -> float:
    if np.isinf(r):
        return float(np.max(a))
    return float(np.sum(a**r) ** (1.0 / r))


def besov_norm(f: SpectralField, idx: BesovIndex, part: DyadicPartition) -> float:
    j = np.arange(-1, part.j_max + 1)
    return _seq_norm(2.0 ** (j * idx.s) * block_lp_norms(f, idx.p, part), idx.r)


def sobolev_norm(f: SpectralField, s: float) -> float:
    """sqrt(sum (1 + |k|^2)^s |f_hat|^2) in the mean-normalized convention."""
    w = (1.0 + f.grid.ksq) ** s
    return float(np.sqrt(np.sum(w * np.abs(f.coeffs) ** 2)))


def sobolev_norm_blocks(f: SpectralField, s: float, part: DyadicPartition) -> float:
    """Block characterization ||S_0 f|| + (sum_q 2^{2qs} ||Delta_q f||^2)^{1/2}.

    Uses the same mean-normalized L2 as :func:`sobolev_norm` so the two are
    directly comparable.
    """
    c = f.coeffs
    low = np.sqrt(np.sum(np.abs(c * part.chi_table) ** 2))
    blocks = np.sum(np.abs(c[None] * part.phi_tables) ** 2, axis=(1, 2))
    q = np.arange(part.j_max + 1)
    return float(low + np.sqrt(np.sum(2.0 ** (2 * q * s) * blocks)))


@dataclass(frozen=True)
class BernsteinReport:
    low_pass: float  # sup ||d^a S_j f||_b / (2^{j(k + 2(1/a - 1/b))} ||S_j f||_a)
    block_lower: float  # 2^{jk} ||Delta_j f||_a / sup ||d^a Delta_j f||_a
    block_upper: float  # sup ||d^a Delta_j f||_a / (2^{jk} ||Delta_j f||_a)


def _multi_index_sup(c: np.ndarray, grid: Grid, k: int, p: float) -> float:
    if k == 0:
        return lp_norm(inverse_real(c), p, grid.area)
    best = 0.0
    for a1 in range(k + 1):
        mult = (1j * grid.k1_odd if a1 % 2 else 1j * grid.k1) ** a1
        mult = mult * (1j * grid.k2_odd if (k - a1) % 2 else 1j * grid.k2) ** (k - a1)
        best = max(best, lp_norm(inverse_real(c * mult), p, grid.area))
    return best


def bernstein_check(
    f: SpectralField, j: int, a: float, b: float, k: int, part: DyadicPartition
) -> BernsteinReport:
    if not 1 <= a <= b:
        raise ValueError(f"need 1 <= a <= b, got a={a}, b={b}")
    if k < 0:
        raise ValueError(f"derivative order must be >= 0, got {k}")
    g = f.grid
    sj = low_pass(f, j, part).coeffs
    dj = dyadic_block(f, j, part).coeffs
    sj_a = lp_norm(inverse_real(sj), a, g.area)
    dj_a = lp_norm(inverse_real(dj), a, g.area)
    if sj_a == 0 or dj_a == 0:
        raise ValueError("Bernstein ratios undefined for a zero block")
    inv_a = 0.0 if np.isinf(a) else 1.0 / a
    inv_b = 0.0 if np.isinf(b) else 1.0 / b
    lp_ratio = _multi_index_sup(sj, g, k, b) / (2.0 ** (j * (k + 2 * (inv_a - inv_b))) * sj_a)
    d_sup = _multi_index_sup(dj, g, k, a)
    scale = 2.0 ** (j * k) * dj_a
    return BernsteinReport(lp_ratio, scale / d_sup, d_sup / scale)


def _transport(g_phys: tuple[np.ndarray, np.ndarray], c: np.ndarray, grid: Grid) -> np.ndarray:
    d1 = inverse_real(1j * grid.k1_odd * c)
    d2 = inverse_real(1j * grid.k2_odd * c)
    return dealias(SpectralField(grid, forward(g_phys[0] * d1 + g_phys[1] * d2))).coeffs


def commutator(
    j: int, g: tuple[SpectralField, SpectralField], f: SpectralField, part: DyadicPartition
) -> SpectralField:
    """[Delta_j, g] . grad f = Delta_j(g . grad f) - g . grad(Delta_j f), dealiased."""
    grid = f.grid
    gp = (inverse_real(g[0].coeffs), inverse_real(g[1].coeffs))
    mult = part.multiplier(j)
    whole = mult * _transport(gp, f.coeffs, grid)
    inner_ = _transport(gp, mult * f.coeffs, grid)
    return SpectralField(grid, whole - inner_)


def commutator_profile(
    g: tuple[SpectralField, SpectralField], f: SpectralField, s: float, part: DyadicPartition
) -> np.ndarray:
    """2^{js} ||[Delta_j, g] grad f||_2 / (||grad g||_inf ||f||_{H^s} + ||grad g||_{H^s} ||f||_inf).

    The bounded-l2 sequence of the commutator estimate, for j = -1 .. j_max.
    """
    grid = f.grid
    grads = [inverse_real(1j * kk * gi.coeffs) for gi in g for kk in (grid.k1_odd, grid.k2_odd)]
    grad_g_inf = float(np.max(np.sqrt(sum(x * x for x in grads))))
    grad_g_hs = math.sqrt(
        sum(sobolev_norm(SpectralField(grid, 1j * kk * gi.coeffs), s) ** 2 for gi in g for kk in (grid.k1_odd, grid.k2_odd))
    )
    f_inf = float(np.max(np.abs(inverse_real(f.coeffs))))
    denom = grad_g_inf * sobolev_norm(f, s) + grad_g_hs * f_inf
    out = []
    for j in part.indices:
        c = commutator(j, g, f, part).coeffs
        out.append(2.0 ** (j * s) * np.sqrt(np.sum(np.abs(c) ** 2)) / denom)
    return np.array(out)


__all__ = [
    "BernsteinReport",
    "BesovIndex",
    "DyadicPartition",
    "bernstein_check",
    "besov_norm",
    "block_lp_norms",
    "build_partition",
    "chi",
    "commutator",
    "commutator_profile",
    "dyadic_block",
    "low_pass",
    "phi",
    "smoothstep",
    "sobolev_norm",
    "sobolev_norm_blocks",
]
