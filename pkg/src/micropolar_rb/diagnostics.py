"""Diagnostics: energy ledger, norm tracking, inequality ratios, identity checks.

Inequalities whose constants are not computable are reported as measured
ratios; callers assert boundedness over ensembles, not specific constants.
L^p norms use grid quadrature (``lp_norm``); L^inf norms are grid maxima.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import dynamics
from .dynamics import Params, State
from .paley import build_partition, sobolev_norm
from .spectral import (
    Grid,
    SpectralField,
    friedrichs_cutoff,
    helmholtz_project,
    inverse_real,
    lp_norm,
    random_field,
)
from .timestepper import IntegratorConfig, Stepper, auto_dt, step_plan


# ---------------------------------------------------------------- energy


@dataclass(frozen=True)
class EnergyTerms:
    e_half: float
    grad_omega_sq: float
    grad_theta_sq: float
    omega_sq: float
    omega_cross: float  # <Omega, omega>
    buoyancy: float  # <u2, theta>

    def dissipation(self, p: Params) -> float:
        return p.gamma * self.grad_omega_sq + p.mu * self.grad_theta_sq + 4 * p.kappa * self.omega_sq

    def cross(self, p: Params) -> float:
        return 4 * p.kappa * self.omega_cross + 2 * self.buoyancy

    def rate(self, p: Params) -> float:
        return self.cross(p) - self.dissipation(p)

    def coupling(self, p: Params) -> float:
        """Net micropolar exchange 4 kappa (<Omega, omega> - ||omega||^2); buoyancy excluded."""
        return 4 * p.kappa * (self.omega_cross - self.omega_sq)


def _dot(a: np.ndarray, b: np.ndarray, area: float) -> float:
    return float(area * np.sum(a * np.conj(b)).real)


def energy_terms(state: State) -> EnergyTerms:
    g = state.grid
    A = g.area
    om, sm, th = state.omega_big.coeffs, state.omega_small.coeffs, state.theta.coeffs
    u1, u2 = dynamics.velocity_coeffs(g, om, state.mean_u)
    sq = lambda c: float(A * np.sum(np.abs(c) ** 2))
    return EnergyTerms(
        e_half=0.5 * (sq(u1) + sq(u2) + sq(sm) + sq(th)),
        grad_omega_sq=float(A * np.sum(g.ksq * np.abs(sm) ** 2)),
        grad_theta_sq=float(A * np.sum(g.ksq * np.abs(th) ** 2)),
        omega_sq=sq(sm),
        omega_cross=_dot(om, sm, A),
        buoyancy=_dot(u2, th, A),
    )


def energy_rates(state: State, p: Params) -> tuple[float, float]:
    """Time derivatives (dD/dt, dX/dt) of the dissipation and cross terms along the flow."""
    g = state.grid
    A = g.area
    w = state.stacked()
    d, dm = dynamics.full_terms(g, p, w, state.mean_u)
    om, sm, th = w
    dom, dsm, dth = d
    _, u2 = dynamics.velocity_coeffs(g, om, state.mean_u)
    _, du2 = dynamics.velocity_coeffs(g, dom, dm)
    d_rate = 2 * (
        _dot((p.gamma * g.ksq + 4 * p.kappa) * sm, dsm, A) + _dot(p.mu * g.ksq * th, dth, A)
    )
    x_rate = 4 * p.kappa * (_dot(dom, sm, A) + _dot(om, dsm, A)) + 2 * (_dot(du2, th, A) + _dot(u2, dth, A))
    return d_rate, x_rate


@dataclass(frozen=True)
class EnergyRow:
    time: float
    e_before: float
    e_after: float
    dissipation_integral: float
    cross_integral: float
    defect: float
    diss_omega: float
    diss_theta: float
    coupling: float


def _hermite(h: float, f0: float, f1: float, df0: float, df1: float) -> float:
    return 0.5 * h * (f0 + f1) + h * h / 12.0 * (df0 - df1)


def _balance(t0: EnergyTerms, r0, state_after: State, dt: float, p: Params):
    t1, r1 = energy_terms(state_after), energy_rates(state_after, p)
    d_int = _hermite(dt, t0.dissipation(p), t1.dissipation(p), r0[0], r1[0])
    x_int = _hermite(dt, t0.cross(p), t1.cross(p), r0[1], r1[1])
    row = EnergyRow(
        time=state_after.time,
        e_before=t0.e_half,
        e_after=t1.e_half,
        dissipation_integral=d_int,
        cross_integral=x_int,
        defect=(t1.e_half - t0.e_half) - (x_int - d_int),
        diss_omega=p.gamma * t1.grad_omega_sq,
        diss_theta=p.mu * t1.grad_theta_sq,
        coupling=t1.coupling(p),
    )
    return row, (t1, r1)


def energy_balance(state_before: State, state_after: State, dt: float, p: Params) -> EnergyRow:
    """Balance of d/dt E_half = X - D over one step.

    The time integrals of D and X use the corrected trapezoid rule with exact
    endpoint derivatives, so the quadrature error is O(dt^5) and the defect
    measures the integrator's local energy error.
    """
    row, _ = _balance(energy_terms(state_before), energy_rates(state_before, p), state_after, dt, p)
    return row


class EnergyLedger:
    """Step hook accumulating one :class:`EnergyRow` per step."""

    def __init__(self, p: Params):
        self.p = p
        self.rows: list[EnergyRow] = []
        self._cache = None
        self._last = None

    def __call__(self, before: State, after: State, dt: float) -> None:
        if self._last is not before:
            self._cache = (energy_terms(before), energy_rates(before, self.p))
        row, self._cache = _balance(*self._cache, after, dt, self.p)
        self.rows.append(row)
        self._last = after

    @property
    def e_initial(self) -> float:
        return self.rows[0].e_before

    @property
    def e_final(self) -> float:
        return self.rows[-1].e_after

    def closure(self) -> float:
        """Relative mismatch of E(T) + int D - E(0) - int X."""
        d = sum(r.dissipation_integral for r in self.rows)
        x = sum(r.cross_integral for r in self.rows)
        return (self.e_final + d - self.e_initial - x) / self.e_initial

    def max_defect(self) -> float:
        return max(abs(r.defect) for r in self.rows)


# ---------------------------------------------------------------- pointwise norms


def _grad_mag(grid: Grid, c: np.ndarray) -> np.ndarray:
    d = inverse_real(np.stack([1j * grid.k1_odd * c, 1j * grid.k2_odd * c]))
    return np.sqrt(d[0] ** 2 + d[1] ** 2)


def _hessian_mag(grid: Grid, c: np.ndarray) -> np.ndarray:
    k1, k2 = grid.k1, grid.k2
    d = inverse_real(np.stack([-k1 * k1 * c, -k1 * k2 * c, -k2 * k2 * c]))
    return np.sqrt(d[0] ** 2 + 2 * d[1] ** 2 + d[2] ** 2)


def _velocity_phys(state: State) -> np.ndarray:
    u1, u2 = dynamics.velocity_coeffs(state.grid, state.omega_big.coeffs, state.mean_u)
    return inverse_real(np.stack([u1, u2]))


def velocity_gradient_inf(state: State) -> float:
    """max over the grid of the Frobenius norm of grad u."""
    g = state.grid
    u1, u2 = dynamics.velocity_coeffs(g, state.omega_big.coeffs, state.mean_u)
    return float(np.max(np.sqrt(_grad_mag(g, u1) ** 2 + _grad_mag(g, u2) ** 2)))


def grad_inf(f: SpectralField) -> float:
    return float(np.max(_grad_mag(f.grid, f.coeffs)))


def blowup_monitor(state: State) -> float:
    """||grad theta||_inf."""
    return grad_inf(state.theta)


class BlowupMonitor:
    """Cadence hook recording ||grad theta||_inf and flagging excursions."""

    def __init__(self, ceiling: float = math.inf):
        self.ceiling = ceiling
        self.times: list[float] = []
        self.values: list[float] = []
        self.flagged = False
        self.flag_time: float | None = None

    def __call__(self, step: int, state: State) -> None:
        v = blowup_monitor(state)
        self.times.append(state.time)
        self.values.append(v)
        if not self.flagged and (not math.isfinite(v) or v > self.ceiling):
            self.flagged = True
            self.flag_time = state.time

    def argmax_time(self) -> float:
        return self.times[int(np.argmax(self.values))]


def velocity_hs(state: State, s: float) -> float:
    u1, u2 = dynamics.velocity_coeffs(state.grid, state.omega_big.coeffs, state.mean_u)
    g = state.grid
    return math.hypot(sobolev_norm(SpectralField(g, u1), s), sobolev_norm(SpectralField(g, u2), s))


def bkm_ratio(state: State, s: float = 2.5, p: float = 4.0) -> float:
    """||grad u||_inf / (1 + ||Omega||_p + ||Omega||_inf ln(1 + ||u||_{H^s}))."""
    if not s > 2:
        raise ValueError(f"s must exceed 2, got {s}")
    if not p >= 2:
        raise ValueError(f"p must be >= 2, got {p}")
    g = state.grid
    om = inverse_real(state.omega_big.coeffs)
    denom = 1 + lp_norm(om, p, g.area) + lp_norm(om, math.inf, g.area) * math.log1p(velocity_hs(state, s))
    return velocity_gradient_inf(state) / denom


def gn_ratio(f: SpectralField, p: float) -> tuple[float, float]:
    """Measured constants of the two Gagliardo-Nirenberg inequalities.

    Returns ``||f||_inf / (||f||_2^a ||grad f||_p^(1-a))`` with
    ``a = (p-2)/(2p-2)`` and ``||f||_inf / (||f||_p^(1-2/p) ||grad f||_p^(2/p))``.
    """
    if not p > 2:
        raise ValueError(f"p must exceed 2, got {p}")
    g = f.grid
    c = f.coeffs
    scale = float(np.max(np.abs(c)))
    if np.max(np.abs(c[g.ksq > 0]), initial=0.0) == 0:
        raise ValueError("Gagliardo-Nirenberg ratio undefined for a constant field")
    if abs(c[0, 0]) > 1e-12 * scale:
        raise ValueError(f"field must have zero mean, got {c[0, 0].real:.3e}")
    v = inverse_real(c)
    gm = _grad_mag(g, c)
    f_inf = lp_norm(v, math.inf, g.area)
    f_2 = lp_norm(v, 2, g.area)
    f_p = lp_norm(v, p, g.area)
    gp = lp_norm(gm, p, g.area)
    a = (p - 2) / (2 * p - 2)
    r1 = f_inf / (f_2**a * gp ** (p / (2 * p - 2)))
    r2 = f_inf / (f_p ** (1 - 2 / p) * gp ** (2 / p))
    return r1, r2


# ---------------------------------------------------------------- time-series budgets


def _cumtrapz(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))
    return out


@dataclass
class ZBudget:
    times: np.ndarray
    lhs: np.ndarray  # ||Z(t)||_p
    rhs: np.ndarray  # ||Z_0||_p + int (cZ ||Z||_p + cw ||omega||_p + ||grad theta||_p)

    @property
    def ratio(self) -> np.ndarray:
        return self.lhs / np.where(self.rhs > 0, self.rhs, 1.0)

    def holds(self, rtol: float = 1e-9) -> bool:
        return bool(np.all(self.lhs <= self.rhs * (1 + rtol) + 1e-300))


def z_budget(trajectory: Sequence[State], p: Params, p_norm: float = 2.0) -> ZBudget:
    """L^p budget of Z along a sampled trajectory.

    The coefficients are those of the Z source,
    ``d/dt ||Z||_p <= (4k^2/g)||Z||_p + (8k^2/g)(1 + k/g)||omega||_p + ||grad theta||_p``.
    """
    cz, cw = dynamics.z_source_coefficients(p)
    t, lhs, integrand = [], [], []
    for st in trajectory:
        g = st.grid
        z = inverse_real(dynamics.compute_Z(st, p).coeffs)
        zn = lp_norm(z, p_norm, g.area)
        wn = lp_norm(inverse_real(st.omega_small.coeffs), p_norm, g.area)
        tn = lp_norm(_grad_mag(g, st.theta.coeffs), p_norm, g.area)
        t.append(st.time)
        lhs.append(zn)
        integrand.append(cz * zn + cw * wn + tn)
    t, lhs, integrand = map(np.asarray, (t, lhs, integrand))
    return ZBudget(t, lhs, lhs[0] + _cumtrapz(t, integrand))


@dataclass
class TwinRun:
    times: np.ndarray
    D: np.ndarray  # ||du||^2 + ||domega||^2 + ||dtheta||^2
    rates: np.ndarray  # 2 + 2||grad u1|| + 2||grad omega1|| + 2||grad theta1|| + 8 kappa^2 / gamma

    @property
    def gronwall_rate(self) -> float:
        return float(np.max(self.rates))

    def log_growth(self) -> np.ndarray:
        return np.log(self.D / self.D[0])

    def within_bound(self, zero_tol: float = 1e-20) -> bool:
        if self.D[0] == 0:
            return bool(np.all(self.D < zero_tol))
        bound = self.gronwall_rate * (self.times - self.times[0])
        return bool(np.all(self.log_growth() <= bound))


def _difference_norm_sq(a: State, b: State) -> float:
    g = a.grid
    ua = dynamics.velocity_coeffs(g, a.omega_big.coeffs, a.mean_u)
    ub = dynamics.velocity_coeffs(g, b.omega_big.coeffs, b.mean_u)
    parts = [ua[0] - ub[0], ua[1] - ub[1], a.omega_small.coeffs - b.omega_small.coeffs, a.theta.coeffs - b.theta.coeffs]
    return float(g.area * sum(np.sum(np.abs(c) ** 2) for c in parts))


def _gronwall_integrand(state: State, p: Params) -> float:
    return (
        2
        + 2 * velocity_gradient_inf(state)
        + 2 * grad_inf(state.omega_small)
        + 2 * grad_inf(state.theta)
        + 8 * p.kappa**2 / p.gamma
    )


def twin_run_stability(ic1: State, ic2: State, p: Params, cfg: IntegratorConfig, cadence: int = 1) -> TwinRun:
    """Evolve two states in lockstep and track the squared L2 distance."""
    if ic1.grid != ic2.grid:
        raise ValueError("twin runs need a common grid")
    dt = auto_dt(ic1, p, cfg) if cfg.dt == "auto" else float(cfg.dt)
    nsteps, h = step_plan(ic1.time, cfg.t_end, dt)
    stepper = Stepper(ic1.grid, p, h, cfg.scheme)
    a, b = ic1, ic2
    times, D, rates = [a.time], [_difference_norm_sq(a, b)], [_gronwall_integrand(a, p)]
    for i in range(1, nsteps + 1):
        a, b = stepper(a), stepper(b)
        if i % cadence == 0 or i == nsteps:
            times.append(a.time)
            D.append(_difference_norm_sq(a, b))
            rates.append(_gronwall_integrand(a, p))
    return TwinRun(np.array(times), np.array(D), np.array(rates))


def _phi1(x: np.ndarray) -> np.ndarray:
    """(1 - e^{-x}) for x >= 0, stable near 0."""
    return -np.expm1(-x)


def _phi2(x: np.ndarray) -> np.ndarray:
    """(1 - e^{-x}(1 + x)) / x, with the x -> 0 limit 0."""
    out = np.empty_like(x)
    small = x < 1e-4
    xs = x[small]
    out[small] = xs / 2 - xs * xs / 3 + xs**3 / 8
    xl = x[~small]
    out[~small] = (-np.expm1(-xl) - xl * np.exp(-xl)) / xl
    return out


def heat_operator(samples: Sequence[SpectralField], dt: float, coeff: float) -> np.ndarray:
    """Tf(t_i) = int_0^t_i coeff lap e^{coeff (t_i - s) lap} f(s) ds, for piecewise-linear f.

    Returned as a stack of spectral coefficients, one per sample time.
    """
    g = samples[0].grid
    a = coeff * g.ksq * dt
    E = np.exp(-a)
    p1, p2 = _phi1(a), _phi2(a)
    out = np.zeros((len(samples), g.n, g.n), dtype=complex)
    for i in range(1, len(samples)):
        f0, f1 = samples[i - 1].coeffs, samples[i].coeffs
        out[i] = E * out[i - 1] - f1 * p1 + (f1 - f0) * p2
    return out


def _space_time_norm(vals: np.ndarray, dt: float, p: float, q: float, area: float) -> float:
    inner_ = np.array([lp_norm(v, q, area) for v in vals])
    w = np.full(len(vals), dt)
    w[0] = w[-1] = dt / 2
    return float(np.sum(w * inner_**p) ** (1 / p))


def heat_maximal_regularity_check(
    samples: Sequence[SpectralField], dt: float, coeff: float, p: float, q: float
) -> float:
    """||Tf||_{L^p_t L^q_x} / ||f||_{L^p_t L^q_x} on uniformly spaced samples."""
    if not (1 < p < math.inf and 1 < q < math.inf):
        raise ValueError(f"need p, q in (1, inf), got p={p}, q={q}")
    g = samples[0].grid
    f_vals = inverse_real(np.stack([s.coeffs for s in samples]))
    denom = _space_time_norm(f_vals, dt, p, q, g.area)
    if denom == 0:
        raise ValueError("maximal regularity ratio undefined for zero input")
    t_vals = inverse_real(heat_operator(samples, dt, coeff))
    return _space_time_norm(t_vals, dt, p, q, g.area) / denom


@dataclass
class HsSeries:
    times: np.ndarray
    u: np.ndarray
    omega: np.ndarray
    theta: np.ndarray
    gronwall_integral: np.ndarray  # int (1 + ||grad u|| + ||grad omega|| + ||grad theta||)

    @property
    def total_sq(self) -> np.ndarray:
        return self.u**2 + self.omega**2 + self.theta**2

    def log_growth(self) -> np.ndarray:
        return np.log(self.total_sq / self.total_sq[0])

    def growth_constant(self) -> float:
        """max over t > 0 of log-growth / Gronwall integral."""
        lg, gi = self.log_growth()[1:], self.gronwall_integral[1:]
        return float(np.max(lg / gi)) if len(lg) else 0.0

    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.total_sq)))


def hs_series(trajectory: Sequence[State], s: float) -> HsSeries:
    t, u, w, th, G = [], [], [], [], []
    for st in trajectory:
        t.append(st.time)
        u.append(velocity_hs(st, s))
        w.append(sobolev_norm(st.omega_small, s))
        th.append(sobolev_norm(st.theta, s))
        G.append(1 + velocity_gradient_inf(st) + grad_inf(st.omega_small) + grad_inf(st.theta))
    t = np.asarray(t)
    return HsSeries(t, np.asarray(u), np.asarray(w), np.asarray(th), _cumtrapz(t, np.asarray(G)))


# ---------------------------------------------------------------- norm records


def _p_label(p: float) -> str:
    if math.isinf(p):
        return "Linf"
    return f"Lp{p:g}"


def norm_columns(p_norms: Sequence[float], s_values: Sequence[float]) -> list[str]:
    cols = []
    for name in ("Omega", "omega", "Z", "gradtheta", "D2theta"):
        cols += [f"{name}_{_p_label(p)}" for p in p_norms]
    cols += ["gradu_Linf", "u_Linf"]
    for s in s_values:
        cols += [f"u_Hs{s:g}", f"omega_Hs{s:g}", f"theta_Hs{s:g}"]
    return cols


def norm_record(state: State, p: Params, p_norms: Sequence[float], s_values: Sequence[float]) -> dict[str, float]:
    g = state.grid
    A = g.area
    fields = {
        "Omega": inverse_real(state.omega_big.coeffs),
        "omega": inverse_real(state.omega_small.coeffs),
        "Z": inverse_real(dynamics.compute_Z(state, p).coeffs),
        "gradtheta": _grad_mag(g, state.theta.coeffs),
        "D2theta": _hessian_mag(g, state.theta.coeffs),
    }
    rec = {}
    for name, v in fields.items():
        for q in p_norms:
            rec[f"{name}_{_p_label(q)}"] = lp_norm(v, q, A)
    u = _velocity_phys(state)
    rec["gradu_Linf"] = velocity_gradient_inf(state)
    rec["u_Linf"] = float(np.max(np.sqrt(u[0] ** 2 + u[1] ** 2)))
    for s in s_values:
        rec[f"u_Hs{s:g}"] = velocity_hs(state, s)
        rec[f"omega_Hs{s:g}"] = sobolev_norm(state.omega_small, s)
        rec[f"theta_Hs{s:g}"] = sobolev_norm(state.theta, s)
    return rec


# ---------------------------------------------------------------- identity suite


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tol)


def _rel_max(a: np.ndarray, scale: np.ndarray) -> float:
    return float(np.max(np.abs(a)) / max(float(np.max(np.abs(scale))), 1e-300))


def identity_suite(grid: Grid, p: Params, seed: int = 0) -> list[IdentityCheck]:
    """The algebraic identities of the spectral machinery on random dealiased fields."""
    rng = np.random.Generator(np.random.Philox(seed))
    rf = lambda: random_field(grid, rng)
    checks = []

    v = (rf(), rf())
    pv = helmholtz_project(v)
    ppv = helmholtz_project(pv)
    scale = np.stack([v[0].coeffs, v[1].coeffs])
    checks.append(IdentityCheck("projection_idempotent", _rel_max(np.stack([ppv[0].coeffs - pv[0].coeffs, ppv[1].coeffs - pv[1].coeffs]), scale), 1e-13))
    h = rf()
    grad_h = (SpectralField(grid, 1j * grid.k1 * h.coeffs), SpectralField(grid, 1j * grid.k2 * h.coeffs))
    pg = helmholtz_project(grad_h)
    checks.append(IdentityCheck("projection_kills_gradients", _rel_max(np.stack([pg[0].coeffs, pg[1].coeffs]), np.stack([grad_h[0].coeffs, grad_h[1].coeffs])), 1e-13))

    n_cut = 0.5 * grid.dealias_radius * grid.k0
    j1 = friedrichs_cutoff(v[0], n_cut)
    checks.append(IdentityCheck("cutoff_idempotent", _rel_max(friedrichs_cutoff(j1, n_cut).coeffs - j1.coeffs, scale), 1e-14))
    jp = helmholtz_project((friedrichs_cutoff(v[0], n_cut), friedrichs_cutoff(v[1], n_cut)))
    pj = (friedrichs_cutoff(pv[0], n_cut), friedrichs_cutoff(pv[1], n_cut))
    checks.append(IdentityCheck("cutoff_commutes_with_projection", _rel_max(np.stack([jp[0].coeffs - pj[0].coeffs, jp[1].coeffs - pj[1].coeffs]), scale), 1e-14))

    part = build_partition(grid)
    total = part.chi_table + part.phi_tables.sum(axis=0)
    checks.append(IdentityCheck("partition_of_unity", float(np.max(np.abs(total - 1))), 1e-12))
    f = rf()
    recon = f.coeffs * part.chi_table + sum(f.coeffs * ph for ph in part.phi_tables)
    checks.append(IdentityCheck("lp_reconstruction", _rel_max(recon - f.coeffs, f.coeffs), 1e-12))
    worst = 0.0
    for j in part.indices:
        for q in part.indices:
            if abs(j - q) >= 2:
                worst = max(worst, _rel_max(part.multiplier(j) * part.multiplier(q) * f.coeffs, f.coeffs))
    checks.append(IdentityCheck("almost_orthogonality", worst, 1e-15))

    om, w_, th = rf(), rf(), rf()
    u1h, u2h = dynamics.velocity_coeffs(grid, om.coeffs, (0.0, 0.0))
    div = grid.k1 * u1h + grid.k2 * u2h
    checks.append(IdentityCheck("velocity_divergence_free", _rel_max(div, om.coeffs), 1e-13))
    u = inverse_real(np.stack([u1h, u2h]))
    adv = dynamics.transport(grid, u[0], u[1], th.coeffs[None])[0]
    A = grid.area
    scale_adv = math.sqrt(A * np.sum(np.abs(adv) ** 2)) * math.sqrt(A * np.sum(np.abs(th.coeffs) ** 2))
    checks.append(IdentityCheck("advection_antisymmetry", abs(_dot(adv, th.coeffs, A)) / scale_adv, 1e-11))
    k2 = 2 * p.kappa
    curl_w = (SpectralField(grid, 1j * grid.k2_odd * w_.coeffs), SpectralField(grid, -1j * grid.k1_odd * w_.coeffs))
    lhs = k2 * (_dot(curl_w[0].coeffs, u1h, A) + _dot(curl_w[1].coeffs, u2h, A))
    rhs_ = k2 * _dot(om.coeffs, w_.coeffs, A)
    checks.append(IdentityCheck("coupling_exchange_symmetry", abs(lhs - rhs_) / max(abs(rhs_), 1e-300), 1e-11))
    return checks


# ---------------------------------------------------------------- CSV rows


ENERGY_COLUMNS = ["E_half", "diss_omega", "diss_theta", "coupling", "residual"]
CHECKS = ("energy", "norms", "bkm", "gn", "blowup")


@dataclass
class DiagnosticsRecorder:
    """Collects one row per cadence sample; the energy ledger runs every step."""

    params: Params
    p_norms: Sequence[float] = (2.0, 4.0, 8.0, math.inf)
    s_values: Sequence[float] = (2.5,)
    checks: Sequence[str] = CHECKS
    bkm_s: float = 2.5
    bkm_p: float = 4.0
    gn_p: float = 4.0
    ceiling: float = math.inf
    rows: list[dict] = field(default_factory=list)
    trajectory: list[State] = field(default_factory=list)
    keep_trajectory: bool = False

    def __post_init__(self):
        self.ledger = EnergyLedger(self.params)
        self.monitor = BlowupMonitor(self.ceiling)

    @property
    def columns(self) -> list[str]:
        return ["time", "step", *ENERGY_COLUMNS, *norm_columns(self.p_norms, self.s_values), "bkm", f"gn_p{self.gn_p:g}"]

    def step_hook(self, before: State, after: State, dt: float) -> None:
        if "energy" in self.checks:
            self.ledger(before, after, dt)

    def __call__(self, step: int, state: State) -> None:
        row: dict = {c: None for c in self.columns}
        row["time"], row["step"] = state.time, step
        if "energy" in self.checks:
            if step == 0 or not self.ledger.rows:
                t = energy_terms(state)
                row.update(E_half=t.e_half, diss_omega=self.params.gamma * t.grad_omega_sq,
                           diss_theta=self.params.mu * t.grad_theta_sq,
                           coupling=t.coupling(self.params), residual=0.0)
            else:
                r = self.ledger.rows[-1]
                row.update(E_half=r.e_after, diss_omega=r.diss_omega, diss_theta=r.diss_theta,
                           coupling=r.coupling, residual=r.defect)
        if "norms" in self.checks:
            row.update(norm_record(state, self.params, self.p_norms, self.s_values))
        if "bkm" in self.checks:
            row["bkm"] = bkm_ratio(state, self.bkm_s, self.bkm_p)
        if "gn" in self.checks:
            th = state.theta.coeffs.copy()
            th[0, 0] = 0.0
            try:
                row[f"gn_p{self.gn_p:g}"] = gn_ratio(SpectralField(state.grid, th), self.gn_p)[0]
            except ValueError:
                pass
        if "blowup" in self.checks:
            self.monitor(step, state)
        if self.keep_trajectory:
            self.trajectory.append(state)
        self.rows.append(row)
