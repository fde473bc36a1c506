"""Command line entry point: ``micropolar-rb {run,check,norms,twin}``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import dynamics
from .config import ConfigError, RunConfig, load_config
from .diagnostics import DiagnosticsRecorder, identity_suite, IdentityCheck, twin_run_stability
from .initial import make_ic
from .io import read_snapshot, write_csv, write_snapshot
from .paley import BesovIndex, besov_norm, build_partition, sobolev_norm, sobolev_norm_blocks
from .spectral import SpectralField, lp_norm, to_physical, to_spectral
from .timestepper import IntegrationError, run

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_INVARIANT = 0, 2, 3, 4


def _say(args, *msg) -> None:
    if not args.quiet:
        print(*msg)


def _float(s: str) -> float:
    return math.inf if s.lower() in ("inf", "infinity") else float(s)


def _setup(args) -> tuple[RunConfig, Path]:
    cfg = load_config(args.config).with_overrides(args.output_dir, args.seed, args.cadence)
    out = Path(cfg.output_dir)
    return cfg, out


def _initial(cfg: RunConfig):
    try:
        return make_ic(cfg.ic.name, cfg.ic.params, cfg.ic.seed, cfg.grid.build())
    except ValueError as exc:
        raise ConfigError(f"ic: {exc}") from None


def cmd_run(args) -> int:
    cfg, out = _setup(args)
    ic = _initial(cfg)
    d = cfg.diagnostics
    rec = DiagnosticsRecorder(
        cfg.params, d.p_norms, d.s_values, d.checks, d.bkm_s, d.bkm_p, d.gn_p, d.ceiling
    )
    out.mkdir(parents=True, exist_ok=True)
    code = EXIT_OK
    try:
        final = run(ic, cfg.params, cfg.integrator, hooks=[rec], step_hooks=[rec.step_hook], cadence=d.cadence)
    except IntegrationError as exc:
        print(f"integration failure at t = {exc.time:.17g} ({exc.field})", file=sys.stderr)
        final, code = None, EXIT_INTEGRATION
    write_csv(out / "diagnostics.csv", rec.columns, rec.rows)
    if final is not None:
        for name in dynamics.FIELD_NAMES:
            write_snapshot(out / f"{name}.snap", to_physical(getattr(final, name)), name, final.time)
        if rec.monitor.flagged:
            print(f"blow-up monitor exceeded {d.ceiling:g} at t = {rec.monitor.flag_time:.17g}", file=sys.stderr)
            code = EXIT_INVARIANT
        _say(args, f"t = {final.time:.6g}: {len(rec.rows)} rows written to {out / 'diagnostics.csv'}")
    return code


def _state_checks(cfg: RunConfig) -> list[IdentityCheck]:
    """Invariants evaluated on the configured initial condition."""
    st = _initial(cfg)
    p = cfg.params
    checks = []
    z_struct = dynamics.rhs_Z(st, p).coeffs
    z_closed = dynamics.z_source_closed_form(st, p).coeffs
    scale = max(1.0, float(np.max(np.abs(z_struct))))
    checks.append(IdentityCheck("Z structural vs closed form", float(np.max(np.abs(z_struct - z_closed))) / scale, 1e-11))
    tend = dynamics.rhs(st, p)
    asym = max(float(np.max(np.abs(f.coeffs - np.conj(f.coeffs[np.ix_(st.grid.neg_index, st.grid.neg_index)]))))
               for f in (tend.d_omega_big, tend.d_omega_small, tend.d_theta))
    checks.append(IdentityCheck("rhs Hermitian symmetry", asym, 1e-10))
    return checks


def cmd_check(args) -> int:
    cfg, _ = _setup(args)
    seed = cfg.ic.seed if cfg.ic.seed is not None else 0
    results = identity_suite(cfg.grid.build(), cfg.params, seed) + _state_checks(cfg)
    for c in results:
        _say(args, f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.3e} (tol {c.tol:.0e})")
    return EXIT_OK if all(c.passed for c in results) else EXIT_INVARIANT


def cmd_norms(args) -> int:
    try:
        phys, header = read_snapshot(args.snapshot)
    except (OSError, ValueError, KeyError) as exc:
        print(f"cannot read snapshot: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    f = to_spectral(phys)
    part = build_partition(f.grid)
    report = {
        "field_name": header["field_name"],
        "time": header["time"],
        "s": args.s,
        "p": args.p,
        "Lp": lp_norm(phys.values, args.p, phys.grid.area),
        "Hs": sobolev_norm(f, args.s),
        "Hs_blocks": sobolev_norm_blocks(f, args.s, part),
        "Besov_pp": besov_norm(f, BesovIndex(args.s, args.p, args.p), part),
        "Besov_p2": besov_norm(f, BesovIndex(args.s, args.p, 2.0), part),
        "Besov_pinf": besov_norm(f, BesovIndex(args.s, args.p, math.inf), part),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def _perturb(state, eps: float):
    """Add eps * cos(k0 x1) to theta: a single Fourier mode pair."""
    g = state.grid
    th = state.theta.coeffs.copy()
    th[1, 0] += 0.5 * eps
    th[-1, 0] += 0.5 * eps
    return state.replace(theta=SpectralField(g, th))


def cmd_twin(args) -> int:
    cfg, out = _setup(args)
    ic1 = _initial(cfg)
    ic2 = _perturb(ic1, args.eps)
    try:
        tr = twin_run_stability(ic1, ic2, cfg.params, cfg.integrator, cadence=cfg.diagnostics.cadence)
    except IntegrationError as exc:
        print(f"integration failure at t = {exc.time:.17g} ({exc.field})", file=sys.stderr)
        return EXIT_INTEGRATION
    out.mkdir(parents=True, exist_ok=True)
    cols = ["time", "D", "rate", "log_growth", "bound"]
    logs = tr.log_growth() if tr.D[0] > 0 else np.full_like(tr.D, np.nan)
    rows = [
        {"time": t, "D": d, "rate": r, "log_growth": None if np.isnan(lg) else lg,
         "bound": tr.gronwall_rate * (t - tr.times[0])}
        for t, d, r, lg in zip(tr.times, tr.D, tr.rates, logs)
    ]
    write_csv(out / "twin.csv", cols, rows)
    ok = tr.within_bound()
    _say(args, f"Gronwall rate {tr.gronwall_rate:.6g}; D(T)/D(0) = {tr.D[-1] / tr.D[0] if tr.D[0] else 0:.6g}; "
               f"{'within' if ok else 'EXCEEDS'} bound")
    return EXIT_OK if ok else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--cadence", type=int, default=None)
    common.add_argument("--quiet", action="store_true")

    ap = argparse.ArgumentParser(prog="micropolar-rb", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (
        ("run", cmd_run, "simulate and write diagnostics"),
        ("check", cmd_check, "identity and invariant suites only"),
        ("twin", cmd_twin, "twin-run stability"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("config")
        sp.set_defaults(func=fn)
    sub.choices["twin"].add_argument("--eps", type=float, default=1e-8)
    sp = sub.add_parser("norms", parents=[common], help="Besov/Sobolev/Lp report for a snapshot")
    sp.add_argument("snapshot")
    sp.add_argument("--s", type=float, default=0.0)
    sp.add_argument("--p", type=_float, default=2.0)
    sp.set_defaults(func=cmd_norms)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
