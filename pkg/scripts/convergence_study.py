"""Temporal self-convergence of IFRK2 and IFRK4 on a Taylor-Green state with a thermal perturbation.

Usage: python3 scripts/convergence_study.py [--n 64] [--t-end 0.5] [--dt 0.05]
"""

import argparse
import math

from micropolar_rb.dynamics import Params
from micropolar_rb.initial import make_ic
from micropolar_rb.spectral import Grid, l2_norm
from micropolar_rb.timestepper import IntegratorConfig, run


def state_diff(a, b):
    return math.sqrt(sum(l2_norm(getattr(a, f) - getattr(b, f)) ** 2 for f in ("omega_big", "omega_small", "theta")))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--t-end", type=float, default=0.5)
    ap.add_argument("--dt", type=float, default=0.05)
    ap.add_argument("--kappa", type=float, default=0.1)
    args = ap.parse_args()

    p = Params(args.kappa, 0.1, 0.1)
    s0 = make_ic("taylor-green", {"amplitude": 1.0, "theta_perturbation": 0.3}, None, Grid(args.n))
    for scheme in ("IFRK2", "IFRK4"):
        end = lambda dt: run(s0, p, IntegratorConfig(t_end=args.t_end, dt=dt, scheme=scheme))
        ref = end(args.dt / 16)
        print(f"{scheme}: dt, error vs dt/16 reference, ratio")
        prev = None
        for k in range(4):
            dt = args.dt / 2**k
            e = state_diff(end(dt), ref)
            print(f"  {dt:.5f}  {e:.3e}  {'' if prev is None else f'{prev / e:.2f}'}")
            prev = e


if __name__ == "__main__":
    main()
