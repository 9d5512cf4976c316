#!/usr/bin/env python3
"""Scan discretization quality against the sub-ensemble count M.

The Gaussian line at zero dephasing is only marginally stable once
discretized: a finite grid of undamped spins leaves near-zero drift
eigenvalues whose real part shrinks slowly with M.  This script prints,
for a chosen configuration, the discrete spectral abscissa and the
peak-normalized change of the kicked-cavity trace between consecutive M
values, so a sufficient M can be read off before running steady-state
or long-window studies.

Usage:
    python3 scripts/convergence_scan.py
    python3 scripts/convergence_scan.py --gamma-perp 0.02 --kappa 8
"""

from __future__ import annotations

import argparse
import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from spincavity import (
    BroadeningSpec,
    SystemParams,
    build_drift_matrix,
    discretize,
    evolve_mean,
    initial_state,
    solve_width_for_gamma,
    spectral_abscissa,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kappa", type=float, default=8.0)
    parser.add_argument("--g-ens", type=float, default=2.0)
    parser.add_argument("--gamma-perp", type=float, default=0.0)
    parser.add_argument("--t-max", type=float, default=5.0)
    parser.add_argument(
        "--m-values", type=int, nargs="+",
        default=[51, 101, 151, 201, 301, 401],
    )
    ns = parser.parse_args()

    sigma = solve_width_for_gamma("gaussian", 1.0, ns.gamma_perp)
    spec = BroadeningSpec("gaussian", sigma)
    params = SystemParams(
        kappa=ns.kappa, gamma_perp=ns.gamma_perp, g_ens=ns.g_ens
    )
    C = ns.g_ens**2 / ns.kappa
    print(
        f"gaussian line, Gamma=1 (sigma={sigma:.6f}), kappa={ns.kappa:g}, "
        f"g_ens={ns.g_ens:g}, C={C:g}"
    )
    print(f"{'M':>5} {'abscissa':>13} {'trace shift vs previous M':>26}")

    times = np.linspace(0.0, ns.t_max, 101)
    previous = None
    for m in ns.m_values:
        grid = discretize(spec, m, ns.g_ens, 1e6)
        model = build_drift_matrix(params, grid, +1)
        abscissa = spectral_abscissa(model)
        y0, _ = initial_state("field-kick", grid, alpha=1.0)
        trace = evolve_mean(model, y0, times).means[:, 0]
        if previous is None:
            shift = ""
        else:
            shift = f"{np.max(np.abs(trace - previous)) / np.max(np.abs(trace)):.3e}"
        print(f"{m:>5} {abscissa:>13.5e} {shift:>26}")
        previous = trace

    if ns.gamma_perp == 0.0:
        print(
            "note: at zero dephasing the abscissa stays marginally "
            "positive at any finite M; steady-state queries need a small "
            "regularizing --gamma-perp (0.02 works well) and M >= 151"
        )


if __name__ == "__main__":
    main()
