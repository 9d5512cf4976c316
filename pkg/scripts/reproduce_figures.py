#!/usr/bin/env python3
"""Produce the standard CSV bundle behind the package's reference plots.

Every output is generated through the ``spincavity`` command line, so
each CSV arrives with its sidecar ``.manifest.json`` and the bundle is
reproducible byte for byte.  The bundle covers:

- kicked-cavity decay curves for C in {0.05, 0.2, 0.5, 1, 2}, Gaussian
  and Lorentzian lines, with the matching closed-form columns
- first/second moment relaxation (tilted start) for a homogeneous and a
  regularized Gaussian ensemble at C = 0.5
- probe transmission/reflection scans: normal-mode splitting at C = 10
  (absorbing) and the amplifying resonance at C = 0.2 (inverted)
- a stability sweep over (g_ens, kappa) for the Gaussian line at zero
  dephasing, analytic criterion next to the windowed-simulation verdict
- the complex decay-rate (pole) table for the Gaussian line at
  C in {0.5, 2}

Usage:
    python3 scripts/reproduce_figures.py --outdir results
    python3 scripts/reproduce_figures.py --outdir /tmp/smoke --fast

``--fast`` shrinks the sub-ensemble counts and grids for a quick smoke
run; published numbers should use the defaults.
"""

from __future__ import annotations

import argparse
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from spincavity import cli

DECAY_COOPERATIVITIES = (0.05, 0.2, 0.5, 1.0, 2.0)


def run(outdir: pathlib.Path, name: str, args: list[str]) -> None:
    out = outdir / name
    argv = [str(a) for a in args] + ["--out", str(out)]
    started = time.perf_counter()
    code = cli.main(argv)
    if code != 0:
        raise SystemExit(f"{name}: spincavity exited with code {code}")
    print(f"  wrote {out}  ({time.perf_counter() - started:.1f}s)")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--outdir", type=pathlib.Path, default=pathlib.Path("results")
    )
    parser.add_argument(
        "--fast", action="store_true",
        help="smaller grids for a smoke run (not publication quality)",
    )
    ns = parser.parse_args()
    ns.outdir.mkdir(parents=True, exist_ok=True)

    m_decay = "201" if ns.fast else "601"
    m_lor = "101" if ns.fast else "401"
    m_cov = "101" if ns.fast else "201"
    sweep_samples = "5" if ns.fast else "8"

    print("decay curves (field kick, g_ens = 2 Gamma)")
    for C in DECAY_COOPERATIVITIES:
        kappa = 4.0 / C
        tag = f"{C:g}".replace(".", "p")
        run(ns.outdir, f"decay_gaussian_C{tag}.csv", [
            "decay", "--family", "gaussian", "--normalize-gamma",
            "--gamma-perp", "0", "--kappa", kappa, "--g-ens", "2",
            "--m", m_decay, "--t-max", "5", "--t-samples", "201",
        ])
        run(ns.outdir, f"decay_lorentzian_C{tag}.csv", [
            "decay", "--family", "lorentzian", "--width", "2",
            "--gamma-perp", "0", "--kappa", kappa, "--g-ens", "2",
            "--m", m_lor, "--t-max", "5", "--t-samples", "201",
        ])

    print("moment relaxation (tilted start, C = 0.5)")
    run(ns.outdir, "moments_homogeneous_C0p5.csv", [
        "moments", "--family", "homogeneous", "--gamma-perp", "1",
        "--kappa", "8", "--g-ens", "2", "--t-max", "6",
        "--t-samples", "121",
    ])
    # small dephasing regularizes the discretized zero-dephasing line
    run(ns.outdir, "moments_gaussian_C0p5.csv", [
        "moments", "--family", "gaussian", "--normalize-gamma",
        "--gamma-perp", "0.02", "--kappa", "8", "--g-ens", "2",
        "--m", m_cov, "--t-max", "6", "--t-samples", "121",
    ])

    print("probe spectra")
    run(ns.outdir, "spectrum_splitting_C10.csv", [
        "spectrum", "--family", "lorentzian", "--width", "1.5",
        "--gamma-perp", "0.25", "--kappa", "10", "--g-ens", "10",
        "--p", "-1", "--delta-e-min", "-30", "--delta-e-max", "30",
        "--delta-e-samples", "601",
    ])
    run(ns.outdir, "spectrum_amplifying_C0p2.csv", [
        "spectrum", "--family", "lorentzian", "--width", "1.5",
        "--gamma-perp", "0.25", "--kappa", "5", "--g-ens", "1",
        "--p", "1", "--delta-e-min", "-10", "--delta-e-max", "10",
        "--delta-e-samples", "401",
    ])

    print("stability sweep (gaussian, zero dephasing)")
    run(ns.outdir, "stability_sweep_gaussian.csv", [
        "stability-sweep", "--family", "gaussian", "--normalize-gamma",
        "--gamma-perp", "0", "--m", m_cov,
        "--g-min", "0.5", "--g-max", "5", "--g-samples", sweep_samples,
        "--kappa-min", "0.5", "--kappa-max", "10",
        "--kappa-samples", sweep_samples, "--t-max", "5",
    ])

    print("gaussian decay-rate poles")
    for C, kappa in ((0.5, "8"), (2.0, "2")):
        tag = f"{C:g}".replace(".", "p")
        run(ns.outdir, f"pole_gaussian_C{tag}.csv", [
            "pole", "--family", "gaussian", "--normalize-gamma",
            "--gamma-perp", "0", "--kappa", kappa, "--g-ens", "2",
        ])

    print(f"done; bundle in {ns.outdir}/")


if __name__ == "__main__":
    main()
