#!/usr/bin/env python3
"""Convergence calibration for the boundary-limited identities.

Runs the four checks that are only asymptotically exact under truncation
(commutation, additivity, derivation, implemented-derivation) on the
reference grid and records the residual traces.  The resulting JSON is the
pinned baseline the acceptance tests compare against: residuals must stay
non-increasing along the truncation ladder and land below the tolerance at
the top level.

Usage:
    python3 scripts/calibrate_convergence.py [--out baselines/convergence_baseline.json]
"""

import argparse
import json
import pathlib
import sys

from resalg import fock, verify

TRUNCATIONS = (64, 128, 256)
COMPRESSION = 6
TOLERANCE = 1e-6
F = (1.0, 0.0)
G = (0.0, 1.0)
LAM = 1.0
PROBE = "R(1,[0,1])"


def run_calibration() -> dict:
    caches = [verify.SolverCache(fock.build_rep(1, n)) for n in TRUNCATIONS]
    checks = {
        "rel_i": verify.check_relation_i(
            caches, F, G, LAM, LAM, COMPRESSION, tol=TOLERANCE
        ),
        "rel_ii": verify.check_relation_ii(
            caches, F, G, LAM, LAM, COMPRESSION, tol=TOLERANCE
        ),
        "rel_iv": verify.check_relation_iv(
            caches, F, G, LAM, COMPRESSION, tol=TOLERANCE
        ),
        "almost_inner": verify.check_almost_inner(
            caches, F, LAM, PROBE, COMPRESSION, tol=TOLERANCE
        ),
    }
    return {
        "schema_version": 1,
        "parameters": {
            "modes": 1,
            "f": list(F),
            "g": list(G),
            "lambda": LAM,
            "mu": LAM,
            "probe": PROBE,
            "compression": COMPRESSION,
        },
        "truncations": list(TRUNCATIONS),
        "tolerance": TOLERANCE,
        "residuals": {
            name: [float(r) for r in check.residuals]
            for name, check in checks.items()
        },
        "verdicts": {name: check.verdict for name, check in checks.items()},
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default_out = pathlib.Path(__file__).resolve().parent.parent / (
        "baselines/convergence_baseline.json"
    )
    parser.add_argument("--out", type=pathlib.Path, default=default_out)
    args = parser.parse_args(argv)

    baseline = run_calibration()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(baseline, indent=2, sort_keys=True) + "\n")

    for name, trace in sorted(baseline["residuals"].items()):
        status = "ok" if baseline["verdicts"][name] else "FAILED"
        formatted = ", ".join(f"{r:.6e}" for r in trace)
        print(f"{name:13s} [{formatted}]  {status}")
    print(f"baseline written to {args.out}")
    return 0 if all(baseline["verdicts"].values()) else 1


if __name__ == "__main__":
    sys.exit(main())
