#!/usr/bin/env python3
"""Residual sweep over the compression cutoff.

The convergence checks compare operators on the low-lying box of states
below a cutoff; the cutoff trades sensitivity (larger boxes see more of
the truncation boundary) against cost.  This sweep records the commutation
residual trace for a range of cutoffs so the default can be chosen with
data rather than folklore.

Usage:
    python3 scripts/sweep_compression.py [--trunc 32,64,128] [--max-cutoff 10]
"""

import argparse
import json
import sys

from resalg import fock, verify

F = (1.0, 0.0)
G = (0.0, 1.0)
LAM = 1.0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trunc", default="32,64,128")
    parser.add_argument("--max-cutoff", type=int, default=10)
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    truncations = tuple(int(x) for x in args.trunc.split(","))
    caches = [verify.SolverCache(fock.build_rep(1, n)) for n in truncations]
    rows = []
    for cutoff in range(1, args.max_cutoff + 1):
        check = verify.check_relation_i(caches, F, G, LAM, LAM, cutoff)
        rows.append({"cutoff": cutoff, "residuals": list(check.residuals)})

    if args.json:
        print(json.dumps({"truncations": list(truncations), "rows": rows},
                         sort_keys=True))
        return 0
    header = "cutoff  " + "  ".join(f"N={n:<3d}     " for n in truncations)
    print(header)
    for row in rows:
        cells = "  ".join(f"{r:.3e}" for r in row["residuals"])
        print(f"{row['cutoff']:>6d}  {cells}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
