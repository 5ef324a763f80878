#!/usr/bin/env python3
"""Full verification run: identity verdicts plus geometry findings.

Runs the operator-identity suite on the circle (32/64/128) and the
torus (32^2/64^2/128^2), the torus/spheroid closed-form comparisons,
and the mean-curvature-Laplacian split report.  Writes one merged JSON
report and prints a console summary.

    python scripts/run_verification.py [--out verification.json]
"""

import argparse
import sys

from geomforce import findings
from geomforce.oplab import run_identity_suite
from geomforce.reports import atomic_write, canonical_json


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="verification.json")
    parser.add_argument("--sizes", default="32,64,128")
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]

    print("running circle identity suite ...")
    circle = run_identity_suite("circle", {"a": 1.0}, sizes)
    print("running torus identity suite ...")
    torus = run_identity_suite("torus", {"R": 2.0, "r": 1.0}, sizes)

    report = {
        "identity_suites": {"circle": circle, "torus": torus},
        "torus_laplacian": findings.torus_laplacian_comparison(2.0, 1.0),
        "spheroid_prolate": findings.spheroid_extremum_comparison(1.0, 2.0),
        "spheroid_oblate": findings.spheroid_extremum_comparison(2.0, 1.0),
        "laplacian_split": findings.split_identity_report(),
    }
    atomic_write(args.out, canonical_json(report) + "\n")

    print(f"\n{'identity':16s} {'circle':12s} {'torus':12s}")
    torus_by_id = {v["identity"]: v for v in torus["identities"]}
    for v in circle["identities"]:
        tv = torus_by_id[v["identity"]]
        print(f"{v['identity']:16s} {v['verdict']:12s} {tv['verdict']:12s}"
              f"  torus residuals {['%.1e' % r for r in tv['residuals']]}")
    for flag in torus["flags"]:
        print("flag:", flag)
    tl = report["torus_laplacian"]
    print(f"\ntorus lapM vs published: matches={tl['matches_reference']}, "
          f"max rel deviation {tl['max_rel_deviation']:.3e}")
    if not tl["matches_reference"]:
        print("  pattern:", tl["pattern"]["note"])
    for key in ("spheroid_prolate", "spheroid_oblate"):
        print(f"{key}: {report[key]['summary']}")
    for entry in report["laplacian_split"]["surfaces"]:
        print(f"split on {entry['surface']:7s}: {entry['status']:9s} "
              f"(|res| {entry['max_abs_residual']:.2e}, "
              f"flipped {entry['max_abs_residual_flipped']:.2e})")
    hard = circle["hard_failures"] + torus["hard_failures"]
    print(f"\nreport written to {args.out}")
    if hard:
        print("HARD FAILURES:", hard)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
