#!/usr/bin/env python3
"""Orbital-stability sweeps for orders n = 1 and 2 at the default speeds.

Writes one report directory per sweep and prints the fitted constants and
exponents.  Usage: python scripts/run_stability_sweep.py [outdir]
"""

import sys
from pathlib import Path

from gmchlab.experiment import ExperimentConfig, run_stability_sweep, write_report


def main() -> int:
    outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/stability")
    for n, c in ((1, 2 / 3), (2, 8 / 15)):
        cfg = ExperimentConfig(
            n=n,
            c=c,
            delta=4 * (2 * 20.0 / 4096),
            eps_list=(1e-2, 1e-3, 1e-4),
            t_end=3.0,
        )
        report = run_stability_sweep(cfg)
        dest = outdir / f"n{n}"
        write_report(report, dest)
        print(
            f"n={n}: a={report.amplitude:.4f} floor={report.floor_distance:.4f} "
            f"A_hat={report.A_hat:.4f} "
            f"sup-distance exponent={report.distance_exponent:+.3f} "
            f"crest-deviation exponent={report.crest_exponent:+.3f}"
        )
        for row in report.rows:
            print(
                f"   eps={row.eps_target:.0e}: sup distance={row.sup_h1_distance:.4f} "
                f"sup |M-a|={row.sup_crest_deviation:.4f} envelope_ok={row.envelope_ok}"
            )
        print(f"   report written to {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
