#!/usr/bin/env python3
"""Run the full exact-certificate bundle and print a one-line verdict per family.

Usage: python scripts/run_certificates.py [n_max] [denominator_bound]
"""

import sys
import time

from gmchlab import coefficients as co


def main() -> int:
    n_max = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    bound = int(sys.argv[2]) if len(sys.argv) > 2 else 4096

    t0 = time.time()
    failures = 0

    for cert in co.verify_identities(max(n_max, 50)):
        status = "PASS" if cert.passed else "FAIL"
        extra = f"  [{cert.detail}]" if cert.detail else ""
        print(f"{status}  {cert.identity_id:<22} n in 1..{cert.n_range[1]}{extra}")
        failures += not cert.passed

    for name, check in (
        ("recurrences", lambda n: co.verify_recurrences(co.coefficient_table(n))),
        ("crest polynomial", lambda n: co.verify_P0_factorization(n)),
        ("phi non-positivity", lambda n: co.certify_phi_nonpositive(n, bound)),
    ):
        bad = [n for n in range(1, n_max + 1) if not check(n).passed]
        print(f"{'FAIL' if bad else 'PASS'}  {name:<22} n in 1..{n_max}"
              + (f"  failing n: {bad}" if bad else ""))
        failures += bool(bad)

    print(f"\ntotal time {time.time() - t0:.1f}s")
    return 2 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
