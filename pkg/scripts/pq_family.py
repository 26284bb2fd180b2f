#!/usr/bin/env python3
"""Crossed-product pieces for the degree-q circle family, both torsion
placements, for a sweep of coprime parameter pairs.

The finite cyclic summand Z/(p-1) changes degree depending on a parity
convention, so every row is printed with both placements and a
non-normative marker.

Usage: python3 scripts/pq_family.py [--max-p 9] [--json]
"""

import argparse
import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from solenoidk.ktheory import pq_family_report


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-p", type=int, default=9)
    parser.add_argument("--json", action="store_true",
                        help="emit one JSON object per line instead of text")
    args = parser.parse_args()

    for p in range(3, args.max_p + 1):
        for q in range(2, p):
            if math.gcd(p, q) != 1:
                continue
            report = pq_family_report(p, q)
            if args.json:
                print(json.dumps(report.to_json(), sort_keys=True,
                                 ensure_ascii=False))
                continue
            spots = report.placements()
            print(f"p={p} q={q}  stable=({report.stable0.describe()}, "
                  f"{report.stable1.describe()})")
            print(f"  torsion in degree zero: K0={spots['torsion_in_degree_zero']['k0']}"
                  f"  K1={spots['torsion_in_degree_zero']['k1']}")
            print(f"  torsion in degree one:  K0={spots['torsion_in_degree_one']['k0']}"
                  f"  K1={spots['torsion_in_degree_one']['k1']}")
            print("  (non-normative: the placement is convention-dependent)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
