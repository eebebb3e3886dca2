"""Bounded-difference checks for extension of scalars over a few real quadratic fields.

    python3 scripts/extension_scan.py --qmax 8
"""

import argparse
from fractions import Fraction

from parageo.extension import ScalarExtension, thunder_stability, verify_bounded_differences
from parageo.minima import q_grid
from parageo.numberfield import FieldContext, infinite_places, make_target

CASES = [(2, ["1", "2^(1/4)"]), (3, ["1", "3^(1/3)"]), (5, ["1", "2^(1/3)"])]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qmax", default="8")
    ap.add_argument("--step", default="1/4")
    args = ap.parse_args()
    qs = q_grid(Fraction(args.qmax), Fraction(args.step))
    for D, xi in CASES:
        K = FieldContext.quadratic(D)
        ext = ScalarExtension(K)
        t = make_target(K, infinite_places(K)[0], xi, 256)
        rep = verify_bounded_differences(t, ext, qs)
        th = thunder_stability(t, ext)
        print(f"D={D} xi={xi}: sup L {float(rep.sup_L):.4f}, sup L* {float(rep.sup_Lstar):.4f}, "
              f"stable={rep.stable}; thunder sups {[round(float(s), 4) for s in th['sups']]}")


if __name__ == "__main__":
    main()
