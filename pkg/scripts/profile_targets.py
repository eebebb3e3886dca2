"""Successive-minima profiles of a few reference targets, written as plot data.

    python3 scripts/profile_targets.py --qmax 12 --out-dir runs/profiles
"""

import argparse
import os
from fractions import Fraction

from parageo.cli import profile_plotdata
from parageo.minima import duality_sum_check, profile, q_grid, sum_rule_sup
from parageo.numberfield import FieldContext, infinite_places, make_target

Q = FieldContext.rational()
K2 = FieldContext.quadratic(2)
TARGETS = {
    "golden": (Q, ["1", "(1+sqrt(5))/2"]),
    "cubic": (Q, ["1", "2^(1/3)", "4^(1/3)"]),
    "e1": (Q, ["1", "0"]),
    "K2-quartic": (K2, ["1", "2^(1/4)"]),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--qmax", default="12")
    ap.add_argument("--step", default="1/4")
    ap.add_argument("--precision", type=int, default=256)
    ap.add_argument("--out-dir", default="runs/profiles")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)
    qs = q_grid(Fraction(args.qmax), Fraction(args.step))
    for name, (K, xi) in TARGETS.items():
        t = make_target(K, infinite_places(K)[0], xi, args.precision, name)
        pL, pS = profile(t, qs), profile(t, qs, kind="Lstar")
        with open(os.path.join(args.out_dir, f"{name}.dat"), "w") as fh:
            fh.write(profile_plotdata(pL, pS))
        print(f"{name:12s} exact={pL.exact and pS.exact} sum-rule sup={float(sum_rule_sup(pL)):.4f} "
              f"duality sup={float(duality_sum_check(pL, pS)):.4f}")


if __name__ == "__main__":
    main()
