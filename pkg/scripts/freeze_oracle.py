"""Regenerate tests/data/oracle_minima.json from the brute-force oracle."""

import json
import os
import sys
import time
from fractions import Fraction

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(HERE, "..", "tests"))

from oracles import brute_force_minima  # noqa: E402

TARGETS = {
    "e1": (["1", "0"], 12),
    "golden": (["1", "1.6180339887498948482045868343656381177203"], 12),
    "cubic": (["1", "1.2599210498948731647672106072782283505703", "1.5874010519681994747517056392723082091387"], 8),
}


def main():
    out = {}
    for name, (xi, qmax) in TARGETS.items():
        start = time.time()
        out[name] = {str(Fraction(i, 4)): [repr(float(v)) for v in brute_force_minima(xi, Fraction(i, 4))]
                     for i in range(4 * qmax + 1)}
        print(f"{name}: {time.time() - start:.2f}s")
    path = os.path.join(HERE, "..", "tests", "data", "oracle_minima.json")
    with open(path, "w") as fh:
        json.dump(out, fh, indent=0)


if __name__ == "__main__":
    main()
