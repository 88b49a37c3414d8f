"""Sup-norm approximation error versus hidden-node count.

A bounded continuous activation can drive the error to zero for a
continuous target as nodes are added; a jump target leaves a plateau no
node count removes.  Both behaviors in one table.
"""

import argparse
import math

from sil_assessor.ann import approximation_check


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, nargs="+", default=[1, 4, 16, 50])
    ap.add_argument("--grid", type=int, default=512)
    args = ap.parse_args()

    targets = {
        "constant 0.3": lambda x: 0.3,
        "sin(2 pi x)": lambda x: math.sin(2.0 * math.pi * x),
        "step at 0.5": lambda x: 1.0 if x >= 0.5 else 0.0,
    }
    header = "target".ljust(16) + "".join(f"N={n:<10}" for n in args.nodes)
    print(header)
    for name, fn in targets.items():
        errors = approximation_check(fn, args.nodes, grid_points=args.grid)
        row = name.ljust(16) + "".join(f"{errors[n]:<12.5f}" for n in args.nodes)
        print(row)


if __name__ == "__main__":
    main()
