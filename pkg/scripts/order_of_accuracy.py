"""Classical-order lattice vs. the brute-force spectrum of x^2 + c x^4.

The gap should shrink like h^2 (the first quantum correction is not in the
classical normal form), so successive error ratios approach 4.

    python scripts/order_of_accuracy.py --h 0.04 0.02 0.01 0.005
"""
import argparse
import math

import numpy as np

from bnfres import OracleConfig, PotentialSpec, generate_resonances, normal_form, oracle_resonances


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, default=0.1)
    ap.add_argument("--h", type=float, nargs="+", default=[0.04, 0.02, 0.01, 0.005])
    ap.add_argument("--kmax", type=int, default=3)
    ap.add_argument("--order", type=int, default=6)
    ap.add_argument("--basis", type=int, default=80)
    args = ap.parse_args()

    spec = PotentialSpec(1, 0, 0.0, (1.0,), {(2,): args.c})
    nf, _ = normal_form(spec, args.order, exact=False)
    prev = None
    print(f"{'h':>8} {'max error':>12} {'ratio':>8} {'order':>6}")
    for h in args.h:
        gen = generate_resonances(nf, h, args.kmax).values
        orc = oracle_resonances(spec, OracleConfig(B=args.basis, h=h, re_window=1.0)).values
        err = max(float(np.min(np.abs(orc - v))) for v in gen)
        if prev is None:
            print(f"{h:8g} {err:12.4e}")
        else:
            ratio = prev[1] / err
            print(f"{h:8g} {err:12.4e} {ratio:8.3f} {math.log(ratio) / math.log(prev[0] / h):6.2f}")
        prev = (h, err)


if __name__ == "__main__":
    main()
