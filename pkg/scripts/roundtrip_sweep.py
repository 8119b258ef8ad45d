"""Exact spec -> normal form -> spec on seeded random potentials, with timings.

    python scripts/roundtrip_sweep.py --count 20 --order 4
"""
import argparse
import itertools
import random
import time
from fractions import Fraction

from bnfres import PotentialSpec, check_nonresonance, normal_form, recover_taylor


def random_spec(rng, order):
    n = rng.choice((1, 2))
    d = rng.randint(0, n)
    while True:
        u = tuple(Fraction(rng.randint(5, 30), 10) for _ in range(n))
        if check_nonresonance(u, d, order):
            break
    alphas = [a for a in itertools.product(range(order + 1), repeat=n) if 2 <= sum(a) <= order]
    coeffs = {a: Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for a in rng.sample(alphas, rng.randint(1, len(alphas)))}
    return PotentialSpec(n, d, Fraction(rng.randint(-5, 5), rng.randint(1, 4)), u, coeffs)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--order", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    bad = 0
    for i in range(args.count):
        spec = random_spec(rng, args.order)
        t0 = time.perf_counter()
        nf, _ = normal_form(spec, args.order)
        t1 = time.perf_counter()
        ok = recover_taylor(nf) == spec
        t2 = time.perf_counter()
        bad += not ok
        print(f"{i:3d} n={spec.n} d={spec.d} terms={len(spec.coeffs):2d} "
              f"forward {t1 - t0:6.3f}s inverse {t2 - t1:6.3f}s {'ok' if ok else 'MISMATCH'}")
    print(f"{args.count - bad}/{args.count} exact roundtrips")


if __name__ == "__main__":
    main()
