"""Recover V = E0 - u^2 x^2 + c x^4 from brute-force resonances at several h.

    python scripts/barrier_inversion.py --c 0.2 --h 0.02 0.01 0.005
"""
import argparse
import json

from bnfres import OracleConfig, PotentialSpec, invert_from_resonances, oracle_resonances


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--E0", type=float, default=1.0)
    ap.add_argument("--u", type=float, default=1.0)
    ap.add_argument("--c", type=float, default=0.2)
    ap.add_argument("--h", type=float, nargs="+", default=[0.02, 0.01, 0.005])
    ap.add_argument("--kmax", type=int, default=10)
    ap.add_argument("--basis", type=int, default=80)
    ap.add_argument("--report")
    args = ap.parse_args()

    spec = PotentialSpec(1, 1, args.E0, (args.u,), {(2,): args.c})
    lists = []
    for h in args.h:
        cfg = OracleConfig(B=args.basis, increment=20, h=h, im_window=(2 * args.kmax + 1.5) * args.u * h)
        L = oracle_resonances(spec, cfg)
        print(f"h={h:<8g} {len(L):3d} stable resonances, lowest {L.values[0]:.10f}")
        lists.append(L)
    back, report = invert_from_resonances(lists, 2)
    print(f"E0 {back.E0:.8f}  (true {args.E0})")
    print(f"u  {back.u[0]:.8f}  (true {args.u})")
    got = back.coeffs.get((2,), 0.0)
    print(f"c  {got:.6f}  (true {args.c}, rel err {abs(got - args.c) / abs(args.c):.2%})")
    print(f"fit rms {report.residual_rms:.2e}, condition {report.condition:.2e}, flagged={report.flagged}")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1)


if __name__ == "__main__":
    main()
