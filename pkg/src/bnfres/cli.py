"""Command-line workbench: ``bnfres {bnf,resonances,invert,oracle,roundtrip,random-spec}``.

Every JSON output carries a ``manifest`` block (command, inputs, parameters,
tool version, outputs). No timestamps are recorded, so exact-mode runs are
byte-for-byte reproducible.

Exit codes: 0 success, 2 mathematical precondition failure, 3 input
validation, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bnf import CanonicalChain, NormalForm, normal_form, unscale_normal_form
from .errors import BnfError, ValidationError
from .model import PotentialSpec, check_nonresonance
from .oracle import OracleConfig, oracle_resonances
from .recovery import recover_taylor
from .resonances import ResonanceList, generate_resonances, implied_delta, invert_from_resonances


def _manifest(command, inputs, params, outputs):
    return {"command": command, "inputs": [str(p) for p in inputs], "params": params,
            "version": __version__, "outputs": [str(p) for p in outputs]}


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _write_json(path, payload):
    text = json.dumps(payload, indent=1, sort_keys=False) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_spec(path, mode=None) -> PotentialSpec:
    spec = PotentialSpec.from_dict(_read_json(path))
    if mode == "exact" and not spec.exact:
        raise ValidationError("exact mode needs rational E0, u and coefficients (write them as \"p/q\")")
    return spec


def _load_normal_form(path) -> NormalForm:
    data = _read_json(path)
    if "scaled" in data and isinstance(data["scaled"], dict):
        data = data["scaled"]
    try:
        return NormalForm.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed normal form in {path}: {exc}") from exc


def cmd_bnf(args):
    spec = _load_spec(args.spec, args.mode)
    exact = args.mode == "exact"
    res = check_nonresonance(spec.u, spec.d, max(args.order, 2), args.eps)
    if not res:
        print(f"resonance: integer relation m={list(res.witness)} among u={list(map(str, spec.u))}, d={spec.d}",
              file=sys.stderr)
        return 2
    nf, chain = normal_form(spec, args.order, exact=exact, eps=args.eps)
    payload = {
        "scaled": nf.to_dict(),
        "unscaled": unscale_normal_form(nf).to_dict(),
        "chain": chain.to_dict(),
        "manifest": _manifest("bnf", [args.spec], {"order": args.order, "mode": args.mode, "eps": args.eps},
                              [args.output or "-"]),
    }
    _write_json(args.output, payload)
    return 0


def cmd_resonances(args):
    if not args.h:
        raise ValidationError("at least one --h value is required")
    nf = _load_normal_form(args.normalform)
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    for h in args.h:
        res = generate_resonances(nf, h, args.kmax)
        path = outdir / f"{args.prefix}_h{h:g}.json"
        payload = res.to_dict()
        payload["implied_delta"] = implied_delta(h, args.kmax, nf.u) if h < 1 else None
        payload["manifest"] = _manifest("resonances", [args.normalform], {"h": h, "kmax": args.kmax}, [path])
        _write_json(path, payload)
        print(path)
    return 0


def cmd_invert(args):
    lists = [ResonanceList.from_dict(_read_json(p)) for p in args.files]
    spec, report = invert_from_resonances(lists, args.order, M=args.max_degree, n=args.n,
                                          tol_factor=args.tol_factor)
    params = {"order": args.order, "max_degree": args.max_degree, "n": args.n, "tol_factor": args.tol_factor}
    out = spec.to_dict()
    out["manifest"] = _manifest("invert", args.files, params, [args.output or "-", args.report or ""])
    _write_json(args.output, out)
    if args.report:
        rep = report.to_dict()
        rep["manifest"] = out["manifest"]
        _write_json(args.report, rep)
    if report.flagged:
        print(f"warning: residual rms {report.residual_rms:.3g} is large; data may be inconsistent",
              file=sys.stderr)
    return 0


def cmd_oracle(args):
    spec = _load_spec(args.spec)
    cfg = OracleConfig(B=args.basis, h=args.h, re_window=args.re_window, im_window=args.im_window,
                       stab_tol=args.stab_tol, increment=args.increment, max_dim=args.max_dim)
    res = oracle_resonances(spec, cfg)
    payload = res.to_dict()
    payload["manifest"] = _manifest("oracle", [args.spec], dict(cfg.__dict__), [args.output or "-"])
    _write_json(args.output, payload)
    return 0


def cmd_roundtrip(args):
    spec = _load_spec(args.spec, args.mode)
    exact = args.mode == "exact"
    nf, _ = normal_form(spec, args.order, exact=exact, eps=args.eps)
    rec = recover_taylor(nf, args.order)
    want = spec.truncated(args.order).coeffs
    entries, worst = [], Fraction(0) if exact else 0.0
    for alpha in sorted(set(want) | set(rec.coeffs), key=lambda a: (sum(a), a)):
        a = want.get(alpha, 0)
        b = rec.coeffs.get(alpha, 0)
        diff = abs(Fraction(b) - Fraction(a)) if exact else abs(float(b) - float(a))
        worst = max(worst, diff)
        entries.append({"alpha": list(alpha), "input": str(a), "recovered": str(b), "diff": str(diff)})
    payload = {"order": args.order, "mode": args.mode, "max_abs_diff": str(worst), "entries": entries,
               "manifest": _manifest("roundtrip", [args.spec], {"order": args.order, "mode": args.mode},
                                     [args.output or "-"])}
    _write_json(args.output, payload)
    return 0


def cmd_random_spec(args):
    rng = random.Random(args.seed)
    n, d = args.n, args.d
    for _ in range(1000):
        u = tuple(Fraction(rng.randint(5, 30), 10) for _ in range(n))
        if check_nonresonance(u, d, args.order):
            break
    else:
        raise ValidationError("could not draw non-resonant frequencies")
    coeffs = {}
    for alpha in np.ndindex(*([args.order + 1] * n)):
        if 2 <= sum(alpha) <= args.order:
            coeffs[tuple(int(a) for a in alpha)] = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
    spec = PotentialSpec(n, d, Fraction(rng.randint(-5, 5), rng.randint(1, 4)), u, coeffs)
    out = spec.to_dict()
    out["manifest"] = _manifest("random-spec", [], {"n": n, "d": d, "order": args.order, "seed": args.seed},
                                [args.output or "-"])
    _write_json(args.output, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bnfres", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("bnf", help="classical Birkhoff normal form of a potential spec")
    s.add_argument("spec")
    s.add_argument("--order", "-N", type=int, required=True, help="highest action degree N_max")
    s.add_argument("--mode", choices=("exact", "float"), default="exact")
    s.add_argument("--eps", type=float, default=1e-9, help="float non-resonance threshold")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_bnf)

    s = sub.add_parser("resonances", help="classical-order resonance lattice from a normal form")
    s.add_argument("normalform")
    s.add_argument("--h", type=float, nargs="+", required=True)
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--out-dir", default=".")
    s.add_argument("--prefix", default="resonances")
    s.set_defaults(func=cmd_resonances)

    s = sub.add_parser("invert", help="recover Taylor coefficients from resonance files")
    s.add_argument("files", nargs="+")
    s.add_argument("--order", "-N", type=int, required=True)
    s.add_argument("--max-degree", "-M", type=int, default=None, help="fitted action degree (default N+1)")
    s.add_argument("--n", type=int, default=None, help="dimension, if known")
    s.add_argument("--tol-factor", type=float, default=1.0)
    s.add_argument("-o", "--output")
    s.add_argument("--report")
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("oracle", help="resonances of the complex-scaled matrix (n <= 2)")
    s.add_argument("spec")
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--basis", "-B", type=int, default=80)
    s.add_argument("--increment", type=int, default=20)
    s.add_argument("--re-window", type=float, default=0.5)
    s.add_argument("--im-window", type=float, default=0.5)
    s.add_argument("--stab-tol", type=float, default=1e-8)
    s.add_argument("--max-dim", type=int, default=10_000)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("roundtrip", help="spec -> normal form -> spec, with coefficient diffs")
    s.add_argument("spec")
    s.add_argument("--order", "-N", type=int, required=True)
    s.add_argument("--mode", choices=("exact", "float"), default="exact")
    s.add_argument("--eps", type=float, default=1e-9)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_roundtrip)

    s = sub.add_parser("random-spec", help="draw a random non-resonant rational spec")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--d", type=int, default=0)
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_random_spec)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BnfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
