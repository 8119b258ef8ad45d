"""Acceptance criteria A1-A8; each test prints one PASS/FAIL line."""
import itertools
import math
import random
from fractions import Fraction

import numpy as np

from bnfres.bnf import check_parity, h1_polynomial, lie_transform, normal_form
from bnfres.coeffs import GaussQ
from bnfres.model import PotentialSpec, check_nonresonance, frequencies, scaled_symbol
from bnfres.oracle import OracleConfig, oracle_resonances
from bnfres.poly import PhasePolynomial, poisson_bracket
from bnfres.recovery import averaging_coefficient, recover_taylor
from bnfres.resonances import ResonanceList, generate_resonances, invert_from_resonances, leading_lattice

from flowtools import time_one_flow


def _match(oracle_vals, target):
    return float(np.min(np.abs(oracle_vals - target)))


def test_a1_barrier_top(acceptance):
    h, K = 0.01, 8
    spec = PotentialSpec(1, 1, 1, (1,))
    nf, _ = normal_form(spec, 3)
    gen = generate_resonances(nf, h, K)
    exact = np.array([1 - 1j * (2 * k + 1) * h for k in range(K + 1)])
    gen_err = float(np.max(np.abs(gen.values - exact)))
    orc = oracle_resonances(spec, OracleConfig(B=80, h=h, im_window=(2 * K + 2) * h)).values
    orc_err = max(_match(orc, v) for v in exact)
    ok = gen_err <= 1e-14 and orc_err <= 1e-8
    acceptance("A1", ok, f"generator err {gen_err:.2e}, oracle err {orc_err:.2e} (tol 1e-8)")
    assert ok


def test_a2_order_of_accuracy(acceptance):
    spec = PotentialSpec(1, 0, 0, (1,), {(2,): Fraction(1, 10)})
    nf, _ = normal_form(spec, 6, exact=False)
    errs = []
    for h in (0.02, 0.01):
        gen = generate_resonances(nf, h, 3).values
        orc = oracle_resonances(spec, OracleConfig(B=80, h=h, re_window=0.5)).values
        errs.append(max(_match(orc, v) for v in gen))
    ratio = errs[0] / errs[1]
    ok = 3 <= ratio <= 5
    acceptance("A2", ok, f"errors {errs[0]:.3e}, {errs[1]:.3e}; ratio {ratio:.3f} (want [3, 5])")
    assert ok


def _random_spec(rng):
    n = rng.choice((1, 2))
    d = rng.randint(0, n)
    while True:
        u = tuple(Fraction(rng.randint(5, 30), 10) for _ in range(n))
        if check_nonresonance(u, d, 4):
            break
    alphas = [a for a in itertools.product(range(5), repeat=n) if 2 <= sum(a) <= 4]
    chosen = rng.sample(alphas, rng.randint(1, len(alphas)))
    coeffs = {a: Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9)) for a in chosen}
    return PotentialSpec(n, d, Fraction(rng.randint(-5, 5), rng.randint(1, 4)), u, coeffs)


def test_a3_exact_roundtrip(acceptance):
    rng = random.Random(2024)
    failures = []
    for i in range(50):
        spec = _random_spec(rng)
        nf, _ = normal_form(spec, 4)
        back = recover_taylor(nf)
        if back != spec:
            failures.append(i)
    ok = not failures
    acceptance("A3", ok, f"50 specs, {len(failures)} mismatches (bit-exact)")
    assert ok


def test_a4_averaging_quadrature(acceptance):
    M = 16
    theta = np.linspace(0, 2 * np.pi, M, endpoint=False)
    worst = 0.0
    count = 0
    for n in (1, 2, 3):
        grids = np.meshgrid(*([theta] * n), indexing="ij")
        cos = [np.cos(g) for g in grids]
        for alpha in itertools.product(range(6), repeat=n):
            if sum(alpha) > 5:
                continue
            quad = np.mean(np.prod([c ** (2 * a) for c, a in zip(cos, alpha)], axis=0))
            worst = max(worst, abs(quad - float(averaging_coefficient(alpha))))
            count += 1
    ok = worst <= 1e-10
    acceptance("A4", ok, f"{count} multi-indices, max deviation {worst:.2e} (tol 1e-10)")
    assert ok


def test_a5_flow_consistency(acceptance):
    rng = np.random.default_rng(5)
    n, N_max = 2, 3

    def random_homogeneous(deg):
        exps = [e for e in itertools.product(range(deg + 1), repeat=2 * n) if sum(e) == deg]
        return PhasePolynomial(n, {e: float(rng.normal()) for e in exps}, exact=False)

    G = random_homogeneous(4).scale(0.5)
    H = random_homogeneous(2) + random_homogeneous(4)
    T = lie_transform(H, G, 2 * N_max)
    direction = rng.normal(size=2 * n)
    direction /= np.linalg.norm(direction)
    errs = []
    for r in (0.1, 0.05):
        pt = direction * r
        exact = H.evaluate(list(time_one_flow(G, pt)))
        errs.append(abs(T.evaluate(list(pt)) - exact))
    ratio = errs[0] / errs[1]
    ok = ratio >= 2 ** (2 * N_max + 1)
    acceptance("A5", ok, f"discrepancies {errs[0]:.3e}, {errs[1]:.3e}; ratio {ratio:.1f} (want >= {2 ** (2 * N_max + 1)})")
    assert ok


def test_a6_end_to_end(acceptance):
    spec = PotentialSpec(1, 1, 1.0, (1.0,), {(2,): 0.2})
    lists = []
    for h in (0.02, 0.01, 0.005):
        cfg = OracleConfig(B=80, increment=20, h=h, im_window=21.5 * h)
        lists.append(oracle_resonances(spec, cfg))
    back, report = invert_from_resonances(lists, 2)
    e_E0 = abs(back.E0 - 1.0)
    e_u = abs(back.u[0] - 1.0)
    rel = abs(back.coeffs.get((2,), 0.0) - 0.2) / 0.2
    ok = back.d == 1 and e_E0 <= 1e-4 and e_u <= 1e-3 and rel <= 0.05
    acceptance("A6", ok, f"d={back.d}, |dE0|={e_E0:.1e}, |du|={e_u:.1e}, quartic rel err {rel:.2%} "
                         f"(sizes {[len(L) for L in lists]})")
    assert ok


def test_a7_nonresonance_gate(acceptance):
    rejected = check_nonresonance((1, 2), 0, 2)
    accepted = check_nonresonance((1, 1), 1, 6)
    ok = (not rejected) and rejected.witness == (2, -1) and bool(accepted)
    acceptance("A7", ok, f"(1,2),d=0 witness {rejected.witness}; (1,1),d=1 order 6 accepted={bool(accepted)}")
    assert ok


def test_a8_structural_invariants(acceptance):
    failures = []
    # bracket axioms on fixed rational polynomials
    f = PhasePolynomial(2, {(1, 0, 2, 0): Fraction(1, 2), (0, 1, 0, 3): 2, (2, 0, 0, 1): -1})
    g = PhasePolynomial(2, {(0, 2, 1, 0): Fraction(-3, 4), (1, 1, 1, 1): 1})
    k = PhasePolynomial(2, {(1, 0, 0, 1): GaussQ(0, 1), (3, 0, 0, 0): Fraction(2, 5)})
    if poisson_bracket(f, g) != -poisson_bracket(g, f):
        failures.append("antisymmetry")
    if poisson_bracket(f, g * k) != poisson_bracket(f, g) * k + g * poisson_bracket(f, k):
        failures.append("Leibniz")
    jac = (poisson_bracket(f, poisson_bracket(g, k)) + poisson_bracket(g, poisson_bracket(k, f))
           + poisson_bracket(k, poisson_bracket(f, g)))
    if not jac.is_zero():
        failures.append("Jacobi")
    specs = [
        PotentialSpec(1, 1, 0, (1,), {(2,): Fraction(1, 5), (3,): Fraction(-1, 7)}),
        PotentialSpec(2, 1, 1, (1, Fraction(13, 10)), {(2, 0): Fraction(2, 9), (1, 1): -1, (0, 2): 2,
                                                       (2, 1): Fraction(1, 7)}),
        PotentialSpec(2, 2, 0, (Fraction(6, 5), Fraction(1, 2)), {(1, 1): 1, (2, 2): -3}),
    ]
    for spec in specs:
        N_max = 4
        nf, chain = normal_form(spec, N_max)
        H1 = h1_polynomial(frequencies(spec.u, spec.d))
        current = scaled_symbol(spec, 2 * N_max).to_complex()
        if not check_parity(current):
            failures.append("parity of input")
        for N in sorted(chain.generators):
            current = lie_transform(current, chain.generators[N], 2 * N_max)
            if not (check_parity(current) and check_parity(chain.generators[N])):
                failures.append(f"parity at N={N}")
        for N in range(2, N_max + 1):
            if not poisson_bracket(H1, nf.h(N).to_phase()).is_zero():
                failures.append(f"{{H1, h_{N}}} != 0")
        # leading order: Im = -sum_hyp u_j iota_j, exactly, with rational h
        h = Fraction(1, 100)
        for ks in itertools.product(range(4), repeat=spec.n):
            iota = [(2 * kk + 1) * h for kk in ks]
            val = nf.linear().evaluate(iota)
            if not val.im < 0:
                failures.append(f"lower half-plane at k={ks}")
    ok = not failures
    acceptance("A8", ok, "bracket axioms, parity, {H1, h_N} = 0, lower half-plane" + (f"; failed: {failures}" if failures else ""))
    assert ok
