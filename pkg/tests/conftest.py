from fractions import Fraction

import pytest
from hypothesis import strategies as st

from bnfres.coeffs import GaussQ
from bnfres.model import PotentialSpec, check_nonresonance
from bnfres.poly import PhasePolynomial

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    def record(name, passed, detail=""):
        line = f"{name}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


small_rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))
gauss = st.builds(GaussQ, small_rationals, small_rationals)


@st.composite
def polynomials(draw, n=2, basis="real", maxdeg=4, max_terms=5):
    k = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(k):
        exp = tuple(draw(st.integers(0, maxdeg)) for _ in range(2 * n))
        if sum(exp) > maxdeg:
            continue
        terms[exp] = draw(gauss)
    return PhasePolynomial(n, terms, basis, exact=True)


@st.composite
def symmetric_specs(draw, max_alpha=4):
    n = draw(st.integers(1, 2))
    d = draw(st.integers(0, n))
    for _ in range(50):
        u = tuple(Fraction(draw(st.integers(5, 30)), 10) for _ in range(n))
        if check_nonresonance(u, d, max_alpha):
            break
    else:
        u = tuple(Fraction(10 + 3 * j, 10) for j in range(n))
    alphas = [a for a in _alphas(n, max_alpha)]
    chosen = draw(st.lists(st.sampled_from(alphas), max_size=4, unique=True))
    coeffs = {a: draw(small_rationals.filter(bool)) for a in chosen}
    return PotentialSpec(n, d, draw(small_rationals), u, coeffs)


def _alphas(n, top):
    import itertools

    return [a for a in itertools.product(range(top + 1), repeat=n) if 2 <= sum(a) <= top]
