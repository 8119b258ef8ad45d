"""Classical Birkhoff normal form by successive Lie transforms.

Everything happens in the complex-scaled picture where the quadratic part is
``H1 = sum_j omega_j z_j zbar_j`` with complex ``omega``. The adjoint action
of ``H1`` is diagonal on monomials,

    {H1, z^a zbar^b} = 2i sum_j omega_j (b_j - a_j) z^a zbar^b,

so at every degree the part with ``a == b`` (a function of the actions) is
kept and the rest is removed by a generating function solving
``{H1, G} = rest``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .coeffs import as_coeff, format_number, imag_unit, parse_number
from .errors import NumericalError, ResonanceError, ValidationError
from .model import PotentialSpec, frequencies, require_nonresonance, scaled_symbol
from .poly import ActionPolynomial, PhasePolynomial, poisson_bracket

__all__ = [
    "NormalForm",
    "CanonicalChain",
    "h1_polynomial",
    "torus_average",
    "homological_divisor",
    "solve_homological",
    "lie_transform",
    "compute_bnf",
    "normal_form",
    "unscale_normal_form",
    "rescale_normal_form",
    "check_parity",
]

DEFAULT_MAX_TERMS = 2_000_000


def _max_terms() -> int:
    raw = os.environ.get("BNF_MAX_TERMS")
    return int(raw) if raw else DEFAULT_MAX_TERMS


@dataclass
class NormalForm:
    """Action polynomials ``h_N`` for ``2 <= N <= N_max``.

    ``h_1 = sum_j omega_j iota_j`` is implicit. With ``scaled=True`` the
    hyperbolic actions are the tilde actions of the scaled picture; with
    ``scaled=False`` they are ``xi_j^2 - x_j^2``.
    """

    n: int
    d: int
    E0: object
    u: tuple
    N_max: int
    actions: dict
    scaled: bool = True
    exact: bool = True

    def h(self, N: int) -> ActionPolynomial:
        if N == 1:
            return self.linear()
        return self.actions.get(N, ActionPolynomial(self.n, {}, self.exact))

    def linear(self) -> ActionPolynomial:
        """``h_1`` in the same picture as the stored actions."""
        if self.scaled:
            omega = frequencies(self.u, self.d, self.exact)
        else:
            omega = tuple(as_coeff(v, self.exact) for v in self.u)
        return ActionPolynomial(self.n, {_unit(self.n, j): w for j, w in enumerate(omega)}, self.exact)

    def total(self, upto: int | None = None, linear: bool = True) -> ActionPolynomial:
        out = self.linear() if linear else ActionPolynomial(self.n, {}, self.exact)
        for N in range(2, (upto or self.N_max) + 1):
            out = out + self.h(N)
        return out

    def truncated(self, N: int) -> "NormalForm":
        return NormalForm(self.n, self.d, self.E0, self.u, min(N, self.N_max),
                          {k: v for k, v in self.actions.items() if k <= N}, self.scaled, self.exact)

    def __eq__(self, other):
        if not isinstance(other, NormalForm):
            return NotImplemented
        keys = set(self.actions) | set(other.actions)
        return ((self.n, self.d, self.scaled, self.exact, self.N_max) ==
                (other.n, other.d, other.scaled, other.exact, other.N_max)
                and all(self.h(k) == other.h(k) for k in keys))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "E0": format_number(self.E0),
            "u": [format_number(v) for v in self.u],
            "N_max": self.N_max,
            "scaled": self.scaled,
            "mode": "exact" if self.exact else "float",
            "actions": [{"N": N, "terms": self.h(N).to_terms_json()} for N in range(2, self.N_max + 1)],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NormalForm":
        exact = data.get("mode", "exact") == "exact"
        n = int(data["n"])
        actions = {int(a["N"]): ActionPolynomial.from_terms_json(n, a["terms"], exact)
                   for a in data.get("actions", [])}
        N_max = int(data.get("N_max", max(actions, default=1)))
        return cls(n, int(data.get("d", 0)), parse_number(data.get("E0", 0)),
                   tuple(parse_number(v) for v in data["u"]), N_max, actions,
                   bool(data.get("scaled", True)), exact)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "NormalForm":
        return cls.from_dict(json.loads(text))


@dataclass
class CanonicalChain:
    """Generating functions ``G_N`` (complex basis); the transform is
    ``exp(ad G_N_max) ... exp(ad G_2)`` applied to the scaled symbol."""

    generators: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"generators": [{"N": N, "G": G.to_dict()} for N, G in sorted(self.generators.items())]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "CanonicalChain":
        return cls({int(g["N"]): PhasePolynomial.from_dict(g["G"]) for g in data.get("generators", [])})


def _unit(n, j):
    e = [0] * n
    e[j] = 1
    return tuple(e)


def h1_polynomial(omega: Sequence, exact: bool = True) -> PhasePolynomial:
    """``sum_j omega_j z_j zbar_j`` in the complex basis."""
    n = len(omega)
    terms = {}
    for j, w in enumerate(omega):
        e = [0] * (2 * n)
        e[j] = e[n + j] = 1
        terms[tuple(e)] = w
    return PhasePolynomial(n, terms, "complex", exact)


def torus_average(f: PhasePolynomial):
    """Split ``f`` into its ``a == b`` part (as actions) and the remainder."""
    if f.basis != "complex":
        raise ValueError("torus_average expects the complex basis")
    n = f.n
    avg, rest = {}, {}
    for e, c in f.terms.items():
        a, b = e[:n], e[n:]
        if a == b:
            avg[a] = c
        else:
            rest[e] = c
    return (ActionPolynomial(n, avg, f.exact),
            PhasePolynomial(n, rest, "complex", f.exact, _trusted=True))


def homological_divisor(exp: Sequence[int], omega: Sequence, exact: bool = True):
    """Eigenvalue ``2i sum_j omega_j (b_j - a_j)`` of ``ad H1`` on ``z^a zbar^b``."""
    n = len(omega)
    s = as_coeff(0, exact)
    for j in range(n):
        m = exp[n + j] - exp[j]
        if m:
            s = s + omega[j] * m
    return imag_unit(exact) * 2 * s


def solve_homological(rest: PhasePolynomial, omega: Sequence, eps: float = 1e-9) -> PhasePolynomial:
    """Return ``G`` with ``{H1, G} = rest``; same monomial support as ``rest``."""
    if rest.basis != "complex":
        raise ValueError("solve_homological expects the complex basis")
    n = rest.n
    omega = tuple(as_coeff(w, rest.exact) for w in omega)
    out = {}
    for e, c in rest.terms.items():
        if e[:n] == e[n:]:
            raise ValueError(f"monomial {e} lies in the kernel of ad H1; average it out first")
        div = homological_divisor(e, omega, rest.exact)
        small = (not div) if rest.exact else abs(div) <= eps
        if small:
            m = tuple(e[n + j] - e[j] for j in range(n))
            raise ResonanceError(f"small divisor {div} for monomial z^{list(e[:n])} zbar^{list(e[n:])}",
                                 witness=m)
        out[e] = c / div
    return PhasePolynomial(n, out, "complex", rest.exact, _trusted=True)


def lie_transform(f: PhasePolynomial, G: PhasePolynomial, maxdeg: int) -> PhasePolynomial:
    """``sum_k ad_G^k f / k!`` truncated above ``maxdeg`` (``ad_G f = {G, f}``).

    This equals ``f`` composed with the time-one flow of ``G``.
    """
    if G.is_zero():
        return f.truncate(maxdeg)
    if G.min_degree < 3:
        raise ValueError("generating function must start at degree >= 3 for the series to terminate")
    result = f.truncate(maxdeg)
    term = result
    k = 0
    while not term.is_zero():
        k += 1
        term = poisson_bracket(G, term, maxdeg) / k
        result = result + term
    return result


def check_parity(f: PhasePolynomial) -> bool:
    """True iff every monomial has an even degree in each coordinate pair."""
    n = f.n
    return all((e[j] + e[n + j]) % 2 == 0 for e in f.terms for j in range(n))


def _omega_structure(omega, exact):
    """Infer ``(d, u)`` from frequencies laid out elliptic-first."""
    cw = [complex(w) for w in omega]
    d = sum(1 for w in cw if w.real == 0 and w.imag < 0)
    n = len(cw)
    if any(not (w.real == 0 and w.imag < 0) for w in cw[n - d:]):
        raise ValidationError("hyperbolic frequencies must come last")
    u = []
    for j, w in enumerate(omega):
        if j < n - d:
            u.append(w.re if exact else w.real)
        else:
            u.append(-w.im if exact else -w.imag)
    return d, tuple(u)


def compute_bnf(p_scaled: PhasePolynomial, omega: Sequence, N_max: int, eps: float = 1e-9,
                E0=0, check: bool = True):
    """Normalize ``p_scaled`` (real basis, scaled picture) through degree ``2*N_max``.

    Returns ``(NormalForm, CanonicalChain)``. At step ``N`` the degree-``2N``
    part ``R`` of the current Hamiltonian is split into its average ``h_N``
    and the rest; ``G_N`` solves ``{H1, G_N} = rest`` and the Hamiltonian is
    replaced by ``exp(ad G_N)`` of itself, which turns its degree-``2N``
    part into exactly ``h_N``.
    """
    exact = p_scaled.exact
    n = p_scaled.n
    omega = tuple(as_coeff(w, exact) for w in omega)
    if len(omega) != n:
        raise ValueError(f"need {n} frequencies, got {len(omega)}")
    if N_max < 1:
        raise ValueError("N_max must be >= 1")
    d, u = _omega_structure(omega, exact)
    maxdeg = 2 * N_max
    current = (p_scaled if p_scaled.basis == "complex" else p_scaled.to_complex()).truncate(maxdeg)
    H1 = h1_polynomial(omega, exact)
    quad = current.homogeneous_part(2)
    if not (quad == H1 if exact else quad.allclose(H1, 1e-12)):
        raise ValidationError("quadratic part of the scaled symbol is not sum_j omega_j (xi_j^2 + x_j^2)")
    if current.min_degree < 2 or any(sum(e) % 2 for e in current.terms):
        raise ValidationError("scaled symbol must contain only even total degrees >= 2")
    if check and not check_parity(current):
        raise ValidationError("symbol is not even in each coordinate")
    limit = _max_terms()
    actions, gens = {}, {}
    for N in range(2, N_max + 1):
        avg, rest = torus_average(current.homogeneous_part(2 * N))
        G = solve_homological(rest, omega, eps)
        if not G.is_zero():
            current = lie_transform(current, G, maxdeg)
        if len(current) > limit:
            raise NumericalError(f"working Hamiltonian has {len(current)} terms (> BNF_MAX_TERMS={limit})")
        if check:
            if not check_parity(current) or not check_parity(G):
                raise AssertionError(f"parity lost at step N={N}")
            if exact:
                assert current.homogeneous_part(2 * N) == avg.to_phase("complex"), "step did not normalize"
        actions[N] = avg
        gens[N] = G
    nf = NormalForm(n, d, E0, u, N_max, actions, scaled=True, exact=exact)
    return nf, CanonicalChain(gens)


def normal_form(spec: PotentialSpec, N_max: int, exact: bool | None = None, eps: float = 1e-9,
                check_resonance: bool = True):
    """Full forward pipeline from a potential: returns ``(NormalForm, CanonicalChain)``."""
    if exact is None:
        exact = spec.exact
    if check_resonance and N_max >= 2:
        require_nonresonance(spec.u, spec.d, N_max, eps)
    p = scaled_symbol(spec, 2 * N_max, exact)
    omega = frequencies(spec.u, spec.d, exact)
    nf, chain = compute_bnf(p, omega, N_max, eps, E0=spec.E0)
    nf.u = tuple(spec.u)
    return nf, chain


def _hyp_phase(alpha, n, d, exact, power):
    k = sum(alpha[j] for j in range(n - d, n)) * power % 4
    return imag_unit(exact) ** k if exact else 1j ** k


def unscale_normal_form(nf: NormalForm, tol: float = 1e-9) -> NormalForm:
    """Substitute ``iota~_j = i * jmath_j`` on hyperbolic indices.

    For a real symmetric potential the result has real coefficients; this
    is asserted (exactly, or up to ``tol`` relative in float mode).
    """
    if not nf.scaled:
        raise ValueError("normal form is already unscaled")
    n, d = nf.n, nf.d
    actions = {}
    for N, hN in nf.actions.items():
        out = hN.map_coefficients(lambda a, c: c * _hyp_phase(a, n, d, nf.exact, 1))
        scale = max([abs(complex(c)) for c in out.terms.values()] + [0.0])
        for a, c in out.terms.items():
            im = complex(c).imag
            bad = (c.im != 0) if nf.exact else abs(im) > tol * max(scale, 1.0)
            if bad:
                raise NumericalError(f"unscaled coefficient of iota^{list(a)} in h_{N} is not real: {c}")
        actions[N] = out
    return NormalForm(n, d, nf.E0, nf.u, nf.N_max, actions, scaled=False, exact=nf.exact)


def rescale_normal_form(nf: NormalForm) -> NormalForm:
    """Inverse of :func:`unscale_normal_form`."""
    if nf.scaled:
        return nf
    n, d = nf.n, nf.d
    actions = {N: hN.map_coefficients(lambda a, c: c * _hyp_phase(a, n, d, nf.exact, 3))
               for N, hN in nf.actions.items()}
    return NormalForm(n, d, nf.E0, nf.u, nf.N_max, actions, scaled=True, exact=nf.exact)
