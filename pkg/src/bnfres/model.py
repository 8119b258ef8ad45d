"""Potential specification, symbol construction, rescaling and complex scaling.

The potential is

    V(x) = E0 + sum_{j <= n-d} u_j^2 x_j^2 - sum_{j > n-d} u_j^2 x_j^2 + sum_alpha c_alpha x^(2 alpha)

so only even monomials can be expressed and the last ``d`` coordinates are
the hyperbolic (unstable) directions of the critical point.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Mapping, Sequence

from .coeffs import GaussQ, as_coeff, format_number, imag_unit, parse_number
from .errors import ResonanceError, ValidationError
from .poly import PhasePolynomial

__all__ = [
    "PotentialSpec",
    "NonResonance",
    "frequencies",
    "build_symbol",
    "rescale",
    "complex_scale",
    "scaled_symbol",
    "check_nonresonance",
    "require_nonresonance",
]


def _exact_number(v) -> bool:
    return isinstance(v, Rational) and not isinstance(v, bool)


@dataclass(frozen=True)
class PotentialSpec:
    """Even potential with a non-degenerate critical point at the origin.

    ``coeffs`` maps ``alpha`` (half exponents) to the coefficient of
    ``prod_j x_j^(2 alpha_j)``; the quadratic part lives in ``u``.
    """

    n: int
    d: int
    E0: object
    u: tuple
    coeffs: Mapping = field(default_factory=dict)

    def __post_init__(self):
        n, d = self.n, self.d
        if not isinstance(n, int) or n < 1:
            raise ValidationError(f"dimension n must be a positive integer, got {n!r}")
        if not isinstance(d, int) or not 0 <= d <= n:
            raise ValidationError(f"hyperbolic index d must satisfy 0 <= d <= n, got {d!r}")
        u = tuple(self.u)
        if len(u) != n:
            raise ValidationError(f"u has {len(u)} entries, expected {n}")
        for uj in u:
            if not uj > 0:
                raise ValidationError(f"frequencies must be positive, got u={u}")
        object.__setattr__(self, "u", u)
        coeffs = {}
        for alpha, c in dict(self.coeffs).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or min(alpha) < 0:
                raise ValidationError(f"bad multi-index {alpha} for n={n}")
            if sum(alpha) < 2:
                raise ValidationError(
                    f"Taylor entry x^{[2 * a for a in alpha]} has degree < 4; the quadratic part is set by u")
            if c:
                coeffs[alpha] = c
        object.__setattr__(self, "coeffs", dict(sorted(coeffs.items(), key=lambda t: (sum(t[0]), t[0]))))

    @property
    def exact(self) -> bool:
        vals = [self.E0, *self.u, *self.coeffs.values()]
        return all(_exact_number(v) for v in vals)

    @property
    def top_degree(self) -> int:
        """Largest ``|alpha|`` carried (1 for a purely quadratic potential)."""
        return max((sum(a) for a in self.coeffs), default=1)

    @property
    def elliptic(self) -> range:
        return range(self.n - self.d)

    @property
    def hyperbolic(self) -> range:
        return range(self.n - self.d, self.n)

    def truncated(self, N: int) -> "PotentialSpec":
        return PotentialSpec(self.n, self.d, self.E0, self.u,
                             {a: c for a, c in self.coeffs.items() if sum(a) <= N})

    def with_coeffs(self, coeffs: Mapping) -> "PotentialSpec":
        return PotentialSpec(self.n, self.d, self.E0, self.u, coeffs)

    def potential(self, x: Sequence) -> complex:
        """Evaluate ``V`` at a (possibly complex) point."""
        v = self.E0
        for j, xj in enumerate(x):
            sign = 1 if j < self.n - self.d else -1
            v = v + sign * self.u[j] ** 2 * xj ** 2
        for alpha, c in self.coeffs.items():
            t = c
            for a, xj in zip(alpha, x):
                t = t * xj ** (2 * a)
            v = v + t
        return v

    # serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "E0": format_number(self.E0),
            "u": [format_number(v) for v in self.u],
            "coeffs": [{"alpha": list(a), "c": format_number(c)} for a, c in self.coeffs.items()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PotentialSpec":
        try:
            n = int(data["n"])
            d = int(data.get("d", 0))
            E0 = parse_number(data.get("E0", 0))
            u = tuple(parse_number(v) for v in data["u"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed potential spec: {exc}") from exc
        coeffs: dict = {}
        for entry in data.get("coeffs", []):
            if "alpha" in entry:
                alpha = tuple(int(a) for a in entry["alpha"])
            elif "exp" in entry:
                exp = tuple(int(a) for a in entry["exp"])
                if any(e % 2 for e in exp):
                    raise ValidationError(
                        f"odd Taylor entry x^{list(exp)}: the potential must be even in every coordinate")
                alpha = tuple(e // 2 for e in exp)
            else:
                raise ValidationError(f"coefficient entry without 'alpha' or 'exp': {entry}")
            if alpha in coeffs:
                raise ValidationError(f"duplicate coefficient for alpha={list(alpha)}")
            try:
                coeffs[alpha] = parse_number(entry["c"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"bad coefficient in {entry}: {exc}") from exc
        return cls(n, d, E0, u, coeffs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)


def frequencies(u: Sequence, d: int, exact: bool = True) -> tuple:
    """Complex frequencies: ``u_j`` on elliptic and ``u_j / i`` on hyperbolic indices."""
    n = len(u)
    i = imag_unit(exact)
    out = []
    for j, uj in enumerate(u):
        w = as_coeff(uj, exact)
        out.append(w if j < n - d else w / i)
    return tuple(out)


def build_symbol(spec: PotentialSpec, maxdeg: int | None = None, exact: bool | None = None) -> PhasePolynomial:
    """``p - E0 = xi^2 + V(x) - E0`` in the real basis, truncated at ``maxdeg``."""
    if exact is None:
        exact = spec.exact
    if exact and not spec.exact:
        raise ValidationError("exact mode needs rational E0, u and coefficients")
    if maxdeg is None:
        maxdeg = 2 * spec.top_degree
    if maxdeg < 2 or maxdeg % 2:
        raise ValidationError(f"maxdeg must be an even integer >= 2, got {maxdeg}")
    n = spec.n
    terms = {}
    for j in range(n):
        e = [0] * (2 * n)
        e[n + j] = 2
        terms[tuple(e)] = 1
        e = [0] * (2 * n)
        e[j] = 2
        sign = 1 if j < n - spec.d else -1
        terms[tuple(e)] = as_coeff(spec.u[j] ** 2, exact) * sign
    for alpha, c in spec.coeffs.items():
        if 2 * sum(alpha) > maxdeg:
            continue
        terms[tuple(2 * a for a in alpha) + (0,) * n] = c
    return PhasePolynomial(n, terms, "real", exact)


def _rational_sqrt(q: Fraction) -> Fraction | None:
    q = Fraction(q)
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def rescale(p: PhasePolynomial, u: Sequence) -> PhasePolynomial:
    """Apply ``x_j -> x_j / sqrt(u_j)``, ``xi_j -> sqrt(u_j) xi_j``.

    The map is symplectic; ``xi^2 + u^2 x^2`` becomes ``u (xi^2 + x^2)``.
    A monomial ``x^a xi^b`` picks up ``prod_j u_j^((b_j - a_j)/2)``; in exact
    mode that must stay rational.
    """
    if p.basis != "real":
        raise ValueError("rescale acts on the real basis")
    n = p.n
    if len(u) != n:
        raise ValueError(f"need {n} frequencies, got {len(u)}")
    if any(not uj > 0 for uj in u):
        raise ValidationError(f"frequencies must be positive, got {tuple(u)}")
    roots = []
    for uj in u:
        if p.exact:
            roots.append(_rational_sqrt(uj) if _exact_number(uj) else None)
        else:
            roots.append(math.sqrt(float(uj)))

    def factor(e, c):
        f = 1
        for j in range(n):
            k = e[n + j] - e[j]
            if k % 2 == 0:
                f = f * (Fraction(u[j]) ** (k // 2) if p.exact else float(u[j]) ** (k // 2))
            else:
                if roots[j] is None:
                    raise ValidationError(
                        f"exact rescale of {e} needs sqrt(u_{j + 1}) which is irrational; use float mode")
                f = f * roots[j] ** k
        return c * f

    return p.map_coefficients(factor)


def complex_scale(p: PhasePolynomial, d: int) -> PhasePolynomial:
    """Substitute ``x_j = e^{i pi/4} x_j``, ``xi_j = e^{-i pi/4} xi_j`` on the last ``d`` coordinates."""
    if p.basis != "real":
        raise ValueError("complex_scale acts on the real basis")
    n = p.n
    if not 0 <= d <= n:
        raise ValueError(f"d must lie in [0, {n}]")
    if d == 0:
        return p
    i = imag_unit(p.exact)
    quarter = cmath.exp(1j * math.pi / 4)

    def phase(e, c):
        k = sum(e[j] - e[n + j] for j in range(n - d, n))
        if k % 2 == 0:
            return c * i ** (k // 2 % 4) if p.exact else c * (1j ** (k // 2 % 4))
        if p.exact:
            raise ValidationError(f"monomial {e} gets an irrational phase under exact complex scaling")
        return c * quarter ** k

    return p.map_coefficients(phase)


def scaled_symbol(spec: PotentialSpec, maxdeg: int | None = None, exact: bool | None = None) -> PhasePolynomial:
    """build -> rescale -> complex_scale; quadratic part is ``sum_j omega_j (xi_j^2 + x_j^2)``."""
    p = build_symbol(spec, maxdeg, exact)
    return complex_scale(rescale(p, spec.u), spec.d)


@dataclass(frozen=True)
class NonResonance:
    ok: bool
    witness: tuple | None = None
    order: int = 0

    def __bool__(self):
        return self.ok


def check_nonresonance(u: Sequence, d: int, order: int, eps: float = 1e-9) -> NonResonance:
    """Look for ``m != 0`` with ``|m|_1 <= 2*order`` and ``sum_j m_j omega_j = 0``.

    Rational ``u`` is tested exactly: elliptic frequencies are real and
    hyperbolic ones imaginary, so the two block sums must vanish separately.
    Otherwise ``|sum m_j omega_j| <= eps`` counts as a relation. The
    reported witness has minimal ``|m|_1`` and a positive first entry.
    """
    if order < 2:
        raise ValueError("order must be at least 2")
    n = len(u)
    L = 2 * order
    exact = all(_exact_number(v) for v in u)
    omega = [complex(v) for v in frequencies([float(v) for v in u], d, exact=False)]
    cands = []
    for m in itertools.product(range(-L, L + 1), repeat=n):
        s = sum(abs(k) for k in m)
        if s == 0 or s > L:
            continue
        first = next(k for k in m if k)
        if first < 0:
            continue
        cands.append((s, tuple(-k for k in m), m))
    cands.sort()
    for _, _, m in cands:
        if exact:
            re = sum(Fraction(m[j]) * u[j] for j in range(n - d))
            im = sum(Fraction(m[j]) * u[j] for j in range(n - d, n))
            hit = re == 0 and im == 0
        else:
            hit = abs(sum(mj * w for mj, w in zip(m, omega))) <= eps
        if hit:
            return NonResonance(False, m, order)
    return NonResonance(True, None, order)


def require_nonresonance(u, d, order, eps=1e-9) -> None:
    res = check_nonresonance(u, d, order, eps)
    if not res:
        raise ResonanceError(f"frequencies u={tuple(u)}, d={d} satisfy the integer relation m={res.witness}",
                             witness=res.witness)
