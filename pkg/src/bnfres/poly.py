"""Sparse polynomials on phase space with complex coefficients.

Variables are laid out as ``(x_1..x_n, xi_1..xi_n)`` in the real basis and
``(z_1..z_n, zbar_1..zbar_n)`` in the complex basis, ``z = x + i xi``.
The Poisson bracket convention is

    {f, g} = sum_j  df/dxi_j * dg/dx_j - df/dx_j * dg/dxi_j

so that ``{H, g}`` is the derivative of ``g`` along the Hamiltonian vector
field of ``H`` (``{xi, x} = 1``). In the complex basis the same bracket reads
``2i sum_j (df/dz_j dg/dzbar_j - df/dzbar_j dg/dz_j)``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .coeffs import (
    FLOAT_PRUNE,
    GaussQ,
    as_coeff,
    coeff_from_json,
    coeff_to_json,
    imag_unit,
)

__all__ = [
    "PhasePolynomial",
    "ActionPolynomial",
    "poisson_bracket",
    "graded_key",
]

BASES = ("real", "complex")


def graded_key(exp: Sequence[int]):
    """Graded-lexicographic sort key (total degree first, then lex descending)."""
    return (sum(exp), tuple(-e for e in exp))


def _prune(terms: dict, exact: bool) -> dict:
    if exact:
        return {e: c for e, c in terms.items() if c}
    if not terms:
        return terms
    scale = max(abs(c) for c in terms.values())
    cut = FLOAT_PRUNE * scale
    return {e: c for e, c in terms.items() if abs(c) > cut}


class PhasePolynomial:
    """Immutable sparse polynomial in ``2n`` phase-space variables."""

    __slots__ = ("n", "basis", "exact", "terms")

    def __init__(self, n: int, terms: Mapping | None = None, basis: str = "real",
                 exact: bool = True, *, _trusted: bool = False):
        if basis not in BASES:
            raise ValueError(f"unknown basis {basis!r}")
        self.n = int(n)
        self.basis = basis
        self.exact = bool(exact)
        if _trusted:
            self.terms = _prune(terms, self.exact)
            return
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(k) for k in e)
            if len(e) != 2 * self.n:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {2 * self.n}")
            if min(e, default=0) < 0:
                raise ValueError(f"negative exponent in {e}")
            c = as_coeff(c, self.exact)
            clean[e] = clean.get(e, 0) + c
        self.terms = _prune(clean, self.exact)

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, n, basis="real", exact=True):
        return cls(n, {}, basis, exact, _trusted=True)

    @classmethod
    def constant(cls, n, value, basis="real", exact=True):
        return cls(n, {(0,) * (2 * n): value}, basis, exact)

    @classmethod
    def variable(cls, n, k, basis="real", exact=True, coeff=1):
        e = [0] * (2 * n)
        e[k] = 1
        return cls(n, {tuple(e): coeff}, basis, exact)

    def _new(self, terms, basis=None):
        return PhasePolynomial(self.n, terms, basis or self.basis, self.exact, _trusted=True)

    def _check(self, other: "PhasePolynomial"):
        if not isinstance(other, PhasePolynomial):
            raise TypeError(f"expected PhasePolynomial, got {type(other).__name__}")
        if other.n != self.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        if other.basis != self.basis:
            raise ValueError(f"basis mismatch: {self.basis} vs {other.basis}")
        if other.exact != self.exact:
            raise ValueError("coefficient mode mismatch (exact vs float)")

    # inspection -----------------------------------------------------------
    def __len__(self):
        return len(self.terms)

    def items(self):
        """Terms in graded-lexicographic order."""
        return sorted(self.terms.items(), key=lambda t: graded_key(t[0]))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        """Total degree; ``-1`` for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    @property
    def min_degree(self) -> int:
        return min((sum(e) for e in self.terms), default=-1)

    def homogeneous_part(self, deg: int) -> "PhasePolynomial":
        return self._new({e: c for e, c in self.terms.items() if sum(e) == deg})

    def truncate(self, maxdeg: int) -> "PhasePolynomial":
        return self._new({e: c for e, c in self.terms.items() if sum(e) <= maxdeg})

    def coeff(self, exp) -> object:
        return self.terms.get(tuple(exp), as_coeff(0, self.exact))

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def __eq__(self, other):
        if not isinstance(other, PhasePolynomial):
            return NotImplemented
        return (self.n, self.basis, self.exact) == (other.n, other.basis, other.exact) \
            and self.terms == other.terms

    __hash__ = None

    def allclose(self, other: "PhasePolynomial", tol: float = 1e-12) -> bool:
        self._check(other)
        diff = self - other
        if diff.is_zero():
            return True
        ref = max([abs(c) for c in self.terms.values()] + [abs(c) for c in other.terms.values()] + [1.0])
        return max(abs(c) for c in diff.terms.values()) <= tol * ref

    def __repr__(self):
        if not self.terms:
            return f"PhasePolynomial(n={self.n}, {self.basis}, 0)"
        shown = " + ".join(f"({c})*{list(e)}" for e, c in self.items()[:6])
        more = "" if len(self.terms) <= 6 else f" + ... ({len(self.terms)} terms)"
        return f"PhasePolynomial(n={self.n}, {self.basis}, {shown}{more})"

    # ring operations ------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, PhasePolynomial):
            return self + PhasePolynomial.constant(self.n, other, self.basis, self.exact)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PhasePolynomial):
            return self + (-as_coeff(other, self.exact))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "PhasePolynomial":
        c = as_coeff(c, self.exact)
        if not c:
            return self._new({})
        return self._new({e: v * c for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, PhasePolynomial):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, PhasePolynomial):
            return NotImplemented
        c = as_coeff(other, self.exact)
        return self._new({e: v / c for e, v in self.terms.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = PhasePolynomial.constant(self.n, 1, self.basis, self.exact)
        for _ in range(k):
            out = out.mul(self)
        return out

    def mul(self, other: "PhasePolynomial", maxdeg: int | None = None) -> "PhasePolynomial":
        """Product, optionally dropping every term above ``maxdeg``."""
        self._check(other)
        return self._new(_mul_terms(self.terms, other.terms, maxdeg))

    # calculus -------------------------------------------------------------
    def derivative(self, k: int) -> "PhasePolynomial":
        return self._new(_diff_terms(self.terms, k))

    def evaluate(self, point: Sequence) -> complex:
        """Evaluate at a point of ``2n`` (complex) numbers.

        Powers of each coordinate are tabulated once, so the cost is one
        product per term. Exact points in exact mode give exact results.
        """
        if len(point) != 2 * self.n:
            raise ValueError(f"point has length {len(point)}, expected {2 * self.n}")
        if not self.terms:
            return 0
        exact_point = all(isinstance(p, (int, Fraction, GaussQ)) for p in point)
        maxpow = [0] * (2 * self.n)
        for e in self.terms:
            for k, ek in enumerate(e):
                if ek > maxpow[k]:
                    maxpow[k] = ek
        powers = []
        for k, p in enumerate(point):
            row = [1]
            for _ in range(maxpow[k]):
                row.append(row[-1] * p)
            powers.append(row)
        total = 0
        for e, c in self.terms.items():
            v = c if exact_point else complex(c)
            for k, ek in enumerate(e):
                if ek:
                    v = v * powers[k][ek]
            total = total + v
        return total

    # coordinate changes ---------------------------------------------------
    def to_complex(self) -> "PhasePolynomial":
        """Substitute ``x = (z + zbar)/2``, ``xi = (z - zbar)/(2i)``."""
        if self.basis != "real":
            raise ValueError("polynomial is already in the complex basis")
        n, ex = self.n, self.exact
        half = as_coeff(Fraction(1, 2), ex)
        i = imag_unit(ex)
        images = []
        for j in range(n):
            images.append({_unit(2 * n, j): half, _unit(2 * n, n + j): half})
        for j in range(n):
            images.append({_unit(2 * n, j): -i * half, _unit(2 * n, n + j): i * half})
        return self._new(_compose_linear(self.terms, images, 2 * n, ex), basis="complex")

    def to_real(self) -> "PhasePolynomial":
        """Substitute ``z = x + i xi``, ``zbar = x - i xi``."""
        if self.basis != "complex":
            raise ValueError("polynomial is already in the real basis")
        n, ex = self.n, self.exact
        one = as_coeff(1, ex)
        i = imag_unit(ex)
        images = []
        for j in range(n):
            images.append({_unit(2 * n, j): one, _unit(2 * n, n + j): i})
        for j in range(n):
            images.append({_unit(2 * n, j): one, _unit(2 * n, n + j): -i})
        return self._new(_compose_linear(self.terms, images, 2 * n, ex), basis="real")

    def substitute_linear(self, matrix) -> "PhasePolynomial":
        """Compose with the linear map ``v -> M v``.

        Every variable ``v_k`` is replaced by ``sum_l M[k][l] v_l``; hence
        ``f.substitute_linear(A).substitute_linear(B) == f.substitute_linear(A @ B)``.
        """
        m = 2 * self.n
        rows = [[as_coeff(matrix[k][l], self.exact) for l in range(m)] for k in range(m)]
        if len(matrix) != m or any(len(r) != m for r in matrix):
            raise ValueError(f"matrix must be {m}x{m}")
        if _is_singular(rows, self.exact):
            raise ValueError("linear map is singular")
        images = [{_unit(m, l): rows[k][l] for l in range(m) if rows[k][l]} for k in range(m)]
        return self._new(_compose_linear(self.terms, images, m, self.exact))

    def map_coefficients(self, fn) -> "PhasePolynomial":
        """Apply ``fn(exp, coeff) -> coeff`` to every term."""
        return self._new({e: fn(e, c) for e, c in self.terms.items()})

    def as_float(self) -> "PhasePolynomial":
        if not self.exact:
            return self
        return PhasePolynomial(self.n, {e: complex(c) for e, c in self.terms.items()},
                               self.basis, exact=False, _trusted=True)

    # serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        out = []
        for e, c in self.items():
            re, im = coeff_to_json(c)
            out.append({"exp": list(e), "re": re, "im": im})
        return {"basis": self.basis, "n": self.n,
                "mode": "exact" if self.exact else "float", "terms": out}

    @classmethod
    def from_dict(cls, data: Mapping) -> "PhasePolynomial":
        exact = data.get("mode", "exact") == "exact"
        terms = {}
        for t in data["terms"]:
            terms[tuple(t["exp"])] = coeff_from_json(t.get("re", "0"), t.get("im", "0"), exact)
        return cls(int(data["n"]), terms, data.get("basis", "real"), exact)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "PhasePolynomial":
        return cls.from_dict(json.loads(text))


def poisson_bracket(f: PhasePolynomial, g: PhasePolynomial, maxdeg: int | None = None) -> PhasePolynomial:
    """``{f, g}``, optionally truncated above total degree ``maxdeg``."""
    f._check(g)
    n = f.n
    out: dict = {}
    if maxdeg is not None and f.min_degree + g.min_degree - 2 > maxdeg:
        return f._new({})
    for j in range(n):
        if f.basis == "real":
            # f_xi * g_x - f_x * g_xi
            pos = (_diff_terms(f.terms, n + j), _diff_terms(g.terms, j))
            neg = (_diff_terms(f.terms, j), _diff_terms(g.terms, n + j))
        else:
            # f_z * g_zbar - f_zbar * g_z, times 2i below
            pos = (_diff_terms(f.terms, j), _diff_terms(g.terms, n + j))
            neg = (_diff_terms(f.terms, n + j), _diff_terms(g.terms, j))
        _acc(out, _mul_terms(*pos, maxdeg), 1)
        _acc(out, _mul_terms(*neg, maxdeg), -1)
    if f.basis == "complex":
        two_i = imag_unit(f.exact) * 2
        out = {e: c * two_i for e, c in out.items()}
    return f._new(out)


class ActionPolynomial:
    """Polynomial in the actions ``iota_j = xi_j^2 + x_j^2`` (one exponent per ``j``)."""

    __slots__ = ("n", "exact", "terms")

    def __init__(self, n: int, terms: Mapping | None = None, exact: bool = True):
        self.n = int(n)
        self.exact = bool(exact)
        clean = {}
        for a, c in (terms or {}).items():
            a = tuple(int(k) for k in a)
            if len(a) != self.n or min(a, default=0) < 0:
                raise ValueError(f"bad action multi-index {a}")
            c = as_coeff(c, self.exact)
            clean[a] = clean.get(a, 0) + c
        self.terms = _prune(clean, self.exact)

    def items(self):
        return sorted(self.terms.items(), key=lambda t: graded_key(t[0]))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def coeff(self, alpha):
        return self.terms.get(tuple(alpha), as_coeff(0, self.exact))

    def homogeneous_part(self, deg):
        return ActionPolynomial(self.n, {a: c for a, c in self.terms.items() if sum(a) == deg}, self.exact)

    def __eq__(self, other):
        if not isinstance(other, ActionPolynomial):
            return NotImplemented
        return (self.n, self.exact, self.terms) == (other.n, other.exact, other.terms)

    __hash__ = None

    def __add__(self, other: "ActionPolynomial"):
        self._check(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return ActionPolynomial(self.n, out, self.exact)

    def __neg__(self):
        return ActionPolynomial(self.n, {a: -c for a, c in self.terms.items()}, self.exact)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = as_coeff(c, self.exact)
        return ActionPolynomial(self.n, {a: v * c for a, v in self.terms.items()}, self.exact)

    def map_coefficients(self, fn) -> "ActionPolynomial":
        return ActionPolynomial(self.n, {a: fn(a, c) for a, c in self.terms.items()}, self.exact)

    def _check(self, other):
        if not isinstance(other, ActionPolynomial):
            raise TypeError("expected ActionPolynomial")
        if other.n != self.n or other.exact != self.exact:
            raise ValueError("dimension or mode mismatch")

    def evaluate(self, actions: Sequence) -> complex:
        total = 0
        for a, c in self.terms.items():
            v = c
            for ak, x in zip(a, actions):
                if ak:
                    v = v * x ** ak
            total = total + v
        return total

    def evaluate_many(self, actions: np.ndarray) -> np.ndarray:
        """Vectorized float evaluation; ``actions`` has shape ``(m, n)``."""
        actions = np.asarray(actions, dtype=float)
        out = np.zeros(actions.shape[0], dtype=complex)
        for a, c in self.terms.items():
            out += complex(c) * np.prod(actions ** np.asarray(a), axis=1)
        return out

    def to_phase(self, basis: str = "complex") -> PhasePolynomial:
        """Expand ``iota_j`` as ``z_j zbar_j`` or as ``x_j^2 + xi_j^2``."""
        n = self.n
        if basis == "complex":
            return PhasePolynomial(n, {a + a: c for a, c in self.terms.items()}, "complex", self.exact)
        one = as_coeff(1, self.exact)
        out = PhasePolynomial.zero(n, "real", self.exact)
        iotas = []
        for j in range(n):
            iotas.append(PhasePolynomial(n, {_unit(2 * n, j, 2): one, _unit(2 * n, n + j, 2): one},
                                         "real", self.exact))
        for a, c in self.terms.items():
            term = PhasePolynomial.constant(n, c, "real", self.exact)
            for j, aj in enumerate(a):
                if aj:
                    term = term * iotas[j] ** aj
            out = out + term
        return out

    def as_float(self) -> "ActionPolynomial":
        if not self.exact:
            return self
        return ActionPolynomial(self.n, {a: complex(c) for a, c in self.terms.items()}, exact=False)

    def to_terms_json(self) -> list:
        out = []
        for a, c in self.items():
            re, im = coeff_to_json(c)
            out.append({"alpha": list(a), "re": re, "im": im})
        return out

    @classmethod
    def from_terms_json(cls, n, terms: Iterable[Mapping], exact: bool) -> "ActionPolynomial":
        return cls(n, {tuple(t["alpha"]): coeff_from_json(t.get("re", "0"), t.get("im", "0"), exact)
                       for t in terms}, exact)

    def __repr__(self):
        shown = " + ".join(f"({c})*iota^{list(a)}" for a, c in self.items())
        return f"ActionPolynomial(n={self.n}, {shown or '0'})"


# internals ------------------------------------------------------------------

def _unit(m, k, power=1):
    e = [0] * m
    e[k] = power
    return tuple(e)


def _acc(out: dict, terms: dict, sign: int):
    for e, c in terms.items():
        if sign < 0:
            c = -c
        if e in out:
            out[e] = out[e] + c
        else:
            out[e] = c


def _diff_terms(terms: dict, k: int) -> dict:
    out = {}
    for e, c in terms.items():
        ek = e[k]
        if ek:
            ne = e[:k] + (ek - 1,) + e[k + 1:]
            out[ne] = c * ek
    return out


def _mul_terms(a: dict, b: dict, maxdeg: int | None) -> dict:
    out: dict = {}
    if not a or not b:
        return out
    bl = [(e, c, sum(e)) for e, c in b.items()]
    for ea, ca in a.items():
        da = sum(ea)
        for eb, cb, db in bl:
            if maxdeg is not None and da + db > maxdeg:
                continue
            e = tuple(x + y for x, y in zip(ea, eb))
            v = ca * cb
            if e in out:
                out[e] = out[e] + v
            else:
                out[e] = v
    return out


def _compose_linear(terms: dict, images: list, m: int, exact: bool) -> dict:
    """Substitute each variable ``k`` by the linear form ``images[k]``."""
    one = as_coeff(1, exact)
    const = {(0,) * m: one}
    cache: dict = {}

    def power(k, p):
        key = (k, p)
        if key not in cache:
            cache[key] = const if p == 0 else _mul_terms(power(k, p - 1), images[k], None)
        return cache[key]

    out: dict = {}
    for e, c in terms.items():
        acc = {(0,) * m: c}
        for k, ek in enumerate(e):
            if ek:
                acc = _mul_terms(acc, power(k, ek), None)
        _acc(out, acc, 1)
    return out


def _is_singular(rows, exact: bool) -> bool:
    if not exact:
        a = np.array([[complex(v) for v in r] for r in rows])
        return np.linalg.matrix_rank(a) < len(rows)
    a = [list(r) for r in rows]
    m = len(a)
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col]), None)
        if piv is None:
            return True
        a[col], a[piv] = a[piv], a[col]
        for r in range(col + 1, m):
            if a[r][col]:
                f = a[r][col] / a[col][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return False
