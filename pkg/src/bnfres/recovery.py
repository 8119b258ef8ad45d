"""Recover the even Taylor coefficients of V from the classical normal form.

At step ``N`` the degree-``2N`` part of the working Hamiltonian is the
scaled image of ``W_N`` (the degree-``2N`` Taylor terms) plus an artifact
produced by the transforms of steps ``< N``. The artifact depends only on
lower coefficients, so it is obtained by running the forward engine with
those coefficients and a zero at degree ``2N``. Averaging ``x^(2 alpha)``
over the torus is diagonal,

    x^(2 alpha)  ->  prod_j C(2 alpha_j, alpha_j) / 4^alpha_j * iota^alpha,

which makes ``W_N`` readable from ``h_N - artifact``.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Sequence

from .bnf import NormalForm, normal_form, rescale_normal_form
from .coeffs import GaussQ, imag_unit
from .errors import NumericalError, ValidationError
from .model import PotentialSpec

__all__ = ["averaging_coefficient", "recover_taylor", "forward_normal_form"]


def averaging_coefficient(alpha: Sequence[int]) -> Fraction:
    """Torus average of ``prod_j x_j^(2 alpha_j)`` on ``iota = (1, ..., 1)``."""
    out = Fraction(1)
    for a in alpha:
        out *= Fraction(comb(2 * a, a), 4 ** a)
    return out


def forward_normal_form(spec: PotentialSpec, N: int, exact: bool):
    nf, _ = normal_form(spec, N, exact=exact, check_resonance=False)
    return nf


def recover_taylor(nf: NormalForm, N_target: int | None = None, imag_tol: float = 1e-9,
                   diagnostics: dict | None = None) -> PotentialSpec:
    """Invert the forward map degree by degree.

    The returned spec reproduces ``nf`` through ``N_target`` when fed back
    to :func:`bnfres.bnf.normal_form`. In float mode a recovered coefficient
    whose imaginary part exceeds ``imag_tol`` (relative) raises
    :class:`NumericalError`; otherwise the real part is kept and, if
    ``diagnostics`` is given, the discarded imaginary part is stored there.
    """
    if N_target is None:
        N_target = nf.N_max
    if N_target > nf.N_max:
        raise ValidationError(f"normal form only known through N={nf.N_max}, asked for {N_target}")
    nf = rescale_normal_form(nf)
    n, d, exact = nf.n, nf.d, nf.exact
    u = tuple(nf.u)
    i = imag_unit(exact)
    coeffs: dict = {}
    for N in range(2, N_target + 1):
        trial = PotentialSpec(n, d, nf.E0, u, dict(coeffs))
        artifact = forward_normal_form(trial, N, exact).h(N) if N > 2 or coeffs else None
        target = nf.h(N)
        W = target - artifact if artifact is not None else target
        for alpha, c in W.items():
            hyp = sum(alpha[j] for j in range(n - d, n))
            if exact:
                scale = GaussQ(averaging_coefficient(alpha))
                for j in range(n):
                    scale = scale / Fraction(u[j]) ** alpha[j]
                scale = scale * i ** (hyp % 4)
                val = c / scale
                if val.im:
                    raise NumericalError(f"recovered coefficient for alpha={alpha} is not real: {val}")
                value = val.re
            else:
                scale = complex(averaging_coefficient(alpha)) * (1j ** (hyp % 4))
                for j in range(n):
                    scale /= float(u[j]) ** alpha[j]
                val = complex(c) / scale
                if diagnostics is not None:
                    diagnostics[alpha] = val.imag
                if abs(val.imag) > imag_tol * max(1.0, abs(val)):
                    raise NumericalError(f"recovered coefficient for alpha={alpha} is not real: {val}")
                value = val.real
                if abs(value) <= 1e-13 * max(1.0, abs(complex(c))):
                    value = 0.0
            if value:
                coeffs[alpha] = value
    return PotentialSpec(n, d, nf.E0, u, coeffs)
