"""Brute-force resonances from the complex-scaled operator in an oscillator basis.

Each coordinate gets harmonic-oscillator ladder matrices with frequency
``u_j``; hyperbolic coordinates are rotated, ``X -> e^{i pi/4} X`` and
``P -> e^{-i pi/4} P``. Powers of ``X`` are formed in a padded basis and then
cut, so every kept matrix element is exact up to rounding. Eigenvalues that
do not move between two basis sizes are reported.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError
from .model import PotentialSpec
from .resonances import ResonanceList

__all__ = ["OracleConfig", "ladder_matrices", "assemble_scaled", "oracle_resonances"]

ROT = cmath.exp(1j * math.pi / 4)


@dataclass
class OracleConfig:
    B: int = 60
    h: float = 0.01
    re_window: float = 0.5
    im_window: float = 0.5
    stab_tol: float = 1e-8
    increment: int = 10
    max_dim: int = 10_000
    im_tol: float = 1e-10

    def __post_init__(self):
        if self.B < 8:
            raise ValidationError("basis size B must be at least 8")
        if self.im_window <= 0:
            raise ValidationError("im_window must be positive")
        if self.h <= 0:
            raise ValidationError("h must be positive")


def ladder_matrices(B: int, h: float, omega: float = 1.0):
    """Position and momentum matrices in the first ``B`` oscillator states.

    ``P @ P + omega**2 * X @ X`` equals ``omega * h * (2k + 1)`` on the
    diagonal except for the last state, which sees the cut.
    """
    if B < 2:
        raise ValueError("B must be >= 2")
    a = np.diag(np.sqrt(np.arange(1, B, dtype=float)), k=1)
    X = math.sqrt(h / (2 * omega)) * (a + a.T)
    P = 1j * math.sqrt(h * omega / 2) * (a.T - a)
    return X.astype(complex), P


def _coordinate_blocks(spec: PotentialSpec, B: int, h: float, j: int):
    """``P_j^2`` and ``X_j^(2k)`` (k = 1..top) cut to ``B`` states."""
    top = spec.top_degree
    pad = 2 * top + 2
    X, P = ladder_matrices(B + pad, h, float(spec.u[j]))
    if j >= spec.n - spec.d:
        X, P = ROT * X, P / ROT
    P2 = (P @ P)[:B, :B]
    X2 = X @ X
    powers = {1: X2}
    for k in range(2, top + 1):
        powers[k] = powers[k - 1] @ X2
    return P2, {k: m[:B, :B] for k, m in powers.items()}


def assemble_scaled(spec: PotentialSpec, cfg: OracleConfig) -> np.ndarray:
    """Dense matrix of ``sum_j P_j^2 + V(X) - E0`` after complex scaling."""
    n, B = spec.n, cfg.B
    if n > 2:
        raise ValidationError("the spectral oracle handles n <= 2 only")
    if B ** n > cfg.max_dim:
        raise NumericalError(f"basis dimension {B ** n} exceeds the cap {cfg.max_dim}")
    blocks = [_coordinate_blocks(spec, B, cfg.h, j) for j in range(n)]
    eye = np.eye(B, dtype=complex)

    def embed(mats):
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    H = np.zeros((B ** n, B ** n), dtype=complex)
    for j in range(n):
        P2, X = blocks[j]
        sign = 1.0 if j < n - spec.d else -1.0
        local = P2 + sign * float(spec.u[j]) ** 2 * X[1]
        H += embed([local if k == j else eye for k in range(n)])
    for alpha, c in spec.coeffs.items():
        H += float(c) * embed([blocks[k][1][a] if a else eye for k, a in enumerate(alpha)])
    if not np.all(np.isfinite(H)):
        raise NumericalError("non-finite matrix entries")
    return H


def _eigenvalues(spec: PotentialSpec, cfg: OracleConfig) -> np.ndarray:
    H = assemble_scaled(spec, cfg)
    try:
        if spec.d == 0:
            return np.linalg.eigvalsh(0.5 * (H + H.conj().T)).astype(complex)
        return scipy.linalg.eigvals(H)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc


def oracle_resonances(spec: PotentialSpec, cfg: OracleConfig) -> ResonanceList:
    """Eigenvalues in the window that agree between bases ``B`` and ``B + increment``."""
    E0 = float(spec.E0)
    small = _eigenvalues(spec, cfg)
    big_cfg = OracleConfig(**{**cfg.__dict__, "B": cfg.B + cfg.increment})
    big = _eigenvalues(spec, big_cfg)
    keep = []
    for lam in big:
        if abs(lam.real) > cfg.re_window or not (-cfg.im_window <= lam.imag <= cfg.im_tol):
            continue
        if np.min(np.abs(small - lam)) < cfg.stab_tol:
            keep.append(lam)
    keep.sort(key=lambda v: (round(abs(v.imag), 12), v.real))
    return ResonanceList(cfg.h, np.asarray(keep, dtype=complex) + E0)
