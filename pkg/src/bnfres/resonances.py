"""Resonance lattices from a normal form, and the way back.

Forward: at classical order the resonance labelled ``k`` is
``E0 + sum_N h~_N(iota)`` at ``iota_j = (2 k_j + 1) h`` (the first quantum
correction vanishes identically).

Inverse: estimate ``(E0, d, u)`` from the low-lying gaps, label the data on
the leading-order lattice, fit the action polynomial by linear least
squares with one ``gamma_h * h^2`` intercept per ``h``, and hand the fitted
normal form to :func:`bnfres.recovery.recover_taylor`.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .bnf import NormalForm
from .errors import LabelingError, RankDeficiencyError, StructureError, ValidationError
from .poly import ActionPolynomial, graded_key

__all__ = [
    "ResonanceList",
    "Structure",
    "FitReport",
    "generate_resonances",
    "leading_lattice",
    "label_resonances",
    "estimate_structure",
    "fit_normal_form",
    "invert_from_resonances",
    "implied_delta",
]


@dataclass
class ResonanceList:
    """Resonances at one value of ``h``; ``labels[i]`` is the ``k`` of ``values[i]``."""

    h: float
    values: np.ndarray
    labels: list | None = None
    unmatched: np.ndarray | None = None

    def __post_init__(self):
        self.h = float(self.h)
        if not self.h > 0:
            raise ValidationError(f"h must be positive, got {self.h}")
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        if self.labels is not None:
            self.labels = [tuple(int(x) for x in k) for k in self.labels]
            if len(self.labels) != len(self.values):
                raise ValidationError("labels and values differ in length")
            if len(set(self.labels)) != len(self.labels):
                raise ValidationError("labels must be distinct")

    def __len__(self):
        return len(self.values)

    def label_map(self) -> dict:
        if self.labels is None:
            raise ValidationError("resonance list is not labelled")
        return dict(zip(self.labels, self.values))

    def to_dict(self) -> dict:
        out = {"h": self.h, "values": [{"re": float(v.real), "im": float(v.imag)} for v in self.values]}
        if self.labels is not None:
            out["labels"] = [list(k) for k in self.labels]
        if self.unmatched is not None and len(self.unmatched):
            out["unmatched"] = [{"re": float(v.real), "im": float(v.imag)} for v in self.unmatched]
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "ResonanceList":
        try:
            values = [complex(float(v["re"]), float(v["im"])) for v in data["values"]]
            return cls(float(data["h"]), np.array(values, dtype=complex), data.get("labels"))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed resonance list: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "ResonanceList":
        return cls.from_dict(json.loads(text))


def _omega(u, d) -> np.ndarray:
    n = len(u)
    return np.array([float(uj) if j < n - d else -1j * float(uj) for j, uj in enumerate(u)])


def generate_resonances(nf: NormalForm, h: float, K_max: int) -> ResonanceList:
    """Classical-order lattice for every ``k`` with ``max_j k_j <= K_max``."""
    if not nf.scaled:
        raise ValidationError("generate_resonances needs the scaled normal form")
    if h <= 0:
        raise ValidationError("h must be positive")
    if K_max < 0:
        raise ValidationError("K_max must be >= 0")
    ks = list(itertools.product(range(K_max + 1), repeat=nf.n))
    iota = (2 * np.array(ks, dtype=float) + 1) * h
    vals = complex(nf.E0) + nf.total().evaluate_many(iota)
    return ResonanceList(h, vals, ks)


def implied_delta(h: float, K_max: int, u) -> float:
    """Exponent ``delta`` with ``h^delta = max_j (2 K_max + 1) u_j h``."""
    radius = (2 * K_max + 1) * h * max(float(v) for v in u)
    return math.log(radius) / math.log(h)


def leading_lattice(E0, u, d, h, ks) -> np.ndarray:
    ks = np.asarray(ks, dtype=float).reshape(len(ks), -1)
    return complex(E0) + ((2 * ks + 1) * h) @ _omega(u, d)


def label_resonances(raw: ResonanceList, E0, u, d, tol_factor: float = 1.0,
                     allow_gaps: bool = False) -> ResonanceList:
    """Assign each raw value to its nearest leading-order lattice point.

    A value farther than ``tol_factor * h^2 * (1 + |k|^2)`` from its nearest
    point is left unmatched. Two values on one ``k`` is a collision. A gap
    is an unmatched ``k`` lying below some matched ``k'`` componentwise.
    """
    n, h = len(u), raw.h
    omega = _omega(u, d)
    if len(raw) == 0:
        return ResonanceList(h, np.zeros(0, complex), [], np.zeros(0, complex))
    bounds = []
    for j in range(n):
        if j < n - d:
            ext = np.max(raw.values.real - float(E0)) / (2 * float(u[j]) * h)
        else:
            ext = np.max(-raw.values.imag) / (2 * float(u[j]) * h)
        bounds.append(max(0, int(math.ceil(ext)) + 1))
    ks = np.array(list(itertools.product(*[range(b + 1) for b in bounds])), dtype=int)
    lattice = complex(E0) + ((2 * ks + 1) * h) @ omega
    dist = np.abs(raw.values[:, None] - lattice[None, :])
    nearest = np.argmin(dist, axis=1)
    assigned: dict = {}
    unmatched = []
    for i, idx in enumerate(nearest):
        k = tuple(int(x) for x in ks[idx])
        radius = tol_factor * h ** 2 * (1 + sum(x * x for x in k))
        if dist[i, idx] > radius:
            unmatched.append(raw.values[i])
            continue
        if k in assigned:
            raise LabelingError(f"values {raw.values[assigned[k]]} and {raw.values[i]} both map to k={k}")
        assigned[k] = i
    if not allow_gaps:
        for k in assigned:
            for below in itertools.product(*[range(x + 1) for x in k]):
                if below not in assigned:
                    raise LabelingError(f"no value for k={below} although k={k} is present (h={h})")
    order = sorted(assigned, key=lambda k: (sum(k), k))
    return ResonanceList(h, raw.values[[assigned[k] for k in order]], order, np.array(unmatched, dtype=complex))


class Structure(NamedTuple):
    E0: float
    d: int
    u: tuple


def _ground_index(values: np.ndarray) -> int:
    return int(np.argmin(values.real - values.imag))


def _representable(g, gens, tol) -> bool:
    if not gens:
        return False
    ranges = [range(int(abs(g) / abs(q)) + 2) for q in gens]
    for m in itertools.product(*ranges):
        if any(m) and abs(sum(mj * q for mj, q in zip(m, gens)) - g) <= tol:
            return True
    return False


def estimate_structure(lists: Sequence[ResonanceList], n: int | None = None, amb_ratio: float = 0.3,
                       rel_tol: float = 0.1, max_gap_factor: float = 8.0) -> Structure:
    """Estimate ``E0``, ``d`` and ``u`` from data at several ``h``.

    The ground value minimizes ``Re - Im``. Lattice generators ``2 omega_j h``
    are the low gaps (at the smallest ``h``) that are not integer
    combinations of generators already found. Per-``h`` estimates of ``u``
    and of the ground value are extrapolated to ``h = 0`` by a polynomial of
    degree ``min(#h - 1, 2)``.
    """
    hs = sorted({float(L.h) for L in lists})
    if len(hs) < 2:
        raise StructureError("need resonance data for at least two distinct h values")
    by_h = {}
    for L in lists:
        if len(L) < 2:
            raise StructureError(f"need at least two values at h={L.h}")
        by_h.setdefault(float(L.h), []).append(L.values)
    data = {h: np.concatenate(v) for h, v in by_h.items()}
    h0 = hs[0]
    vals = data[h0]
    g0 = _ground_index(vals)
    gaps = np.delete(vals - vals[g0], g0)
    gaps = gaps[np.abs(gaps) > 1e-12 * max(1.0, abs(vals[g0]))]
    if len(gaps) == 0:
        raise StructureError("all values coincide")
    gaps = gaps[np.argsort(np.abs(gaps))]
    gmin = abs(gaps[0])
    gens = []
    for g in gaps:
        if abs(g) > max_gap_factor * gmin:
            break
        if not _representable(g, gens, rel_tol * gmin):
            gens.append(g)
            if n is not None and len(gens) == n:
                break
    if n is not None and len(gens) < n:
        raise StructureError(f"found only {len(gens)} independent gaps, expected n={n}")
    kinds = []
    for g in gens:
        if abs(g.imag) <= amb_ratio * abs(g.real) and g.real > 0:
            kinds.append("ell")
        elif abs(g.real) <= amb_ratio * abs(g.imag) and g.imag < 0:
            kinds.append("hyp")
        else:
            raise StructureError(f"gap {g} is neither elliptic (real) nor hyperbolic (-i * positive)")
    order = [i for i, k in enumerate(kinds) if k == "ell"] + [i for i, k in enumerate(kinds) if k == "hyp"]
    deg = min(len(hs) - 1, 2)
    harr = np.array(hs)
    u_est = []
    for i in order:
        per_h = []
        for h in hs:
            v = data[h]
            gi = _ground_index(v)
            cand = v - v[gi]
            cand[gi] = np.inf
            gap = cand[np.argmin(np.abs(cand - gens[i] * h / h0))]
            per_h.append(gap.real / (2 * h) if kinds[i] == "ell" else -gap.imag / (2 * h))
        u_est.append(float(np.polyfit(harr, per_h, deg)[-1]))
    grounds = np.array([data[h][_ground_index(data[h])] for h in hs])
    E0 = float(np.polyfit(harr, grounds.real, deg)[-1])
    if any(v <= 0 for v in u_est):
        raise StructureError(f"non-positive frequency estimate {u_est}")
    d = sum(1 for k in kinds if k == "hyp")
    return Structure(E0, d, tuple(u_est))


@dataclass
class FitReport:
    E0: float
    E0_initial: float
    d: int
    u: tuple
    u_initial: tuple
    omega: list
    coefficients: dict
    stderr: dict
    gamma: dict
    residuals: list
    data_labels: list
    residual_norm: float
    residual_rms: float
    condition: float
    flagged: bool
    imag_parts: dict = field(default_factory=dict)
    max_degree: int = 0

    def to_dict(self) -> dict:
        def cx(v):
            return {"re": float(np.real(v)), "im": float(np.imag(v))}

        return {
            "E0": self.E0,
            "E0_initial": self.E0_initial,
            "d": self.d,
            "u": list(self.u),
            "u_initial": list(self.u_initial),
            "omega": [cx(w) for w in self.omega],
            "max_degree": self.max_degree,
            "coefficients": [{"alpha": list(a), **cx(c), "stderr": float(self.stderr.get(a, float("nan")))}
                             for a, c in sorted(self.coefficients.items(), key=lambda t: graded_key(t[0]))],
            "gamma": [{"h": h, **cx(g)} for h, g in sorted(self.gamma.items())],
            "residuals": [{"h": h, "k": list(k), **cx(r)} for (h, k), r in zip(self.data_labels, self.residuals)],
            "residual_norm": self.residual_norm,
            "residual_rms": self.residual_rms,
            "condition": self.condition,
            "flagged": self.flagged,
            "recovered_imag_parts": [{"alpha": list(a), "im": float(v)} for a, v in sorted(self.imag_parts.items())],
        }


def _multi_indices(n: int, lo: int, hi: int) -> list:
    out = [a for a in itertools.product(range(hi + 1), repeat=n) if lo <= sum(a) <= hi]
    return sorted(out, key=graded_key)


def fit_normal_form(lists: Sequence[ResonanceList], E0, d: int, u, M: int, fit_linear: bool = True,
                    rcond: float = 1e-11, flag_factor: float = 1.0):
    """Least-squares fit of ``h~_N`` (``2 <= N <= M``) to labelled resonances.

    Columns are ``iota^alpha`` (plus the linear actions when ``fit_linear``)
    and one ``h^2`` intercept per ``h``. Columns are normalized before the
    SVD-based solve. Returns ``(FitReport, NormalForm)``.
    """
    n = len(u)
    if M < 2:
        raise ValidationError("M must be at least 2")
    hs = sorted({float(L.h) for L in lists})
    rows, y, tags = [], [], []
    for L in lists:
        if L.labels is None:
            raise ValidationError("fit_normal_form needs labelled data")
        for k, v in zip(L.labels, L.values):
            rows.append((L.h, np.array(k)))
            y.append(v - E0)
            tags.append((L.h, tuple(k)))
    omega0 = _omega(u, d)
    alphas = _multi_indices(n, 2, M)
    lin = [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)] if fit_linear else []
    cols = lin + alphas
    m = len(rows)
    p = len(cols) + len(hs)
    if m < p:
        raise RankDeficiencyError(f"{m} data for {p} unknowns", unidentifiable=cols[-(p - m):])
    A = np.zeros((m, p))
    yv = np.array(y, dtype=complex)
    for r, (h, k) in enumerate(rows):
        iota = (2 * k + 1) * h
        for c, a in enumerate(cols):
            A[r, c] = np.prod(iota ** np.array(a))
        A[r, len(cols) + hs.index(h)] = h * h
        if not fit_linear:
            yv[r] -= iota @ omega0
    norms = np.max(np.abs(A), axis=0)
    norms[norms == 0] = 1.0
    As = A / norms
    U, s, Vh = np.linalg.svd(As, full_matrices=False)
    names = [("coef", a) for a in cols] + [("gamma", h) for h in hs]
    if s[-1] <= rcond * s[0]:
        null = Vh[s <= rcond * s[0]]
        weight = np.max(np.abs(null), axis=0)
        bad = [names[i] for i in np.argsort(-weight) if weight[i] > 0.1]
        raise RankDeficiencyError(f"design matrix is rank deficient (cond={s[0] / s[-1]:.3g}); "
                                  f"unidentifiable: {bad}", unidentifiable=bad)
    xs = Vh.conj().T @ ((U.conj().T @ yv) / s)
    x = xs / norms
    resid = yv - A @ x
    rss = float(np.sum(np.abs(resid) ** 2))
    dof = m - p
    sigma2 = rss / dof if dof > 0 else float("nan")
    cov_s = (Vh.conj().T / s ** 2) @ Vh
    se = np.sqrt(np.abs(np.diag(cov_s)) * sigma2) / norms
    coefs = {a: complex(x[i]) for i, a in enumerate(cols)}
    stderr = {a: float(se[i]) for i, a in enumerate(cols)}
    gamma = {h: complex(x[len(cols) + i]) for i, h in enumerate(hs)}
    if fit_linear:
        omega = [coefs.pop(a) for a in lin]
        for a in lin:
            stderr.pop(a)
    else:
        omega = [complex(w) for w in omega0]
    u_fit = tuple(float(w.real) if j < n - d else float(-w.imag) for j, w in enumerate(omega))
    # gamma_h h^2 = F2(0) h^2 - (error in E0); the constant part is the E0 correction
    E0_fit = float(E0)
    if len(hs) >= 2:
        harr = np.array(hs)
        shift = np.polyfit(harr ** 2, np.array([gamma[h].real for h in hs]) * harr ** 2, 1)[-1]
        E0_fit += float(shift)
    rms = math.sqrt(rss / m)
    report = FitReport(
        E0=E0_fit, E0_initial=float(E0), d=d, u=u_fit, u_initial=tuple(float(v) for v in u), omega=omega,
        coefficients=coefs, stderr=stderr, gamma=gamma, residuals=[complex(r) for r in resid],
        data_labels=tags, residual_norm=math.sqrt(rss), residual_rms=rms,
        condition=float(s[0] / s[-1]), flagged=rms > flag_factor * max(hs) ** 2, max_degree=M,
    )
    actions = {N: ActionPolynomial(n, {a: c for a, c in coefs.items() if sum(a) == N}, exact=False)
               for N in range(2, M + 1)}
    nf = NormalForm(n, d, E0_fit, u_fit, M, actions, scaled=True, exact=False)
    return report, nf


def invert_from_resonances(lists: Sequence[ResonanceList], N_target: int, M: int | None = None,
                           n: int | None = None, tol_factor: float = 1.0, imag_tol: float = 0.05):
    """Resonance data -> potential spec. Returns ``(PotentialSpec, FitReport)``."""
    from .recovery import recover_taylor

    if N_target < 2:
        raise ValidationError("N_target must be at least 2")
    M = M if M is not None else N_target + 1
    E0, d, u = estimate_structure(lists, n=n)
    labelled = [L if L.labels is not None else label_resonances(L, E0, u, d, tol_factor) for L in lists]
    report, nf = fit_normal_form(labelled, E0, d, u, M)
    diag: dict = {}
    spec = recover_taylor(nf, N_target, imag_tol=imag_tol, diagnostics=diag)
    report.imag_parts = diag
    return spec, report
