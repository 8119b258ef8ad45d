import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bnfres.bnf import normal_form
from bnfres.errors import LabelingError, RankDeficiencyError, StructureError, ValidationError
from bnfres.model import PotentialSpec
from bnfres.resonances import (
    ResonanceList,
    estimate_structure,
    fit_normal_form,
    generate_resonances,
    implied_delta,
    invert_from_resonances,
    label_resonances,
    leading_lattice,
)

from conftest import symmetric_specs

beta = Fraction(2, 9)


def nf_of(spec, N, exact=None):
    return normal_form(spec, N, exact=exact)[0]


# generator ---------------------------------------------------------------------

def test_barrier_lattice():
    nf = nf_of(PotentialSpec(1, 1, 1, (1,)), 3)
    L = generate_resonances(nf, 0.01, 8)
    expect = [1 - 1j * (2 * k + 1) * 0.01 for k in range(9)]
    assert L.labels == [(k,) for k in range(9)]
    assert np.allclose(L.values, expect, atol=1e-15)


def test_two_dimensional_harmonic():
    u = (1.0, math.sqrt(2))
    nf = nf_of(PotentialSpec(2, 0, 0.5, u), 2, exact=False)
    L = generate_resonances(nf, 0.1, 2)
    assert len(L) == 9
    for k, v in zip(L.labels, L.values):
        assert v == pytest.approx(0.5 + 0.1 * ((2 * k[0] + 1) + math.sqrt(2) * (2 * k[1] + 1)), abs=1e-14)


def test_quartic_first_correction():
    nf = nf_of(PotentialSpec(1, 0, 0, (1,), {(2,): beta}), 2)
    h = 0.05
    L = generate_resonances(nf, h, 4)
    for (k,), v in zip(L.labels, L.values):
        iota = (2 * k + 1) * h
        assert v == pytest.approx(iota + 3 / 8 * float(beta) * iota ** 2, abs=1e-15)


def test_generator_needs_scaled_form():
    from bnfres.bnf import unscale_normal_form

    nf = nf_of(PotentialSpec(1, 1, 0, (1,)), 2)
    with pytest.raises(ValidationError):
        generate_resonances(unscale_normal_form(nf), 0.1, 2)


def test_implied_delta():
    assert implied_delta(0.01, 0, (1,)) == pytest.approx(1.0)
    assert 0 < implied_delta(0.01, 8, (1,)) < 1


@settings(max_examples=25, deadline=None)
@given(symmetric_specs(), st.integers(0, 3))
def test_lower_half_plane(spec, K):
    nf = nf_of(spec, 3)
    L = generate_resonances(nf, 1e-3, K)
    assert np.all(L.values.imag <= 1e-15)
    if spec.d == 0:
        assert np.all(L.values.imag == 0)


def test_truncation_error_order():
    # dropping h_3, h_4 leaves an O(h^3) error in each resonance
    spec = PotentialSpec(1, 1, 0, (1,), {(2,): beta, (3,): Fraction(1, 3)})
    full = nf_of(spec, 4)
    short = full.truncated(2)
    errs = []
    for h in (0.02, 0.01):
        a = generate_resonances(full, h, 3).values
        b = generate_resonances(short, h, 3).values
        errs.append(np.max(np.abs(a - b)))
    assert errs[0] / errs[1] >= 3


# labelling -----------------------------------------------------------------------

def test_label_identity_on_lattice():
    ks = [(k1, k2) for k1 in range(3) for k2 in range(3)]
    vals = leading_lattice(1.0, (1.0, 1.7), 1, 0.01, ks)
    perm = np.random.default_rng(0).permutation(len(ks))
    L = label_resonances(ResonanceList(0.01, vals[perm]), 1.0, (1.0, 1.7), 1)
    assert sorted(L.labels) == sorted(ks)
    assert np.allclose([L.label_map()[k] for k in ks], vals)


def test_label_with_small_perturbation():
    h = 0.01
    ks = [(k,) for k in range(6)]
    vals = leading_lattice(0.0, (1.0,), 0, h, ks) + 0.1 * h ** 2
    L = label_resonances(ResonanceList(h, vals), 0.0, (1.0,), 0)
    assert L.labels == ks and len(L.unmatched) == 0


def test_label_drops_far_values():
    h = 0.01
    vals = np.append(leading_lattice(0.0, (1.0,), 0, h, [(0,), (1,)]), 0.5 * h)
    L = label_resonances(ResonanceList(h, vals), 0.0, (1.0,), 0)
    assert L.labels == [(0,), (1,)]
    assert np.allclose(L.unmatched, [0.5 * h])


def test_label_collision():
    h = 0.01
    vals = np.array([h, h + 1e-6])
    with pytest.raises(LabelingError):
        label_resonances(ResonanceList(h, vals), 0.0, (1.0,), 0)


def test_label_gap():
    h = 0.01
    vals = leading_lattice(0.0, (1.0,), 0, h, [(0,), (2,)])
    with pytest.raises(LabelingError):
        label_resonances(ResonanceList(h, vals), 0.0, (1.0,), 0)
    L = label_resonances(ResonanceList(h, vals), 0.0, (1.0,), 0, allow_gaps=True)
    assert L.labels == [(0,), (2,)]


# structure estimate ----------------------------------------------------------------

def _lists(spec, hs, K, N=3):
    nf = nf_of(spec, N, exact=False)
    return [generate_resonances(nf, h, K) for h in hs]


def test_structure_barrier():
    s = estimate_structure(_lists(PotentialSpec(1, 1, 2.0, (1.5,), {(2,): 0.3}), (0.02, 0.01, 0.005), 5))
    assert s.d == 1 and s.E0 == pytest.approx(2.0, abs=1e-6) and s.u[0] == pytest.approx(1.5, abs=1e-6)


def test_structure_mixed():
    spec = PotentialSpec(2, 1, 0.0, (1.0, math.sqrt(2)), {(2, 0): 0.2, (1, 1): 0.1})
    s = estimate_structure(_lists(spec, (0.02, 0.01, 0.005), 3), n=2)
    assert s.d == 1
    assert np.allclose(s.u, (1.0, math.sqrt(2)), atol=1e-5)


def test_structure_single_h():
    with pytest.raises(StructureError):
        estimate_structure(_lists(PotentialSpec(1, 0, 0, (1,)), (0.01,), 3))


def test_structure_reports_missing_generators():
    with pytest.raises(StructureError):
        estimate_structure(_lists(PotentialSpec(1, 0, 0, (1,)), (0.02, 0.01), 3), n=2)


# fitting -----------------------------------------------------------------------

def test_fit_closed_loop():
    spec = PotentialSpec(2, 1, 0.3, (1.0, math.sqrt(2)), {(2, 0): 0.2, (1, 1): -0.1, (0, 2): 0.4, (3, 0): 0.05})
    nf = nf_of(spec, 3, exact=False)
    lists = [generate_resonances(nf, h, 5) for h in (0.04, 0.02, 0.01)]
    report, fitted = fit_normal_form(lists, 0.3, 1, spec.u, 3)
    for N in (2, 3):
        for a, c in nf.h(N).terms.items():
            assert abs(fitted.h(N).coeff(a) - complex(c)) <= 1e-10 * max(1, abs(c))
    assert report.E0 == pytest.approx(0.3, abs=1e-12)
    assert not report.flagged
    assert np.allclose(report.u, spec.u, atol=1e-12)


def test_fit_rank_deficiency():
    nf = nf_of(PotentialSpec(1, 0, 0, (1,), {(2,): 1}), 3, exact=False)
    lists = [generate_resonances(nf, h, 1) for h in (0.02, 0.01)]
    with pytest.raises(RankDeficiencyError):
        fit_normal_form(lists, 0.0, 0, (1.0,), 4)


def test_fit_needs_labels():
    with pytest.raises(ValidationError):
        fit_normal_form([ResonanceList(0.01, [0.01, 0.03])], 0.0, 0, (1.0,), 2)


# inversion ---------------------------------------------------------------------

def test_invert_roundtrip():
    spec = PotentialSpec(1, 1, 1.0, (1.0,), {(2,): 0.2, (3,): -0.05})
    lists = [ResonanceList(L.h, L.values) for L in _lists(spec, (0.02, 0.01, 0.005), 10, N=3)]
    back, report = invert_from_resonances(lists, 2)
    assert back.d == 1
    assert back.E0 == pytest.approx(1.0, abs=1e-8)
    assert back.u[0] == pytest.approx(1.0, abs=1e-6)
    assert back.coeffs[(2,)] == pytest.approx(0.2, abs=1e-6)
    assert not report.flagged


def test_fit_flags_inconsistent_data():
    a = PotentialSpec(1, 0, 0.0, (1.0,), {(2,): 0.2})
    b = PotentialSpec(1, 0, 0.0, (1.0,), {(2,): 3.0})
    lists = _lists(a, (0.02,), 6) + _lists(b, (0.01, 0.005), 6)
    report, _ = fit_normal_form(lists, 0.0, 0, (1.0,), 3)
    assert report.flagged
    consistent, _ = fit_normal_form(_lists(b, (0.02, 0.01, 0.005), 6), 0.0, 0, (1.0,), 3)
    assert not consistent.flagged


# serialization ---------------------------------------------------------------------

def test_resonance_list_json():
    L = ResonanceList(0.01, [1 - 0.01j, 1 - 0.03j], [(0,), (1,)])
    back = ResonanceList.from_json(L.to_json())
    assert back.labels == L.labels and np.array_equal(back.values, L.values)


def test_resonance_list_validation():
    with pytest.raises(ValidationError):
        ResonanceList(0.0, [1])
    with pytest.raises(ValidationError):
        ResonanceList(0.1, [1, 2], [(0,), (0,)])
    with pytest.raises(ValidationError):
        ResonanceList.from_dict({"h": 0.1})
