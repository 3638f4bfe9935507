import itertools
import math

import numpy as np
import pytest

from pamzi.core import ExperimentParams, Scheme
from pamzi.errors import CapTooLargeError, SpecExceedsCapError
from pamzi.genfun import (MomentEngine, MomentSpec, SparsePoly, build_Q,
                          build_W, exp_series, extract_D, internal_moment,
                          moment)

X1X2 = (1, 1, 0, 0, 0, 0)
Y1Y2 = (0, 0, 1, 1, 0, 0)
S1S2 = (0, 0, 0, 0, 1, 1)


def params(**kw):
    defaults = dict(alpha_mag=1.0, r=1.0, phi=math.pi / 2, T=1.0, m=0,
                    scheme=Scheme.ORIGINAL)
    defaults.update(kw)
    return ExperimentParams(**defaults)


# ---------------------------------------------------------------------------
# exponent polynomials
# ---------------------------------------------------------------------------

def test_build_w_vacuum_input_keeps_only_addition_sector():
    # alpha- and r-dependent terms vanish; what survives is s1 s2 plus the
    # splitter couplings that carry the added photon to the outputs (these
    # depend on chi/omega, not on the inputs, and the single-photon
    # interference example below needs them)
    for scheme in (Scheme.A, Scheme.B):
        poly = build_W(scheme, params(alpha_mag=0.0, r=0.0, m=1,
                                      scheme=scheme))
        live = {e for e, c in poly.terms.items() if abs(c.val) > 1e-15}
        s_sector = {e for e in live if e[4] or e[5]}
        assert live == s_sector
        assert abs(poly.coefficient(S1S2).val - 1.0) < 1e-15


def test_build_w_vacuum_scheme_a_couplings():
    from pamzi.core import chi_omega

    prm = params(alpha_mag=0.0, r=0.0, m=1, scheme=Scheme.A, T=0.7, phi=0.9)
    poly = build_W(Scheme.A, prm)
    chi, om = chi_omega(prm)
    assert abs(poly.coefficient((1, 0, 0, 0, 0, 1)).val - chi.val) < 1e-15
    assert abs(poly.coefficient((0, 1, 0, 0, 1, 0)).val
               - np.conj(chi.val)) < 1e-15
    assert abs(poly.coefficient((0, 0, 1, 0, 0, 1)).val - 1j * om.val) < 1e-15
    assert abs(poly.coefficient((0, 0, 0, 1, 1, 0)).val
               + 1j * np.conj(om.val)) < 1e-15


def test_build_w_squeezed_cross_term():
    # scheme A at T=1, phi=pi/2: coefficient of x1 x2 is |omega|^2 sinh^2 r
    poly = build_W(Scheme.A, params(scheme=Scheme.A))
    expect = 0.5 * math.sinh(1.0) ** 2
    assert abs(poly.coefficient(X1X2).val - expect) < 1e-12


def test_build_q_is_phase_free():
    poly = build_Q(Scheme.B, params(m=2, scheme=Scheme.B, phi=0.77))
    for exps, coeff in poly.terms.items():
        assert coeff.dphi == 0.0
    other = build_Q(Scheme.B, params(m=2, scheme=Scheme.B, phi=2.3))
    for exps, coeff in poly.terms.items():
        assert abs(coeff.val - other.coefficient(exps).val) < 1e-15


def test_build_q_scheme_b_squeezed_term():
    poly = build_Q(Scheme.B, params(alpha_mag=1.0, r=0.5, scheme=Scheme.B))
    expect = 0.5 * math.sinh(0.5) ** 2
    assert abs(poly.coefficient(Y1Y2).val - expect) < 1e-12


def test_sparse_poly_rejects_bad_terms():
    poly = SparsePoly()
    with pytest.raises(ValueError):
        poly.add((0, 0, 0, 0, 0, 0), None)
    with pytest.raises(ValueError):
        poly.add((1, 1, 1, 0, 0, 0), None)


# ---------------------------------------------------------------------------
# series exponentiation and extraction
# ---------------------------------------------------------------------------

def _single_term_poly(exps, value=1.0):
    from pamzi.dual import DualComplex

    poly = SparsePoly()
    poly.add(exps, DualComplex(value))
    return poly


def test_exp_series_of_product_term():
    series = exp_series(_single_term_poly(X1X2), (2, 2, 0, 0, 0, 0))
    assert abs(series.coefficient(X1X2).val - 1.0) < 1e-15
    assert abs(series.coefficient((2, 2, 0, 0, 0, 0)).val - 0.5) < 1e-15


@pytest.mark.parametrize("m", [1, 2, 3])
def test_exp_series_addition_norm(m):
    series = exp_series(_single_term_poly(S1S2), (0, 0, 0, 0, m, m))
    coeff = series.coefficient((0, 0, 0, 0, m, m)).val
    assert abs(coeff - 1.0 / math.factorial(m)) < 1e-15
    # extract_D multiplies by (m!)^2: equals m!, the norm of a^dag^m |0>
    got = extract_D(series, MomentSpec(m=m)).val
    assert abs(got - math.factorial(m)) < 1e-12


def test_exp_series_cap_invariance():
    poly = build_W(Scheme.A, params(m=1, scheme=Scheme.A, T=0.7, phi=0.9))
    small = exp_series(poly, (2, 2, 1, 1, 1, 1))
    large = exp_series(poly, (4, 4, 3, 3, 1, 1))
    for exps in itertools.product(range(3), range(3), range(2), range(2),
                                  range(2), range(2)):
        a = small.coefficient(exps)
        b = large.coefficient(exps)
        assert abs(a.val - b.val) < 1e-13
        assert abs(a.dphi - b.dphi) < 1e-13


def test_exp_series_guards():
    poly = _single_term_poly(S1S2)
    with pytest.raises(CapTooLargeError):
        exp_series(poly, (13, 0, 0, 0, 0, 0))
    series = exp_series(poly, (0, 0, 0, 0, 1, 1))
    with pytest.raises(SpecExceedsCapError):
        series.coefficient((0, 0, 0, 0, 2, 2))


def test_extract_identity_and_pair():
    series = exp_series(_single_term_poly(X1X2), (1, 1, 0, 0, 0, 0))
    assert abs(extract_D(series, MomentSpec()).val - 1.0) < 1e-15
    assert abs(extract_D(series, MomentSpec(p1=1, p2=1)).val - 1.0) < 1e-15


# ---------------------------------------------------------------------------
# normalized moments
# ---------------------------------------------------------------------------

def test_moment_normalization_is_exact():
    for scheme, m in [(Scheme.A, 0), (Scheme.A, 2), (Scheme.B, 1)]:
        prm = params(m=m, scheme=scheme, T=0.8, r=0.6)
        got = moment(scheme, prm, MomentSpec())
        assert abs(got.val - 1.0) < 1e-14
        assert abs(got.dphi) < 1e-14


@pytest.mark.parametrize("phi", [0.4, 1.2, 2.7])
def test_classical_transmission(phi):
    prm = params(r=0.0, phi=phi)
    got = moment(Scheme.ORIGINAL, prm, MomentSpec(p1=1, p2=1))
    assert abs(got.val - math.cos(phi / 2) ** 2) < 1e-13


@pytest.mark.parametrize("T", [0.3, 0.64, 1.0])
def test_single_photon_interference_with_loss(T):
    prm = params(alpha_mag=0.0, r=0.0, m=1, scheme=Scheme.A, T=T, phi=0.9)
    got = moment(Scheme.A, prm, MomentSpec(p1=1, p2=1))
    assert abs(got.val - T * math.cos(0.45) ** 2) < 1e-13


def test_internal_moment_split_coherent():
    prm = params(r=0.0)
    got = internal_moment(Scheme.ORIGINAL, prm, MomentSpec(p1=1, p2=1))
    assert abs(got.val - 0.5) < 1e-14
    assert got.dphi == 0.0


def test_internal_moment_phase_free_for_all_specs():
    prm = params(m=2, scheme=Scheme.B, r=0.7)
    for spec in (MomentSpec(1, 0, 0, 0), MomentSpec(2, 1, 1, 0),
                 MomentSpec(0, 0, 2, 2)):
        got = internal_moment(Scheme.B, prm, spec)
        assert got.dphi == 0.0
        other = internal_moment(Scheme.B, prm.with_(phi=2.2), spec)
        assert abs(got.val - other.val) < 1e-15


def test_moment_spec_guards():
    prm = params()
    with pytest.raises(SpecExceedsCapError):
        moment(Scheme.ORIGINAL, prm, MomentSpec(p1=5, p2=4))
    with pytest.raises(ValueError):
        moment(Scheme.ORIGINAL, prm, MomentSpec(p1=1, p2=1, m=3))


def test_engine_matches_free_function():
    prm = params(m=2, scheme=Scheme.B, T=0.7, r=0.9, phi=1.1)
    eng = MomentEngine(Scheme.B, prm, p_cap=2, q_cap=2)
    for spec in (MomentSpec(1, 1, 0, 0), MomentSpec(2, 0, 1, 1),
                 MomentSpec(1, 1, 1, 1)):
        a = eng.moment(spec)
        b = moment(Scheme.B, prm, spec)
        assert abs(a.val - b.val) < 1e-13
        assert abs(a.dphi - b.dphi) < 1e-13


def test_hermiticity_on_engine():
    prm = params(m=1, scheme=Scheme.A, T=0.6, r=0.8, phi=0.7)
    eng = MomentEngine(Scheme.A, prm, p_cap=2, q_cap=2)
    for p1, p2, q1, q2 in itertools.product(range(2), repeat=4):
        a = eng.moment(MomentSpec(p1, p2, q1, q2)).val
        b = eng.moment(MomentSpec(p2, p1, q2, q1)).val
        assert abs(a - np.conj(b)) < 1e-12
