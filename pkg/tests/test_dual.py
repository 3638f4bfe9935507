import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pamzi.dual import DualComplex


def finite_complex(max_mag=3.0):
    part = st.floats(-max_mag, max_mag, allow_nan=False, allow_infinity=False)
    return st.builds(complex, part, part)


duals = st.builds(DualComplex, finite_complex(), finite_complex())


@given(duals, duals)
def test_product_rule(a, b):
    p = a * b
    assert p.val == a.val * b.val
    assert p.dphi == a.val * b.dphi + a.dphi * b.val


@given(duals, duals, duals)
@settings(max_examples=60)
def test_ring_axioms(a, b, c):
    lhs = (a * (b + c)).val
    rhs = (a * b + a * c).val
    assert abs(lhs - rhs) < 1e-12 * (1 + abs(lhs))
    lhs = ((a * b) * c).dphi
    rhs = (a * (b * c)).dphi
    assert abs(lhs - rhs) < 1e-10 * (1 + abs(lhs))


@given(duals)
def test_conjugation_commutes_with_derivative(a):
    c = a.conjugate()
    assert c.val == np.conjugate(a.val)
    assert c.dphi == np.conjugate(a.dphi)


def _composite(phi):
    """A composite expression built purely from dual arithmetic."""
    z = DualComplex(np.exp(-1j * phi), -1j * np.exp(-1j * phi))
    w = DualComplex(0.3 + 0.4j) + z * z
    return (w * w.conjugate() + z.exp()) / (DualComplex(2.0) + w)


@pytest.mark.parametrize("phi", [0.3, 1.1, 2.5])
def test_composite_matches_finite_differences(phi):
    h = 1e-6
    val = _composite(phi)
    fd = (_composite(phi + h).val - _composite(phi - h).val) / (2 * h)
    assert abs(val.dphi - fd) <= 1e-7 * max(1.0, abs(fd))


def test_division_inverts_multiplication():
    a = DualComplex(1.2 - 0.7j, 0.5 + 0.1j)
    b = DualComplex(-0.4 + 2.0j, 1.0 - 0.3j)
    q = (a * b) / b
    assert abs(q.val - a.val) < 1e-14
    assert abs(q.dphi - a.dphi) < 1e-14


def test_scalar_mixing_and_powers():
    a = DualComplex(2.0, 1.0)
    assert (a + 1).val == 3.0
    assert (2 * a).dphi == 2.0
    assert (a ** 3).val == 8.0
    assert (a ** 3).dphi == 12.0  # d/dphi x^3 = 3 x^2 x'
    with pytest.raises(ValueError):
        a ** -1
