import math

import numpy as np
import pytest

from pamzi.core import ExperimentParams, Scheme, chi_omega, validate
from pamzi.errors import OutOfRangeError, SchemeMismatchError


def test_validate_accepts_defaults():
    p = ExperimentParams(alpha_mag=1.0, r=1.0, phi=math.pi / 4)
    assert validate(p) is p


@pytest.mark.parametrize("field,value", [
    ("T", 1.2), ("T", -0.1), ("eta", 1.5), ("alpha_mag", -1.0),
    ("r", -0.5), ("phi", 0.0), ("phi", 2 * math.pi), ("m", -1),
    ("alpha_mag", math.inf),
])
def test_validate_rejects_out_of_range(field, value):
    p = ExperimentParams().with_(**{field: value})
    with pytest.raises(OutOfRangeError) as err:
        validate(p)
    assert err.value.field == field


def test_validate_rejects_original_with_addition():
    p = ExperimentParams(m=2, scheme=Scheme.ORIGINAL)
    with pytest.raises(SchemeMismatchError):
        validate(p)


def test_validate_m_cap():
    p = ExperimentParams(m=6, scheme=Scheme.A)
    with pytest.raises(OutOfRangeError):
        validate(p)
    validate(p.with_(m=5))


def test_chi_omega_closed_values():
    chi, om = chi_omega(ExperimentParams(T=1.0, phi=1e-30))
    assert abs(chi.val - 1.0) < 1e-15
    assert abs(om.val) < 1e-15
    chi, om = chi_omega(ExperimentParams(T=1.0, phi=math.pi))
    assert abs(chi.val) < 1e-15
    assert abs(om.val - 1.0) < 1e-15


def test_chi_omega_derived_point():
    # T = 0.64, phi = pi/2: chi = 0.4 (1 - i), omega = 0.4 (1 + i)
    chi, om = chi_omega(ExperimentParams(T=0.64, phi=math.pi / 2))
    assert abs(chi.val - 0.4 * (1 - 1j)) < 1e-14
    assert abs(om.val - 0.4 * (1 + 1j)) < 1e-14
    assert abs(chi.dphi - (-0.4)) < 1e-14


@pytest.mark.parametrize("T", [0.0, 0.37, 1.0])
@pytest.mark.parametrize("phi", [0.1, 1.3, 2.9, 5.0])
def test_transmittance_identity(T, phi):
    chi, om = chi_omega(ExperimentParams(T=T, phi=phi))
    total = abs(chi.val) ** 2 + abs(om.val) ** 2
    assert abs(total - T) < 1e-14


@pytest.mark.parametrize("phi", np.linspace(0.2, 3.0, 7))
def test_chi_omega_derivatives_match_finite_differences(phi):
    h = 1e-6
    T = 0.8
    chi, om = chi_omega(ExperimentParams(T=T, phi=float(phi)))
    chi_p, om_p = chi_omega(ExperimentParams(T=T, phi=float(phi) + h))
    chi_m, om_m = chi_omega(ExperimentParams(T=T, phi=float(phi) - h))
    fd_chi = (chi_p.val - chi_m.val) / (2 * h)
    fd_om = (om_p.val - om_m.val) / (2 * h)
    assert abs(chi.dphi - fd_chi) <= 1e-8 * max(1.0, abs(fd_chi))
    assert abs(om.dphi - fd_om) <= 1e-8 * max(1.0, abs(fd_om))


def test_alpha_is_complex_amplitude():
    p = ExperimentParams(alpha_mag=2.0, theta_alpha=math.pi / 3)
    assert abs(p.alpha - 2.0 * np.exp(1j * math.pi / 3)) < 1e-15
