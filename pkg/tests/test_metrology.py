import math

import numpy as np
import pytest

from pamzi.core import Detector, ExperimentParams, Scheme
from pamzi.errors import (NoFinitePointError, NonPositiveFisherError,
                          ZeroSlopeError)
from pamzi import metrology as met


def params(**kw):
    defaults = dict(alpha_mag=1.0, r=0.0, phi=math.pi / 2, T=1.0, m=0,
                    scheme=Scheme.ORIGINAL)
    defaults.update(kw)
    return ExperimentParams(**defaults)


# ---------------------------------------------------------------------------
# closed-form anchors (coherent-only interferometer)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("phi", np.linspace(0.15, 2.9, 5))
def test_coherent_only_closed_form(alpha, phi):
    prm = params(alpha_mag=alpha, phi=float(phi))
    expect = 1.0 / (alpha * math.sin(phi))
    r1 = met.intensity_diff_sensitivity(Scheme.ORIGINAL, prm)
    r2 = met.homodyne_sensitivity(Scheme.ORIGINAL, prm)
    assert abs(r1.delta_phi - abs(expect)) < 1e-9 * abs(expect)
    assert abs(r2.delta_phi - abs(expect)) < 1e-9 * abs(expect)


def test_report_fields_consistent():
    prm = params(alpha_mag=1.2, r=0.8, T=0.7, m=1, scheme=Scheme.B, phi=1.1)
    for fn in (met.intensity_diff_sensitivity, met.homodyne_sensitivity):
        rep = fn(Scheme.B, prm)
        assert abs(rep.delta_phi * rep.slope - rep.sigma) < 1e-10
        assert abs(rep.sql - 1.0 / math.sqrt(rep.n_total)) < 1e-12
        assert abs(rep.hl - 1.0 / rep.n_total) < 1e-12
        assert rep.hl <= rep.sql
        assert rep.sigma >= 0.0 and rep.slope >= 0.0


def test_zero_slope_paths():
    with pytest.raises(ZeroSlopeError):
        met.homodyne_sensitivity(Scheme.ORIGINAL, params(alpha_mag=0.0, r=1.0))
    # balanced point phi -> 0 kills the intensity-difference slope
    with pytest.raises(ZeroSlopeError):
        met.intensity_diff_sensitivity(Scheme.ORIGINAL,
                                       params(r=1.0, phi=1e-13))


def test_total_photon_number_anchors():
    assert abs(met.total_photon_number(Scheme.ORIGINAL, params()) - 1.0) < 1e-12
    svs = params(alpha_mag=0.0, r=1.0)
    assert abs(met.total_photon_number(Scheme.ORIGINAL, svs)
               - math.sinh(1.0) ** 2) < 1e-10
    one = params(alpha_mag=0.0, m=1, scheme=Scheme.A, T=0.5)
    assert abs(met.total_photon_number(Scheme.A, one) - 0.5) < 1e-12


# ---------------------------------------------------------------------------
# Fisher information
# ---------------------------------------------------------------------------

def test_qfi_ideal_anchors():
    assert met.qfi_ideal(Scheme.ORIGINAL, params(alpha_mag=0.0)) < 1e-12
    assert abs(met.qfi_ideal(Scheme.ORIGINAL, params()) - 2.0) < 1e-12


def test_qfi_ideal_ignores_phase_and_losses():
    prm = params(alpha_mag=1.0, r=0.9, m=2, scheme=Scheme.A)
    ref = met.qfi_ideal(Scheme.A, prm)
    for changes in (dict(phi=0.3), dict(phi=2.0), dict(T=0.5), dict(eta=0.4)):
        assert abs(met.qfi_ideal(Scheme.A, prm.with_(**changes)) - ref) < 1e-12


def test_qfi_lossy_limits_and_value():
    prm = params(eta=1.0)
    assert abs(met.qfi_lossy(Scheme.ORIGINAL, prm)
               - met.qfi_ideal(Scheme.ORIGINAL, prm)) < 1e-12
    assert met.qfi_lossy(Scheme.ORIGINAL, prm.with_(eta=0.0)) == 0.0
    # F = 2 and <n_a> = 1/2 at eta = 0.5 combine to F_L = 1
    assert abs(met.qfi_lossy(Scheme.ORIGINAL, prm.with_(eta=0.5)) - 1.0) < 1e-12


def test_qcrb_values_and_guard():
    assert met.qcrb(1.0) == 1.0
    assert met.qcrb(4.0) == 0.5
    assert abs(met.qcrb(2.0) - 1.0 / math.sqrt(2.0)) < 1e-15
    assert abs(met.qcrb(1.0, v=4) - 0.5) < 1e-15
    with pytest.raises(NonPositiveFisherError):
        met.qcrb(0.0)


def test_qfi_report_vacuum_maps_to_infinite_bound():
    rep = met.qfi_report(Scheme.ORIGINAL, params(alpha_mag=0.0))
    assert rep.f_ideal < 1e-12
    assert math.isinf(rep.qcrb_ideal)


# ---------------------------------------------------------------------------
# optimal phase
# ---------------------------------------------------------------------------

def test_optimize_coherent_only():
    phi, rep = met.optimize_phase(Detector.INTENSITY_DIFF, Scheme.ORIGINAL,
                                  params())
    assert abs(phi - math.pi / 2) < 1e-6
    assert abs(rep.delta_phi - 1.0) < 1e-9
    phi, rep = met.optimize_phase(Detector.HOMODYNE, Scheme.ORIGINAL,
                                  params(alpha_mag=2.0))
    assert abs(phi - math.pi / 2) < 1e-6
    assert abs(rep.delta_phi - 0.5) < 1e-9


def test_optimize_respects_qcrb():
    prm = params(alpha_mag=1.0, r=0.8, m=1, scheme=Scheme.B)
    bound = met.qcrb(met.qfi_ideal(Scheme.B, prm))
    for det in (Detector.INTENSITY_DIFF, Detector.HOMODYNE):
        _, rep = met.optimize_phase(det, Scheme.B, prm)
        assert rep.delta_phi >= bound - 1e-9


def test_optimize_no_finite_point():
    with pytest.raises(NoFinitePointError):
        met.optimize_phase(Detector.HOMODYNE, Scheme.ORIGINAL,
                           params(alpha_mag=0.0, r=0.5))


def test_optimal_homodyne_beats_intensity_difference():
    prm = params(alpha_mag=1.0, r=1.0, m=1, scheme=Scheme.B)
    _, ri = met.optimize_phase(Detector.INTENSITY_DIFF, Scheme.B, prm)
    _, rh = met.optimize_phase(Detector.HOMODYNE, Scheme.B, prm)
    assert rh.delta_phi < ri.delta_phi
