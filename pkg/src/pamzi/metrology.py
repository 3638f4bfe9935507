"""Observable quantities assembled from moments.

Error-propagation sensitivities for intensity-difference and homodyne
detection, the photon-number limits they are compared against, ideal and
lossy quantum Fisher information with the corresponding Cramer-Rao bounds,
and the optimal-phase search.  Slopes come from the dual parts of the same
moment evaluations that provide the variances; no numerical differentiation
happens outside the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Detector, ExperimentParams, Scheme, validate
from .errors import NoFinitePointError, NonPositiveFisherError, ZeroSlopeError
from .genfun import MomentEngine, MomentSpec, PhiBatchEngine

SLOPE_EPS = 1e-12
GRID_POINTS = 2001
GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SensitivityReport:
    """One evaluation of the error-propagation formula."""

    detector: Detector
    phi: float
    delta_phi: float
    sigma: float
    slope: float
    n_total: float
    sql: float
    hl: float


@dataclass(frozen=True)
class QfiReport:
    f_ideal: float
    f_lossy: float
    n_a_internal: float
    qcrb_ideal: float
    qcrb_lossy: float


def _idiff_stats(eng):
    """(sigma^2, signed slope, <N_a>, <N_b>) of O = N_a - N_b."""
    m_na = eng.moment(MomentSpec(p1=1, p2=1))
    m_nb = eng.moment(MomentSpec(q1=1, q2=1))
    m_na2 = eng.moment(MomentSpec(p1=2, p2=2))
    m_nb2 = eng.moment(MomentSpec(q1=2, q2=2))
    m_ab = eng.moment(MomentSpec(p1=1, p2=1, q1=1, q2=1))
    na = np.real(m_na.val)
    nb = np.real(m_nb.val)
    var_a = np.real(m_na2.val) + na - na * na
    var_b = np.real(m_nb2.val) + nb - nb * nb
    cov = np.real(m_ab.val) - na * nb
    sigma2 = var_a + var_b - 2.0 * cov
    slope = np.real(m_na.dphi) - np.real(m_nb.dphi)
    return sigma2, slope, na, nb


def _homodyne_stats(eng):
    """(sigma^2, signed slope, <N_a>, <N_b>) of O = X_a = (a + a^dag)/sqrt(2)."""
    m_a = eng.moment(MomentSpec(p2=1))
    m_adag = eng.moment(MomentSpec(p1=1))
    m_a2 = eng.moment(MomentSpec(p2=2))
    m_adag2 = eng.moment(MomentSpec(p1=2))
    m_na = eng.moment(MomentSpec(p1=1, p2=1))
    m_nb = eng.moment(MomentSpec(q1=1, q2=1))
    x = np.real(m_a.val + m_adag.val) / math.sqrt(2.0)
    sigma2 = 0.5 * np.real(m_adag2.val + m_a2.val + 2.0 * m_na.val + 1.0) - x * x
    slope = np.real(m_a.dphi + m_adag.dphi) / math.sqrt(2.0)
    return sigma2, slope, np.real(m_na.val), np.real(m_nb.val)


_STATS = {Detector.INTENSITY_DIFF: (_idiff_stats, 2, 2),
          Detector.HOMODYNE: (_homodyne_stats, 2, 1)}


def _limits(n_total: float) -> tuple[float, float]:
    if n_total <= 0.0:
        return math.inf, math.inf
    return 1.0 / math.sqrt(n_total), 1.0 / n_total


def _report(detector: Detector, phi: float, sigma2, slope, na, nb) -> SensitivityReport:
    slope_abs = abs(float(slope))
    if slope_abs < SLOPE_EPS:
        raise ZeroSlopeError(
            f"|d<O>/dphi| = {slope_abs:.3e} below {SLOPE_EPS} at phi = {phi}")
    sigma = math.sqrt(max(float(sigma2), 0.0))
    n_total = float(na + nb)
    sql, hl = _limits(n_total)
    return SensitivityReport(detector=detector, phi=float(phi),
                             delta_phi=sigma / slope_abs, sigma=sigma,
                             slope=slope_abs, n_total=n_total, sql=sql, hl=hl)


def sensitivity(detector: Detector, scheme: Scheme,
                params: ExperimentParams) -> SensitivityReport:
    """Error-propagation phase sensitivity for one detector at one point."""
    validate(params)
    stats, p_cap, q_cap = _STATS[detector]
    eng = MomentEngine(scheme, params, p_cap=p_cap, q_cap=q_cap, order_cap=4)
    return _report(detector, params.phi, *stats(eng))


def intensity_diff_sensitivity(scheme: Scheme,
                               params: ExperimentParams) -> SensitivityReport:
    return sensitivity(Detector.INTENSITY_DIFF, scheme, params)


def homodyne_sensitivity(scheme: Scheme,
                         params: ExperimentParams) -> SensitivityReport:
    return sensitivity(Detector.HOMODYNE, scheme, params)


def total_photon_number(scheme: Scheme, params: ExperimentParams) -> float:
    """<N_a> + <N_b>, equal before and after the second splitter."""
    validate(params)
    eng = MomentEngine(scheme, params, p_cap=1, q_cap=1, order_cap=2)
    na = eng.moment(MomentSpec(p1=1, p2=1)).real
    nb = eng.moment(MomentSpec(q1=1, q2=1)).real
    return float(na + nb)


def _internal_na(scheme: Scheme, params: ExperimentParams):
    eng = MomentEngine(scheme, params, p_cap=2, q_cap=0, kind="internal", order_cap=4)
    n1 = eng.moment(MomentSpec(p1=1, p2=1)).real
    n2 = eng.moment(MomentSpec(p1=2, p2=2)).real + n1
    return float(n1), float(n2)


def qfi_ideal(scheme: Scheme, params: ExperimentParams) -> float:
    """4 Var(n_a) on the ideal state before the second splitter; independent
    of phi, T, and eta."""
    validate(params)
    n1, n2 = _internal_na(scheme, params)
    return 4.0 * (n2 - n1 * n1)


def qfi_lossy(scheme: Scheme, params: ExperimentParams) -> float:
    """Loss-degraded Fisher information 4 eta F <n_a> / ((1-eta) F + 4 eta <n_a>)."""
    validate(params)
    f = qfi_ideal(scheme, params)
    n1, _ = _internal_na(scheme, params)
    eta = params.eta
    if eta == 0.0 or f == 0.0 or n1 == 0.0:
        return 0.0
    return 4.0 * eta * f * n1 / ((1.0 - eta) * f + 4.0 * eta * n1)


def qcrb(f: float, v: int = 1) -> float:
    """Cramer-Rao bound 1/sqrt(v F) for v repetitions."""
    if v < 1:
        raise ValueError("v must be a positive integer")
    if f <= 0.0:
        raise NonPositiveFisherError(f"Fisher information {f} is not positive")
    return 1.0 / math.sqrt(v * f)


def qfi_report(scheme: Scheme, params: ExperimentParams, v: int = 1) -> QfiReport:
    f = qfi_ideal(scheme, params)
    fl = qfi_lossy(scheme, params)
    n1, _ = _internal_na(scheme, params)
    return QfiReport(
        f_ideal=f, f_lossy=fl, n_a_internal=n1,
        qcrb_ideal=qcrb(f, v) if f > 0.0 else math.inf,
        qcrb_lossy=qcrb(fl, v) if fl > 0.0 else math.inf)


# ---------------------------------------------------------------------------
# optimal phase
# ---------------------------------------------------------------------------

_PHI_CHUNK = 512


def _idiff_grid_chunk(scheme, params, chunk):
    # variance of N_b needs its own small engine; everything else fits in
    # the mixed (2,2,1,1) box
    e1 = PhiBatchEngine(scheme, params, chunk, p_cap=2, q_cap=1)
    e2 = PhiBatchEngine(scheme, params, chunk, p_cap=0, q_cap=2)
    m_na = e1.moment(MomentSpec(p1=1, p2=1))
    m_nb = e1.moment(MomentSpec(q1=1, q2=1))
    m_na2 = e1.moment(MomentSpec(p1=2, p2=2))
    m_ab = e1.moment(MomentSpec(p1=1, p2=1, q1=1, q2=1))
    m_nb2 = e2.moment(MomentSpec(q1=2, q2=2))
    na = np.real(m_na.val)
    nb = np.real(m_nb.val)
    var_a = np.real(m_na2.val) + na - na * na
    var_b = np.real(m_nb2.val) + nb - nb * nb
    cov = np.real(m_ab.val) - na * nb
    sigma2 = var_a + var_b - 2.0 * cov
    slope = np.real(m_na.dphi) - np.real(m_nb.dphi)
    return sigma2, slope


def _homodyne_grid_chunk(scheme, params, chunk):
    eng = PhiBatchEngine(scheme, params, chunk, p_cap=2, q_cap=0)
    m_a = eng.moment(MomentSpec(p2=1))
    m_adag = eng.moment(MomentSpec(p1=1))
    m_a2 = eng.moment(MomentSpec(p2=2))
    m_adag2 = eng.moment(MomentSpec(p1=2))
    m_na = eng.moment(MomentSpec(p1=1, p2=1))
    x = np.real(m_a.val + m_adag.val) / math.sqrt(2.0)
    sigma2 = 0.5 * np.real(m_adag2.val + m_a2.val + 2.0 * m_na.val + 1.0) - x * x
    slope = np.real(m_a.dphi + m_adag.dphi) / math.sqrt(2.0)
    return sigma2, slope


_GRID_STATS = {Detector.INTENSITY_DIFF: _idiff_grid_chunk,
               Detector.HOMODYNE: _homodyne_grid_chunk}


def _delta_phi_grid(detector: Detector, scheme: Scheme,
                    params: ExperimentParams, grid: np.ndarray) -> np.ndarray:
    grid_stats = _GRID_STATS[detector]
    delta = np.full(grid.shape, np.inf)
    for lo in range(0, grid.size, _PHI_CHUNK):
        chunk = grid[lo:lo + _PHI_CHUNK]
        sigma2, slope = grid_stats(scheme, params, chunk)
        ok = np.abs(slope) >= SLOPE_EPS
        part = np.full(chunk.shape, np.inf)
        part[ok] = np.sqrt(np.maximum(sigma2[ok], 0.0)) / np.abs(slope[ok])
        delta[lo:lo + _PHI_CHUNK] = part
    return delta


def _delta_phi_scalar(detector: Detector, scheme: Scheme,
                      params: ExperimentParams, phi: float) -> float:
    try:
        rep = sensitivity(detector, scheme, params.with_(phi=float(phi)))
    except ZeroSlopeError:
        return math.inf
    return rep.delta_phi


def optimize_phase(detector: Detector, scheme: Scheme, params: ExperimentParams,
                   interval: tuple[float, float] = (0.01, math.pi - 0.01),
                   ) -> tuple[float, SensitivityReport]:
    """Global minimum of delta-phi over the interval.

    A 2001-point uniform scan locates the basin (singular points skipped),
    then golden-section refinement narrows the bracket below 1e-10.  Ties
    resolve to the smallest phi.
    """
    validate(params)
    lo, hi = interval
    if not (0.0 < lo < hi < math.pi):
        raise ValueError("interval must satisfy 0 < lo < hi < pi")
    grid = np.linspace(lo, hi, GRID_POINTS)
    delta = _delta_phi_grid(detector, scheme, params, grid)
    if not np.any(np.isfinite(delta)):
        raise NoFinitePointError(
            f"no finite operating point for {detector.value} on {interval}")
    k = int(np.argmin(delta))  # first minimum = smallest phi on ties
    best_phi, best_val = float(grid[k]), float(delta[k])

    a = float(grid[max(k - 1, 0)])
    b = float(grid[min(k + 1, GRID_POINTS - 1)])
    f = lambda phi: _delta_phi_scalar(detector, scheme, params, phi)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > GOLDEN_TOL:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
        for phi, val in ((c, fc), (d, fd)):
            if val < best_val or (val == best_val and phi < best_phi):
                best_phi, best_val = float(phi), float(val)

    report = sensitivity(detector, scheme, params.with_(phi=best_phi))
    return best_phi, report
