"""Generating-function moment engine.

Normally ordered output moments <a^dag^p1 b^dag^q1 b^q2 a^p2> of the
interferometer are partial derivatives, at zero, of exp(W) for a degree-2
polynomial W in six formal variables (x1, x2, y1, y2, s1, s2); the s pair
carries the m-fold photon addition.  The same machinery with the
phase-independent exponents Q1/Q2 yields moments of the internal state
before the second splitter, which feed the Fisher-information formulas.

The exponent polynomials are built as exact transcriptions of the model's
closed forms, evaluated numerically at one parameter point with dual-number
coefficients so the extracted moments carry their own d/dphi.  Variable
ordering is (x1, x2, y1, y2, s1, s2) throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import ExperimentParams, Scheme, chi_omega_arrays, validate
from .dual import DualComplex
from .errors import CapTooLargeError, SpecExceedsCapError

NVARS = 6
PER_VAR_CAP = 12
ORDER_CAP_DEFAULT = 8
# element-operation budget for one exponentiation (see exp_series)
WORK_BUDGET = 2_000_000_000

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MomentSpec:
    """Operator powers of one normally ordered moment.

    p1/p2 are the creation/annihilation powers on mode a, q1/q2 on mode b.
    ``m`` is the photon-added number; leave it None to inherit the engine's.
    """

    p1: int = 0
    p2: int = 0
    q1: int = 0
    q2: int = 0
    m: int | None = None

    @property
    def order(self) -> int:
        return self.p1 + self.p2 + self.q1 + self.q2


class SparsePoly:
    """Degree-<=2 polynomial over the six formal variables.

    Terms map an exponent 6-tuple to a DualComplex coefficient; the constant
    term is always absent for the exponents built here.
    """

    def __init__(self):
        self.terms: dict[tuple[int, ...], DualComplex] = {}

    def add(self, exps: tuple[int, ...], coeff: DualComplex) -> None:
        if len(exps) != NVARS:
            raise ValueError("exponent vector must have six entries")
        if sum(exps) == 0:
            raise ValueError("constant terms are not allowed")
        if sum(exps) > 2:
            raise ValueError("total degree must not exceed 2")
        if exps in self.terms:
            self.terms[exps] = self.terms[exps] + coeff
        else:
            self.terms[exps] = coeff

    def coefficient(self, exps: tuple[int, ...]) -> DualComplex:
        return self.terms.get(tuple(exps), DualComplex(0.0, 0.0))

    def __len__(self) -> int:
        return len(self.terms)

    def _as_arrays(self, batch: int):
        """(exps, cv, cd) arrays for the kernels; coefficients may be scalars
        or arrays of length ``batch``."""
        t = len(self.terms)
        exps = np.zeros((t, NVARS), dtype=np.int64)
        cv = np.zeros((t, batch), dtype=np.complex128)
        cd = np.zeros((t, batch), dtype=np.complex128)
        for i, (e, c) in enumerate(sorted(self.terms.items())):
            exps[i] = e
            cv[i] = np.asarray(c.val, dtype=np.complex128)
            cd[i] = np.asarray(c.dphi, dtype=np.complex128)
        return exps, cv, cd


class TruncatedSeries:
    """Coefficients of exp(poly) up to per-variable caps.

    Because the polynomial has no constant term, every stored coefficient is
    exact: series terms beyond the truncation cannot reach multidegrees at
    or below the cap.
    """

    def __init__(self, cap: tuple[int, ...], val: np.ndarray, dphi: np.ndarray):
        self.cap = cap
        self.val = val
        self.dphi = dphi

    def coefficient(self, exps: tuple[int, ...]) -> DualComplex:
        if any(e < 0 or e > c for e, c in zip(exps, self.cap)):
            raise SpecExceedsCapError(f"multidegree {exps} beyond cap {self.cap}")
        idx = tuple(exps)
        return DualComplex(complex(self.val[idx]), complex(self.dphi[idx]))


# ---------------------------------------------------------------------------
# exponent polynomials
# ---------------------------------------------------------------------------

def _hyperbolics(r: float):
    sh = math.sinh(r)
    ch = math.cosh(r)
    return sh * sh, ch * sh, ch * ch  # sinh^2, cosh*sinh, cosh^2


def _w_terms(scheme: Scheme, alpha, chi: DualComplex, om: DualComplex,
             r: float) -> SparsePoly:
    """Output-state exponent for one scheme at fixed (alpha, r) and dual
    splitter coefficients chi/om."""
    sh2, cs, ch2 = _hyperbolics(r)
    a = DualComplex(alpha)
    ac = a.conjugate()
    chic = chi.conjugate()
    omc = om.conjugate()
    i = DualComplex(1j)

    p = SparsePoly()
    # linear sources: creation-side couples to conj(alpha)
    p.add((1, 0, 0, 0, 0, 0), chi * ac)
    p.add((0, 1, 0, 0, 0, 0), chic * a)
    p.add((0, 0, 1, 0, 0, 0), i * om * ac)
    p.add((0, 0, 0, 1, 0, 0), -i * omc * a)

    # squeezed-input second moments
    p.add((1, 1, 0, 0, 0, 0), om * omc * sh2)
    p.add((0, 0, 1, 1, 0, 0), chi * chic * sh2)
    p.add((0, 1, 1, 0, 0, 0), i * chi * omc * sh2)
    p.add((1, 0, 0, 1, 0, 0), -i * chic * om * sh2)

    p.add((0, 0, 2, 0, 0, 0), chi * chi * (-0.5 * cs))
    p.add((0, 0, 0, 2, 0, 0), chic * chic * (-0.5 * cs))
    p.add((2, 0, 0, 0, 0, 0), om * om * (0.5 * cs))
    p.add((0, 2, 0, 0, 0, 0), omc * omc * (0.5 * cs))
    p.add((1, 0, 1, 0, 0, 0), i * chi * om * cs)
    p.add((0, 1, 0, 1, 0, 0), -i * chic * omc * cs)

    # photon-addition sector
    if scheme in (Scheme.A, Scheme.ORIGINAL):
        p.add((0, 0, 0, 0, 1, 0), ac)
        p.add((0, 0, 0, 0, 0, 1), a)
        p.add((0, 0, 0, 0, 1, 1), DualComplex(1.0))
        p.add((0, 1, 0, 0, 1, 0), chic)
        p.add((0, 0, 0, 1, 1, 0), -i * omc)
        p.add((1, 0, 0, 0, 0, 1), chi)
        p.add((0, 0, 1, 0, 0, 1), i * om)
    else:  # Scheme.B
        p.add((0, 0, 0, 0, 1, 0), ac * (1.0 / _SQRT2))
        p.add((0, 0, 0, 0, 0, 1), a * (1.0 / _SQRT2))
        p.add((0, 0, 0, 0, 1, 1), DualComplex(1.0 + 0.5 * sh2))
        p.add((0, 0, 0, 0, 2, 0), DualComplex(0.25 * cs))
        p.add((0, 0, 0, 0, 0, 2), DualComplex(0.25 * cs))
        p.add((1, 0, 0, 0, 1, 0), om * (-cs / _SQRT2))
        p.add((0, 0, 1, 0, 1, 0), i * chi * (-cs / _SQRT2))
        p.add((0, 1, 0, 0, 0, 1), omc * (-cs / _SQRT2))
        p.add((0, 0, 0, 1, 0, 1), i * chic * (cs / _SQRT2))
        p.add((1, 0, 0, 0, 0, 1), (chi - om * ch2) * (1.0 / _SQRT2))
        p.add((0, 0, 1, 0, 0, 1), i * (om - chi * ch2) * (1.0 / _SQRT2))
        p.add((0, 1, 0, 0, 1, 0), (chic - omc * ch2) * (1.0 / _SQRT2))
        p.add((0, 0, 0, 1, 1, 0), -i * (omc - chic * ch2) * (1.0 / _SQRT2))
    return p


def _q_terms(scheme: Scheme, alpha, r: float) -> SparsePoly:
    """Pre-recombiner exponent; contains no phase, so all duals vanish."""
    sh2, cs, _ = _hyperbolics(r)
    a = DualComplex(alpha)
    ac = a.conjugate()
    i = DualComplex(1j)
    rt = 1.0 / _SQRT2

    p = SparsePoly()
    p.add((1, 0, 0, 0, 0, 0), ac * rt)
    p.add((0, 0, 1, 0, 0, 0), i * ac * rt)
    p.add((0, 1, 0, 0, 0, 0), a * rt)
    p.add((0, 0, 0, 1, 0, 0), -i * a * rt)

    p.add((0, 0, 1, 1, 0, 0), DualComplex(0.5 * sh2))
    p.add((0, 1, 1, 0, 0, 0), -i * (0.5 * sh2))
    p.add((1, 0, 0, 1, 0, 0), i * (0.5 * sh2))
    p.add((1, 1, 0, 0, 0, 0), DualComplex(0.5 * sh2))

    p.add((0, 0, 2, 0, 0, 0), DualComplex(-0.25 * cs))
    p.add((2, 0, 0, 0, 0, 0), DualComplex(0.25 * cs))
    p.add((1, 0, 1, 0, 0, 0), -i * (0.5 * cs))
    p.add((0, 0, 0, 2, 0, 0), DualComplex(-0.25 * cs))
    p.add((0, 2, 0, 0, 0, 0), DualComplex(0.25 * cs))
    p.add((0, 1, 0, 1, 0, 0), i * (0.5 * cs))

    if scheme in (Scheme.A, Scheme.ORIGINAL):
        p.add((0, 0, 0, 0, 1, 0), ac)
        p.add((0, 0, 0, 0, 0, 1), a)
        p.add((0, 0, 0, 0, 1, 1), DualComplex(1.0))
        p.add((0, 1, 0, 0, 1, 0), DualComplex(rt))
        p.add((0, 0, 0, 1, 1, 0), -i * rt)
        p.add((1, 0, 0, 0, 0, 1), DualComplex(rt))
        p.add((0, 0, 1, 0, 0, 1), i * rt)
    else:
        p.add((0, 0, 0, 0, 1, 0), ac * rt)
        p.add((0, 0, 0, 0, 0, 1), a * rt)
        p.add((0, 0, 0, 0, 1, 1), DualComplex(1.0 + 0.5 * sh2))
        p.add((1, 0, 0, 0, 0, 1), DualComplex(1.0 + 0.5 * sh2))
        p.add((0, 1, 0, 0, 1, 0), DualComplex(1.0 + 0.5 * sh2))
        p.add((0, 0, 1, 0, 0, 1), -i * (0.5 * sh2))
        p.add((0, 0, 0, 1, 1, 0), i * (0.5 * sh2))
        p.add((0, 0, 0, 0, 2, 0), DualComplex(0.25 * cs))
        p.add((0, 0, 0, 0, 0, 2), DualComplex(0.25 * cs))
        p.add((1, 0, 0, 0, 1, 0), DualComplex(0.5 * cs))
        p.add((0, 0, 1, 0, 1, 0), -i * (0.5 * cs))
        p.add((0, 1, 0, 0, 0, 1), DualComplex(0.5 * cs))
        p.add((0, 0, 0, 1, 0, 1), i * (0.5 * cs))
    return p


def build_W(scheme: Scheme, params: ExperimentParams) -> SparsePoly:
    """Output-state exponent W for the given scheme at one parameter point."""
    validate(params)
    chi, om = chi_omega_arrays(params.T, params.phi)
    return _w_terms(scheme, params.alpha, chi, om, params.r)


def build_Q(scheme: Scheme, params: ExperimentParams) -> SparsePoly:
    """Internal-state exponent Q (phase independent) for the given scheme."""
    validate(params)
    return _q_terms(scheme, params.alpha, params.r)


# ---------------------------------------------------------------------------
# series exponentiation and extraction
# ---------------------------------------------------------------------------

def _exp_arrays(poly: SparsePoly, cap: tuple[int, ...], batch: int,
                total_cap: int | None = None):
    """Arrays of exp(poly) coefficients, batch-last layout.

    Coefficients are exact for every multidegree with per-variable exponents
    <= cap and total degree <= total_cap (all of them when total_cap covers
    sum(cap)); the series terminates there because poly has no constant term.
    """
    shape = tuple(c + 1 for c in cap) + (batch,)
    n_steps = sum(cap) if total_cap is None else min(sum(cap), total_cap)
    n_elem = int(np.prod(shape))
    if n_elem * max(n_steps, 1) * max(len(poly), 1) > WORK_BUDGET:
        raise CapTooLargeError(
            f"cap {cap} x batch {batch} exceeds the workload budget")
    exps, cv, cd = poly._as_arrays(batch)

    acc_v = np.zeros(shape, dtype=np.complex128)
    acc_d = np.zeros(shape, dtype=np.complex128)
    acc_v[(0,) * NVARS] = 1.0
    cur_v = acc_v.copy()
    cur_d = acc_d.copy()
    for n in range(1, n_steps + 1):
        new_v = np.zeros(shape, dtype=np.complex128)
        new_d = np.zeros(shape, dtype=np.complex128)
        _kernels.mul_into(new_v, new_d, cur_v, cur_d, exps, cv, cd)
        new_v /= n
        new_d /= n
        acc_v += new_v
        acc_d += new_d
        cur_v, cur_d = new_v, new_d
        if not (np.any(cur_v) or np.any(cur_d)):
            break
    return acc_v, acc_d


def exp_series(poly: SparsePoly, cap: tuple[int, ...]) -> TruncatedSeries:
    """exp(poly) truncated per variable at ``cap``; exact below the cap.

    Computed by summing poly^n / n! with per-variable truncation; n stops at
    the total-degree bound sum(cap) since poly has no constant term.
    """
    cap = tuple(int(c) for c in cap)
    if len(cap) != NVARS:
        raise ValueError("cap must have six entries")
    if any(c < 0 or c > PER_VAR_CAP for c in cap):
        raise CapTooLargeError(f"per-variable cap must lie in [0, {PER_VAR_CAP}]")
    val, dphi = _exp_arrays(poly, cap, batch=1)
    return TruncatedSeries(cap, val[..., 0], dphi[..., 0])


_FACTORIALS = [math.factorial(n) for n in range(PER_VAR_CAP + 1)]


def extract_D(series: TruncatedSeries, spec: MomentSpec) -> DualComplex:
    """Derivative-at-zero of the series for one moment specification:
    p1! p2! q1! q2! (m!)^2 times the Taylor coefficient."""
    m = spec.m if spec.m is not None else 0
    exps = (spec.p1, spec.p2, spec.q1, spec.q2, m, m)
    coeff = series.coefficient(exps)
    fact = (_FACTORIALS[spec.p1] * _FACTORIALS[spec.p2]
            * _FACTORIALS[spec.q1] * _FACTORIALS[spec.q2]
            * _FACTORIALS[m] ** 2)
    return coeff * fact


class MomentEngine:
    """Cached series for one (scheme, params) point.

    ``kind='output'`` uses the W exponent (full lossy interferometer);
    ``kind='internal'`` uses Q (ideal state before the second splitter).
    One engine serves every moment up to the construction caps, all
    normalized by the zero-order extraction.  ``order_cap`` limits the total
    operator order the engine guarantees, which shortens the series loop.
    """

    def __init__(self, scheme: Scheme, params: ExperimentParams,
                 p_cap: int = 2, q_cap: int = 2, kind: str = "output",
                 poly: SparsePoly | None = None, order_cap: int | None = None):
        validate(params)
        self.scheme = scheme
        self.params = params
        self.m = params.m
        self.order_cap = (2 * (p_cap + q_cap) if order_cap is None
                          else order_cap)
        if poly is None:
            poly = (build_W if kind == "output" else build_Q)(scheme, params)
        cap = (p_cap, p_cap, q_cap, q_cap, self.m, self.m)
        if any(c < 0 or c > PER_VAR_CAP for c in cap):
            raise CapTooLargeError(f"per-variable cap must lie in [0, {PER_VAR_CAP}]")
        val, dphi = _exp_arrays(poly, cap, batch=1,
                                total_cap=self.order_cap + 2 * self.m)
        self._series = TruncatedSeries(cap, val[..., 0], dphi[..., 0])
        self._norm = self._extract(MomentSpec(m=self.m))

    def _extract(self, spec: MomentSpec) -> DualComplex:
        return extract_D(self._series, spec)

    def moment(self, spec: MomentSpec) -> DualComplex:
        """Normalized expectation <a^dag^p1 b^dag^q1 b^q2 a^p2>."""
        if spec.m is not None and spec.m != self.m:
            raise ValueError(f"spec.m={spec.m} conflicts with engine m={self.m}")
        if spec.order > self.order_cap:
            raise SpecExceedsCapError(
                f"order {spec.order} beyond engine order cap {self.order_cap}")
        spec = MomentSpec(spec.p1, spec.p2, spec.q1, spec.q2, self.m)
        return self._extract(spec) / self._norm


class PhiBatchEngine:
    """Moment engine vectorized over an array of phases.

    Used by the phase optimizer and the sweep runner; moments come back as
    DualComplex records whose components are arrays over the phi axis.
    """

    def __init__(self, scheme: Scheme, params: ExperimentParams,
                 phi: np.ndarray, p_cap: int = 2, q_cap: int = 2,
                 order_cap: int = 4):
        validate(params)
        self.m = params.m
        self.order_cap = order_cap
        phi = np.asarray(phi, dtype=float)
        chi, om = chi_omega_arrays(params.T, phi)
        poly = _w_terms(scheme, params.alpha, chi, om, params.r)
        cap = (p_cap, p_cap, q_cap, q_cap, self.m, self.m)
        if any(c < 0 or c > PER_VAR_CAP for c in cap):
            raise CapTooLargeError(f"per-variable cap must lie in [0, {PER_VAR_CAP}]")
        val, dphi = _exp_arrays(poly, cap, batch=phi.size,
                                total_cap=order_cap + 2 * self.m)
        self._val = val
        self._dphi = dphi
        self._norm = self._extract(MomentSpec(m=self.m))

    def _extract(self, spec: MomentSpec) -> DualComplex:
        m = self.m
        idx = (spec.p1, spec.p2, spec.q1, spec.q2, m, m)
        fact = (_FACTORIALS[spec.p1] * _FACTORIALS[spec.p2]
                * _FACTORIALS[spec.q1] * _FACTORIALS[spec.q2]
                * _FACTORIALS[m] ** 2)
        return DualComplex(self._val[idx] * fact, self._dphi[idx] * fact)

    def moment(self, spec: MomentSpec) -> DualComplex:
        spec = MomentSpec(spec.p1, spec.p2, spec.q1, spec.q2, self.m)
        return self._extract(spec) / self._norm


def _check_spec(spec: MomentSpec, params: ExperimentParams,
                order_cap: int = ORDER_CAP_DEFAULT) -> MomentSpec:
    if min(spec.p1, spec.p2, spec.q1, spec.q2) < 0:
        raise SpecExceedsCapError("operator powers must be non-negative")
    if spec.order > order_cap:
        raise SpecExceedsCapError(
            f"total order {spec.order} exceeds cap {order_cap}")
    if spec.m is not None and spec.m != params.m:
        raise ValueError(f"spec.m={spec.m} conflicts with params.m={params.m}")
    return MomentSpec(spec.p1, spec.p2, spec.q1, spec.q2, params.m)


def moment(scheme: Scheme, params: ExperimentParams, spec: MomentSpec) -> DualComplex:
    """One normalized output-state moment, built from a minimal-cap series."""
    spec = _check_spec(spec, validate(params))
    poly = build_W(scheme, params)
    cap = (spec.p1, spec.p2, spec.q1, spec.q2, params.m, params.m)
    series = exp_series(poly, cap)
    return extract_D(series, spec) / extract_D(series, MomentSpec(m=params.m))


def internal_moment(scheme: Scheme, params: ExperimentParams,
                    spec: MomentSpec) -> DualComplex:
    """One normalized moment of the ideal state before the second splitter."""
    spec = _check_spec(spec, validate(params))
    poly = build_Q(scheme, params)
    cap = (spec.p1, spec.p2, spec.q1, spec.q2, params.m, params.m)
    series = exp_series(poly, cap)
    return extract_D(series, spec) / extract_D(series, MomentSpec(m=params.m))
