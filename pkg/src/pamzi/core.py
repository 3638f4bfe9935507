"""Experiment parameters, validation, and the splitter coefficients.

All downstream physics is a function of one immutable parameter record.  The
coefficients chi and omega returned by :func:`chi_omega` are the only place
the phase ``phi`` and internal transmittance ``T`` enter the moment engine;
they are returned as dual numbers carrying exact d/dphi parts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .dual import DualComplex
from .errors import OutOfRangeError, SchemeMismatchError

M_CAP_DEFAULT = 5


class Scheme(enum.Enum):
    """Where the m-photon addition acts.

    ORIGINAL: no photon addition (m = 0).
    A: photons added to the coherent input port.
    B: photons added inside the interferometer, after the first splitter.
    """

    ORIGINAL = "original"
    A = "a"
    B = "b"


class Detector(enum.Enum):
    INTENSITY_DIFF = "idiff"
    HOMODYNE = "homodyne"


@dataclass(frozen=True)
class ExperimentParams:
    """Physical knobs of one interferometer configuration.

    alpha_mag/theta_alpha: coherent amplitude |alpha| and its phase (the
    balance condition of the source paper is theta_alpha = 0, the default).
    r: squeezing parameter of the squeezed-vacuum input.
    phi: interferometer phase, open interval (0, 2*pi).
    T: internal transmittance of both arms (equal by assumption).
    eta: mode-a transmittance of the photon-loss model used for the lossy
    Fisher information (kept distinct from T on purpose).
    """

    alpha_mag: float = 1.0
    r: float = 0.0
    phi: float = math.pi / 2
    theta_alpha: float = 0.0
    T: float = 1.0
    eta: float = 1.0
    m: int = 0
    scheme: Scheme = Scheme.ORIGINAL

    @property
    def alpha(self) -> complex:
        """Complex coherent amplitude |alpha| e^{i theta_alpha}."""
        return self.alpha_mag * complex(math.cos(self.theta_alpha),
                                        math.sin(self.theta_alpha))

    def with_(self, **changes) -> "ExperimentParams":
        return replace(self, **changes)


def validate(params: ExperimentParams, m_cap: int = M_CAP_DEFAULT) -> ExperimentParams:
    """Check every invariant of the parameter record; return it unchanged.

    Raises OutOfRangeError naming the offending field, or SchemeMismatchError
    when the original scheme is combined with m > 0.
    """
    if not math.isfinite(params.alpha_mag) or params.alpha_mag < 0:
        raise OutOfRangeError("alpha_mag", params.alpha_mag, "finite and >= 0")
    if not math.isfinite(params.r) or params.r < 0:
        raise OutOfRangeError("r", params.r, "finite and >= 0")
    if not math.isfinite(params.theta_alpha):
        raise OutOfRangeError("theta_alpha", params.theta_alpha, "finite")
    if not (0.0 < params.phi < 2.0 * math.pi):
        raise OutOfRangeError("phi", params.phi, "open interval (0, 2*pi)")
    if not (0.0 <= params.T <= 1.0):
        raise OutOfRangeError("T", params.T, "[0, 1]")
    if not (0.0 <= params.eta <= 1.0):
        raise OutOfRangeError("eta", params.eta, "[0, 1]")
    if not isinstance(params.m, (int, np.integer)) or params.m < 0:
        raise OutOfRangeError("m", params.m, "integer >= 0")
    if params.m > m_cap:
        raise OutOfRangeError("m", params.m, f"<= configured cap {m_cap}")
    if params.scheme == Scheme.ORIGINAL and params.m != 0:
        raise SchemeMismatchError(
            f"scheme 'original' requires m = 0, got m = {params.m}")
    return params


def chi_omega(params: ExperimentParams) -> tuple[DualComplex, DualComplex]:
    """Splitter coefficients chi = (sqrt(T)/2)(e^{-i phi}+1) and
    omega = (sqrt(T)/2)(1-e^{-i phi}), with exact phase derivatives.

    |chi|^2 + |omega|^2 = T for every phi.
    """
    return chi_omega_arrays(params.T, params.phi)


def chi_omega_arrays(T, phi) -> tuple[DualComplex, DualComplex]:
    """Vectorized form of :func:`chi_omega`; ``phi`` may be an ndarray."""
    half = 0.5 * np.sqrt(T)
    e = np.exp(-1j * np.asarray(phi, dtype=complex))
    de = -1j * e
    chi = DualComplex(half * (e + 1.0), half * de)
    omega = DualComplex(half * (1.0 - e), -half * de)
    return chi, omega
