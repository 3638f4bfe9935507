"""First-order dual numbers over the complex field.

A ``DualComplex`` carries a value together with its derivative with respect
to the interferometer phase, so every quantity assembled from the splitter
coefficients automatically knows its own phase slope.  The components may be
scalars or numpy arrays of a common shape; all operations broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _coerce(other):
    if isinstance(other, DualComplex):
        return other
    if isinstance(other, (int, float, complex, np.number, np.ndarray)):
        return DualComplex(other, np.zeros_like(np.asarray(other), dtype=complex)
                           if isinstance(other, np.ndarray) else 0.0)
    return NotImplemented


@dataclass(frozen=True)
class DualComplex:
    """Complex value ``val`` plus its phase derivative ``dphi``."""

    val: complex
    dphi: complex = 0.0

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return DualComplex(self.val + other.val, self.dphi + other.dphi)

    __radd__ = __add__

    def __neg__(self):
        return DualComplex(-self.val, -self.dphi)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return DualComplex(self.val - other.val, self.dphi - other.dphi)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return DualComplex(self.val * other.val,
                           self.val * other.dphi + self.dphi * other.val)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return DualComplex(self.val / other.val,
                           (self.dphi * other.val - self.val * other.dphi)
                           / (other.val * other.val))

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other.__truediv__(self)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = DualComplex(1.0, 0.0)
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self) -> "DualComplex":
        # phi is real, so conjugation commutes with d/dphi
        return DualComplex(np.conjugate(self.val), np.conjugate(self.dphi))

    def exp(self) -> "DualComplex":
        e = np.exp(self.val)
        return DualComplex(e, e * self.dphi)

    def abs2(self) -> "DualComplex":
        """|z|^2 as a dual number (real-valued, with its phase derivative)."""
        return self * self.conjugate()

    @property
    def real(self):
        return np.real(self.val)

    def isclose(self, other: "DualComplex", tol: float = 1e-12) -> bool:
        other = _coerce(other)
        return (abs(self.val - other.val) <= tol
                and abs(self.dphi - other.dphi) <= tol)


ZERO = DualComplex(0.0, 0.0)
ONE = DualComplex(1.0, 0.0)
