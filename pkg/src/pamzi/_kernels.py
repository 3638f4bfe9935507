"""Hot kernels for truncated-series arithmetic.

The one inner loop that dominates sweeps is "multiply a truncated power
series in six variables by a sparse degree-2 polynomial".  Two
implementations are provided: a numba ``@njit`` kernel (default) and a pure
numpy slicing fallback.  Selection:

    PAMZI_BACKEND=numpy   force the numpy path
    PAMZI_BACKEND=numba   force numba (ImportError if unavailable)

unset: numba when importable, numpy otherwise.  ``benchmarks/bench_kernels.py``
times both paths on representative workloads.

Array layout: series coefficients live in 7-d arrays shaped
``(n1, ..., n6, batch)`` holding values and d/dphi parts separately (batch
last, so the innermost loop runs over contiguous memory); the polynomial is
``exps`` (t, 6) int64 exponents with per-term coefficient arrays
``cv``/``cd`` of shape (t, batch).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


def mul_into_numpy(out_v, out_d, cur_v, cur_d, exps, cv, cd):
    """out += poly * cur, truncated to the array shape (numpy slicing path)."""
    shape = cur_v.shape[:6]
    for t in range(exps.shape[0]):
        e = exps[t]
        if any(int(e[k]) >= shape[k] for k in range(6)):
            continue
        src = tuple(slice(0, shape[k] - int(e[k])) for k in range(6))
        dst = tuple(slice(int(e[k]), None) for k in range(6))
        c = cv[t]
        g = cd[t]
        out_v[dst] += c * cur_v[src]
        out_d[dst] += c * cur_d[src] + g * cur_v[src]


if _HAVE_NUMBA:

    @nb.njit(cache=True)
    def mul_into_numba(out_v, out_d, cur_v, cur_d, exps, cv, cd):  # pragma: no cover - exercised via dispatch
        n1, n2, n3, n4, n5, n6, B = cur_v.shape
        for t in range(exps.shape[0]):
            e1 = exps[t, 0]
            e2 = exps[t, 1]
            e3 = exps[t, 2]
            e4 = exps[t, 3]
            e5 = exps[t, 4]
            e6 = exps[t, 5]
            if e1 >= n1 or e2 >= n2 or e3 >= n3 or e4 >= n4 or e5 >= n5 or e6 >= n6:
                continue
            for i1 in range(n1 - e1):
                for i2 in range(n2 - e2):
                    for i3 in range(n3 - e3):
                        for i4 in range(n4 - e4):
                            for i5 in range(n5 - e5):
                                for i6 in range(n6 - e6):
                                    for b in range(B):
                                        c = cv[t, b]
                                        g = cd[t, b]
                                        v = cur_v[i1, i2, i3, i4, i5, i6, b]
                                        d = cur_d[i1, i2, i3, i4, i5, i6, b]
                                        out_v[i1 + e1, i2 + e2, i3 + e3,
                                              i4 + e4, i5 + e5, i6 + e6, b] += c * v
                                        out_d[i1 + e1, i2 + e2, i3 + e3,
                                              i4 + e4, i5 + e5, i6 + e6, b] += c * d + g * v


def _select():
    choice = os.environ.get("PAMZI_BACKEND", "").strip().lower()
    if choice == "numpy":
        return "numpy", mul_into_numpy
    if choice == "numba":
        if not _HAVE_NUMBA:
            raise ImportError("PAMZI_BACKEND=numba but numba is not importable")
        return "numba", mul_into_numba
    if _HAVE_NUMBA:
        return "numba", mul_into_numba
    return "numpy", mul_into_numpy


BACKEND, mul_into = _select()


def active_backend() -> str:
    return BACKEND
