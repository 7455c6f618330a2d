"""Hot evaluation kernels for the benchmark base functions.

Every kernel maps a 1-d float64 array to a float and exists in two
flavours: a numba ``@njit`` build (default) and a pure-numpy fallback.
Set the environment variable ``GROUPCC_NO_NUMBA=1`` before import to
force the numpy path; the flag is also honoured automatically when
numba is not installed.  ``benchmarks/bench_kernels.py`` times the two
paths against each other.
"""

import math
import os

import numpy as np

_E = math.e
_TWO_PI = 2.0 * math.pi


def _sphere_np(z):
    return float(np.dot(z, z))


def _elliptic_np(z):
    n = z.shape[0]
    if n == 1:
        return float(z[0] * z[0])
    w = 10.0 ** (6.0 * np.arange(n) / (n - 1))
    return float(np.dot(w, z * z))


def _rastrigin_np(z):
    return float(np.sum(z * z - 10.0 * np.cos(_TWO_PI * z) + 10.0))


def _ackley_np(z):
    n = z.shape[0]
    s1 = float(np.dot(z, z)) / n
    s2 = float(np.sum(np.cos(_TWO_PI * z))) / n
    return -20.0 * math.exp(-0.2 * math.sqrt(s1)) - math.exp(s2) + 20.0 + _E


def _schwefel_12_np(z):
    c = np.cumsum(z)
    return float(np.dot(c, c))


def _rosenbrock_np(z):
    a = z[:-1]
    b = z[1:]
    return float(np.sum(100.0 * (a * a - b) ** 2 + (a - 1.0) ** 2))


_NUMPY_KERNELS = {
    "sphere": _sphere_np,
    "elliptic": _elliptic_np,
    "rastrigin": _rastrigin_np,
    "ackley": _ackley_np,
    "schwefel_12": _schwefel_12_np,
    "rosenbrock": _rosenbrock_np,
}

NUMBA_ENABLED = os.environ.get("GROUPCC_NO_NUMBA", "").strip().lower() not in {
    "1",
    "true",
    "yes",
}

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False

if NUMBA_ENABLED:

    @njit(cache=True)
    def _sphere_jit(z):
        s = 0.0
        for v in z:
            s += v * v
        return s

    @njit(cache=True)
    def _elliptic_jit(z):
        n = z.shape[0]
        if n == 1:
            return z[0] * z[0]
        s = 0.0
        for i in range(n):
            s += 10.0 ** (6.0 * i / (n - 1)) * z[i] * z[i]
        return s

    @njit(cache=True)
    def _rastrigin_jit(z):
        s = 0.0
        for v in z:
            s += v * v - 10.0 * math.cos(_TWO_PI * v) + 10.0
        return s

    @njit(cache=True)
    def _ackley_jit(z):
        n = z.shape[0]
        s1 = 0.0
        s2 = 0.0
        for v in z:
            s1 += v * v
            s2 += math.cos(_TWO_PI * v)
        return (
            -20.0 * math.exp(-0.2 * math.sqrt(s1 / n))
            - math.exp(s2 / n)
            + 20.0
            + _E
        )

    @njit(cache=True)
    def _schwefel_12_jit(z):
        s = 0.0
        c = 0.0
        for v in z:
            c += v
            s += c * c
        return s

    @njit(cache=True)
    def _rosenbrock_jit(z):
        s = 0.0
        for i in range(z.shape[0] - 1):
            t = z[i] * z[i] - z[i + 1]
            u = z[i] - 1.0
            s += 100.0 * t * t + u * u
        return s

    _JIT_KERNELS = {
        "sphere": _sphere_jit,
        "elliptic": _elliptic_jit,
        "rastrigin": _rastrigin_jit,
        "ackley": _ackley_jit,
        "schwefel_12": _schwefel_12_jit,
        "rosenbrock": _rosenbrock_jit,
    }
else:
    _JIT_KERNELS = None

KERNELS = _JIT_KERNELS if NUMBA_ENABLED else _NUMPY_KERNELS


def numpy_kernels():
    """The pure-numpy kernel family (always available)."""
    return dict(_NUMPY_KERNELS)


def jit_kernels():
    """The numba kernel family, or None when JIT is disabled."""
    return dict(_JIT_KERNELS) if _JIT_KERNELS is not None else None
