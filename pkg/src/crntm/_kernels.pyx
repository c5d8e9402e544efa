# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar kernels: log-gamma, digamma, trigamma and the
Marsaglia-Tsang acceptance loop.

``_kernels_py`` mirrors every function here with the same arithmetic so
the two backends agree; the sampler consumes the bit generator in the
same order in both.
"""
import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport log, sqrt, NAN, INFINITY, isinf
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal, random_standard_uniform

cnp.import_array()

BACKEND = "compiled"

cdef double HALF_LOG_2PI = 0.91893853320467274178
cdef double LGAMMA_SHIFT = 10.0
cdef double PSI_SHIFT = 10.0


cdef inline double _lgamma(double x) nogil:
    cdef double prod = 1.0, z, z2, series
    if not x > 0.0:
        return NAN
    if isinf(x):
        return INFINITY
    while x < LGAMMA_SHIFT:
        prod *= x
        x += 1.0
    z = 1.0 / x
    z2 = z * z
    series = z * (1.0 / 12.0 - z2 * (1.0 / 360.0 - z2 * (1.0 / 1260.0 - z2 * (
        1.0 / 1680.0 - z2 * (1.0 / 1188.0 - z2 * (691.0 / 360360.0 - z2 / 156.0))))))
    return (x - 0.5) * log(x) - x + HALF_LOG_2PI + series - log(prod)


cdef inline double _digamma(double x) nogil:
    cdef double acc = 0.0, z, z2, series
    if not x > 0.0:
        return NAN
    if isinf(x):
        return INFINITY
    while x < PSI_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    z = 1.0 / x
    z2 = z * z
    series = z2 * (1.0 / 12.0 - z2 * (1.0 / 120.0 - z2 * (1.0 / 252.0 - z2 * (
        1.0 / 240.0 - z2 * (1.0 / 132.0 - z2 * (691.0 / 32760.0 - z2 / 12.0))))))
    return acc + log(x) - 0.5 * z - series


cdef inline double _trigamma(double x) nogil:
    cdef double acc = 0.0, z, z2, series
    if not x > 0.0:
        return NAN
    if isinf(x):
        return 0.0
    while x < PSI_SHIFT:
        acc += 1.0 / (x * x)
        x += 1.0
    z = 1.0 / x
    z2 = z * z
    series = z * (1.0 + z * (0.5 + z * (1.0 / 6.0 - z2 * (1.0 / 30.0 - z2 * (
        1.0 / 42.0 - z2 * (1.0 / 30.0 - z2 * (5.0 / 66.0 - z2 * (
            691.0 / 2730.0 - z2 * 7.0 / 6.0))))))))
    return acc + series


def lgamma(x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _lgamma(xv[i])
    return out.reshape(np.shape(x))


def digamma(x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _digamma(xv[i])
    return out.reshape(np.shape(x))


def trigamma(x):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64).ravel()
    out = np.empty(xv.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(xv.shape[0]):
            ov[i] = _trigamma(xv[i])
    return out.reshape(np.shape(x))


cdef inline double _accepted_noise(double shape, bitgen_t *bg, long *trials) nogil:
    cdef double d = shape - 1.0 / 3.0
    cdef double c = 1.0 / sqrt(9.0 * d)
    cdef double x, x2, v, u
    while True:
        trials[0] += 1
        x = random_standard_normal(bg)
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = random_standard_uniform(bg)
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return x
        if u == 0.0 or log(u) < 0.5 * x2 + d * (1.0 - v + log(v)):
            return x


def gamma_noise(alpha, generator):
    """Run the acceptance loop for every entry of ``alpha``.

    Returns ``(eps, rho, trials)``: the accepted normal noise, the uniform
    used for shape augmentation (NaN where ``alpha > 1``) and the number of
    proposals drawn in total.
    """
    cdef double[::1] av = np.ascontiguousarray(alpha, dtype=np.float64).ravel()
    cdef Py_ssize_t n = av.shape[0], i
    eps = np.empty(n, dtype=np.float64)
    rho = np.empty(n, dtype=np.float64)
    cdef double[::1] ev = eps
    cdef double[::1] rv = rho
    cdef long trials = 0
    cdef double a
    bit_generator = generator.bit_generator
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    with bit_generator.lock, nogil:
        for i in range(n):
            a = av[i]
            if a > 1.0:
                ev[i] = _accepted_noise(a, bg, &trials)
                rv[i] = NAN
            else:
                ev[i] = _accepted_noise(a + 1.0, bg, &trials)
                rv[i] = random_standard_uniform(bg)
    shape = np.shape(alpha)
    return eps.reshape(shape), rho.reshape(shape), int(trials)
