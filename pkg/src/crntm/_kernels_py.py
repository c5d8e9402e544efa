"""Pure-Python twin of the compiled ``_kernels`` module.

Same algorithms and the same operation order as the Cython source, so
results agree with the compiled path (the sampler draws are bit-identical
because both consume the bit generator identically).
"""
import math

import numpy as np

BACKEND = "python"

HALF_LOG_2PI = 0.91893853320467274178
LGAMMA_SHIFT = 10.0
PSI_SHIFT = 10.0


def _lgamma(x):
    if not x > 0.0:
        return math.nan
    if math.isinf(x):
        return math.inf
    prod = 1.0
    while x < LGAMMA_SHIFT:
        prod *= x
        x += 1.0
    z = 1.0 / x
    z2 = z * z
    series = z * (1.0 / 12.0 - z2 * (1.0 / 360.0 - z2 * (1.0 / 1260.0 - z2 * (
        1.0 / 1680.0 - z2 * (1.0 / 1188.0 - z2 * (691.0 / 360360.0 - z2 / 156.0))))))
    return (x - 0.5) * math.log(x) - x + HALF_LOG_2PI + series - math.log(prod)


def _digamma(x):
    if not x > 0.0:
        return math.nan
    if math.isinf(x):
        return math.inf
    acc = 0.0
    while x < PSI_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    z = 1.0 / x
    z2 = z * z
    series = z2 * (1.0 / 12.0 - z2 * (1.0 / 120.0 - z2 * (1.0 / 252.0 - z2 * (
        1.0 / 240.0 - z2 * (1.0 / 132.0 - z2 * (691.0 / 32760.0 - z2 / 12.0))))))
    return acc + math.log(x) - 0.5 * z - series


def _trigamma(x):
    if not x > 0.0:
        return math.nan
    if math.isinf(x):
        return 0.0
    acc = 0.0
    while x < PSI_SHIFT:
        acc += 1.0 / (x * x)
        x += 1.0
    z = 1.0 / x
    z2 = z * z
    series = z * (1.0 + z * (0.5 + z * (1.0 / 6.0 - z2 * (1.0 / 30.0 - z2 * (
        1.0 / 42.0 - z2 * (1.0 / 30.0 - z2 * (5.0 / 66.0 - z2 * (
            691.0 / 2730.0 - z2 * 7.0 / 6.0))))))))
    return acc + series


def _map(fn, x):
    arr = np.asarray(x, dtype=np.float64)
    flat = [fn(float(v)) for v in arr.ravel()]
    return np.array(flat, dtype=np.float64).reshape(arr.shape)


def lgamma(x):
    return _map(_lgamma, x)


def digamma(x):
    return _map(_digamma, x)


def trigamma(x):
    return _map(_trigamma, x)


def _accepted_noise(shape, generator, counter):
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    normal = generator.standard_normal
    uniform = generator.random
    while True:
        counter[0] += 1
        x = normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = uniform()
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return x
        if u == 0.0 or math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return x


def gamma_noise(alpha, generator):
    arr = np.asarray(alpha, dtype=np.float64)
    flat = arr.ravel()
    eps = np.empty(flat.shape[0])
    rho = np.empty(flat.shape[0])
    counter = [0]
    for i, a in enumerate(flat.tolist()):
        if a > 1.0:
            eps[i] = _accepted_noise(a, generator, counter)
            rho[i] = math.nan
        else:
            eps[i] = _accepted_noise(a + 1.0, generator, counter)
            rho[i] = generator.random()
    return eps.reshape(arr.shape), rho.reshape(arr.shape), counter[0]
