"""Reparameterised sampling: Gaussian noise, Gamma via Marsaglia-Tsang
rejection with shape augmentation, and Beta as a ratio of Gammas.

The acceptance loop only decides *which* noise is kept; the draw itself
is rebuilt from that noise by a differentiable transform, so gradients
flow through the accepted path only (no acceptance-probability term).
Keeping the noise around also lets a forward pass be replayed exactly,
which is what the finite-difference checks rely on.
"""
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from ._backend import kernels
from .errors import DomainError

LOG_RHO_FLOOR = -700.0

# purpose tags for derived streams
STREAM_INIT = 1
STREAM_SHUFFLE = 2
STREAM_DOC = 3
STREAM_EVAL = 4
STREAM_OOV = 5
STREAM_CLASSIFY = 6
STREAM_SPLIT = 7


def stream_id(purpose, epoch=0, index=0):
    """Pack (purpose, epoch, index) into one 64-bit stream id."""
    if not (0 <= purpose < 1 << 8 and 0 <= epoch < 1 << 24 and 0 <= index < 1 << 32):
        raise ValueError("stream id component out of range")
    return (purpose << 56) | (epoch << 32) | index


class RngStream:
    """Independent random stream keyed by ``(seed, stream_id)``.

    Streams are spawned from a numpy ``SeedSequence`` so distinct ids give
    statistically independent PCG64 generators.
    """

    def __init__(self, seed, stream_id=0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id:#x})"

    def derive(self, purpose, epoch=0, index=0):
        return RngStream(self.seed, stream_id(purpose, epoch, index))


def sample_standard_normal(rng, n):
    if isinstance(n, int) and n < 1:
        raise ValueError("n must be >= 1")
    return ad.Tensor(rng.generator.standard_normal(n))


# ------------------------------------------------------------------- Gamma

def _transform_np(alpha, eps):
    """(alpha - 1/3)(1 + eps/sqrt(9 alpha - 3))^3 and its alpha-derivative."""
    s = np.sqrt(9.0 * alpha - 3.0)
    base = 1.0 + eps / s
    cube = base * base * base
    value = (alpha - 1.0 / 3.0) * cube
    dvalue = cube - 1.5 * (eps / s) * base * base
    return value, dvalue


def gamma_transform(alpha, eps):
    """Marsaglia-Tsang transform of accepted noise ``eps`` at shape ``alpha``.

    ``alpha`` may be a taped Tensor; the pathwise derivative at fixed noise
    is recorded. Valid for alpha > 1/3 with a positive result.
    """
    alpha = ad.as_tensor(alpha)
    a = alpha.data
    eps = np.asarray(eps, dtype=np.float64)
    if np.any(~(a > 1.0 / 3.0)):
        raise DomainError("gamma_transform needs alpha > 1/3")
    value, dvalue = _transform_np(a, eps)
    if np.any(~(value > 0.0)):
        raise DomainError("noise outside the transform's support (should have been rejected)")
    return ad.record(value, (alpha,), lambda g: (g * dvalue,))


@dataclass
class GammaNoise:
    """Accepted noise for a block of Gamma draws.

    ``rho`` is NaN where no shape augmentation was used.
    """
    eps: np.ndarray
    rho: np.ndarray
    trials: int = 0

    @property
    def augmented(self):
        return ~np.isnan(self.rho)


@dataclass
class GammaDraw:
    value: ad.Tensor
    log_value: ad.Tensor
    accepted_noise: np.ndarray
    uniform_aux: np.ndarray
    shape_input: np.ndarray


def _check_shape_param(a):
    a = np.asarray(a, dtype=np.float64)
    if not np.all(np.isfinite(a)) or np.any(a <= 0.0):
        raise DomainError("Gamma shape must be finite and > 0")
    return a


def draw_gamma_noise(alpha, rng):
    """Run the rejection loop for every entry of ``alpha`` (values only)."""
    a = _check_shape_param(alpha)
    eps, rho, trials = kernels.gamma_noise(a, rng.generator)
    return GammaNoise(eps, rho, trials)


def log_gamma_from_noise(alpha, noise):
    """log of the Gamma draw rebuilt from accepted noise.

    Plain entries: log T(alpha, eps). Augmented entries:
    log rho / alpha + log T(alpha + 1, eps), with log rho floored at -700.
    """
    alpha = ad.as_tensor(alpha)
    aug = noise.augmented
    if not aug.any():
        return ad.log(gamma_transform(alpha, noise.eps))
    shift = aug.astype(np.float64)
    log_rho = np.zeros_like(shift)
    r = noise.rho[aug]
    log_rho[aug] = np.maximum(np.log(np.maximum(r, 1e-300)), LOG_RHO_FLOOR)
    base = ad.log(gamma_transform(alpha + shift, noise.eps))
    return base + ad.Tensor(log_rho) * ad.reciprocal(alpha)


def sample_gamma(alpha, rng):
    """Reparameterised Gamma(alpha, 1) draw(s)."""
    alpha = ad.as_tensor(alpha)
    noise = draw_gamma_noise(alpha.data, rng)
    log_value = log_gamma_from_noise(alpha, noise)
    return GammaDraw(ad.exp(log_value), log_value, noise.eps, noise.rho, alpha.data.copy())


# -------------------------------------------------------------------- Beta

def log_beta_from_noise(alpha, beta, noise_a, noise_b):
    """log lambda with lambda = G_a / (G_a + G_b), computed as a log-sigmoid.

    Working in log space keeps lambda well defined when both Gamma draws
    underflow (tiny shapes with augmentation).
    """
    la = log_gamma_from_noise(alpha, noise_a)
    lb = log_gamma_from_noise(beta, noise_b)
    return ad.neg(ad.softplus(lb - la))


def sample_beta(alpha, beta, rng):
    """Reparameterised Beta(alpha, beta) draw(s) in (0, 1)."""
    alpha, beta = ad.as_tensor(alpha), ad.as_tensor(beta)
    na = draw_gamma_noise(alpha.data, rng)
    nb = draw_gamma_noise(beta.data, rng)
    return ad.exp(log_beta_from_noise(alpha, beta, na, nb))


def acceptance_rate(alpha, n, rng):
    """Fraction of proposals accepted when drawing ``n`` Gamma(alpha) values."""
    if not alpha > 1.0:
        raise ValueError("acceptance rate is defined for the plain loop (alpha > 1)")
    noise = draw_gamma_noise(np.full(n, float(alpha)), rng)
    return n / noise.trials
