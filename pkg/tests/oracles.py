"""Independent reference computations shared by the test modules."""
import math

import numpy as np

from crntm import model
from crntm.config import Config
from crntm.samplers import RngStream

TINY = dict(V=20, K=3, n=4, r=5, M=2)


def central_diff(f, x, h=1e-6):
    """Gradient of scalar ``f`` at array ``x`` by central differences."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + h
        fp = f(x)
        x[idx] = old - h
        fm = f(x)
        x[idx] = old
        g[idx] = (fp - fm) / (2 * h)
    return g


def rel_error(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1e-12)
    return float(np.linalg.norm(a - b) / scale)


def tiny_instance(decoder, seed=0, hidden=7, B=6, **overrides):
    """A small random model + batch; parameters are jittered off their init."""
    rs = np.random.default_rng(seed)
    V, K, n, r, M = (TINY[k] for k in "VKnrM")
    emb = rs.normal(size=(V, r))
    X = rs.poisson(1.0, size=(B, V)).astype(np.float64)
    X[:, 0] += 1
    cfg = Config(n_topics=K, latent_dim=n, decoder=decoder, n_components=M, hidden=hidden,
                 embed_dim=r, init_std=0.3, **overrides)
    params = model.init_params(cfg, V, emb, seed=seed + 1)
    for k in params:
        params[k] = params[k] + 0.1 * rs.normal(size=params[k].shape)
    rngs = [RngStream(seed + 3, i) for i in range(B)]
    return params, X, emb, cfg, rngs


def elbo_gradient_errors(decoder, seed=0, h=1e-5):
    """Per-parameter relative error of the analytic ELBO gradient against
    central differences at fixed (replayed) noise."""
    params, X, emb, cfg, rngs = tiny_instance(decoder, seed)
    _, grads, noise = model.loss_and_grads(params, X, emb, cfg, rngs=rngs)
    errors = {}
    for name, g in grads.items():
        def f(value, name=name):
            trial = dict(params, **{name: value})
            return float(model.elbo_terms(X, model.as_tensors(trial), emb, cfg, noise).loss.data)
        errors[name] = rel_error(g, central_diff(f, params[name], h))
    return errors


def _beta_kl_half(a, b, a0, b0):
    """Integral over (0, 1/2] of q log(q/p); the x^(a-1) and x^(a-1) log x
    endpoint singularities are handled by QUADPACK's algebraic weights."""
    from scipy import integrate, special
    c = special.betaln(a0, b0) - special.betaln(a, b)
    norm = math.exp(-special.betaln(a, b))
    smooth = lambda x: norm * (1 - x) ** (b - 1) * ((b - b0) * math.log1p(-x) + c)
    logpart = lambda x: norm * (1 - x) ** (b - 1) * (a - a0)
    kw = dict(weight="alg", wvar=(a - 1, 0), epsabs=1e-14, epsrel=1e-13, limit=200)
    v1, _ = integrate.quad(smooth, 0.0, 0.5, **kw)
    kw["weight"] = "alg-loga"
    v2, _ = integrate.quad(logpart, 0.0, 0.5, **kw)
    return v1 + v2


def beta_kl_quadrature(a, b, a0, b0):
    """KL(Beta(a,b) || Beta(a0,b0)) by quadrature of q log(q/p) over (0, 1).

    The upper half is reflected (x -> 1 - x swaps the shapes) so both
    endpoint singularities sit at 0.
    """
    return _beta_kl_half(a, b, a0, b0) + _beta_kl_half(b, a, b0, a0)
