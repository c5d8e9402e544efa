"""The topic model: inference network, Beta topic controller, Gaussian /
Gaussian-mixture / free decoders, the variational objective and training.

Parameters live in a plain ``dict`` of float64 arrays. Each training step
puts them on a fresh :class:`~crntm.autodiff.Tape`, runs the forward pass
and reads gradients back with :func:`~crntm.autodiff.backward`.

Shapes (B documents, V words, K topics, n latent dims, H hidden units,
r embedding dims, M mixture components)::

    enc.W1 V x H   enc.b1 1 x H   -> softplus -> pi
    enc.Wmu H x n  enc.bmu 1 x n  -> mu
    enc.Wls H x n  enc.bls 1 x n  -> log sigma
    theta.W n x K  theta.b 1 x K  -> logits of theta'
    ctl.W1 V x H   ctl.b1 1 x H   -> softplus -> phi
    ctl.Wa H x K   ctl.ba 1 x K   -> log alpha
    ctl.Wb H x K   ctl.bb 1 x K   -> log beta
    gd : dec.mu K x r, dec.logsig K x r
    gmd: dec.mu K x M x r, dec.logsig K x M x r, dec.tau K x M (1 x M if shared)
    free: dec.logits K x V
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .errors import DataError, DivergenceError, DomainError, ShapeError
from .samplers import (STREAM_DOC, STREAM_EVAL, STREAM_INIT, STREAM_SHUFFLE, GammaNoise,
                       RngStream, draw_gamma_noise, log_beta_from_noise, stream_id)
from .specfun import log_beta_fn

log = logging.getLogger(__name__)

LOG_SIGMA_FLOOR = math.log(1e-4)
LOG_SHAPE_MIN = math.log(1e-3)
LOG_SHAPE_MAX = math.log(1e3)
PROB_FLOOR = 1e-12
LOG_2PI = math.log(2.0 * math.pi)


# ------------------------------------------------------------------ params

def param_shapes(config, V, r=None):
    """Ordered mapping of parameter name to shape.

    Controller weights come last so that switching the controller off does
    not change how the remaining parameters are initialised.
    """
    H, n, K, M = config.hidden, config.n_latent, config.n_topics, config.n_components
    shapes = {
        "enc.W1": (V, H), "enc.b1": (1, H),
        "enc.Wmu": (H, n), "enc.bmu": (1, n),
        "enc.Wls": (H, n), "enc.bls": (1, n),
        "theta.W": (n, K), "theta.b": (1, K),
    }
    if config.decoder == "gd":
        shapes.update({"dec.mu": (K, r), "dec.logsig": (K, r)})
    elif config.decoder == "gmd":
        shapes.update({"dec.mu": (K, M, r), "dec.logsig": (K, M, r),
                       "dec.tau": (1, M) if config.shared_tau else (K, M)})
    else:
        shapes["dec.logits"] = (K, V)
    if config.use_controller:
        shapes.update({"ctl.W1": (V, H), "ctl.b1": (1, H),
                       "ctl.Wa": (H, K), "ctl.ba": (1, K),
                       "ctl.Wb": (H, K), "ctl.bb": (1, K)})
    return shapes


def init_params(config, V, embeddings=None, seed=None):
    """Affine weights ~ N(0, init_std^2), biases 0.

    Gaussian centroids start on word embeddings. With ``centroid_init =
    "kmeans++"`` they are spread out by greedy D^2 seeding and their scales
    match the per-dimension spread of the embedding cloud, so every topic
    initially covers the whole vocabulary; ``"random"`` picks words
    uniformly and uses unit scales.
    """
    seed = config.seed if seed is None else seed
    gen = RngStream(seed, stream_id(STREAM_INIT)).generator
    emb = _embedding_matrix(embeddings)
    if config.decoder != "free":
        if emb is None:
            raise DataError(f"decoder '{config.decoder}' needs word embeddings")
        if emb.shape[0] != V:
            raise ShapeError(f"embedding rows {emb.shape[0]} != vocabulary size {V}")
    r = None if emb is None else emb.shape[1]
    params = {}
    for name, shape in param_shapes(config, V, r).items():
        if name in ("dec.mu", "dec.logsig", "dec.tau"):
            continue
        if name.split(".")[1].startswith("b"):
            params[name] = np.zeros(shape)
        else:
            params[name] = config.init_std * gen.standard_normal(shape)
        if name == "theta.b" and config.decoder != "free":
            _init_gaussians(params, config, emb, gen)
    return {name: params[name] for name in param_shapes(config, V, r)}


def _init_gaussians(params, config, emb, gen):
    K, M = config.n_topics, config.n_components
    V, r = emb.shape
    count = K if config.decoder == "gd" else K * M
    if config.centroid_init == "random":
        mu = emb[gen.choice(V, size=count, replace=count > V)]
        spread = np.zeros(r)
    else:
        mu = emb[_spread_seeds(emb, count, gen)]
        spread = np.log(np.maximum(emb.std(axis=0), math.exp(LOG_SIGMA_FLOOR)))
    if config.decoder == "gd":
        params["dec.mu"] = mu.reshape(K, r)
        params["dec.logsig"] = np.tile(spread, (K, 1))
    else:
        params["dec.mu"] = mu.reshape(K, M, r)
        params["dec.logsig"] = np.tile(spread, (K, M, 1))
        params["dec.tau"] = np.zeros((1, M) if config.shared_tau else (K, M))


def _spread_seeds(emb, count, gen):
    """Greedy k-means++ seeding: each pick draws a few candidates with
    probability proportional to squared distance from the rows chosen so
    far and keeps the one that most reduces the total distance."""
    V = emb.shape[0]
    n_trials = 2 + int(math.log(max(count, 1)))
    idx = [int(gen.integers(V))]
    d2 = ((emb - emb[idx[0]]) ** 2).sum(axis=1)
    for _ in range(count - 1):
        total = d2.sum()
        if total <= 0:
            idx.append(int(gen.integers(V)))
            continue
        cand = gen.choice(V, size=n_trials, p=d2 / total)
        cand_d2 = np.minimum(d2, ((emb[None, :, :] - emb[cand][:, None, :]) ** 2).sum(-1))
        best = int(np.argmin(cand_d2.sum(axis=1)))
        idx.append(int(cand[best]))
        d2 = cand_d2[best]
    return np.array(idx)


def _embedding_matrix(embeddings):
    if embeddings is None:
        return None
    return np.asarray(getattr(embeddings, "matrix", embeddings), dtype=np.float64)


def as_tensors(params, tape=None):
    if tape is None:
        return {k: ad.Tensor(v) for k, v in params.items()}
    return {k: tape.param(k, v) for k, v in params.items()}


# ----------------------------------------------------------------- encoder

@dataclass
class Encoded:
    mu: ad.Tensor
    log_sigma: ad.Tensor
    log_alpha: ad.Tensor = None
    log_beta: ad.Tensor = None

    @property
    def alpha(self):
        return ad.exp(self.log_alpha)

    @property
    def beta(self):
        return ad.exp(self.log_beta)


def _affine(x, P, w, b):
    return ad.matmul(x, P[w]) + P[b]


def encode(X, P, config):
    """Map a ``B x V`` count matrix to (mu, log sigma, log alpha, log beta)."""
    X = ad.as_tensor(X)
    if X.ndim == 1:
        X = ad.reshape(X, (1, -1))
    x = X.data
    if np.any(x < 0):
        raise DataError("bag-of-words counts must be non-negative")
    if np.any(x.sum(axis=1) <= 0):
        raise DataError("all-zero document")
    pi = ad.softplus(_affine(X, P, "enc.W1", "enc.b1"))
    mu = _affine(pi, P, "enc.Wmu", "enc.bmu")
    log_sigma = ad.clip(_affine(pi, P, "enc.Wls", "enc.bls"), lo=LOG_SIGMA_FLOOR)
    if not config.use_controller:
        return Encoded(mu, log_sigma)
    phi = ad.softplus(_affine(X, P, "ctl.W1", "ctl.b1"))
    log_alpha = ad.clip(_affine(phi, P, "ctl.Wa", "ctl.ba"), LOG_SHAPE_MIN, LOG_SHAPE_MAX)
    log_beta = ad.clip(_affine(phi, P, "ctl.Wb", "ctl.bb"), LOG_SHAPE_MIN, LOG_SHAPE_MAX)
    return Encoded(mu, log_sigma, log_alpha, log_beta)


# ------------------------------------------------------ document posterior

@dataclass
class DocNoise:
    """All randomness consumed by one forward pass, kept for exact replay."""
    eps: np.ndarray
    alpha: GammaNoise = None
    beta: GammaNoise = None


def draw_noise(enc, rngs):
    """Draw per-document noise; ``rngs`` holds one stream per row.

    Each stream yields the Gaussian noise first, then the Gamma noise for
    alpha and for beta, so a document's draws do not depend on its batch.
    """
    B, n = enc.mu.shape
    if len(rngs) != B:
        raise ValueError("need one random stream per document")
    eps = np.empty((B, n))
    if enc.log_alpha is None:
        for i, rng in enumerate(rngs):
            eps[i] = rng.generator.standard_normal(n)
        return DocNoise(eps)
    a = np.exp(enc.log_alpha.data)
    b = np.exp(enc.log_beta.data)
    K = a.shape[1]
    ae, ar, be, br = (np.empty((B, K)) for _ in range(4))
    trials = 0
    for i, rng in enumerate(rngs):
        eps[i] = rng.generator.standard_normal(n)
        na = draw_gamma_noise(a[i], rng)
        nb = draw_gamma_noise(b[i], rng)
        ae[i], ar[i], be[i], br[i] = na.eps, na.rho, nb.eps, nb.rho
        trials += na.trials + nb.trials
    return DocNoise(eps, GammaNoise(ae, ar, trials), GammaNoise(be, br, 0))


@dataclass
class DocPosterior:
    mu: ad.Tensor
    sigma: ad.Tensor
    h: ad.Tensor
    theta_prime: ad.Tensor
    log_lambda: ad.Tensor
    theta: ad.Tensor
    alpha: ad.Tensor = None
    beta: ad.Tensor = None

    @property
    def lam(self):
        return None if self.log_lambda is None else ad.exp(self.log_lambda)


def sample_document_topics(enc, P, config, noise=None, mode="sample", log_lambda=None):
    """theta' from the reparameterised Gaussian, lambda from the Beta
    controller, theta = normalise(theta' * lambda).

    ``mode="mean"`` uses zero Gaussian noise and the Beta mean for lambda.
    ``log_lambda`` (array) forces the controller, e.g. for ablations.
    """
    sigma = ad.exp(enc.log_sigma)
    if mode == "mean":
        h = enc.mu
    elif mode == "sample":
        if noise is None:
            raise ValueError("sampling mode needs noise")
        h = enc.mu + ad.Tensor(noise.eps) * sigma
    else:
        raise ValueError(f"unknown mode {mode!r}")
    logits = _affine(h, P, "theta.W", "theta.b")
    theta_prime = ad.softmax(logits, axis=1)

    alpha = beta = None
    if log_lambda is not None:
        log_lam = ad.as_tensor(log_lambda)
    elif enc.log_alpha is None:
        log_lam = None
    else:
        alpha, beta = enc.alpha, enc.beta
        if mode == "mean":
            # log(a / (a + b)) = -softplus(log b - log a)
            log_lam = ad.neg(ad.softplus(enc.log_beta - enc.log_alpha))
        else:
            log_lam = log_beta_from_noise(alpha, beta, noise.alpha, noise.beta)

    if log_lam is None:
        theta = theta_prime
    elif config.renormalize_theta:
        # normalise(theta' * lambda) == softmax(logits + log lambda)
        theta = ad.softmax(logits + log_lam, axis=1)
    else:
        theta = theta_prime * ad.exp(log_lam)
    return DocPosterior(enc.mu, sigma, h, theta_prime, log_lam, theta, alpha, beta)


# ----------------------------------------------------------------- decoder

def _diag_gaussian_logpdf(emb, mu, log_sigma):
    """``P x V`` log N(WE_i; mu_p, diag(sigma_p^2)) for P Gaussians."""
    WE = emb
    r = WE.shape[1]
    inv_var = ad.exp(ad.scale(log_sigma, -2.0))
    quad = (ad.matmul(inv_var, ad.Tensor((WE * WE).T))
            - ad.scale(ad.matmul(mu * inv_var, ad.Tensor(WE.T)), 2.0)
            + ad.reduce_sum(mu * mu * inv_var, axis=1, keepdims=True))
    half_logdet = ad.reduce_sum(log_sigma, axis=1, keepdims=True)
    return ad.scale(quad, -0.5) - half_logdet - 0.5 * r * LOG_2PI


def topic_log_density(P, emb, config):
    """Unnormalised ``K x V`` log density of each topic at every word embedding.

    For the mixture decoder this is log sum_m tau_km N(WE_i; mu_km, Sigma_km).
    """
    if config.decoder == "free":
        raise ValueError("the free decoder has no densities")
    emb = _embedding_matrix(emb)
    r = emb.shape[1]
    mu, logsig = P["dec.mu"], P["dec.logsig"]
    if mu.shape[-1] != r:
        raise ShapeError(f"decoder dimension {mu.shape[-1]} != embedding dimension {r}")
    logsig = ad.clip(logsig, lo=LOG_SIGMA_FLOOR)
    if config.decoder == "gd":
        return _diag_gaussian_logpdf(emb, mu, logsig)
    K, M, _ = mu.shape
    comp = _diag_gaussian_logpdf(emb, ad.reshape(mu, (K * M, r)), ad.reshape(logsig, (K * M, r)))
    comp = ad.reshape(comp, (K, M, -1))
    tau = P["dec.tau"]
    log_tau = ad.reshape(ad.log_softmax(tau, axis=1), (tau.shape[0], M, 1))
    return ad.logsumexp(comp + log_tau, axis=1)


def topic_word_log_matrix(P, emb, config):
    """``K x V`` log TW, each row normalised over the vocabulary."""
    if config.decoder == "free":
        return ad.log_softmax(P["dec.logits"], axis=1)
    dens = topic_log_density(P, emb, config)
    if not np.all(np.isfinite(dens.data)):
        raise DivergenceError("non-finite topic density", term="decoder")
    return ad.log_softmax(dens, axis=1)


def topic_word_matrix(params, emb, config):
    """Row-stochastic ``K x V`` topic-word matrix as a numpy array."""
    P = as_tensors(params)
    return np.exp(topic_word_log_matrix(P, emb, config).data)


def tau_weights(params, config):
    """Mixture weights ``K x M`` (softmax of the stored logits)."""
    t = params["dec.tau"]
    e = np.exp(t - t.max(axis=1, keepdims=True))
    w = e / e.sum(axis=1, keepdims=True)
    return np.broadcast_to(w, (config.n_topics, w.shape[1])).copy()


# --------------------------------------------------------------- objective

def reconstruction_log_likelihood(X, theta, log_tw):
    """Per-document sum_i x_i log(sum_k theta_k TW_ki), probabilities floored."""
    X = ad.as_tensor(X)
    if X.ndim == 1:
        X = ad.reshape(X, (1, -1))
    theta = ad.as_tensor(theta)
    if theta.ndim == 1:
        theta = ad.reshape(theta, (1, -1))
    p = ad.matmul(theta, ad.exp(log_tw))
    return ad.reduce_sum(X * ad.log(ad.clip(p, lo=PROB_FLOOR)), axis=1)


def kl_gaussian(mu, log_sigma):
    """KL(N(mu, diag sigma^2) || N(0, I)) summed over the last axis."""
    mu, log_sigma = ad.as_tensor(mu), ad.as_tensor(log_sigma)
    inner = ad.square(mu) + ad.exp(ad.scale(log_sigma, 2.0)) - ad.scale(log_sigma, 2.0) - 1.0
    return ad.scale(ad.reduce_sum(inner, axis=-1), 0.5)


def kl_beta(alpha, beta, alpha_prime=0.5, beta_prime=0.5):
    """KL(Beta(alpha, beta) || Beta(alpha', beta')) summed over the last axis."""
    a, b = ad.as_tensor(alpha), ad.as_tensor(beta)
    ab = a + b
    log_delta_q = ad.lgamma(a) + ad.lgamma(b) - ad.lgamma(ab)
    log_delta_p = float(log_beta_fn(alpha_prime, beta_prime))
    psi_a, psi_b, psi_ab = ad.digamma(a), ad.digamma(b), ad.digamma(ab)
    da = alpha_prime - a
    db = beta_prime - b
    per_topic = (log_delta_p - log_delta_q - da * psi_a - db * psi_b + (da + db) * psi_ab)
    return ad.reduce_sum(per_topic, axis=-1)


@dataclass
class ElboTerms:
    loss: ad.Tensor
    recon: ad.Tensor
    kl_gauss: ad.Tensor
    kl_beta: ad.Tensor
    posterior: DocPosterior

    def summary(self):
        return {"loss": float(self.loss.data),
                "recon": float(np.mean(self.recon.data)),
                "kl_gauss": float(np.mean(self.kl_gauss.data)),
                "kl_beta": float(np.mean(self.kl_beta.data))}


def elbo_terms(X, P, emb, config, noise=None, mode="sample", log_lambda=None,
               beta_kl_weight=None):
    """Negative ELBO (mean over the batch) and its parts.

    One Monte-Carlo sample of (theta, lambda) per document, given by ``noise``.
    """
    X = ad.as_tensor(X)
    if X.ndim == 1:
        X = ad.reshape(X, (1, -1))
    w = config.beta_kl_weight if beta_kl_weight is None else beta_kl_weight
    enc = encode(X, P, config)
    _require_finite("encoder", enc.mu, enc.log_sigma, enc.log_alpha, enc.log_beta)
    try:
        post = sample_document_topics(enc, P, config, noise, mode, log_lambda)
    except DomainError as exc:
        raise DivergenceError(f"document topics: {exc}", term="theta") from None
    _require_finite("theta", post.theta)
    if config.decoder == "free":
        _require_finite("decoder", P["dec.logits"])
    log_tw = topic_word_log_matrix(P, emb, config)
    recon = reconstruction_log_likelihood(X, post.theta, log_tw)
    klg = kl_gaussian(enc.mu, enc.log_sigma)
    if enc.log_alpha is not None and w != 0.0:
        klb = kl_beta(post.alpha, post.beta, config.alpha_prime, config.beta_prime)
        neg_bound = recon - klg - ad.scale(klb, w)
    else:
        klb = ad.Tensor(np.zeros(recon.shape))
        neg_bound = recon - klg
    loss = ad.neg(ad.mean(neg_bound))
    return ElboTerms(loss, recon, klg, klb, post)


def elbo(X, params, emb, config, rng=None, noise=None):
    """Negative ELBO of a batch as a float (no gradients)."""
    P = as_tensors(params)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if noise is None:
        enc = encode(X, P, config)
        rng = rng or RngStream(config.seed, stream_id(STREAM_EVAL))
        noise = draw_noise(enc, [rng] * X.shape[0])
    return float(elbo_terms(X, P, emb, config, noise).loss.data)


def loss_and_grads(params, X, emb, config, noise=None, rngs=None, **kw):
    """Forward + backward. Draws noise from ``rngs`` when ``noise`` is None.

    Returns ``(terms, grads, noise)``.
    """
    tape = ad.Tape()
    P = as_tensors(params, tape)
    if noise is None:
        enc = encode(X, P, config)
        _require_finite("encoder", enc.mu, enc.log_sigma, enc.log_alpha, enc.log_beta)
        noise = draw_noise(enc, rngs)
    terms = elbo_terms(X, P, emb, config, noise, **kw)
    _check_finite(terms)
    grads = ad.backward(tape, terms.loss)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise DivergenceError(f"non-finite gradient for {name}", term=f"grad:{name}")
    return terms, grads, noise


def _require_finite(term, *tensors):
    for t in tensors:
        if t is not None and not np.all(np.isfinite(t.data)):
            raise DivergenceError(f"non-finite values in the {term}", term=term)


def _check_finite(terms, step=None):
    for name in ("recon", "kl_gauss", "kl_beta"):
        if not np.all(np.isfinite(getattr(terms, name).data)):
            raise DivergenceError(f"non-finite {name} term at step {step}", term=name, step=step)
    if not np.isfinite(terms.loss.data):
        raise DivergenceError(f"non-finite loss at step {step}", term="loss", step=step)


# ---------------------------------------------------------------- training

@dataclass
class TrainResult:
    params: dict
    adam: ad.AdamState
    trace: list = field(default_factory=list)
    epochs_run: int = 0
    stopped_early: bool = False
    val_trace: list = field(default_factory=list)


def doc_streams(seed, epoch, rows):
    return [RngStream(seed, stream_id(STREAM_DOC, epoch, int(i))) for i in rows]


def train(corpus, config, embeddings=None, rng=None, params=None, adam=None,
          start_epoch=0, on_epoch_end=None, val_corpus=None):
    """Minibatch Adam on the mean per-document negative ELBO.

    Every random quantity is drawn from a stream keyed by (seed, epoch,
    document), so a run is reproducible and can be resumed at any epoch
    boundary from ``params``/``adam``. ``on_epoch_end(epoch, result)`` is
    called after each epoch (checkpointing hook).
    """
    if corpus.D == 0:
        raise DataError("cannot train on an empty corpus")
    seed = config.seed if rng is None else rng.seed
    emb = _embedding_matrix(embeddings)
    if params is None:
        params = init_params(config, corpus.V, emb, seed)
    if adam is None:
        adam = ad.AdamState.zeros_like(params)
    result = TrainResult(params, adam)
    step = adam.t
    best_val, worse, best_params = math.inf, 0, None

    for epoch in range(start_epoch, config.epochs):
        if config.max_steps is not None and step >= config.max_steps:
            break
        order = RngStream(seed, stream_id(STREAM_SHUFFLE, epoch)).generator.permutation(corpus.D)
        for start in range(0, corpus.D, config.batch_size):
            if config.max_steps is not None and step >= config.max_steps:
                break
            rows = order[start:start + config.batch_size]
            X = corpus.dense(rows)
            try:
                terms, grads, _ = loss_and_grads(params, X, emb, config,
                                                 rngs=doc_streams(seed, epoch, rows))
            except DivergenceError as exc:
                exc.step = step
                log.error("divergence at step %d (epoch %d): %s", step, epoch, exc)
                raise
            ad.adam_step(params, grads, adam, config.lr)
            step += 1
            rec = {"step": step, "epoch": epoch}
            rec.update(terms.summary())
            result.trace.append(rec)
        result.epochs_run = epoch + 1
        if val_corpus is not None and config.patience > 0:
            val = mean_negative_bound(val_corpus, params, emb, config)
            result.val_trace.append(val)
            if val < best_val:
                best_val, worse = val, 0
                best_params = {k: v.copy() for k, v in params.items()}
            else:
                worse += 1
        if on_epoch_end is not None:
            on_epoch_end(epoch, result)
        if val_corpus is not None and config.patience > 0 and worse >= config.patience:
            log.info("early stop after epoch %d: validation bound worsened %d epochs", epoch, worse)
            params.update(best_params)
            result.stopped_early = True
            break
    return result


# --------------------------------------------------------------- inference

def _chunks(n, size=1024):
    for s in range(0, n, size):
        yield range(s, min(n, s + size))


def infer_theta(X, params, config, mode="mean", rng=None):
    """Document-topic vectors as a numpy array.

    ``mean``: zero Gaussian noise and lambda at its Beta mean (deterministic).
    ``sampled``: one draw per document.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    P = as_tensors(params)
    out = []
    for rows in _chunks(X.shape[0]):
        Xc = X[rows.start:rows.stop]
        enc = encode(Xc, P, config)
        if mode == "mean":
            post = sample_document_topics(enc, P, config, mode="mean")
        elif mode == "sampled":
            rng = rng or RngStream(config.seed, stream_id(STREAM_EVAL))
            noise = draw_noise(enc, [rng] * Xc.shape[0])
            post = sample_document_topics(enc, P, config, noise)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        out.append(post.theta.data)
    return np.concatenate(out, axis=0)


def document_bounds(X, params, emb, config):
    """Per-document (recon, kl_gauss, kl_beta) at the mean-mode posterior."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    P = as_tensors(params)
    log_tw = topic_word_log_matrix(P, emb, config)
    recon, klg, klb = [], [], []
    for rows in _chunks(X.shape[0]):
        Xc = X[rows.start:rows.stop]
        enc = encode(Xc, P, config)
        post = sample_document_topics(enc, P, config, mode="mean")
        recon.append(reconstruction_log_likelihood(Xc, post.theta, log_tw).data)
        klg.append(kl_gaussian(enc.mu, enc.log_sigma).data)
        if enc.log_alpha is not None:
            klb.append(kl_beta(post.alpha, post.beta, config.alpha_prime, config.beta_prime).data)
        else:
            klb.append(np.zeros(Xc.shape[0]))
    return np.concatenate(recon), np.concatenate(klg), np.concatenate(klb)


def mean_negative_bound(corpus, params, emb, config):
    recon, klg, klb = document_bounds(corpus.dense(), params, emb, config)
    return float(np.mean(-(recon - klg - klb)))
