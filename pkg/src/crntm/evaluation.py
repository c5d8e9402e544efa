"""Held-out perplexity, NPMI coherence, downstream classification accuracy,
and topic / centroid exports."""
import json
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from . import model
from .errors import DataError, DivergenceError
from .samplers import STREAM_CLASSIFY, RngStream, stream_id

NPMI_CUTOFFS = (5, 10, 15)


# -------------------------------------------------------------- perplexity

def perplexity_from_bounds(log_liks, lengths):
    """exp(-(1/D) sum_d log p(x_d) / N_d)."""
    log_liks = np.asarray(log_liks, dtype=np.float64)
    lengths = np.asarray(lengths, dtype=np.float64)
    per_word = log_liks / lengths
    if not np.all(np.isfinite(per_word)):
        raise DivergenceError("non-finite document likelihood in perplexity", term="perplexity")
    return float(np.exp(-np.mean(per_word)))


def perplexity(corpus, params, emb, config):
    """Test perplexity with each document's log-likelihood replaced by its
    variational bound at the mean-mode posterior."""
    if corpus.D == 0:
        raise DataError("perplexity needs a non-empty corpus")
    recon, klg, klb = model.document_bounds(corpus.dense(), params, emb, config)
    return perplexity_from_bounds(recon - klg - klb, corpus.lengths)


def unigram_perplexity(train, test, smoothing=1.0):
    """Baseline: one smoothed unigram distribution fitted on ``train``."""
    counts = train.dense().sum(axis=0) + smoothing
    logp = np.log(counts / counts.sum())
    X = test.dense()
    return perplexity_from_bounds(X @ logp, test.lengths)


# --------------------------------------------------------------------- NPMI

@dataclass
class CoocIndex:
    """Document-level word and word-pair frequencies of a reference corpus."""
    doc_count: int
    word_doc_freq: np.ndarray
    pair_doc_freq: sp.csr_matrix  # strictly upper triangular

    @classmethod
    def from_corpus(cls, corpus):
        rows, cols = [], []
        for r, d in enumerate(corpus.docs):
            rows.extend([r] * d.indices.size)
            cols.extend(d.indices.tolist())
        B = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(corpus.D, corpus.V))
        word = np.asarray(B.sum(axis=0)).ravel()
        pairs = sp.triu(B.T @ B, k=1).tocsr()
        pairs.eliminate_zeros()
        return cls(corpus.D, word, pairs)

    def pair(self, i, j):
        if i == j:
            return float(self.word_doc_freq[i])
        if i > j:
            i, j = j, i
        return float(self.pair_doc_freq[i, j])


def npmi_pair(ci, cj, cij, doc_count, smoothing=1.0):
    """NPMI of two words from document counts, clipped to [-1, 1]."""
    joint = cij + smoothing
    if ci <= 0 or cj <= 0 or joint <= 0:
        return -1.0
    p_i, p_j, p_ij = ci / doc_count, cj / doc_count, joint / doc_count
    if p_ij >= 1.0:
        return 1.0
    value = math.log(p_ij / (p_i * p_j)) / -math.log(p_ij)
    return min(1.0, max(-1.0, value))


def topic_npmi(words, cooc, smoothing=1.0):
    """Mean NPMI over all pairs of ``words`` (vocabulary indices)."""
    scores = [npmi_pair(cooc.word_doc_freq[i], cooc.word_doc_freq[j], cooc.pair(i, j),
                        cooc.doc_count, smoothing)
              for i, j in combinations(words, 2)]
    return float(np.mean(scores))


def npmi_scores(top_words_per_topic, cooc, cutoffs=NPMI_CUTOFFS, smoothing=1.0):
    """``{cutoff: mean NPMI over topics}`` using each topic's top ``cutoff`` words."""
    out = {}
    for T in cutoffs:
        per_topic = []
        for words in top_words_per_topic:
            if len(words) < T:
                raise ValueError(f"cutoff {T} exceeds the {len(words)} ranked words available")
            per_topic.append(topic_npmi(list(words[:T]), cooc, smoothing))
        out[T] = float(np.mean(per_topic))
    return out


def npmi(top_words_per_topic, cooc, cutoffs=NPMI_CUTOFFS, smoothing=1.0):
    """Coherence averaged over topics and over the cutoffs."""
    return float(np.mean(list(npmi_scores(top_words_per_topic, cooc, cutoffs, smoothing).values())))


# ----------------------------------------------------------------- top words

def top_words(tw, k, n):
    """Indices of the ``n`` largest entries of row ``k``; ties go to the lower index."""
    row = np.asarray(tw)[k]
    if n > row.size:
        raise ValueError(f"n={n} exceeds vocabulary size {row.size}")
    return np.argsort(-row, kind="stable")[:n].tolist()


def all_top_words(tw, n):
    return [top_words(tw, k, n) for k in range(np.asarray(tw).shape[0])]


# ------------------------------------------------------------ classification

def _glorot(gen, fan_in, fan_out):
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return gen.uniform(-bound, bound, size=(fan_in, fan_out))


def classify(train_x, train_y, test_x, test_y, hidden=100, epochs=200, lr=1e-3,
             batch_size=200, seed=0):
    """Accuracy of a one-hidden-layer softplus MLP trained on topic features.

    Trained with Adam on softmax cross-entropy, minibatches reshuffled each
    epoch from a seeded stream.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    test_x = np.asarray(test_x, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.int64)
    test_y = np.asarray(test_y, dtype=np.int64)
    if train_x.shape[1] != test_x.shape[1]:
        raise DataError("train and test features differ in width")
    if len(train_x) != len(train_y) or len(test_x) != len(test_y):
        raise DataError("features and labels differ in length")
    classes = np.unique(train_y)
    missing = np.setdiff1d(np.unique(test_y), classes)
    if missing.size:
        raise DataError(f"test labels {missing.tolist()} never occur in training labels")
    L = int(classes.max()) + 1
    gen = RngStream(seed, stream_id(STREAM_CLASSIFY)).generator
    F = train_x.shape[1]
    params = {"W1": _glorot(gen, F, hidden), "b1": np.zeros((1, hidden)),
              "W2": _glorot(gen, hidden, L), "b2": np.zeros((1, L))}
    adam = ad.AdamState.zeros_like(params)
    onehot = np.eye(L)[train_y]
    for epoch in range(epochs):
        order = gen.permutation(len(train_x))
        for s in range(0, len(order), batch_size):
            rows = order[s:s + batch_size]
            tape = ad.Tape()
            P = {k: tape.param(k, v) for k, v in params.items()}
            logits = _mlp(ad.Tensor(train_x[rows]), P)
            loss = ad.neg(ad.mean(ad.reduce_sum(ad.Tensor(onehot[rows]) * ad.log_softmax(logits, 1), 1)))
            ad.adam_step(params, ad.backward(tape, loss), adam, lr)
    pred = np.argmax(_mlp(ad.Tensor(test_x), {k: ad.Tensor(v) for k, v in params.items()}).data, 1)
    return float(np.mean(pred == test_y))


def _mlp(x, P):
    h = ad.softplus(ad.matmul(x, P["W1"]) + P["b1"])
    return ad.matmul(h, P["W2"]) + P["b2"]


# ------------------------------------------------------------------ reports

@dataclass
class MetricsReport:
    perplexity: float
    npmi: float
    accuracy: float
    npmi_by_cutoff: dict = field(default_factory=dict)
    top_words: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def validate(self):
        if not (self.perplexity > 0 and math.isfinite(self.perplexity)):
            raise ValueError(f"perplexity out of range: {self.perplexity}")
        if not -1.0 <= self.npmi <= 1.0:
            raise ValueError(f"npmi out of range: {self.npmi}")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy out of range: {self.accuracy}")
        return self

    def to_json(self):
        d = asdict(self)
        d["npmi_by_cutoff"] = {str(k): v for k, v in self.npmi_by_cutoff.items()}
        return json.dumps(d, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        d["npmi_by_cutoff"] = {int(k): v for k, v in d["npmi_by_cutoff"].items()}
        return cls(**d)


def evaluate(train, test, params, emb, config, n_top=10):
    """All three metrics for a trained model."""
    tw = model.topic_word_matrix(params, emb, config)
    ranked = all_top_words(tw, max(NPMI_CUTOFFS))
    cooc = CoocIndex.from_corpus(train)
    by_cutoff = npmi_scores(ranked, cooc)
    ppl = perplexity(test, params, emb, config)
    feats_train = model.infer_theta(train.dense(), params, config, mode="mean")
    feats_test = model.infer_theta(test.dense(), params, config, mode="mean")
    acc = classify(feats_train, train.labels, feats_test, test.labels,
                   hidden=config.classifier_hidden, epochs=config.classifier_epochs,
                   lr=config.classifier_lr, seed=config.seed)
    words = [[train.vocab[i] for i in row[:n_top]] for row in ranked]
    return MetricsReport(ppl, float(np.mean(list(by_cutoff.values()))), acc, by_cutoff, words,
                         {"decoder": config.decoder, "K": config.n_topics,
                          "M": config.n_components if config.decoder == "gmd" else None,
                          "D_test": test.D}).validate()


# ------------------------------------------------------------------ exports

def topic_records(tw, vocab, n):
    if n > len(vocab):
        raise ValueError(f"n={n} exceeds vocabulary size {len(vocab)}")
    tw = np.asarray(tw)
    return [{"topic": k, "words": [vocab[i] for i in top_words(tw, k, n)],
             "probs": [float(tw[k, i]) for i in top_words(tw, k, n)]}
            for k in range(tw.shape[0])]


def format_topics(records):
    return "\n".join(f"T{r['topic']}: " + " ".join(r["words"]) for r in records) + "\n"


def centroid_records(params, config):
    """Topic centroids (and mixture weights) for external visualisation.

    Returns None for the free decoder, which has no centroids.
    """
    if config.decoder == "free":
        return None
    mu = params["dec.mu"]
    sigma = np.exp(np.maximum(params["dec.logsig"], model.LOG_SIGMA_FLOOR))
    if config.decoder == "gd":
        mu, sigma = mu[:, None, :], sigma[:, None, :]
        weights = np.ones((mu.shape[0], 1))
    else:
        weights = model.tau_weights(params, config)
    out = []
    for k in range(mu.shape[0]):
        for m in range(mu.shape[1]):
            out.append({"topic": k, "component": m, "weight": float(weights[k, m]),
                        "mu": mu[k, m].tolist(), "sigma": sigma[k, m].tolist()})
    return out
