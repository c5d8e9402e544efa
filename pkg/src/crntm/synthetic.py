"""Planted-topic corpora: Gaussian topics over a synthetic embedding space.

Words sit in clusters around K well-separated centres; topic k's word
distribution is a normalised Gaussian density evaluated at every word
embedding, so the generating family is exactly the Gaussian decoder's.
"""
import string
from dataclasses import dataclass
from itertools import product

import numpy as np

from .data import Corpus, Document

_LETTERS = string.ascii_lowercase


@dataclass
class PlantedCorpus:
    train: Corpus
    test: Corpus
    embeddings: np.ndarray
    topic_word: np.ndarray
    centres: np.ndarray
    scales: np.ndarray


def pseudo_words(n, length=4):
    """``n`` distinct alphabetic tokens such as ``kaab``, ``kaac``..."""
    out = []
    for tail in product(_LETTERS, repeat=length - 1):
        out.append("k" + "".join(tail))
        if len(out) == n:
            return out
    raise ValueError(f"cannot build {n} words of length {length}")


def gaussian_topic_word(emb, centres, scales):
    """Row-normalised densities of N(c_k, s_k^2 I) at each embedding row."""
    d2 = ((emb[None, :, :] - centres[:, None, :]) ** 2).sum(-1)
    logp = -0.5 * d2 / scales[:, None] ** 2
    logp -= logp.max(axis=1, keepdims=True)
    p = np.exp(logp)
    return p / p.sum(axis=1, keepdims=True)


def planted_corpus(n_train=2000, n_test=500, vocab_size=250, n_topics=5, dim=10,
                   centre_spread=4.0, word_spread=1.0, topic_scale=1.0,
                   doc_len=(20, 40), concentration=0.3, seed=0):
    """Sample a corpus from planted Gaussian topics.

    Each document draws topic proportions from a symmetric Dirichlet and
    a length uniformly from ``doc_len``; its label is the dominant topic.
    """
    gen = np.random.default_rng(seed)
    centres = centre_spread * gen.standard_normal((n_topics, dim))
    owner = np.arange(vocab_size) % n_topics
    emb = centres[owner] + word_spread * gen.standard_normal((vocab_size, dim))
    scales = np.full(n_topics, float(topic_scale))
    tw = gaussian_topic_word(emb, centres, scales)
    vocab = pseudo_words(vocab_size)

    def sample(n, tag):
        docs = []
        for d in range(n):
            theta = gen.dirichlet(np.full(n_topics, concentration))
            length = int(gen.integers(doc_len[0], doc_len[1] + 1))
            counts = gen.multinomial(length, theta @ tw)
            idx = np.flatnonzero(counts)
            docs.append(Document(idx.astype(np.int64), counts[idx].astype(np.int64),
                                 int(np.argmax(theta)), f"{tag}{d}"))
        return Corpus(vocab, docs, [f"topic{k}" for k in range(n_topics)], tag)

    return PlantedCorpus(sample(n_train, "train"), sample(n_test, "test"), emb, tw,
                         centres, scales)


def tv_distance(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def greedy_match(learned, planted):
    """Pair each planted topic with a distinct learned topic, closest first.

    Returns ``(pairs, distances)`` where ``pairs`` is a list of
    (planted, learned) indices; requires at least as many learned topics.
    """
    learned, planted = np.asarray(learned), np.asarray(planted)
    if learned.shape[0] < planted.shape[0]:
        raise ValueError("need at least as many learned as planted topics")
    D = 0.5 * np.abs(planted[:, None, :] - learned[None, :, :]).sum(-1)
    pairs, dists = [], []
    free_p, free_l = set(range(D.shape[0])), set(range(D.shape[1]))
    for flat in np.argsort(D, axis=None, kind="stable"):
        i, j = divmod(int(flat), D.shape[1])
        if i in free_p and j in free_l:
            pairs.append((i, j))
            dists.append(float(D[i, j]))
            free_p.discard(i)
            free_l.discard(j)
            if not free_p:
                break
    return pairs, dists


def to_labeled_text(corpus, rng=None):
    """Render a corpus as ``label<TAB>text`` lines (tokens in shuffled order)."""
    lines = []
    for d in corpus.docs:
        toks = np.repeat(np.array(corpus.vocab, dtype=object)[d.indices], d.counts)
        if rng is not None:
            toks = rng.permutation(toks)
        lines.append(f"{corpus.label_names[d.label]}\t{' '.join(toks)}")
    return "\n".join(lines) + "\n"
