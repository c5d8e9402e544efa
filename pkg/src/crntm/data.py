"""Corpus ingestion: tokenising, vocabulary selection, bag-of-words records,
pre-trained embedding alignment and minibatching.

Raw corpora are read one document per line as ``label<TAB>text``.
"""
import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DataError
from .samplers import STREAM_OOV, RngStream, stream_id

log = logging.getLogger(__name__)

CORPUS_FORMAT = "crntm-corpus"
CORPUS_VERSION = 1
_TOKEN_RE = re.compile(r"[a-z]+")


@dataclass(frozen=True)
class Document:
    indices: np.ndarray
    counts: np.ndarray
    label: int
    doc_id: str

    @property
    def length(self):
        return int(self.counts.sum())


@dataclass
class Corpus:
    vocab: list
    docs: list
    label_names: list
    split: str = "train"
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        V, L = len(self.vocab), len(self.label_names)
        for d in self.docs:
            if d.counts.size == 0 or d.counts.sum() < 1:
                raise DataError(f"document {d.doc_id} has no retained tokens")
            if d.indices.size and d.indices.max() >= V:
                raise DataError(f"document {d.doc_id} indexes outside the vocabulary")
            if not 0 <= d.label < max(L, 1):
                raise DataError(f"document {d.doc_id} has label id {d.label} >= L={L}")

    @property
    def V(self):
        return len(self.vocab)

    @property
    def D(self):
        return len(self.docs)

    @property
    def L(self):
        return len(self.label_names)

    @property
    def total_tokens(self):
        return int(sum(d.length for d in self.docs))

    @property
    def avg_length(self):
        return self.total_tokens / self.D

    @property
    def labels(self):
        return np.array([d.label for d in self.docs], dtype=np.int64)

    @property
    def lengths(self):
        return np.array([d.length for d in self.docs], dtype=np.float64)

    @property
    def word_index(self):
        if self._index is None:
            self._index = {w: i for i, w in enumerate(self.vocab)}
        return self._index

    def vocab_hash(self):
        return vocab_hash(self.vocab)

    def dense(self, rows=None):
        """Dense ``len(rows) x V`` count matrix."""
        rows = range(self.D) if rows is None else rows
        rows = list(rows)
        out = np.zeros((len(rows), self.V))
        for r, i in enumerate(rows):
            d = self.docs[i]
            out[r, d.indices] = d.counts
        return out

    def subset(self, rows, split=None):
        return Corpus(self.vocab, [self.docs[i] for i in rows], self.label_names,
                      split or self.split)

    def stats(self):
        return {"split": self.split, "D": self.D, "V": self.V,
                "AvgD": round(self.avg_length, 4), "L": self.L}


def vocab_hash(vocab):
    return hashlib.sha256("\n".join(vocab).encode("utf-8")).hexdigest()


def tokenize(text, min_len=2):
    """Lowercase and split on non-alphabetic characters."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= min_len]


def load_stopwords(path=None):
    if path is None:
        text = resources.files("crntm").joinpath("stopwords.txt").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return {w.strip().lower() for w in text.split() if w.strip()}


def read_labeled_lines(path):
    """Read ``label<TAB>text`` lines into a list of (label, text)."""
    out = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for n, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise DataError(f"{path}:{n}: expected 'label<TAB>text'")
            label, text = line.split("\t", 1)
            out.append((label.strip(), text))
    return out


def _bow(tokens, index):
    ids = [index[t] for t in tokens if t in index]
    if not ids:
        return None
    idx, cnt = np.unique(np.array(ids, dtype=np.int64), return_counts=True)
    return idx, cnt.astype(np.int64)


def preprocess(raw, stopwords=(), vocab_size=2000, min_token_len=2, split="train"):
    """Build a corpus and its vocabulary from ``(label, text)`` pairs.

    Words are ranked by corpus frequency (ties broken lexicographically)
    after stopword removal and the top ``vocab_size`` are kept; documents
    left without any kept word are dropped.
    """
    if vocab_size < 1:
        raise ValueError("vocab_size must be >= 1")
    if not raw:
        raise DataError("empty input corpus")
    stop = set(stopwords)
    tokenized = [[t for t in tokenize(text, min_token_len) if t not in stop] for _, text in raw]
    freq = {}
    for toks in tokenized:
        for t in toks:
            freq[t] = freq.get(t, 0) + 1
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    vocab = [w for w, _ in ranked[:vocab_size]]
    label_names = sorted({lab for lab, _ in raw})
    return _build(raw, tokenized, vocab, label_names, split)


def apply_vocab(raw, vocab, label_names, stopwords=(), min_token_len=2, split="test"):
    """Encode another split with an existing vocabulary and label set."""
    if not raw:
        raise DataError("empty input corpus")
    known = set(label_names)
    unknown = sorted({lab for lab, _ in raw} - known)
    if unknown:
        raise DataError(f"labels not seen in training split: {unknown[:5]}")
    stop = set(stopwords)
    tokenized = [[t for t in tokenize(text, min_token_len) if t not in stop] for _, text in raw]
    return _build(raw, tokenized, list(vocab), list(label_names), split)


def _build(raw, tokenized, vocab, label_names, split):
    index = {w: i for i, w in enumerate(vocab)}
    label_id = {lab: i for i, lab in enumerate(label_names)}
    docs = []
    for n, ((label, _), toks) in enumerate(zip(raw, tokenized)):
        bow = _bow(toks, index)
        if bow is None:
            continue
        docs.append(Document(bow[0], bow[1], label_id[label], str(n)))
    if not docs:
        raise DataError("corpus is empty after filtering")
    dropped = len(raw) - len(docs)
    if dropped:
        log.info("%s: dropped %d empty documents", split, dropped)
    return Corpus(vocab, docs, label_names, split)


# ----------------------------------------------------------------- caching

def corpus_to_json(corpus):
    payload = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "split": corpus.split,
        "vocab": corpus.vocab,
        "label_names": corpus.label_names,
        "docs": [{"id": d.doc_id, "label": d.label, "idx": d.indices.tolist(),
                  "cnt": d.counts.tolist()} for d in corpus.docs],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_corpus(corpus, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(corpus_to_json(corpus))
        fh.write("\n")


def load_corpus(path):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != CORPUS_FORMAT:
        raise DataError(f"{path}: not a corpus cache")
    if payload.get("version") != CORPUS_VERSION:
        raise DataError(f"{path}: unsupported cache version {payload.get('version')}")
    docs = [Document(np.array(d["idx"], dtype=np.int64), np.array(d["cnt"], dtype=np.int64),
                     int(d["label"]), d["id"]) for d in payload["docs"]]
    return Corpus(payload["vocab"], docs, payload["label_names"], payload["split"])


# -------------------------------------------------------------- embeddings

@dataclass
class EmbeddingTable:
    matrix: np.ndarray
    oov_mask: np.ndarray

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[1] < 1:
            raise DataError("embedding matrix must be V x r with r > 0")
        if self.oov_mask.shape != (self.matrix.shape[0],):
            raise DataError("oov mask length must equal the row count")

    @property
    def dim(self):
        return self.matrix.shape[1]

    @property
    def n_oov(self):
        return int(self.oov_mask.sum())


def load_embeddings(path, vocab, r_expected, seed=0, oov_std=0.01):
    """Align a ``word v1 ... vr`` text file to ``vocab`` order.

    Words missing from the file get N(0, oov_std^2) rows drawn from a
    stream derived from ``seed`` and are flagged in ``oov_mask``.
    """
    if isinstance(vocab, Corpus):
        vocab = vocab.vocab
    index = {w: i for i, w in enumerate(vocab)}
    V = len(vocab)
    rng = RngStream(seed, stream_id(STREAM_OOV))
    matrix = oov_std * rng.generator.standard_normal((V, r_expected))
    oov = np.ones(V, dtype=bool)
    with open(path, encoding="utf-8", errors="replace") as fh:
        for n, line in enumerate(fh, 1):
            parts = line.rstrip("\n").rstrip().split(" ")
            if len(parts) == 1 and not parts[0]:
                continue
            if len(parts) != r_expected + 1:
                if n == 1 and len(parts) > 2:
                    raise DataError(
                        f"{path}: embedding dimension {len(parts) - 1} != expected {r_expected}")
                raise DataError(f"{path}:{n}: expected {r_expected + 1} fields, got {len(parts)}")
            i = index.get(parts[0])
            if i is None or not oov[i]:
                continue
            try:
                matrix[i] = [float(v) for v in parts[1:]]
            except ValueError as exc:
                raise DataError(f"{path}:{n}: {exc}") from None
            oov[i] = False
    table = EmbeddingTable(matrix, oov)
    log.info("embeddings: %d/%d words out of vocabulary", table.n_oov, V)
    return table


def save_embeddings_text(matrix, vocab, path):
    with open(path, "w", encoding="utf-8") as fh:
        for w, row in zip(vocab, matrix):
            fh.write(w + " " + " ".join(repr(float(v)) for v in row) + "\n")


# ----------------------------------------------------------------- batching

def bow_batches(corpus, batch_size, rng=None):
    """Yield ``(doc_indices, dense_counts)`` minibatches.

    Order is a seeded permutation when ``rng`` is given; the final partial
    batch is kept.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    order = np.arange(corpus.D) if rng is None else rng.generator.permutation(corpus.D)
    for start in range(0, corpus.D, batch_size):
        rows = order[start:start + batch_size]
        yield rows, corpus.dense(rows)
