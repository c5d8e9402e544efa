import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crntm import data
from crntm.errors import DataError
from crntm.samplers import RngStream


def test_preprocess_hand_trace():
    c = data.preprocess([("x", "a b b"), ("y", "b c")], stopwords=(), vocab_size=2, min_token_len=1)
    assert c.vocab == ["b", "a"]
    assert dict(zip(c.docs[0].indices.tolist(), c.docs[0].counts.tolist())) == {0: 2, 1: 1}
    assert dict(zip(c.docs[1].indices.tolist(), c.docs[1].counts.tolist())) == {0: 1}
    assert c.label_names == ["x", "y"] and c.labels.tolist() == [0, 1]


def test_tokenizer_rules():
    assert data.tokenize("Hello, WORLD! it's a x2y") == ["hello", "world", "it"]
    assert data.tokenize("a b", min_len=1) == ["a", "b"]


def test_stopword_only_document_dropped():
    raw = [("x", "alpha beta"), ("x", "the and of"), ("y", "beta gamma")]
    c = data.preprocess(raw, stopwords=data.load_stopwords(), vocab_size=10)
    assert c.D == 2
    assert [d.doc_id for d in c.docs] == ["0", "2"]


def test_empty_after_filtering():
    with pytest.raises(DataError):
        data.preprocess([("x", "the of and")], stopwords=data.load_stopwords())
    with pytest.raises(DataError):
        data.preprocess([])
    with pytest.raises(ValueError):
        data.preprocess([("x", "abc")], vocab_size=0)


def test_builtin_stopwords():
    stop = data.load_stopwords()
    assert {"the", "and", "of"} <= stop and "topic" not in stop


def test_apply_vocab_and_unseen_labels():
    train = data.preprocess([("x", "aa bb bb"), ("y", "bb cc")], vocab_size=10)
    test = data.apply_vocab([("y", "cc dd cc")], train.vocab, train.label_names)
    assert test.vocab == train.vocab and test.docs[0].counts.tolist() == [2]
    with pytest.raises(DataError):
        data.apply_vocab([("z", "aa")], train.vocab, train.label_names)


def test_corpus_invariants():
    doc = data.Document(np.array([5]), np.array([1]), 0, "d")
    with pytest.raises(DataError):
        data.Corpus(["a", "b"], [doc], ["x"])
    with pytest.raises(DataError):
        data.Corpus(["a"], [data.Document(np.array([0]), np.array([1]), 3, "d")], ["x"])


def test_cache_round_trip_and_stable_bytes(tmp_path):
    raw = [("x", "aa bb bb cc"), ("y", "bb dd"), ("x", "ee aa")]
    c = data.preprocess(raw, vocab_size=4)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    data.save_corpus(c, p1)
    data.save_corpus(data.preprocess(raw, vocab_size=4), p2)
    assert p1.read_bytes() == p2.read_bytes()
    back = data.load_corpus(p1)
    assert back.vocab == c.vocab and back.label_names == c.label_names
    np.testing.assert_array_equal(back.dense(), c.dense())
    (tmp_path / "bad.json").write_text('{"format": "other"}')
    with pytest.raises(DataError):
        data.load_corpus(tmp_path / "bad.json")


words = st.text(alphabet="abcde", min_size=2, max_size=4)
docs = st.lists(st.lists(words, min_size=1, max_size=12).map(" ".join), min_size=1, max_size=15)


@settings(max_examples=80, deadline=None)
@given(docs, st.integers(1, 30))
def test_token_count_conservation(texts, vocab_size):
    raw = [("l", t) for t in texts]
    c = data.preprocess(raw, vocab_size=vocab_size)
    kept = set(c.vocab)
    expected = sum(1 for t in texts for w in t.split() if w in kept)
    assert c.total_tokens == expected
    assert c.dense().sum() == expected
    assert c.vocab == data.preprocess(raw, vocab_size=vocab_size).vocab
    assert len(c.vocab) <= vocab_size


# -------------------------------------------------------------- embeddings

def _write(path, rows):
    path.write_text("".join(w + " " + " ".join(map(str, v)) + "\n" for w, v in rows))


def test_embeddings_full_coverage(tmp_path):
    p = tmp_path / "e.txt"
    _write(p, [("bb", [0.5, -1.0]), ("aa", [1e-3, 2.0]), ("zz", [9, 9])])
    t = data.load_embeddings(p, ["aa", "bb"], 2)
    assert not t.oov_mask.any() and t.dim == 2
    np.testing.assert_array_equal(t.matrix, [[1e-3, 2.0], [0.5, -1.0]])


def test_embeddings_oov_rows_deterministic(tmp_path):
    p = tmp_path / "e.txt"
    _write(p, [("aa", [1.0, 2.0, 3.0])])
    t1 = data.load_embeddings(p, ["aa", "missing"], 3, seed=4)
    t2 = data.load_embeddings(p, ["aa", "missing"], 3, seed=4)
    assert t1.oov_mask.tolist() == [False, True] and t1.n_oov == 1
    np.testing.assert_array_equal(t1.matrix, t2.matrix)
    assert np.all(np.abs(t1.matrix[1]) < 0.1)
    t3 = data.load_embeddings(p, ["aa", "missing"], 3, seed=5)
    assert not np.array_equal(t1.matrix[1], t3.matrix[1])


def test_embedding_parse_is_exact(tmp_path):
    vec = np.random.default_rng(0).normal(size=300)
    text = " ".join(repr(float(v)) for v in vec)
    (tmp_path / "e.txt").write_text("the " + text + "\n")
    t = data.load_embeddings(tmp_path / "e.txt", ["the"], 300)
    np.testing.assert_array_equal(t.matrix[0], vec)


def test_embedding_errors(tmp_path):
    p = tmp_path / "e.txt"
    _write(p, [("aa", [1.0, 2.0, 3.0])])
    with pytest.raises(DataError, match="dimension"):
        data.load_embeddings(p, ["aa"], 2)
    p.write_text("aa 1 2\nbb 1\n")
    with pytest.raises(DataError, match=":2:"):
        data.load_embeddings(p, ["aa", "bb"], 2)
    p.write_text("aa 1 x\n")
    with pytest.raises(DataError):
        data.load_embeddings(p, ["aa"], 2)


def test_embedding_text_round_trip(tmp_path):
    m = np.random.default_rng(1).normal(size=(3, 4))
    data.save_embeddings_text(m, ["aa", "bb", "cc"], tmp_path / "e.txt")
    np.testing.assert_array_equal(data.load_embeddings(tmp_path / "e.txt", ["aa", "bb", "cc"], 4).matrix, m)


# ------------------------------------------------------------------ batches

def _corpus(n=10):
    raw = [("l", " ".join(["ww"] * (i + 1) + ["vv"])) for i in range(n)]
    return data.preprocess(raw, vocab_size=5)


def test_batches_sizes_and_counts():
    c = _corpus()
    batches = list(data.bow_batches(c, 4, RngStream(0, 1)))
    assert [len(rows) for rows, _ in batches] == [4, 4, 2]
    for rows, X in batches:
        np.testing.assert_array_equal(X.sum(axis=1), c.lengths[rows])
    assert sorted(np.concatenate([r for r, _ in batches]).tolist()) == list(range(10))


def test_batches_deterministic():
    c = _corpus()
    a = [r.tolist() for r, _ in data.bow_batches(c, 3, RngStream(2, 1))]
    assert a == [r.tolist() for r, _ in data.bow_batches(c, 3, RngStream(2, 1))]
    assert [r.tolist() for r, _ in data.bow_batches(c, 3)] == [[0, 1, 2], [3, 4, 5], [6, 7, 8], [9]]
    with pytest.raises(ValueError):
        next(data.bow_batches(c, 0))


def test_corpus_stats():
    c = _corpus(4)
    assert c.stats() == {"split": "train", "D": 4, "V": 2, "AvgD": 3.5, "L": 1}
    assert c.vocab_hash() == data.vocab_hash(list(c.vocab))
