import json

import numpy as np
import pytest

from crntm import autodiff as ad
from crntm import checkpoint as ck
from crntm import model
from crntm.config import Config
from crntm.errors import CheckpointError, ConfigError
from oracles import tiny_instance


@pytest.mark.parametrize("field,value", [
    ("n_topics", 1), ("n_components", 0), ("batch_size", 0), ("lr", 0.0), ("lr", -1e-3),
    ("alpha_prime", 0.0), ("beta_prime", -1.0), ("decoder", "lda"), ("val_fraction", 1.0),
    ("centroid_init", "zeros"), ("latent_dim", 0),
])
def test_config_rejects_with_field_name(field, value):
    with pytest.raises(ConfigError, match=field):
        Config(**{field: value})


def test_config_defaults_and_aliases():
    c = Config()
    assert (c.K, c.M, c.n_latent, c.hidden, c.lr, c.batch_size) == (25, 25, 25, 256, 1e-5, 64)
    assert c.renormalize_theta and not c.shared_tau
    c2 = Config.from_dict({"K": 50, "M": 10, "n": 7})
    assert (c2.n_topics, c2.n_components, c2.n_latent) == (50, 10, 7)
    assert c.replace(n_topics=4).n_latent == 4
    with pytest.raises(ConfigError, match="bogus"):
        Config.from_dict({"bogus": 1})


def test_config_file_round_trip(tmp_path):
    c = Config(n_topics=5, decoder="gd", seed=9)
    (tmp_path / "c.json").write_text(c.dumps())
    assert Config.load(tmp_path / "c.json") == c
    (tmp_path / "bad.json").write_text("{nope")
    with pytest.raises(ConfigError):
        Config.load(tmp_path / "bad.json")


def _checkpoint(decoder="gmd"):
    params, X, emb, cfg, rngs = tiny_instance(decoder)
    adam = ad.AdamState.zeros_like(params)
    _, grads, _ = model.loss_and_grads(params, X, emb, cfg, rngs=rngs)
    ad.adam_step(params, grads, adam, 1e-2)
    vocab = [f"w{i:02d}" for i in range(20)]
    return ck.Checkpoint(cfg, params, vocab, adam.t, 0, adam, emb if decoder != "free" else None)


@pytest.mark.parametrize("decoder", ["gd", "gmd", "free"])
def test_checkpoint_round_trip_bitwise(tmp_path, decoder):
    c = _checkpoint(decoder)
    path = tmp_path / "m.ckpt"
    ck.save_checkpoint(path, c)
    back = ck.load_checkpoint(path, c.vocab_hash)
    assert back.config == c.config and back.vocab == c.vocab and back.step == 1
    for k, v in c.params.items():
        assert back.params[k].tobytes() == v.tobytes() and back.params[k].shape == v.shape
        assert back.adam.m[k].tobytes() == c.adam.m[k].tobytes()
        assert back.adam.v[k].tobytes() == c.adam.v[k].tobytes()
    assert back.adam.t == c.adam.t
    if decoder != "free":
        np.testing.assert_array_equal(back.embeddings, c.embeddings)
    # re-serialising the loaded checkpoint reproduces the same bytes
    assert ck.to_bytes(back) == path.read_bytes()


def test_checkpoint_header_and_layout(tmp_path):
    c = _checkpoint()
    raw = ck.to_bytes(c)
    assert raw[:8] == b"CRNTMCKP"
    hlen = int.from_bytes(raw[12:20], "little")
    header = json.loads(raw[20:20 + hlen])
    assert header["version"] == 1 and header["step"] == 1
    assert header["config"]["decoder"] == "gmd" and header["vocab_hash"] == c.vocab_hash
    first = header["arrays"][0]
    value = np.frombuffer(raw, "<f8", count=1, offset=20 + hlen + first["offset"])[0]
    assert value == c.params[first["name"]].ravel()[0]


def test_checkpoint_errors(tmp_path):
    c = _checkpoint()
    path = tmp_path / "m.ckpt"
    ck.save_checkpoint(path, c)
    with pytest.raises(CheckpointError, match="mismatch"):
        ck.load_checkpoint(path, "0" * 64)
    with pytest.raises(CheckpointError):
        ck.load_checkpoint(tmp_path / "missing.ckpt")
    (tmp_path / "junk").write_bytes(b"not a checkpoint at all")
    with pytest.raises(CheckpointError, match="magic"):
        ck.load_checkpoint(tmp_path / "junk")
    (tmp_path / "short").write_bytes(path.read_bytes()[:-8])
    with pytest.raises(CheckpointError, match="past end"):
        ck.load_checkpoint(tmp_path / "short")
