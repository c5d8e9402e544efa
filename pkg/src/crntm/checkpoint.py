"""Binary checkpoint files.

Layout::

    8 bytes   magic b"CRNTMCKP"
    4 bytes   format version (uint32, little endian)
    8 bytes   header length in bytes (uint64, little endian)
    header    UTF-8 JSON: config echo, vocabulary + its hash, step/epoch,
              and a directory of arrays (name, group, shape, byte offset)
    payload   the arrays back to back as little-endian float64
"""
import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .autodiff import AdamState
from .config import Config
from .data import vocab_hash
from .errors import CheckpointError

MAGIC = b"CRNTMCKP"
VERSION = 1
_PREFIX = struct.Struct("<8sIQ")


@dataclass
class Checkpoint:
    config: Config
    params: dict
    vocab: list
    step: int = 0
    epoch: int = -1
    adam: AdamState = None
    embeddings: np.ndarray = None
    extra: dict = field(default_factory=dict)

    @property
    def vocab_hash(self):
        return vocab_hash(self.vocab)


def _arrays(ckpt):
    yield from (("param", k, v) for k, v in ckpt.params.items())
    if ckpt.adam is not None and ckpt.adam.m:
        yield from (("adam_m", k, v) for k, v in ckpt.adam.m.items())
        yield from (("adam_v", k, v) for k, v in ckpt.adam.v.items())
    if ckpt.embeddings is not None:
        yield ("emb", "embeddings", ckpt.embeddings)


def to_bytes(ckpt):
    directory, blobs, offset = [], [], 0
    for group, name, arr in _arrays(ckpt):
        data = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        directory.append({"group": group, "name": name, "shape": list(np.shape(arr)),
                          "offset": offset})
        blobs.append(data)
        offset += len(data)
    header = {
        "format": "crntm-checkpoint", "version": VERSION,
        "config": ckpt.config.to_dict(), "vocab": list(ckpt.vocab),
        "vocab_hash": ckpt.vocab_hash, "step": int(ckpt.step), "epoch": int(ckpt.epoch),
        "adam_t": None if ckpt.adam is None else int(ckpt.adam.t),
        "arrays": directory, "extra": ckpt.extra,
    }
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _PREFIX.pack(MAGIC, VERSION, len(hbytes)) + hbytes + b"".join(blobs)


def save_checkpoint(path, ckpt):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(to_bytes(ckpt))
    os.replace(tmp, path)


def from_bytes(buf, expected_vocab_hash=None):
    if len(buf) < _PREFIX.size:
        raise CheckpointError("truncated checkpoint")
    magic, version, hlen = _PREFIX.unpack_from(buf)
    if magic != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    start = _PREFIX.size + hlen
    try:
        header = json.loads(buf[_PREFIX.size:start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from None
    if vocab_hash(header["vocab"]) != header["vocab_hash"]:
        raise CheckpointError("checkpoint vocabulary does not match its stored hash")
    if expected_vocab_hash is not None and header["vocab_hash"] != expected_vocab_hash:
        raise CheckpointError("vocabulary hash mismatch between checkpoint and corpus")
    groups = {"param": {}, "adam_m": {}, "adam_v": {}, "emb": {}}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        lo = start + entry["offset"]
        hi = lo + 8 * n
        if hi > len(buf):
            raise CheckpointError(f"array {entry['name']} runs past end of file")
        arr = np.frombuffer(buf, dtype="<f8", count=n, offset=lo).astype(np.float64).reshape(shape)
        groups[entry["group"]][entry["name"]] = arr
    adam = None
    if header["adam_t"] is not None:
        adam = AdamState(groups["adam_m"], groups["adam_v"], header["adam_t"])
    return Checkpoint(Config.from_dict(header["config"]), groups["param"], header["vocab"],
                      header["step"], header["epoch"], adam,
                      groups["emb"].get("embeddings"), header.get("extra", {}))


def load_checkpoint(path, expected_vocab_hash=None):
    try:
        with open(path, "rb") as fh:
            buf = fh.read()
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint not found: {path}") from None
    return from_bytes(buf, expected_vocab_hash)
