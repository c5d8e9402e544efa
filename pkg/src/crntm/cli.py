"""Command-line interface: ``crntm preprocess|train|eval|topics|synth``.

Configs are JSON files holding :class:`~crntm.config.Config` fields;
relative paths inside them are resolved against the config file's
directory.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import checkpoint as ckpt_io
from . import data, evaluation, model, synthetic
from .config import Config
from .errors import (CheckpointError, ConfigError, CRNTMError, DataError, DivergenceError,
                     ShapeError)
from .samplers import STREAM_SPLIT, RngStream, stream_id

log = logging.getLogger("crntm")

EXIT_CODES = {ConfigError: 2, DataError: 3, CheckpointError: 4, DivergenceError: 5,
              ShapeError: 6}
CHECKPOINT_NAME = "model.ckpt"
LOSS_LOG_NAME = "loss.jsonl"
# fields a resumed run may change without invalidating the checkpoint
_RESUMABLE = {"epochs", "max_steps", "patience", "out_dir", "cache_dir", "train_path",
              "test_path", "stopwords_path", "embeddings_path", "classifier_epochs",
              "classifier_hidden", "classifier_lr"}


class Paths:
    def __init__(self, config, base):
        self.config, self.base = config, base

    def __call__(self, field):
        value = getattr(self.config, field)
        if value is None:
            return None
        return value if os.path.isabs(value) else os.path.join(self.base, value)

    @property
    def cache(self):
        return self("cache_dir")


def _load_config(args):
    if args.config is None:
        raise ConfigError("--config is required")
    if not os.path.exists(args.config):
        raise ConfigError(f"config file not found: {args.config}")
    cfg = Config.load(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg, Paths(cfg, os.path.dirname(os.path.abspath(args.config)))


def _load_cache(paths, split):
    path = os.path.join(paths.cache, f"{split}.json")
    if not os.path.exists(path):
        raise DataError(f"corpus cache missing: {path} (run 'crntm preprocess' first)")
    return data.load_corpus(path)


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ------------------------------------------------------------ preprocess

def cmd_preprocess(args):
    cfg, paths = _load_config(args)
    for field in ("train_path", "test_path"):
        if paths(field) is None:
            raise ConfigError(f"config field '{field}' must be set for preprocess")
        if not os.path.exists(paths(field)):
            raise DataError(f"raw corpus not found: {paths(field)}")
    stop = data.load_stopwords(paths("stopwords_path"))
    train = data.preprocess(data.read_labeled_lines(paths("train_path")), stop,
                            cfg.vocab_size, cfg.min_token_len, "train")
    test = data.apply_vocab(data.read_labeled_lines(paths("test_path")), train.vocab,
                            train.label_names, stop, cfg.min_token_len, "test")
    cache = args.out or paths.cache
    os.makedirs(cache, exist_ok=True)
    data.save_corpus(train, os.path.join(cache, "train.json"))
    data.save_corpus(test, os.path.join(cache, "test.json"))
    avg = (train.total_tokens + test.total_tokens) / (train.D + test.D)
    print(f"{'D_train':>8} {'D_test':>8} {'V':>6} {'AvgD':>7} {'L':>4}")
    print(f"{train.D:>8} {test.D:>8} {train.V:>6} {avg:>7.2f} {train.L:>4}")
    return 0


# ----------------------------------------------------------------- train

def _validation_split(corpus, config):
    if config.val_fraction <= 0:
        return corpus, None
    n_val = max(1, int(round(config.val_fraction * corpus.D)))
    if n_val >= corpus.D:
        raise ConfigError("config field 'val_fraction': leaves no training documents")
    order = RngStream(config.seed, stream_id(STREAM_SPLIT)).generator.permutation(corpus.D)
    return (corpus.subset(np.sort(order[n_val:]), "train"),
            corpus.subset(np.sort(order[:n_val]), "val"))


def _load_model_embeddings(cfg, paths, corpus):
    if cfg.decoder == "free":
        return None
    path = paths("embeddings_path")
    if path is None:
        raise ConfigError(f"config field 'embeddings_path' is required for decoder '{cfg.decoder}'")
    if not os.path.exists(path):
        raise DataError(f"embeddings not found: {path}")
    return data.load_embeddings(path, corpus.vocab, cfg.embed_dim, seed=cfg.seed).matrix


def _check_resumable(saved, cfg):
    a, b = saved.to_dict(), cfg.to_dict()
    diff = sorted(k for k in a if k not in _RESUMABLE and a[k] != b[k])
    if diff:
        raise CheckpointError(f"checkpoint config differs in {diff}; cannot resume")


def _read_loss_log(path, upto_step):
    if not os.path.exists(path):
        return []
    with open(path, encoding="utf-8") as fh:
        records = [json.loads(line) for line in fh if line.strip()]
    return [r for r in records if r["step"] <= upto_step]


def cmd_train(args):
    cfg, paths = _load_config(args)
    corpus = _load_cache(paths, "train")
    out = args.out or paths("out_dir")
    os.makedirs(out, exist_ok=True)
    ckpt_path = os.path.join(out, CHECKPOINT_NAME)
    log_path = os.path.join(out, LOSS_LOG_NAME)
    train_c, val_c = _validation_split(corpus, cfg)

    params = adam = None
    start_epoch, history = 0, []
    if args.checkpoint:
        ck = ckpt_io.load_checkpoint(args.checkpoint, corpus.vocab_hash())
        _check_resumable(ck.config, cfg)
        params, adam, emb = ck.params, ck.adam, ck.embeddings
        start_epoch = ck.epoch + 1
        history = _read_loss_log(os.path.join(os.path.dirname(args.checkpoint), LOSS_LOG_NAME),
                                 ck.step)
        log.info("resuming from epoch %d, step %d", start_epoch, ck.step)
    else:
        emb = _load_model_embeddings(cfg, paths, corpus)

    with open(log_path, "w", encoding="utf-8") as fh:
        for rec in history:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    written = [0]

    def save(epoch, result):
        with open(log_path, "a", encoding="utf-8") as fh:
            for rec in result.trace[written[0]:]:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        written[0] = len(result.trace)
        ckpt_io.save_checkpoint(ckpt_path, ckpt_io.Checkpoint(
            cfg, result.params, corpus.vocab, result.adam.t, epoch, result.adam, emb,
            {"stopped_early": result.stopped_early}))

    result = model.train(train_c, cfg, emb, params=params, adam=adam, start_epoch=start_epoch,
                         on_epoch_end=save, val_corpus=val_c)
    if result.stopped_early:
        save(result.epochs_run - 1, result)
    last = result.trace[-1] if result.trace else (history[-1] if history else None)
    print(f"trained to epoch {result.epochs_run}, step {result.adam.t}"
          + (f", loss {last['loss']:.6f}" if last else ""))
    print(f"checkpoint: {ckpt_path}")
    return 0


# ------------------------------------------------------------------ eval

def cmd_eval(args):
    cfg, paths = _load_config(args)
    # default: the checkpoint ``train`` wrote under out_dir
    ckpt_path = args.checkpoint or os.path.join(paths("out_dir"), "model.ckpt")
    train = _load_cache(paths, "train")
    test = _load_cache(paths, "test")
    ck = ckpt_io.load_checkpoint(ckpt_path, train.vocab_hash())
    run_cfg = ck.config.replace(seed=cfg.seed, classifier_epochs=cfg.classifier_epochs,
                                classifier_hidden=cfg.classifier_hidden,
                                classifier_lr=cfg.classifier_lr)
    report = evaluation.evaluate(train, test, ck.params, ck.embeddings, run_cfg)
    out = args.out or os.path.join(paths("out_dir"), "report.json")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json() + "\n")
    print(f"perplexity {report.perplexity:.4f}  npmi {report.npmi:.4f}  "
          f"accuracy {report.accuracy:.4f}")
    print(f"report: {out}")
    return 0


# ---------------------------------------------------------------- topics

def cmd_topics(args):
    if not args.checkpoint:
        raise ConfigError("--checkpoint is required for topics")
    ck = ckpt_io.load_checkpoint(args.checkpoint)
    if args.n > len(ck.vocab):
        raise DataError(f"-n {args.n} exceeds vocabulary size {len(ck.vocab)}")
    tw = model.topic_word_matrix(ck.params, ck.embeddings, ck.config)
    records = evaluation.topic_records(tw, ck.vocab, args.n)
    centroids = evaluation.centroid_records(ck.params, ck.config)
    out = args.out or os.path.dirname(os.path.abspath(args.checkpoint))
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "topics.txt"), "w", encoding="utf-8") as fh:
        fh.write(evaluation.format_topics(records))
    _write_json(os.path.join(out, "topics.json"),
                {"decoder": ck.config.decoder, "n": args.n, "topics": records})
    _write_json(os.path.join(out, "centroids.json"),
                {"decoder": ck.config.decoder, "omitted": centroids is None,
                 "reason": "free decoder has no centroids" if centroids is None else None,
                 "centroids": centroids})
    sys.stdout.write(evaluation.format_topics(records))
    if centroids is None:
        print("centroid records omitted: free decoder")
    return 0


# ----------------------------------------------------------------- synth

def cmd_synth(args):
    """Write a planted-topic demo corpus, embeddings and a matching config."""
    out = args.out or "synthetic"
    os.makedirs(out, exist_ok=True)
    pc = synthetic.planted_corpus(n_train=args.docs, n_test=max(1, args.docs // 4), seed=args.seed)
    gen = np.random.default_rng(args.seed)
    for split in (pc.train, pc.test):
        with open(os.path.join(out, f"{split.split}.txt"), "w", encoding="utf-8") as fh:
            fh.write(synthetic.to_labeled_text(split, gen))
    data.save_embeddings_text(pc.embeddings, pc.train.vocab, os.path.join(out, "embeddings.txt"))
    np.save(os.path.join(out, "planted_topic_word.npy"), pc.topic_word)
    cfg = Config(train_path="train.txt", test_path="test.txt", embeddings_path="embeddings.txt",
                 cache_dir="cache", out_dir="run", vocab_size=pc.train.V, n_topics=5,
                 decoder="gmd", n_components=2, hidden=64, embed_dim=pc.embeddings.shape[1],
                 lr=1e-2, epochs=40, seed=args.seed)
    with open(os.path.join(out, "config.json"), "w", encoding="utf-8") as fh:
        fh.write(cfg.dumps() + "\n")
    print(f"wrote synthetic corpus to {out}")
    return 0


# ------------------------------------------------------------------ main

def build_parser():
    p = argparse.ArgumentParser(prog="crntm", description="Gaussian-decoder neural topic model")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, config=True, seed=True, checkpoint=False):
        sp = sub.add_parser(name, help=help_)
        if config:
            sp.add_argument("--config", help="JSON config file")
        if seed:
            sp.add_argument("--seed", type=int, help="override the config seed")
        if checkpoint:
            sp.add_argument("--checkpoint", help="checkpoint file")
        sp.add_argument("--out", help="output path")
        sp.set_defaults(func=func)
        return sp

    add("preprocess", cmd_preprocess, "build the corpus cache", seed=False)
    add("train", cmd_train, "train a model (--checkpoint resumes)", checkpoint=True)
    add("eval", cmd_eval, "perplexity, NPMI and classification accuracy", checkpoint=True)
    sp = add("topics", cmd_topics, "export top words and centroids", config=False, seed=False,
             checkpoint=True)
    sp.add_argument("-n", type=int, default=10, help="words per topic")
    sp = add("synth", cmd_synth, "write a planted-topic demo corpus", config=False)
    sp.set_defaults(seed=0)
    sp.add_argument("--docs", type=int, default=2000, help="training documents")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CRNTMError as exc:
        code = next((c for cls, c in EXIT_CODES.items() if isinstance(exc, cls)), 1)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 7


if __name__ == "__main__":
    sys.exit(main())
