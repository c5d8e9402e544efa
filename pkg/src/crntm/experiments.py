"""Multi-run experiments: decoder comparison and mixture-size sweep."""
import os
import time

from . import data, evaluation, model
from .config import Config

M_GRID = (5, 10, 15, 20, 25, 30, 35)


def load_experiment(config_path):
    """Config, train/test corpora from its cache, and the aligned embeddings
    (None for the free decoder without an embeddings path)."""
    cfg = Config.load(config_path)
    base = os.path.dirname(os.path.abspath(config_path))

    def resolve(p):
        return p if os.path.isabs(p) else os.path.join(base, p)

    cache = resolve(cfg.cache_dir)
    train = data.load_corpus(os.path.join(cache, "train.json"))
    test = data.load_corpus(os.path.join(cache, "test.json"))
    emb = None
    if cfg.embeddings_path is not None:
        emb = data.load_embeddings(resolve(cfg.embeddings_path), train.vocab, cfg.embed_dim,
                                   seed=cfg.seed).matrix
    return cfg, train, test, emb


def run(train, test, embeddings, config):
    """Train one configuration and evaluate it; returns a MetricsReport
    with wall-clock seconds in ``meta``."""
    t0 = time.perf_counter()
    emb = None if config.decoder == "free" else embeddings
    result = model.train(train, config, emb)
    report = evaluation.evaluate(train, test, result.params, emb, config)
    report.meta["seconds"] = round(time.perf_counter() - t0, 1)
    report.meta["epochs_run"] = result.epochs_run
    return report


def compare_decoders(train, test, embeddings, config, decoders=("free", "gd", "gmd")):
    return {d: run(train, test, embeddings, config.replace(decoder=d)) for d in decoders}


def m_sweep(train, test, embeddings, config, grid=M_GRID):
    return {m: run(train, test, embeddings, config.replace(decoder="gmd", n_components=m))
            for m in grid}


def format_table(rows, key_name):
    """Plain-text table of perplexity / coherence / accuracy per row key."""
    lines = [f"{key_name:>8} {'Perplexity':>11} {'NPMI':>8} {'Accuracy':>9}"]
    for key, rep in rows.items():
        lines.append(f"{key!s:>8} {rep.perplexity:>11.2f} {rep.npmi:>8.4f} {rep.accuracy:>9.4f}")
    return "\n".join(lines)


def directionality(decoders, sweep=None):
    """Pass/fail flags for the expected orderings between configurations."""
    free, gd, gmd = decoders["free"], decoders["gd"], decoders["gmd"]
    checks = {
        "perplexity gd < free": gd.perplexity < free.perplexity,
        "perplexity gmd < free": gmd.perplexity < free.perplexity,
        "npmi gmd >= gd >= free": gmd.npmi >= gd.npmi >= free.npmi,
    }
    if sweep:
        best = max(sweep, key=lambda m: sweep[m].npmi)
        small, large = min(sweep), [m for m in sweep if m >= 30]
        peak = sweep.get(25, sweep[best])
        checks["npmi rises from smallest M to M=25"] = peak.npmi > sweep[small].npmi
        checks["npmi no better beyond M=25"] = all(sweep[m].npmi <= peak.npmi for m in large)
    return checks
