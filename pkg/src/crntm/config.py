"""Run configuration shared by the model, evaluation and CLI."""
import dataclasses
import json
from dataclasses import dataclass

from .errors import ConfigError

DECODERS = ("gd", "gmd", "free")
CENTROID_INITS = ("kmeans++", "random")
_ALIASES = {"K": "n_topics", "M": "n_components", "n": "latent_dim", "r": "embed_dim"}


@dataclass
class Config:
    # data
    train_path: str = None
    test_path: str = None
    stopwords_path: str = None
    embeddings_path: str = None
    cache_dir: str = "cache"
    out_dir: str = "runs"
    vocab_size: int = 2000
    min_token_len: int = 2
    # model
    n_topics: int = 25
    latent_dim: int = None
    decoder: str = "gmd"
    n_components: int = 25
    hidden: int = 256
    embed_dim: int = 300
    alpha_prime: float = 0.5
    beta_prime: float = 0.5
    renormalize_theta: bool = True
    shared_tau: bool = False
    use_controller: bool = True
    beta_kl_weight: float = 1.0
    init_std: float = 0.02
    centroid_init: str = "kmeans++"
    # training
    lr: float = 1e-5
    batch_size: int = 64
    epochs: int = 200
    seed: int = 0
    patience: int = 10
    val_fraction: float = 0.0
    max_steps: int = None
    # evaluation
    classifier_epochs: int = 200
    classifier_hidden: int = 100
    classifier_lr: float = 1e-3

    def __post_init__(self):
        self.validate()

    @property
    def n_latent(self):
        """Latent Gaussian dimension; defaults to the topic count."""
        return self.n_topics if self.latent_dim is None else self.latent_dim

    @property
    def K(self):
        return self.n_topics

    @property
    def M(self):
        return self.n_components

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"config field '{name}': {why} (got {getattr(self, name)!r})")

        if self.decoder not in DECODERS:
            bad("decoder", f"must be one of {DECODERS}")
        if self.centroid_init not in CENTROID_INITS:
            bad("centroid_init", f"must be one of {CENTROID_INITS}")
        for name in ("n_topics",):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 2:
                bad(name, "must be an integer >= 2")
        if self.latent_dim is not None and (not isinstance(self.latent_dim, int) or self.latent_dim < 1):
            bad("latent_dim", "must be an integer >= 1 or null")
        for name in ("n_components", "batch_size", "hidden", "embed_dim",
                     "vocab_size", "min_token_len", "classifier_hidden"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                bad(name, "must be an integer >= 1")
        for name in ("epochs", "patience", "classifier_epochs"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 0:
                bad(name, "must be a non-negative integer")
        if not self.lr > 0:
            bad("lr", "must be > 0")
        if not self.classifier_lr > 0:
            bad("classifier_lr", "must be > 0")
        for name in ("alpha_prime", "beta_prime"):
            if not getattr(self, name) > 0:
                bad(name, "prior must be > 0")
        if not self.beta_kl_weight >= 0:
            bad("beta_kl_weight", "must be >= 0")
        if not self.init_std >= 0:
            bad("init_std", "must be >= 0")
        if not 0.0 <= self.val_fraction < 1.0:
            bad("val_fraction", "must lie in [0, 1)")
        if self.max_steps is not None and (not isinstance(self.max_steps, int) or self.max_steps < 0):
            bad("max_steps", "must be a non-negative integer or null")
        if not isinstance(self.seed, int):
            bad("seed", "must be an integer")

    def to_dict(self):
        return dataclasses.asdict(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        clean = {}
        for key, value in d.items():
            key = _ALIASES.get(key, key)
            if key not in known:
                raise ConfigError(f"unknown config field '{key}'")
            clean[key] = value
        return cls(**clean)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_dict(d)

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)
