"""Corpus / run configuration: strict JSON schema with defaults."""

import json
from dataclasses import dataclass, field, fields

from .errors import ConfigError

TASKS = ("seg", "conn", "rel")
SCENARIOS = ("gold", "plain")


@dataclass
class CorpusConfig:
    corpus: str
    task: str
    train_path: str = None
    dev_path: str = None
    test_path: str = None
    # document source for relation features (CoNLL-U alongside .rels)
    train_docs_path: str = None
    dev_docs_path: str = None
    test_docs_path: str = None
    encoder_name: str = "toy-32-2"
    scenario: str = "gold"
    features: list = None  # None -> per-corpus menu; list -> explicit
    transforms: dict = None
    epochs: int = 10
    batch_size: int = 16
    lr_encoder: float = 2e-5
    lr_other: float = 1e-3
    lr: float = 2e-5  # relation classifier learning rate
    seeds: list = field(default_factory=lambda: [1, 2, 3, 4, 5])
    runs: int = None  # defaults to len(seeds)
    lstm_hidden: int = 200
    d_char: int = 64
    d_static: int = 300
    d_neighbors: int = 400
    max_len: int = 512
    language: str = "und"
    stoplist_language: str = "eng"
    head_is_unit1: bool = True
    out_dir: str = "runs"

    @property
    def decode_mode(self):
        return "crf" if self.task == "conn" else "linear"

    @property
    def framework(self):
        parts = self.corpus.split(".")
        return parts[1] if len(parts) == 3 else "rst"

    def seed_list(self):
        runs = self.runs if self.runs is not None else len(self.seeds)
        if runs <= len(self.seeds):
            return self.seeds[:runs]
        return self.seeds + list(range(len(self.seeds) + 1, runs + 1))


_FIELD_NAMES = {f.name for f in fields(CorpusConfig)}


def validate_config(data):
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - _FIELD_NAMES)
    if unknown:
        raise ConfigError("unknown config keys: %s" % ", ".join(unknown))
    for key in ("corpus", "task"):
        if key not in data:
            raise ConfigError("missing required config key %r" % key)
    if data["task"] not in TASKS:
        raise ConfigError("task must be one of %s, got %r" % (TASKS, data["task"]))
    cfg = CorpusConfig(**data)
    if cfg.scenario not in SCENARIOS:
        raise ConfigError("scenario must be one of %s" % (SCENARIOS,))
    if cfg.runs is not None and cfg.runs < 1:
        raise ConfigError("runs must be >= 1")
    if cfg.lr_encoder >= cfg.lr_other:
        raise ConfigError("lr_encoder must be lower than lr_other")
    if cfg.language == "und" and cfg.corpus.count(".") == 2:
        cfg.language = cfg.corpus.split(".")[0]
    return cfg


def load_corpus_config(path):
    """Load and validate a JSON corpus config, filling defaults."""
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except OSError as exc:
        raise ConfigError("cannot read config %s: %s" % (path, exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("config %s is not valid JSON: %s" % (path, exc))
    return validate_config(data)
