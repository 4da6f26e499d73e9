"""Relation classification: NSP-style pair classifier with direction
pseudo-tokens and a hand-crafted feature vector injected between the
encoder's embedding layer and its first block."""

import copy
import json
import os
import random
import warnings
from dataclasses import dataclass, asdict

import torch
import torch.nn as nn

from . import features_rel
from .corpus_io import Direction
from .encoders import resolve_encoder
from .errors import ConfigError, ContractError
from .features_rel import (
    CATEGORICAL_REL_FEATURES,
    DEFAULT_TRANSFORMS,
    FIELD_ORDER,
    RelFeatureRecord,
)
from .features_seg import FeatureVocab, categorical_embed_dim, scale_numeric
from .scoring import score_relations


@dataclass
class PairSequence:
    tokens: list  # word strings, including [CLS]/[SEP] and pseudo-tokens
    segment_ids: list  # 0 on the unit1 side, 1 on the unit2 side

    @property
    def text(self):
        return " ".join(self.tokens)


def build_pair_sequence(inst):
    """NSP-style word sequence with direction pseudo-tokens.

    1>2: [CLS] } u1... > [SEP] u2... [SEP]
    1<2: [CLS] u1... [SEP] < u2... { [SEP]
    """
    u1 = inst.unit1_text.split()
    u2 = inst.unit2_text.split()
    if not u1 or not u2:
        raise ContractError("empty unit text in %r" % inst.doc_id)
    if inst.direction is Direction.LEFT_TO_RIGHT:
        side1 = ["[CLS]", "}"] + u1 + [">", "[SEP]"]
        side2 = u2 + ["[SEP]"]
    elif inst.direction is Direction.RIGHT_TO_LEFT:
        side1 = ["[CLS]"] + u1 + ["[SEP]"]
        side2 = ["<"] + u2 + ["{", "[SEP]"]
    else:
        raise ContractError("unknown direction %r" % (inst.direction,))
    return PairSequence(
        tokens=side1 + side2,
        segment_ids=[0] * len(side1) + [1] * len(side2),
    )


def _feature_value(record, name):
    value = getattr(record, name)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Direction):
        return value.value
    return value


class RelFeatureVectorizer(nn.Module):
    """Encodes a RelFeatureRecord into the leading dims of a hidden-size
    vector; dims past the layout width stay exactly 0."""

    def __init__(self, enabled, hidden_size, genre_labels=(), transforms=None):
        super().__init__()
        self.hidden_size = hidden_size
        self.enabled = tuple(n for n in FIELD_ORDER if n in set(enabled))
        self.transforms = dict(DEFAULT_TRANSFORMS)
        if transforms:
            self.transforms.update(transforms)
        self.genre_labels = tuple(genre_labels)
        self.vocabs = {}
        self.embs = nn.ModuleDict()
        self.layout = {}
        offset = 0
        for name in self.enabled:
            if name in CATEGORICAL_REL_FEATURES:
                vocab = self._build_vocab(name)
                self.vocabs[name] = vocab
                dim = categorical_embed_dim(vocab.cardinality)
                self.embs[name] = nn.Embedding(vocab.cardinality, dim)
            else:
                transform = self.transforms.get(name, "log")
                if transform.startswith("bin:"):
                    k = int(transform.split(":")[1])
                    dim = categorical_embed_dim(k)
                    self.embs[name] = nn.Embedding(k, dim)
                else:
                    dim = 1
            self.layout[name] = (offset, offset + dim)
            offset += dim
        if offset > hidden_size:
            raise ConfigError(
                "feature layout width %d exceeds hidden size %d" % (offset, hidden_size)
            )
        self.width = offset

    def _build_vocab(self, name):
        if name == "direction":
            vocab = FeatureVocab.from_list([])
            vocab.index = {Direction.LEFT_TO_RIGHT.value: 0, Direction.RIGHT_TO_LEFT.value: 1}
            return vocab
        if name == "genre":
            return FeatureVocab(self.genre_labels)
        if name == "same_speaker":
            return FeatureVocab(["true", "false", features_rel.ABSENT])
        return FeatureVocab(["true", "false"])  # boolean features

    def _numeric_dims(self, name, value):
        transform = self.transforms.get(name, "log")
        if transform == "raw":
            return torch.tensor([float(value)])
        if transform == "log":
            return torch.tensor([scale_numeric(float(value))])
        if transform.startswith("bin:"):
            k = int(transform.split(":")[1])
            idx = min(int(max(0.0, min(1.0, float(value))) * k), k - 1)
            return self.embs[name](torch.tensor(idx))
        raise ConfigError("unknown numeric transform %r" % transform)

    def forward(self, record):
        out = torch.zeros(self.hidden_size)
        for name in self.enabled:
            lo, hi = self.layout[name]
            if name in CATEGORICAL_REL_FEATURES:
                idx = self.vocabs[name].lookup(_feature_value(record, name))
                out[lo:hi] = self.embs[name](torch.tensor(idx))
            else:
                out[lo:hi] = self._numeric_dims(name, getattr(record, name))
        return out

    def devectorize(self, vec):
        """Recover each enabled feature's slice from a built vector."""
        return {name: vec[lo:hi] for name, (lo, hi) in self.layout.items()}


def build_feature_vector(record, vectorizer):
    """Feature vector of encoder hidden size; trailing dims exactly 0."""
    return vectorizer(record)


def inject_feature_vector(embedded_seq, mask, fvec):
    """Insert the feature vector between the [CLS] row and the rest.

    No position or segment embedding is added to the injected row; all
    original rows are preserved bit-identically.
    """
    out = torch.cat(
        [embedded_seq[:1], fvec.unsqueeze(0), embedded_seq[1:]], dim=0
    )
    mask_t = torch.as_tensor(mask)
    new_mask = torch.cat([mask_t[:1], torch.ones(1, dtype=mask_t.dtype), mask_t[1:]])
    return out, new_mask


@dataclass
class RelTrainingConfig:
    encoder_name: str = "toy-32-2"
    lr: float = 2e-5
    epochs: int = 10
    batch_size: int = 16
    seed: int = 1
    runs: int = 5
    max_len: int = 512
    use_features: bool = True
    use_direction_feature: bool = True
    features: tuple = None  # None -> corpus menu / all
    transforms: dict = None

    def __post_init__(self):
        if self.runs < 1:
            raise ContractError("runs must be >= 1")


class RelModel(nn.Module):
    def __init__(self, encoder, labels, vectorizer=None):
        super().__init__()
        self.encoder = encoder
        self.labels = tuple(labels)
        self.vectorizer = vectorizer
        self.head = nn.Linear(encoder.hidden_size, len(self.labels))

    def tokenize_pair(self, seq):
        """Subword ids + segment ids, truncating unit tails proportionally
        when the sequence exceeds the encoder's maximum length."""
        words = list(seq.tokens)
        segs = list(seq.segment_ids)
        tok = self.encoder.tokenizer
        protected = {"[CLS]", "[SEP]", "}", ">", "{", "<"}

        def total_len():
            return sum(len(tok.subword_ids(w)) for w in words)

        truncated = False
        while total_len() > self.encoder.max_len:
            side_len = {0: 0, 1: 0}
            last_removable = {0: None, 1: None}
            for i, (w, s) in enumerate(zip(words, segs)):
                if w not in protected:
                    side_len[s] += len(tok.subword_ids(w))
                    last_removable[s] = i
            side = 0 if side_len[0] >= side_len[1] else 1
            if last_removable[side] is None:
                side = 1 - side
            if last_removable[side] is None:
                raise ContractError("cannot truncate sequence to encoder length")
            del words[last_removable[side]], segs[last_removable[side]]
            truncated = True
        if truncated:
            warnings.warn("pair sequence truncated to fit encoder length")
        ids = []
        seg_ids = []
        for w, s in zip(words, segs):
            sub = tok.subword_ids(w)
            ids.extend(sub)
            seg_ids.extend([s] * len(sub))
        return ids, seg_ids

    def forward(self, inst, record=None):
        seq = build_pair_sequence(inst)
        ids, seg_ids = self.tokenize_pair(seq)
        embedded = self.encoder.embed(ids, seg_ids)
        mask = torch.ones(len(ids), dtype=torch.long)
        if self.vectorizer is not None:
            if record is None:
                raise ContractError("feature record required when features are enabled")
            fvec = self.vectorizer(record)
            embedded, mask = inject_feature_vector(embedded, mask, fvec)
        states = self.encoder.encode(embedded, mask)
        pooled = self.encoder.pool(states)
        return self.head(pooled)


class RelCheckpoint:
    def __init__(self, model, config):
        self.model = model
        self.config = config

    @property
    def labels(self):
        return self.model.labels

    @property
    def feature_layout(self):
        return None if self.model.vectorizer is None else self.model.vectorizer.layout

    def save(self, path):
        os.makedirs(path, exist_ok=True)
        torch.save(self.model.state_dict(), os.path.join(path, "weights.pt"))
        vec = self.model.vectorizer
        meta = {
            "kind": "rel",
            "task": "rel",
            "labels": list(self.model.labels),
            "config": asdict(self.config),
            "vectorizer": None
            if vec is None
            else {
                "enabled": list(vec.enabled),
                "genre_labels": list(vec.genre_labels),
                "transforms": vec.transforms,
            },
        }
        with open(os.path.join(path, "meta.json"), "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(os.path.join(path, "meta.json"), encoding="utf-8") as f:
            meta = json.load(f)
        config = RelTrainingConfig(**meta["config"])
        encoder = resolve_encoder(config.encoder_name, config.max_len)
        vec = None
        if meta["vectorizer"] is not None:
            v = meta["vectorizer"]
            vec = RelFeatureVectorizer(
                v["enabled"], encoder.hidden_size, v["genre_labels"], v["transforms"]
            )
        model = RelModel(encoder, meta["labels"], vec)
        model.load_state_dict(
            torch.load(os.path.join(path, "weights.pt"), weights_only=True)
        )
        model.eval()
        return cls(model, config)


def classify(inst, checkpoint, record=None):
    """Probability distribution over the checkpoint's labels."""
    model = checkpoint.model
    model.eval()
    with torch.no_grad():
        logits = model(inst, record)
        probs = torch.softmax(logits, dim=0)
    return {lab: float(p) for lab, p in zip(model.labels, probs)}


def predict_relation(inst, checkpoint, record=None):
    probs = classify(inst, checkpoint, record)
    return max(sorted(probs), key=lambda lab: probs[lab])


def _effective_features(config, corpus_id=None):
    if not config.use_features:
        return ()
    if config.features is not None:
        enabled = tuple(config.features)
    elif corpus_id is not None:
        enabled = features_rel.feature_menu(corpus_id)
    else:
        enabled = features_rel.ALL_FEATURES
    if not config.use_direction_feature:
        enabled = tuple(n for n in enabled if n != "direction")
    return enabled


def train_rel_classifier(train_data, dev_data, config, corpus_id=None):
    """Train on (instance, record, label) triples; best-dev-accuracy wins.

    records may be None throughout when features are disabled.
    """
    if not train_data:
        raise ContractError("empty training data")
    if not dev_data:
        raise ContractError("empty validation data")
    random.seed(config.seed)
    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    labels = sorted({lab for _, _, lab in train_data})
    encoder = resolve_encoder(config.encoder_name, config.max_len)
    enabled = _effective_features(config, corpus_id)
    vectorizer = None
    if enabled:
        genre_labels = sorted(
            {
                rec.genre
                for _, rec, _ in train_data
                if rec is not None and rec.genre != features_rel.ABSENT
            }
        )
        vectorizer = RelFeatureVectorizer(
            enabled, encoder.hidden_size, genre_labels, config.transforms
        )
    model = RelModel(encoder, labels, vectorizer)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    loss_fn = nn.CrossEntropyLoss()
    label_idx = {lab: i for i, lab in enumerate(labels)}
    unseen = {lab for _, _, lab in dev_data if lab not in label_idx}
    if unseen:
        warnings.warn(
            "labels %s absent from training data; they can never be predicted"
            % sorted(unseen)
        )
    samples = list(train_data)
    rng = random.Random(config.seed)
    best_acc = None
    best_state = None
    for _ in range(config.epochs):
        model.train()
        rng.shuffle(samples)
        for start in range(0, len(samples), config.batch_size):
            batch = samples[start : start + config.batch_size]
            optimizer.zero_grad()
            total = 0.0
            for inst, record, lab in batch:
                logits = model(inst, record if vectorizer is not None else None)
                total = total + loss_fn(
                    logits.unsqueeze(0), torch.tensor([label_idx[lab]])
                )
            (total / len(batch)).backward()
            optimizer.step()
        acc = _dev_accuracy(model, dev_data, config)
        if best_acc is None or acc > best_acc:
            best_acc = acc
            best_state = copy.deepcopy(model.state_dict())
    model.load_state_dict(best_state)
    model.eval()
    return RelCheckpoint(model, config)


def _dev_accuracy(model, dev_data, config):
    ckpt = RelCheckpoint(model, config)
    gold = [lab for _, _, lab in dev_data]
    pred = [
        predict_relation(inst, ckpt, rec if model.vectorizer is not None else None)
        for inst, rec, _ in dev_data
    ]
    return score_relations(gold, pred).accuracy
