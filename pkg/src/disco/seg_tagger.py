"""Sequence model for discourse segmentation and connective detection.

Per-token representation: char bi-LSTM state + frozen static word vector +
average-pooled subword CWE, concatenated with hand-crafted feature
embeddings and a bi-LSTM summary of the two neighboring sentences. A
bi-LSTM encoder feeds either a linear head (segmentation) or a CRF
(connective detection).
"""

import copy
import hashlib
import json
import os
import random
from dataclasses import dataclass, asdict

import torch
import torch.nn as nn

from . import features_seg
from .corpus_io import B_CONN, BEGIN_SEG, I_CONN
from .crf import LinearChainCRF, decode_labels, sequence_loss
from .encoders import resolve_encoder
from .errors import ContractError
from .features_seg import (
    CATEGORICAL_FEATURES,
    NUMERIC_FEATURES,
    FeatureVocab,
    categorical_embed_dim,
    scale_numeric,
)
from .scoring import score_connectives, score_segmentation

SEG_TAGSET = ("O", BEGIN_SEG)
CONN_TAGSET = ("O", B_CONN, I_CONN)

CHAR_VOCAB_SIZE = 256


def tagset_for_task(task):
    if task == "seg":
        return SEG_TAGSET
    if task == "conn":
        return CONN_TAGSET
    raise ContractError("unknown tagging task %r" % task)


def label_to_tag(seg_label):
    return "O" if seg_label is None else seg_label


def tag_to_label(tag):
    return None if tag == "O" else tag


@dataclass
class SegModelDims:
    d_char: int = 64
    d_static: int = 300
    d_cwe: int = 768
    d_feat: int = 0
    d_neighbors: int = 400
    lstm_hidden: int = 200
    tagset: tuple = SEG_TAGSET

    @property
    def d_emb(self):
        return self.d_char + self.d_static + self.d_cwe

    @property
    def d_enc(self):
        return self.d_emb + self.d_feat + self.d_neighbors

    def check(self):
        assert self.d_enc == self.d_emb + self.d_feat + self.d_neighbors
        return self


@dataclass
class TrainingConfig:
    encoder_name: str = "toy-32-2"
    lr_encoder: float = 2e-5
    lr_other: float = 1e-3
    epochs: int = 10
    batch_size: int = 16
    seed: int = 1
    decode_mode: str = "linear"
    runs: int = 5
    lstm_hidden: int = 200
    d_char: int = 64
    d_static: int = 300
    d_neighbors: int = 400
    max_len: int = 512
    use_features: bool = True

    def __post_init__(self):
        if self.lr_encoder >= self.lr_other:
            raise ContractError("lr_encoder must be lower than lr_other")
        if self.runs < 1:
            raise ContractError("runs must be >= 1")


class CharEncoder(nn.Module):
    """bi-LSTM over hashed character ids; final states give d_out dims."""

    def __init__(self, d_out=64, char_dim=32):
        super().__init__()
        if d_out % 2:
            raise ContractError("char output dim must be even")
        self.emb = nn.Embedding(CHAR_VOCAB_SIZE, char_dim)
        self.lstm = nn.LSTM(char_dim, d_out // 2, bidirectional=True, batch_first=True)
        self.d_out = d_out

    @staticmethod
    def char_ids(word):
        return [1 + (ord(c) % (CHAR_VOCAB_SIZE - 1)) for c in word] or [1]

    def forward(self, words):
        ids = [self.char_ids(w) for w in words]
        max_len = max(len(i) for i in ids)
        batch = torch.zeros(len(ids), max_len, dtype=torch.long)
        lengths = []
        for i, seq in enumerate(ids):
            batch[i, : len(seq)] = torch.tensor(seq)
            lengths.append(len(seq))
        emb = self.emb(batch)
        packed = nn.utils.rnn.pack_padded_sequence(
            emb, torch.tensor(lengths), batch_first=True, enforce_sorted=False
        )
        _, (h, _) = self.lstm(packed)
        return torch.cat([h[0], h[1]], dim=1)


class WordTable(nn.Module):
    """Word-vocabulary embedding; frozen when used for static vectors."""

    def __init__(self, vocab, dim, frozen):
        super().__init__()
        self.vocab = vocab
        self.emb = nn.Embedding(vocab.cardinality, dim)
        if frozen:
            self.emb.weight.requires_grad_(False)

    def forward(self, words):
        ids = torch.tensor([self.vocab.lookup(w) for w in words], dtype=torch.long)
        return self.emb(ids)

    def checksum(self):
        data = self.emb.weight.detach().numpy().tobytes()
        return hashlib.sha256(data).hexdigest()


class NeighborEncoder(nn.Module):
    """Summarizes the two neighbor sentences into a fixed-size vector.

    Uses its own char + static embedders (not the CWE) and a bi-LSTM; the
    output is a function of the neighbor sentences only.
    """

    def __init__(self, word_vocab, d_out=400, d_char=64, d_static=300):
        super().__init__()
        self.d_out = d_out
        self.chars = CharEncoder(d_char)
        self.static = WordTable(word_vocab, d_static, frozen=True)
        self.boundary = nn.Parameter(torch.zeros(d_char + d_static))
        self.lstm = nn.LSTM(
            d_char + d_static, d_out // 2, bidirectional=True, batch_first=True
        )

    def forward(self, prev_forms, next_forms):
        if not prev_forms and not next_forms:
            return torch.zeros(self.d_out)
        rows = []
        if prev_forms:
            rows.append(torch.cat([self.chars(prev_forms), self.static(prev_forms)], dim=1))
        rows.append(self.boundary.unsqueeze(0))
        if next_forms:
            rows.append(torch.cat([self.chars(next_forms), self.static(next_forms)], dim=1))
        seq = torch.cat(rows, dim=0).unsqueeze(0)
        _, (h, _) = self.lstm(seq)
        return torch.cat([h[0, 0], h[1, 0]], dim=0)


class FeatureEmbedder(nn.Module):
    """Embeds TokenFeatureRecords: categoricals via sqrt-sized embeddings,
    numerics via signed-log scaling."""

    def __init__(self, vocabs):
        super().__init__()
        self.vocabs = vocabs
        self.embs = nn.ModuleDict(
            {
                name: nn.Embedding(
                    vocabs[name].cardinality,
                    categorical_embed_dim(vocabs[name].cardinality),
                )
                for name in CATEGORICAL_FEATURES
            }
        )
        self.d_out = features_seg.feature_width(vocabs)

    def forward(self, records):
        parts = []
        for name in CATEGORICAL_FEATURES:
            ids = torch.tensor(
                [self.vocabs[name].lookup(getattr(r, name)) for r in records],
                dtype=torch.long,
            )
            parts.append(self.embs[name](ids))
        numeric = torch.tensor(
            [
                [scale_numeric(float(getattr(r, name))) for name in NUMERIC_FEATURES]
                for r in records
            ],
            dtype=torch.float32,
        )
        parts.append(numeric)
        return torch.cat(parts, dim=1)


class SegTagger(nn.Module):
    def __init__(self, dims, encoder, word_vocab, feat_vocabs):
        super().__init__()
        dims.check()
        self.dims = dims
        self.encoder = encoder
        self.word_vocab = word_vocab
        self.feat_vocabs = feat_vocabs
        self.chars = CharEncoder(dims.d_char) if dims.d_char else None
        self.static = (
            WordTable(word_vocab, dims.d_static, frozen=True) if dims.d_static else None
        )
        self.features = FeatureEmbedder(feat_vocabs) if dims.d_feat else None
        if self.features is not None and self.features.d_out != dims.d_feat:
            raise ContractError(
                "declared d_feat %d != computed feature width %d"
                % (dims.d_feat, self.features.d_out)
            )
        self.neighbors = (
            NeighborEncoder(word_vocab, dims.d_neighbors) if dims.d_neighbors else None
        )
        self.lstm = nn.LSTM(
            dims.d_enc, dims.lstm_hidden, bidirectional=True, batch_first=True
        )
        self.proj = nn.Linear(2 * dims.lstm_hidden, len(dims.tagset))
        if I_CONN in dims.tagset:
            o_idx = dims.tagset.index("O")
            i_idx = dims.tagset.index(I_CONN)
            self.crf = LinearChainCRF(
                len(dims.tagset),
                forbidden_transitions=[(o_idx, i_idx)],
                forbidden_starts=[i_idx],
            )
        else:
            self.crf = None

    def encode_neighbors(self, prev, next_):
        """400-dim summary of the neighboring sentences (zero if both absent)."""
        prev_forms = [t.form for t in prev.tokens] if prev is not None else []
        next_forms = [t.form for t in next_.tokens] if next_ is not None else []
        if self.neighbors is None:
            return torch.zeros(0)
        return self.neighbors(prev_forms, next_forms)

    def embed_sentence(self, sent, doc, records=None):
        """Per-token input matrix [n_tokens, d_enc]."""
        forms = [t.form for t in sent.tokens]
        parts = []
        if self.chars is not None:
            parts.append(self.chars(forms))
        if self.static is not None:
            parts.append(self.static(forms))
        parts.append(self.encoder.word_vectors(forms))
        if self.features is not None:
            if records is None:
                all_records = features_seg.extract_seg_features(doc)
                offset = sum(
                    len(s.tokens) for s in doc.sentences[: sent.index_in_doc]
                )
                records = all_records[offset : offset + len(forms)]
            parts.append(self.features(records))
        if self.neighbors is not None:
            i = sent.index_in_doc
            prev = doc.sentences[i - 1] if i > 0 else None
            next_ = doc.sentences[i + 1] if i + 1 < len(doc.sentences) else None
            summary = self.encode_neighbors(prev, next_)
            parts.append(summary.unsqueeze(0).expand(len(forms), -1))
        out = torch.cat(parts, dim=1)
        if out.shape != (len(forms), self.dims.d_enc):
            raise ContractError("embedding shape %s != expected" % (tuple(out.shape),))
        return out

    def tag_emissions(self, embedded):
        """Unnormalized per-token tag scores [n_tokens, |tagset|]."""
        if embedded.shape[1] != self.dims.d_enc:
            raise ContractError(
                "expected %d input columns, got %d" % (self.dims.d_enc, embedded.shape[1])
            )
        out, _ = self.lstm(embedded.unsqueeze(0))
        return self.proj(out.squeeze(0))

    def forward(self, sent, doc, records=None):
        return self.tag_emissions(self.embed_sentence(sent, doc, records))

    def static_checksum(self):
        if self.static is None:
            return None
        return self.static.checksum()


class Checkpoint:
    """Immutable trained model bundle: weights + dims + vocabs + config."""

    def __init__(self, model, config, task):
        self.model = model
        self.config = config
        self.task = task

    def save(self, path):
        os.makedirs(path, exist_ok=True)
        torch.save(self.model.state_dict(), os.path.join(path, "weights.pt"))
        meta = {
            "kind": "seg",
            "task": self.task,
            "dims": {**asdict(self.model.dims), "tagset": list(self.model.dims.tagset)},
            "config": asdict(self.config),
            "word_vocab": self.model.word_vocab.to_list(),
            "feat_vocabs": {
                name: v.to_list() for name, v in self.model.feat_vocabs.items()
            },
        }
        with open(os.path.join(path, "meta.json"), "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(os.path.join(path, "meta.json"), encoding="utf-8") as f:
            meta = json.load(f)
        config = TrainingConfig(**meta["config"])
        dims_kw = dict(meta["dims"])
        dims_kw["tagset"] = tuple(dims_kw["tagset"])
        dims = SegModelDims(**dims_kw)
        word_vocab = FeatureVocab.from_list(meta["word_vocab"])
        feat_vocabs = {
            name: FeatureVocab.from_list(labels)
            for name, labels in meta["feat_vocabs"].items()
        }
        encoder = resolve_encoder(config.encoder_name, config.max_len)
        model = SegTagger(dims, encoder, word_vocab, feat_vocabs)
        model.load_state_dict(
            torch.load(os.path.join(path, "weights.pt"), weights_only=True)
        )
        model.eval()
        return cls(model, config, meta["task"])


def _seed_everything(seed):
    random.seed(seed)
    torch.manual_seed(seed)
    torch.set_num_threads(1)


def build_word_vocab(docs):
    vocab = FeatureVocab()
    for doc in docs:
        for tok in doc.all_tokens():
            vocab.add(tok.form)
    return vocab


def _sentence_samples(docs, tagset):
    samples = []
    for doc in docs:
        records = features_seg.extract_seg_features(doc)
        offset = 0
        for sent in doc.sentences:
            tags = [label_to_tag(t.seg_label) for t in sent.tokens]
            for tag in tags:
                if tag not in tagset:
                    raise ContractError(
                        "document %s: label %r outside tagset %s"
                        % (doc.doc_id, tag, list(tagset))
                    )
            gold = [tagset.index(tag) for tag in tags]
            samples.append((doc, sent, records[offset : offset + len(sent.tokens)], gold))
            offset += len(sent.tokens)
    return samples


def build_model(train_docs, config, task):
    tagset = tagset_for_task(task)
    word_vocab = build_word_vocab(train_docs)
    feat_vocabs = features_seg.build_seg_vocabs(train_docs)
    encoder = resolve_encoder(config.encoder_name, config.max_len)
    d_feat = features_seg.feature_width(feat_vocabs) if config.use_features else 0
    dims = SegModelDims(
        d_char=config.d_char,
        d_static=config.d_static,
        d_cwe=encoder.hidden_size,
        d_feat=d_feat,
        d_neighbors=config.d_neighbors,
        lstm_hidden=config.lstm_hidden,
        tagset=tagset,
    )
    return SegTagger(dims, encoder, word_vocab, feat_vocabs)


def train_segmenter(train_docs, dev_docs, config, task="seg"):
    """Train a tagger, returning the best-dev-F1 checkpoint."""
    if not train_docs:
        raise ContractError("empty training corpus")
    if not dev_docs:
        raise ContractError("empty validation corpus")
    _seed_everything(config.seed)
    model = build_model(train_docs, config, task)
    mode = config.decode_mode
    tagset = model.dims.tagset
    samples = _sentence_samples(train_docs, tagset)
    encoder_params = list(model.encoder.parameters())
    encoder_ids = {id(p) for p in encoder_params}
    other_params = [
        p
        for p in model.parameters()
        if id(p) not in encoder_ids and p.requires_grad
    ]
    optimizer = torch.optim.Adam(
        [
            {"params": encoder_params, "lr": config.lr_encoder},
            {"params": other_params, "lr": config.lr_other},
        ]
    )
    rng = random.Random(config.seed)
    best_f1 = None
    best_state = None
    for epoch in range(config.epochs):
        model.train()
        rng.shuffle(samples)
        for start in range(0, len(samples), config.batch_size):
            batch = samples[start : start + config.batch_size]
            optimizer.zero_grad()
            total = 0.0
            for doc, sent, records, gold in batch:
                emissions = model(sent, doc, records)
                total = total + sequence_loss(emissions, gold, mode, model.crf)
            (total / len(batch)).backward()
            optimizer.step()
        f1 = _dev_f1(model, dev_docs, config, task)
        if best_f1 is None or f1 > best_f1:
            best_f1 = f1
            best_state = copy.deepcopy(model.state_dict())
    if best_state is None or not torch.isfinite(torch.tensor(best_f1)):
        raise ContractError("validation F1 never became finite")
    model.load_state_dict(best_state)
    model.eval()
    return Checkpoint(model, config, task)


def _dev_f1(model, dev_docs, config, task):
    ckpt = Checkpoint(model, config, task)
    pred = predict_segments(dev_docs, ckpt)
    if task == "seg":
        return score_segmentation(dev_docs, pred).f1
    return score_connectives(dev_docs, pred).f1


def predict_segments(docs, checkpoint):
    """Label copies of the documents with the checkpoint's predictions."""
    model = checkpoint.model
    tagset = model.dims.tagset
    if checkpoint.task not in ("seg", "conn"):
        raise ContractError("checkpoint task %r is not a tagging task" % checkpoint.task)
    mode = checkpoint.config.decode_mode
    out_docs = []
    model.eval()
    with torch.no_grad():
        for doc in docs:
            out = copy.deepcopy(doc)
            records = features_seg.extract_seg_features(out)
            offset = 0
            for sent in out.sentences:
                recs = records[offset : offset + len(sent.tokens)]
                offset += len(sent.tokens)
                if not sent.tokens:
                    continue
                emissions = model(sent, out, recs)
                idxs = decode_labels(emissions, mode, model.crf, constrained=True)
                for tok, idx in zip(sent.tokens, idxs):
                    tok.seg_label = tag_to_label(tagset[idx])
            out_docs.append(out)
    return out_docs
