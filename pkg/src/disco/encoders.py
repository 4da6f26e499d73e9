"""Transformer encoders used for contextualized word embeddings.

The encoder identity is a config string resolved through a registry.
Bundled encoders are small randomly initialized transformers whose weights
are a deterministic function of the name (cacheable via DISCO_CACHE), with
the same surface a pretrained model would expose: a subword tokenizer, an
embedding layer, encoder blocks, and an NSP-style pooler. The embedding
layer and the blocks are separately callable so that feature vectors can be
injected between them.
"""

import hashlib
import os
import re

import torch
import torch.nn as nn

from .errors import ConfigError, ContractError

PAD_ID, UNK_ID, CLS_ID, SEP_ID = 0, 1, 2, 3
N_SPECIALS = 4


class SubwordTokenizer:
    """Character-level subword tokenizer with a fixed hashed vocabulary."""

    def __init__(self, vocab_size=512):
        self.vocab_size = vocab_size

    def subword_ids(self, word):
        """Subword ids for one word; never empty (falls back to UNK)."""
        if word == "[CLS]":
            return [CLS_ID]
        if word == "[SEP]":
            return [SEP_ID]
        ids = [N_SPECIALS + (ord(c) % (self.vocab_size - N_SPECIALS)) for c in word]
        return ids or [UNK_ID]

    def encode_words(self, words):
        """ids with [CLS]/[SEP] specials plus per-word (start, end) spans.

        Spans index into the id sequence and exclude the specials.
        """
        ids = [CLS_ID]
        spans = []
        for w in words:
            sub = self.subword_ids(w)
            spans.append((len(ids), len(ids) + len(sub)))
            ids.extend(sub)
        ids.append(SEP_ID)
        return ids, spans


class ToyTransformerEncoder(nn.Module):
    """Small BERT-shaped encoder: embeddings, blocks, and a tanh pooler."""

    def __init__(self, hidden_size=32, num_layers=2, num_heads=4, max_len=512,
                 vocab_size=512, ffn_size=None):
        super().__init__()
        self.hidden_size = hidden_size
        self.max_len = max_len
        self.tokenizer = SubwordTokenizer(vocab_size)
        self.tok_emb = nn.Embedding(vocab_size, hidden_size, padding_idx=PAD_ID)
        self.pos_emb = nn.Embedding(max_len, hidden_size)
        self.seg_emb = nn.Embedding(2, hidden_size)
        self.emb_norm = nn.LayerNorm(hidden_size)
        layer = nn.TransformerEncoderLayer(
            d_model=hidden_size,
            nhead=num_heads,
            dim_feedforward=ffn_size or 4 * hidden_size,
            batch_first=True,
            dropout=0.0,
        )
        self.blocks = nn.TransformerEncoder(
            layer, num_layers=num_layers, enable_nested_tensor=False
        )
        self.pooler = nn.Linear(hidden_size, hidden_size)

    def embed(self, ids, segment_ids=None):
        """Embedding-layer output [L, hidden], before any encoder block."""
        ids_t = torch.as_tensor(ids, dtype=torch.long)
        pos = torch.arange(len(ids), dtype=torch.long)
        out = self.tok_emb(ids_t) + self.pos_emb(pos)
        if segment_ids is not None:
            out = out + self.seg_emb(torch.as_tensor(segment_ids, dtype=torch.long))
        return self.emb_norm(out)

    def encode(self, embedded, mask=None):
        """Run encoder blocks over embedding-layer output [L, hidden]."""
        x = embedded.unsqueeze(0)
        pad_mask = None
        if mask is not None:
            pad_mask = (torch.as_tensor(mask) == 0).unsqueeze(0)
        return self.blocks(x, src_key_padding_mask=pad_mask).squeeze(0)

    def pool(self, hidden_states):
        """NSP-style pooled representation from the first position."""
        return torch.tanh(self.pooler(hidden_states[0]))

    def word_vectors(self, words):
        """Average-pooled word-level vectors [n_words, hidden].

        Specials are excluded from pooling; words whose subwords overflow
        max_len are handled with overlapping windows, pooling each word
        from the window where it sits most centrally.
        """
        ids, spans = self.tokenizer.encode_words(words)
        if len(ids) <= self.max_len:
            states = self.encode(self.embed(ids))
            return pool_subwords(states, spans)
        return self._windowed_word_vectors(ids, spans)

    def _windowed_word_vectors(self, ids, spans):
        window, stride = self.max_len, self.max_len // 2
        starts = list(range(0, max(1, len(ids) - window + 1), stride))
        if starts[-1] + window < len(ids):
            starts.append(len(ids) - window)
        out = [None] * len(spans)
        best = [float("inf")] * len(spans)
        for s in starts:
            chunk = ids[s : s + window]
            states = self.encode(self.embed(chunk))
            center = s + len(chunk) / 2
            for w, (lo, hi) in enumerate(spans):
                if lo >= s and hi <= s + len(chunk):
                    dist = abs((lo + hi) / 2 - center)
                    if dist < best[w]:
                        best[w] = dist
                        out[w] = states[lo - s : hi - s].mean(dim=0)
        missing = [w for w, v in enumerate(out) if v is None]
        if missing:
            raise ContractError("words %r did not fit any encoder window" % missing)
        return torch.stack(out)


def pool_subwords(states, spans):
    """Mean-pool encoder states over each word's subword span."""
    rows = []
    for lo, hi in spans:
        if hi <= lo:
            raise ContractError("empty subword span")
        rows.append(states[lo:hi].mean(dim=0))
    return torch.stack(rows) if rows else states.new_zeros((0, states.shape[-1]))

_TOY_NAME = re.compile(r"^toy(?:-(\d+))?(?:-(\d+))?$")


def resolve_encoder(name, max_len=512):
    """Build (or load from DISCO_CACHE) the encoder a config string names.

    Names: ``toy``, ``toy-<hidden>``, ``toy-<hidden>-<layers>``. Weights
    are a deterministic function of the name.
    """
    m = _TOY_NAME.match(name)
    if not m:
        raise ConfigError(
            "unknown encoder %r (bundled encoders: toy, toy-<hidden>, "
            "toy-<hidden>-<layers>)" % name
        )
    hidden = int(m.group(1) or 32)
    layers = int(m.group(2) or 2)
    heads = 4 if hidden % 4 == 0 else 1
    cache_dir = os.environ.get("DISCO_CACHE")
    cache_path = None
    if cache_dir:
        cache_path = os.path.join(cache_dir, "%s_len%d.pt" % (name, max_len))
    seed = int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "big")
    with torch.random.fork_rng():
        torch.manual_seed(seed)
        enc = ToyTransformerEncoder(hidden_size=hidden, num_layers=layers,
                                    num_heads=heads, max_len=max_len)
    if cache_path and os.path.exists(cache_path):
        enc.load_state_dict(torch.load(cache_path, weights_only=True))
    elif cache_path:
        os.makedirs(cache_dir, exist_ok=True)
        torch.save(enc.state_dict(), cache_path)
    return enc
