"""Per-token hand-crafted features for segmentation and connective detection.

Also home to the categorical-embedding sizing rule and the signed-log
numeric scaling shared with the relation classifier.
"""

import math
from dataclasses import dataclass, fields

from .errors import ContractError

ABSENT = "<absent>"
OOV = "<oov>"

SENT_TYPES = ("decl", "q", "imp", "sub", "frag", "intj", "ger", "inf", "wh", "other")
CASE_SHAPES = ("lower", "upper", "title", "mixed", "none")

WH_WORDS = {
    "what", "who", "whom", "whose", "which", "where", "when", "why", "how",
}

# Field order here is the TSV dump column order.
@dataclass
class TokenFeatureRecord:
    upos: str
    xpos: str
    deprel: str
    head_distance: int
    sent_type: str
    genre: str
    sent_length: int
    sent_doc_percentile: float
    token_len: int
    case_shape: str
    is_sent_first: bool
    is_sent_last: bool


CATEGORICAL_FEATURES = ("upos", "xpos", "deprel", "sent_type", "genre", "case_shape")
NUMERIC_FEATURES = (
    "head_distance",
    "sent_length",
    "sent_doc_percentile",
    "token_len",
    "is_sent_first",
    "is_sent_last",
)

FIELD_ORDER = tuple(f.name for f in fields(TokenFeatureRecord))


def categorical_embed_dim(cardinality):
    """Embedding width for a categorical feature: ceil(sqrt(#labels))."""
    if cardinality < 1:
        raise ContractError("cardinality must be >= 1, got %r" % cardinality)
    return math.isqrt(cardinality - 1) + 1


def scale_numeric(x):
    """Signed log scaling: sign(x) * ln(1 + |x|)."""
    if not math.isfinite(x):
        raise ContractError("non-finite numeric feature value %r" % x)
    return math.copysign(math.log1p(abs(x)), x)


def case_shape(form):
    letters = [c for c in form if c.isalpha()]
    if not letters:
        return "none"
    if all(c.islower() for c in letters):
        return "lower"
    if all(c.isupper() for c in letters):
        return "upper"
    if form[:1].isupper() and all(c.islower() for c in letters[1:]):
        return "title"
    return "mixed"


def _root_token(sent):
    for tok in sent.tokens:
        if tok.head == 0:
            return tok
    return None


def sentence_type(sent):
    """Classify a sentence's type via a fixed rule cascade."""
    if not sent.tokens:
        raise ContractError("cannot type an empty sentence")
    last = sent.tokens[-1].form
    if last in ("?", "？"):
        return "q"
    first = sent.tokens[0]
    if first.form.lower() in WH_WORDS:
        return "wh"
    if len(sent.tokens) == 1 and first.upos == "INTJ":
        return "intj"
    root = _root_token(sent)
    if root is not None and root.upos in ("VERB", "AUX"):
        mood = root.feats.get("Mood")
        if mood == "Sub":
            return "sub"
        if mood == "Imp":
            return "imp"
        has_subj = any(
            t.deprel and t.deprel.split(":")[0] in ("nsubj", "csubj", "expl")
            for t in sent.tokens
        )
        if root is first and not has_subj:
            return "imp"
        verb_form = root.feats.get("VerbForm")
        if verb_form == "Ger":
            return "ger"
        if verb_form == "Inf":
            return "inf"
        return "decl"
    if root is not None:
        return "frag"
    return "other"


def extract_seg_features(doc):
    """One TokenFeatureRecord per token, in document order."""
    records = []
    n_sents = len(doc.sentences)
    for sent in doc.sentences:
        stype = sentence_type(sent) if sent.tokens else "other"
        if n_sents > 1:
            percentile = sent.index_in_doc / (n_sents - 1)
        else:
            percentile = 0.0
        for i, tok in enumerate(sent.tokens):
            if tok.head is None or tok.head == 0:
                head_distance = 0
            else:
                head_distance = tok.head - tok.index
            records.append(
                TokenFeatureRecord(
                    upos=tok.upos if tok.upos is not None else ABSENT,
                    xpos=tok.xpos if tok.xpos is not None else ABSENT,
                    deprel=tok.deprel if tok.deprel is not None else ABSENT,
                    head_distance=head_distance,
                    sent_type=stype,
                    genre=doc.genre if doc.genre is not None else ABSENT,
                    sent_length=len(sent.tokens),
                    sent_doc_percentile=percentile,
                    token_len=len(tok.form),
                    case_shape=case_shape(tok.form),
                    is_sent_first=i == 0,
                    is_sent_last=i == len(sent.tokens) - 1,
                )
            )
    return records


class FeatureVocab:
    """Dense label -> index map with index 0 reserved for OOV."""

    def __init__(self, labels=()):
        self.index = {OOV: 0}
        for lab in labels:
            self.add(lab)

    def add(self, label):
        if label not in self.index:
            self.index[label] = len(self.index)

    def lookup(self, label):
        return self.index.get(label, 0)

    @property
    def cardinality(self):
        return len(self.index)

    def to_list(self):
        return [lab for lab, _ in sorted(self.index.items(), key=lambda kv: kv[1])]

    @classmethod
    def from_list(cls, labels):
        vocab = cls()
        for lab in labels:
            vocab.add(lab)
        return vocab


def build_seg_vocabs(docs):
    """Build per-feature vocabularies from training documents only."""
    vocabs = {name: FeatureVocab() for name in CATEGORICAL_FEATURES}
    for doc in docs:
        for rec in extract_seg_features(doc):
            for name in CATEGORICAL_FEATURES:
                vocabs[name].add(getattr(rec, name))
    return vocabs


def feature_width(vocabs):
    """Total feature embedding width d_feat for a vocab set."""
    cat = sum(categorical_embed_dim(vocabs[n].cardinality) for n in CATEGORICAL_FEATURES)
    return cat + len(NUMERIC_FEATURES)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.6f" % value
    return str(value)


def dump_features_tsv(records):
    """TSV dump of records, one row per token, columns in field order."""
    lines = ["\t".join(FIELD_ORDER)]
    for rec in records:
        lines.append("\t".join(_fmt(getattr(rec, name)) for name in FIELD_ORDER))
    return "\n".join(lines) + "\n"
