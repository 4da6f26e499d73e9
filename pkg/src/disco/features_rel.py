"""Per-instance features for relation classification, with per-corpus
feature selection."""

from dataclasses import dataclass, fields
from importlib import resources

from .corpus_io import Direction, span_token_set
from .errors import ContractError

# Field order here is the TSV dump column order.
@dataclass
class RelFeatureRecord:
    genre: str
    children_u1: int
    children_u2: int
    discontinuous_u1: bool
    discontinuous_u2: bool
    is_sentence_u1: bool
    is_sentence_u2: bool
    length_ratio: float
    same_speaker: str  # "true" / "false" / absent marker
    doc_length: int
    position_u1: float
    position_u2: float
    distance: int
    lexical_overlap: int
    direction: Direction


FIELD_ORDER = tuple(f.name for f in fields(RelFeatureRecord))
ABSENT = "<absent>"

ALL_FEATURES = FIELD_ORDER

CATEGORICAL_REL_FEATURES = (
    "genre",
    "discontinuous_u1",
    "discontinuous_u2",
    "is_sentence_u1",
    "is_sentence_u2",
    "same_speaker",
    "direction",
)
NUMERIC_REL_FEATURES = (
    "children_u1",
    "children_u2",
    "length_ratio",
    "doc_length",
    "position_u1",
    "position_u2",
    "distance",
    "lexical_overlap",
)

# Numeric transform defaults: signed log for counts and lengths, 10
# equal-width bins for document positions.
DEFAULT_TRANSFORMS = {
    "children_u1": "log",
    "children_u2": "log",
    "length_ratio": "log",
    "doc_length": "log",
    "position_u1": "bin:10",
    "position_u2": "bin:10",
    "distance": "log",
    "lexical_overlap": "log",
}

_RST_BASE = ("children_u1", "children_u2", "distance", "position_u1", "position_u2", "direction")
_PDTB_BASE = ("length_ratio", "is_sentence_u1", "is_sentence_u2", "direction")
_DISCONT = ("discontinuous_u1", "discontinuous_u2")

# Per-corpus feature menus; unlisted corpora fall back to the full set.
DEFAULT_FEATURE_MENUS = {
    "eng.sdrt.stac": ("same_speaker", "distance", "position_u1", "position_u2", "direction"),
    "fra.sdrt.annodis": _RST_BASE + _DISCONT,
    "eng.pdtb.pdtb": _PDTB_BASE,
    "tur.pdtb.tdb": _PDTB_BASE,
    "zho.pdtb.cdtb": _PDTB_BASE,
    "eng.rst.gum": _RST_BASE + _DISCONT + ("genre",),
    "eng.rst.rstdt": _RST_BASE + _DISCONT,
    "por.rst.cstn": _RST_BASE + _DISCONT,
    "spa.rst.rststb": _RST_BASE + _DISCONT,
    "zho.rst.sctb": _RST_BASE + _DISCONT,
    "fas.rst.prstc": _RST_BASE + _DISCONT,
    "deu.rst.pcc": _RST_BASE,
    "eus.rst.ert": _RST_BASE + _DISCONT,
    "nld.rst.nldt": _RST_BASE,
    "rus.rst.rrt": _RST_BASE + ("genre",),
    "spa.rst.sctb": _RST_BASE,
}


def feature_menu(corpus_id):
    return DEFAULT_FEATURE_MENUS.get(corpus_id, ALL_FEATURES)


def load_stoplist(language="eng"):
    """Bundled stoplist: one word per line, `#` comments, UTF-8."""
    pkg = resources.files("disco").joinpath("data/stoplists/%s.txt" % language)
    try:
        text = pkg.read_text(encoding="utf-8")
    except FileNotFoundError:
        return frozenset()
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


def lexical_overlap(u1_tokens, u2_tokens, stoplist):
    """Count of case-folded types shared by both units, minus the stoplist."""
    t1 = {w.lower() for w in u1_tokens}
    t2 = {w.lower() for w in u2_tokens}
    return len((t1 & t2) - set(stoplist))


def _unit_inventory(all_instances, doc_id):
    """Distinct unit span-lists in one document, ordered by first token."""
    units = {}
    for inst in all_instances:
        if inst.doc_id != doc_id:
            continue
        for spans in (inst.unit1_spans, inst.unit2_spans):
            units[tuple(spans)] = spans
    return sorted(units.values(), key=lambda spans: spans[0][0])


def unit_distance(inst, all_instances):
    """Number of distinct discourse units strictly between the pair.

    Units are ordered by first token index; a unit counts as between when
    its start lies strictly between the starts of the two units.
    """
    s1 = inst.unit1_spans[0][0]
    s2 = inst.unit2_spans[0][0]
    if span_token_set(inst.unit1_spans) & span_token_set(inst.unit2_spans):
        raise ContractError("overlapping unit pair")
    lo, hi = min(s1, s2), max(s1, s2)
    here = {tuple(inst.unit1_spans), tuple(inst.unit2_spans)}
    count = 0
    for spans in _unit_inventory(all_instances, inst.doc_id):
        if tuple(spans) in here:
            continue
        if lo < spans[0][0] < hi:
            count += 1
    return count


def children_count(unit_spans, all_instances, doc_id, head_is_unit1=True):
    """Incoming dependents of a unit under the head-dependent reading of dir.

    With head_is_unit1 (default), `1>2` makes unit1 the head of unit2.
    """
    key = tuple(unit_spans)
    count = 0
    for inst in all_instances:
        if inst.doc_id != doc_id:
            continue
        if inst.direction is Direction.LEFT_TO_RIGHT:
            head = inst.unit1_spans if head_is_unit1 else inst.unit2_spans
        else:
            head = inst.unit2_spans if head_is_unit1 else inst.unit1_spans
        if tuple(head) == key:
            count += 1
    return count


def _doc_sentence_spans(doc):
    """Document-level (start, end) token index span of each sentence."""
    spans = []
    start = 1
    for sent in doc.sentences:
        end = start + len(sent.tokens) - 1
        spans.append((start, end))
        start = end + 1
    return spans


def _speaker_at(doc, token_index):
    spans = _doc_sentence_spans(doc)
    for (lo, hi), sent in zip(spans, doc.sentences):
        if lo <= token_index <= hi:
            return sent.speaker
    return None


def _unit_token_forms(doc, spans):
    forms = [t.form for t in doc.all_tokens()]
    out = []
    for lo, hi in spans:
        if lo < 1 or hi > len(forms):
            raise ContractError(
                "unit span (%d, %d) outside document of %d tokens" % (lo, hi, len(forms))
            )
        out.extend(forms[lo - 1 : hi])
    return out


def compute_rel_features(inst, doc, all_instances, stoplist=frozenset(),
                         head_is_unit1=True):
    """All Table-style features for one relation instance."""
    if doc.doc_id != inst.doc_id:
        raise ContractError("document %r does not match instance %r" % (doc.doc_id, inst.doc_id))
    doc_length = doc.token_count()
    u1_forms = _unit_token_forms(doc, inst.unit1_spans)
    u2_forms = _unit_token_forms(doc, inst.unit2_spans)
    sent_spans = set(_doc_sentence_spans(doc))

    def is_sentence(spans):
        return len(spans) == 1 and spans[0] in sent_spans

    def discontinuous(spans):
        if len(spans) > 1:
            return True
        return False

    sp1 = _speaker_at(doc, inst.unit1_spans[0][0])
    sp2 = _speaker_at(doc, inst.unit2_spans[0][0])
    if sp1 is None or sp2 is None:
        same_speaker = ABSENT
    else:
        same_speaker = "true" if sp1 == sp2 else "false"
    return RelFeatureRecord(
        genre=doc.genre if doc.genre is not None else ABSENT,
        children_u1=children_count(inst.unit1_spans, all_instances, inst.doc_id, head_is_unit1),
        children_u2=children_count(inst.unit2_spans, all_instances, inst.doc_id, head_is_unit1),
        discontinuous_u1=discontinuous(inst.unit1_spans),
        discontinuous_u2=discontinuous(inst.unit2_spans),
        is_sentence_u1=is_sentence(inst.unit1_spans),
        is_sentence_u2=is_sentence(inst.unit2_spans),
        length_ratio=len(u1_forms) / len(u2_forms),
        same_speaker=same_speaker,
        doc_length=doc_length,
        position_u1=inst.unit1_spans[0][0] / doc_length,
        position_u2=inst.unit2_spans[0][0] / doc_length,
        distance=unit_distance(inst, all_instances),
        lexical_overlap=lexical_overlap(u1_forms, u2_forms, stoplist),
        direction=inst.direction,
    )


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.6f" % value
    if isinstance(value, Direction):
        return value.value
    return str(value)


def dump_rel_features_tsv(records):
    """TSV dump, one row per instance, columns in field order."""
    lines = ["\t".join(FIELD_ORDER)]
    for rec in records:
        lines.append("\t".join(_fmt(getattr(rec, name)) for name in FIELD_ORDER))
    return "\n".join(lines) + "\n"
