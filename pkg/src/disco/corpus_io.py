"""Readers and writers for the shared-task file formats (.conllu, .tok, .rels).

All parsing normalizes CRLF to LF and assumes UTF-8. Serialization is
deterministic and, for unchanged labels, byte-identical to the input.
"""

import enum
import warnings
from dataclasses import dataclass, field

from .errors import ContractError, FormatError

# Segmentation / connective labels carried on tokens.
BEGIN_SEG = "BeginSeg"
B_CONN = "B-Conn"
I_CONN = "I-Conn"

_MISC_BY_LABEL = {BEGIN_SEG: "BeginSeg=Yes", B_CONN: "Seg=B-Conn", I_CONN: "Seg=I-Conn"}
_LABEL_BY_MISC = {v: k for k, v in _MISC_BY_LABEL.items()}


class Direction(enum.Enum):
    LEFT_TO_RIGHT = "1>2"
    RIGHT_TO_LEFT = "1<2"


@dataclass
class Token:
    index: int
    form: str
    lemma: str = None
    upos: str = None
    xpos: str = None
    feats: dict = field(default_factory=dict)
    head: int = None
    deprel: str = None
    misc_items: list = field(default_factory=list)
    seg_label: str = None
    deps_str: str = "_"
    feats_str: str = "_"

    def misc(self):
        """MISC column as a key -> value dict (bare flags map to None)."""
        out = {}
        for item in self.misc_items:
            if "=" in item:
                k, v = item.split("=", 1)
                out[k] = v
            else:
                out[item] = None
        return out


@dataclass
class Sentence:
    index_in_doc: int
    tokens: list
    speaker: str = None
    sent_type: str = None
    comments: list = field(default_factory=list)


@dataclass
class Document:
    doc_id: str
    sentences: list
    genre: str = None
    language: str = "und"
    framework: str = "rst"

    def all_tokens(self):
        return [t for s in self.sentences for t in s.tokens]

    def token_count(self):
        return sum(len(s.tokens) for s in self.sentences)


@dataclass
class RelationInstance:
    doc_id: str
    unit1_spans: list
    unit2_spans: list
    unit1_text: str
    unit2_text: str
    unit1_sent_text: str
    unit2_sent_text: str
    direction: Direction
    label: str
    sent1_spans: list = None
    sent2_spans: list = None
    orig_label: str = None
    raw_fields: list = None
    columns: tuple = None


REL_COLUMNS = (
    "doc",
    "unit1_toks",
    "unit2_toks",
    "unit1_txt",
    "unit2_txt",
    "s1_toks",
    "s2_toks",
    "unit1_sent",
    "unit2_sent",
    "dir",
    "orig_label",
    "label",
)


def _normalize(text):
    return text.replace("\r\n", "\n").replace("\r", "\n")


def _parse_token_line(cols, lineno, require_syntax):
    try:
        index = int(cols[0])
    except ValueError:
        raise FormatError("non-integer token id %r" % cols[0], lineno)
    head = None
    if cols[6] != "_":
        try:
            head = int(cols[6])
        except ValueError:
            raise FormatError("non-integer head %r" % cols[6], lineno)
        if head < 0:
            raise FormatError("negative head %d" % head, lineno)
        if head == index:
            raise FormatError("token %d is its own head" % index, lineno)
    feats = {}
    if cols[5] != "_":
        for item in cols[5].split("|"):
            if "=" in item:
                k, v = item.split("=", 1)
                feats[k] = v
    misc_items = [] if cols[9] == "_" else cols[9].split("|")
    seg_label = None
    for item in misc_items:
        if item in _LABEL_BY_MISC:
            seg_label = _LABEL_BY_MISC[item]
    return Token(
        index=index,
        form=cols[1],
        lemma=None if cols[2] == "_" else cols[2],
        upos=None if cols[3] == "_" else cols[3],
        xpos=None if cols[4] == "_" else cols[4],
        feats=feats,
        head=head,
        deprel=None if cols[7] == "_" else cols[7],
        misc_items=misc_items,
        seg_label=seg_label,
        deps_str=cols[8],
        feats_str=cols[5],
    )


def bio_violations(labels):
    """Positions where I-Conn is not preceded by B-Conn or I-Conn."""
    bad = []
    prev = None
    for i, lab in enumerate(labels):
        if lab == I_CONN and prev not in (B_CONN, I_CONN):
            bad.append(i)
        prev = lab
    return bad


def _parse_conllu_like(text, default_doc_id):
    docs = []
    cur_doc = None
    cur_tokens = []
    cur_comments = []
    cur_speaker = None

    def close_sentence():
        nonlocal cur_tokens, cur_comments, cur_speaker
        if cur_tokens:
            sent = Sentence(
                index_in_doc=len(cur_doc.sentences),
                tokens=cur_tokens,
                speaker=cur_speaker,
                comments=cur_comments,
            )
            cur_doc.sentences.append(sent)
        elif cur_comments and cur_doc is not None:
            # trailing comments with no tokens: keep them on a dummy slot
            if cur_doc.sentences:
                cur_doc.sentences[-1].comments.extend(cur_comments)
        cur_tokens = []
        cur_comments = []
        cur_speaker = None

    for lineno, line in enumerate(_normalize(text).split("\n"), start=1):
        if line.strip() == "":
            close_sentence()
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("newdoc id"):
                close_sentence()
                cur_comments = [line]
                cur_doc = Document(doc_id=body.split("=", 1)[1].strip(), sentences=[])
                docs.append(cur_doc)
                continue
            cur_comments.append(line)
            if body.startswith("speaker"):
                cur_speaker = body.split("=", 1)[1].strip() if "=" in body else None
            elif body.startswith(("genre", "meta::genre")) and cur_doc is not None:
                if "=" in body:
                    cur_doc.genre = body.split("=", 1)[1].strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise FormatError("expected 10 columns, got %d" % len(cols), lineno)
        if cur_doc is None:
            cur_doc = Document(doc_id=default_doc_id, sentences=[])
            docs.append(cur_doc)
        tok = _parse_token_line(cols, lineno, require_syntax=False)
        if "speaker" in tok.misc() and cur_speaker is None:
            cur_speaker = tok.misc()["speaker"]
        cur_tokens.append(tok)
    close_sentence()

    for doc in docs:
        labels = [t.seg_label for t in doc.all_tokens()]
        bad = bio_violations(labels)
        if bad:
            warnings.warn(
                "document %s: I-Conn without open B-Conn at token positions %s"
                % (doc.doc_id, bad)
            )
    return [d for d in docs if d.token_count() > 0]


def parse_conllu(text, default_doc_id="document", language="und", framework="rst"):
    """Parse CoNLL-U text into Documents with syntax and seg labels."""
    docs = _parse_conllu_like(text, default_doc_id)
    for d in docs:
        d.language = language
        d.framework = framework
    return docs


def parse_tok(text, default_doc_id="document", language="und", framework="rst"):
    """Parse .tok text; same layout as .conllu but syntax columns may be `_`.

    Each original blank-line grouping becomes one degenerate sentence;
    callers re-split via sentence_pipeline for the plain scenario.
    """
    return parse_conllu(text, default_doc_id, language, framework)


def _misc_with_label(misc_items, label):
    new_item = _MISC_BY_LABEL.get(label)
    out = []
    placed = False
    for item in misc_items:
        if item in _LABEL_BY_MISC:
            if new_item is not None and not placed:
                out.append(new_item)
                placed = True
        else:
            out.append(item)
    if new_item is not None and not placed:
        out.append(new_item)
    return out


def _token_line(tok, label):
    misc_items = _misc_with_label(tok.misc_items, label)
    cols = [
        str(tok.index),
        tok.form,
        tok.lemma if tok.lemma is not None else "_",
        tok.upos if tok.upos is not None else "_",
        tok.xpos if tok.xpos is not None else "_",
        tok.feats_str,
        str(tok.head) if tok.head is not None else "_",
        tok.deprel if tok.deprel is not None else "_",
        tok.deps_str,
        "|".join(misc_items) if misc_items else "_",
    ]
    return "\t".join(cols)


def serialize_seg_predictions(doc, labels):
    """Serialize a document with per-token seg labels swapped into MISC."""
    if len(labels) != doc.token_count():
        raise ContractError(
            "label count %d != token count %d" % (len(labels), doc.token_count())
        )
    lines = []
    i = 0
    for sent in doc.sentences:
        lines.extend(sent.comments)
        for tok in sent.tokens:
            lines.append(_token_line(tok, labels[i]))
            i += 1
        lines.append("")
    return "\n".join(lines) + "\n" if lines else ""


def parse_span_expr(expr):
    """Parse `a-b` ranges joined by `,` into a list of inclusive (a, b) pairs."""
    spans = []
    for part in expr.split(","):
        part = part.strip()
        if "-" in part:
            lo, _, hi = part.partition("-")
        else:
            lo = hi = part
        try:
            span = (int(lo), int(hi))
        except ValueError:
            raise FormatError("malformed span expression %r" % expr)
        if span[0] > span[1]:
            raise FormatError("descending span in %r" % expr)
        spans.append(span)
    if not spans:
        raise FormatError("empty span expression")
    prev_hi = None
    for lo, hi in spans:
        if prev_hi is not None and lo <= prev_hi:
            raise FormatError("overlapping or unordered ranges in %r" % expr)
        prev_hi = hi
    return spans


def span_token_set(spans):
    out = set()
    for lo, hi in spans:
        out.update(range(lo, hi + 1))
    return out


def parse_rels(text):
    """Parse a .rels file into RelationInstances."""
    lines = [ln for ln in _normalize(text).split("\n") if ln.strip() != ""]
    if not lines:
        return []
    header = tuple(lines[0].split("\t"))
    col_idx = {}
    for name in REL_COLUMNS:
        if name not in header:
            raise FormatError("missing required column %r" % name, 1)
        col_idx[name] = header.index(name)
    instances = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) < len(header):
            raise FormatError(
                "expected %d fields, got %d" % (len(header), len(fields)), lineno
            )
        get = lambda name: fields[col_idx[name]]
        dir_str = get("dir")
        try:
            direction = Direction(dir_str)
        except ValueError:
            raise FormatError("unknown direction %r" % dir_str, lineno)
        u1 = parse_span_expr(get("unit1_toks"))
        u2 = parse_span_expr(get("unit2_toks"))
        if span_token_set(u1) & span_token_set(u2):
            raise FormatError("unit1 and unit2 spans overlap", lineno)
        instances.append(
            RelationInstance(
                doc_id=get("doc"),
                unit1_spans=u1,
                unit2_spans=u2,
                unit1_text=get("unit1_txt"),
                unit2_text=get("unit2_txt"),
                unit1_sent_text=get("unit1_sent"),
                unit2_sent_text=get("unit2_sent"),
                direction=direction,
                label=get("label"),
                sent1_spans=parse_span_expr(get("s1_toks")),
                sent2_spans=parse_span_expr(get("s2_toks")),
                orig_label=get("orig_label"),
                raw_fields=fields,
                columns=header,
            )
        )
    return instances


def format_span_expr(spans):
    return ",".join("%d-%d" % (lo, hi) if lo != hi else str(lo) for lo, hi in spans)


def serialize_rels(instances, labels=None):
    """Serialize instances back to .rels text, optionally with new labels."""
    if labels is not None and len(labels) != len(instances):
        raise ContractError(
            "prediction count %d != instance count %d" % (len(labels), len(instances))
        )
    header = instances[0].columns if instances and instances[0].columns else REL_COLUMNS
    label_col = header.index("label")
    lines = ["\t".join(header)]
    for i, inst in enumerate(instances):
        if inst.raw_fields is not None:
            fields = list(inst.raw_fields)
        else:
            fields = [""] * len(header)
            values = {
                "doc": inst.doc_id,
                "unit1_toks": format_span_expr(inst.unit1_spans),
                "unit2_toks": format_span_expr(inst.unit2_spans),
                "unit1_txt": inst.unit1_text,
                "unit2_txt": inst.unit2_text,
                "s1_toks": format_span_expr(inst.sent1_spans or inst.unit1_spans),
                "s2_toks": format_span_expr(inst.sent2_spans or inst.unit2_spans),
                "unit1_sent": inst.unit1_sent_text,
                "unit2_sent": inst.unit2_sent_text,
                "dir": inst.direction.value,
                "orig_label": inst.orig_label or inst.label,
                "label": inst.label,
            }
            for k, v in values.items():
                fields[header.index(k)] = v
        fields[label_col] = labels[i] if labels is not None else inst.label
        lines.append("\t".join(fields))
    return "\n".join(lines) + "\n"


def serialize_rel_predictions(instances, predicted_labels):
    """Serialize instances with the label column replaced by predictions."""
    return serialize_rels(instances, labels=predicted_labels)
