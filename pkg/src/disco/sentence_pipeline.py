"""Sentence splitting and syntax annotation for the plain-text scenario."""

import subprocess
import warnings

from . import corpus_io
from .corpus_io import Document, Sentence
from .errors import ContractError

# Sentence-final punctuation used by the rule-based splitter; the CJK set is
# exposed so callers can extend it via config.
DEFAULT_SPLIT_CHARS = {".", "!", "?"}
CJK_SPLIT_CHARS = {"。", "！", "？"}  # 。 ！ ？
RULE_LANGUAGES = {"fas", "zho"}


class AnnotatorUnavailableError(RuntimeError):
    """Raised when an external annotator cannot be invoked.

    Callers should fall back to split_on_punctuation with syntax left absent.
    """


def _rebuild_sentences(doc, token_groups):
    sentences = []
    for i, group in enumerate(token_groups):
        toks = []
        for j, tok in enumerate(group):
            tok.index = j + 1
            toks.append(tok)
        sentences.append(Sentence(index_in_doc=i, tokens=toks))
    return Document(
        doc_id=doc.doc_id,
        sentences=sentences,
        genre=doc.genre,
        language=doc.language,
        framework=doc.framework,
    )


def split_on_punctuation(doc, language=None, split_chars=None):
    """Re-split a document's tokens at sentence-final punctuation.

    A boundary is placed after each token in {., !, ?} plus the CJK
    equivalents; trailing tokens form a final sentence.
    """
    tokens = doc.all_tokens()
    if not tokens:
        raise ContractError("cannot split an empty document")
    language = language or doc.language
    if split_chars is None:
        split_chars = DEFAULT_SPLIT_CHARS | CJK_SPLIT_CHARS
    if language not in RULE_LANGUAGES:
        warnings.warn(
            "punctuation-rule splitting was tuned for %s; language %r may need "
            "an external annotator" % (sorted(RULE_LANGUAGES), language)
        )
    groups = []
    current = []
    for tok in tokens:
        current.append(tok)
        if tok.form in split_chars:
            groups.append(current)
            current = []
    if current:
        groups.append(current)
    return _rebuild_sentences(doc, groups)


class ExternalAnnotator:
    """Plug-in contract for third-party sentence splitters and parsers.

    reentrant=False tells the harness to serialize calls across workers.
    """

    reentrant = True

    def split(self, forms):
        """Return sentence lengths partitioning the given token forms."""
        raise NotImplementedError

    def parse(self, forms):
        """Return one (upos, xpos, head, deprel) tuple per form."""
        raise NotImplementedError


class IdentityAnnotator(ExternalAnnotator):
    """Stub annotator: no re-split, dummy tags, root-chain heads."""

    def split(self, forms):
        return [len(forms)]

    def parse(self, forms):
        return [("X", "X", 0 if i == 0 else 1, "root" if i == 0 else "dep") for i in range(len(forms))]


def annotate_syntax(doc, annotator):
    """Re-segment a document per the annotator and fill syntax fields."""
    tokens = doc.all_tokens()
    forms = [t.form for t in tokens]
    lengths = annotator.split(forms)
    if sum(lengths) != len(forms) or any(n <= 0 for n in lengths):
        raise ContractError(
            "annotator split lengths %r do not partition %d tokens"
            % (lengths, len(forms))
        )
    groups = []
    pos = 0
    for n in lengths:
        groups.append(tokens[pos : pos + n])
        pos += n
    out = _rebuild_sentences(doc, groups)
    for sent in out.sentences:
        parses = annotator.parse([t.form for t in sent.tokens])
        if len(parses) != len(sent.tokens):
            raise ContractError(
                "annotator returned %d parses for %d tokens"
                % (len(parses), len(sent.tokens))
            )
        for tok, (upos, xpos, head, deprel) in zip(sent.tokens, parses):
            tok.upos = upos
            tok.xpos = xpos
            tok.head = head
            tok.deprel = deprel
    return out


class SubprocessAnnotator(ExternalAnnotator):
    """Adapter exchanging CoNLL-U text with a subprocess over stdio.

    The subprocess receives one document as CoNLL-U on stdin and must write
    the re-split, parsed document back as CoNLL-U on stdout.
    """

    reentrant = False

    def __init__(self, argv, timeout=300):
        self.argv = argv
        self.timeout = timeout

    def _run(self, forms):
        lines = []
        for i, form in enumerate(forms):
            lines.append("\t".join([str(i + 1), form] + ["_"] * 8))
        payload = "\n".join(lines) + "\n\n"
        try:
            proc = subprocess.run(
                self.argv,
                input=payload.encode("utf-8"),
                stdout=subprocess.PIPE,
                timeout=self.timeout,
                check=True,
            )
        except (OSError, subprocess.SubprocessError) as exc:
            raise AnnotatorUnavailableError(
                "annotator %r failed (%s); fall back to split_on_punctuation "
                "with syntax absent" % (self.argv, exc)
            )
        docs = corpus_io.parse_conllu(proc.stdout.decode("utf-8"))
        if len(docs) != 1:
            raise ContractError("annotator returned %d documents" % len(docs))
        return docs[0]

    def split(self, forms):
        return [len(s.tokens) for s in self._run(forms).sentences]

    def parse(self, forms):
        doc = self._run(forms)
        out = []
        for sent in doc.sentences:
            for t in sent.tokens:
                out.append((t.upos, t.xpos, t.head if t.head is not None else 0, t.deprel))
        return out[: len(forms)]
