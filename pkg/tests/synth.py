"""Rule-generated synthetic corpora for training tests."""

import random
import string

def _filler_vocab(rng, n=60, length=5):
    words = set()
    while len(words) < n:
        words.add("".join(rng.choice(string.ascii_lowercase) for _ in range(length)))
    return sorted(words)


# one shared "language": train/dev/test draws come from the same vocabulary
FILLER = _filler_vocab(random.Random(987), n=80)


def _conllu_doc(doc_id, sentences, labels):
    """sentences: list of list of forms; labels: parallel seg labels or None."""
    lines = ["# newdoc id = %s" % doc_id]
    for forms, labs in zip(sentences, labels):
        for i, form in enumerate(forms):
            if labs[i] == "BeginSeg":
                misc = "BeginSeg=Yes"
            elif labs[i] in ("B-Conn", "I-Conn"):
                misc = "Seg=%s" % labs[i]
            else:
                misc = "_"
            head = "0" if i == 0 else "1"
            deprel = "root" if i == 0 else "dep"
            upos = "PUNCT" if form in ".!?" else "NOUN"
            lines.append(
                "\t".join([str(i + 1), form, form, upos, upos, "_", head,
                           deprel, "_", misc])
            )
        lines.append("")
    return "\n".join(lines) + "\n"


def make_seg_corpus(n_docs, seed=0):
    """Boundary iff the token follows sentence-final punctuation or begins a
    document. Sentences end in ., ! or ?, so every sentence-initial token is
    a boundary."""
    rng = random.Random(seed)
    vocab = FILLER[:60]
    out = []
    for d in range(n_docs):
        sents = []
        labels = []
        for s in range(rng.randint(1, 3)):
            n = rng.randint(3, 7)
            forms = [rng.choice(vocab) for _ in range(n)] + [rng.choice(".!?")]
            labs = ["BeginSeg"] + [None] * n
            sents.append(forms)
            labels.append(labs)
        out.append(_conllu_doc("synth_seg_%03d" % d, sents, labels))
    return "".join(out)


CONNECTIVES = [
    ("however",),
    ("because",),
    ("meanwhile",),
    ("therefore",),
    ("moreover",),
    ("nonetheless",),
    ("thus",),
    ("as", "soon", "as"),
    ("even", "though"),
    ("in", "fact"),
]


def make_conn_corpus(n_docs, seed=0):
    """A fixed 10-entry connective lexicon is BIO-marked wherever inserted."""
    rng = random.Random(seed)
    vocab = [w for w in FILLER[:60] if w not in {w for c in CONNECTIVES for w in c}]
    out = []
    for d in range(n_docs):
        sents = []
        labels = []
        for s in range(rng.randint(1, 3)):
            n = rng.randint(4, 8)
            forms = [rng.choice(vocab) for _ in range(n)]
            labs = [None] * n
            if rng.random() < 0.7:
                conn = rng.choice(CONNECTIVES)
                pos = rng.randrange(0, len(forms) + 1)
                forms[pos:pos] = list(conn)
                labs[pos:pos] = ["B-Conn"] + ["I-Conn"] * (len(conn) - 1)
            forms.append(".")
            labs.append(None)
            sents.append(forms)
            labels.append(labs)
        out.append(_conllu_doc("synth_conn_%03d" % d, sents, labels))
    return "".join(out)


def make_rel_corpus(n_docs, seed=0):
    """Relations whose label is a deterministic function of
    (direction, lexical_overlap > 0). Returns (conllu_text, rels_text)."""
    rng = random.Random(seed)
    base = FILLER
    vocab_a, vocab_b, shared = base[:30], base[30:60], base[60:]
    conllu_parts = []
    rel_rows = []
    header = ("doc\tunit1_toks\tunit2_toks\tunit1_txt\tunit2_txt\ts1_toks\t"
              "s2_toks\tunit1_sent\tunit2_sent\tdir\torig_label\tlabel")
    for d in range(n_docs):
        doc_id = "synth_rel_%03d" % d
        u1 = [rng.choice(vocab_a) for _ in range(rng.randint(3, 6))]
        u2 = [rng.choice(vocab_b) for _ in range(rng.randint(3, 6))]
        overlap = rng.random() < 0.5
        if overlap:
            w = rng.choice(shared)
            u1[rng.randrange(len(u1))] = w
            u2[rng.randrange(len(u2))] = w
        else:
            # decoy: distinct rare words on each side, so the mere presence
            # of a rare word carries no signal; only cross-unit identity does
            w1, w2 = rng.sample(shared, 2)
            u1[rng.randrange(len(u1))] = w1
            u2[rng.randrange(len(u2))] = w2
        direction = rng.choice(["1>2", "1<2"])
        label = ("lr" if direction == "1>2" else "rl") + ("-ov" if overlap else "-no")
        sents = [u1, u2]
        labels = [["BeginSeg"] + [None] * (len(u1) - 1),
                  ["BeginSeg"] + [None] * (len(u2) - 1)]
        conllu_parts.append(_conllu_doc(doc_id, sents, labels))
        s1 = "1-%d" % len(u1)
        s2 = "%d-%d" % (len(u1) + 1, len(u1) + len(u2))
        rel_rows.append("\t".join(
            [doc_id, s1, s2, " ".join(u1), " ".join(u2), s1, s2,
             " ".join(u1), " ".join(u2), direction, label, label]))
    rels_text = "\n".join([header] + rel_rows) + "\n"
    return "".join(conllu_parts), rels_text
