"""Builds the bundled 20-sentence miniature corpus (mini.conllu, mini.rels).

Run from the repo root:  python3 tests/oracles/make_mini_corpus.py
The output files are committed; this script exists so the corpus is
reconstructible and so the golden-file oracles have a fixed input.
"""

import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

# Each sentence: list of (form, lemma, upos, xpos, feats, head, deprel, misc)
# Token ids are assigned positionally.

DOCS = []

# --- doc 1: newsy document with genre, 8 sentences ---------------------
d1 = {
    "doc_id": "mini_news_01",
    "genre": "news",
    "speakers": [None] * 8,
    "sents": [
        [
            ("The", "the", "DET", "DT", "_", 2, "det", "BeginSeg=Yes"),
            ("mayor", "mayor", "NOUN", "NN", "Number=Sing", 3, "nsubj", "_"),
            ("announced", "announce", "VERB", "VBD", "Tense=Past", 0, "root", "_"),
            ("a", "a", "DET", "DT", "_", 5, "det", "_"),
            ("plan", "plan", "NOUN", "NN", "Number=Sing", 3, "obj", "BeginSeg=Yes"),
            (".", ".", "PUNCT", ".", "_", 3, "punct", "_"),
        ],
        [
            ("Because", "because", "SCONJ", "IN", "_", 4, "mark", "BeginSeg=Yes"),
            ("funding", "funding", "NOUN", "NN", "Number=Sing", 4, "nsubj", "_"),
            ("was", "be", "AUX", "VBD", "Mood=Ind", 4, "cop", "_"),
            ("low", "low", "ADJ", "JJ", "Degree=Pos", 0, "root", "_"),
            (",", ",", "PUNCT", ",", "_", 7, "punct", "_"),
            ("work", "work", "NOUN", "NN", "Number=Sing", 7, "nsubj", "BeginSeg=Yes"),
            ("stopped", "stop", "VERB", "VBD", "Tense=Past", 4, "advcl", "_"),
            (".", ".", "PUNCT", ".", "_", 4, "punct", "_"),
        ],
        [
            ("Why", "why", "ADV", "WRB", "PronType=Int", 4, "advmod", "BeginSeg=Yes"),
            ("did", "do", "AUX", "VBD", "Mood=Ind", 4, "aux", "_"),
            ("it", "it", "PRON", "PRP", "Number=Sing", 4, "nsubj", "_"),
            ("fail", "fail", "VERB", "VB", "VerbForm=Inf", 0, "root", "_"),
            ("?", "?", "PUNCT", ".", "_", 4, "punct", "_"),
        ],
        [
            ("Nobody", "nobody", "PRON", "NN", "Number=Sing", 2, "nsubj", "BeginSeg=Yes"),
            ("knows", "know", "VERB", "VBZ", "Tense=Pres", 0, "root", "_"),
            (".", ".", "PUNCT", ".", "_", 2, "punct", "_"),
        ],
        [
            ("STOP", "stop", "VERB", "VB", "Mood=Imp", 0, "root", "BeginSeg=Yes"),
            ("the", "the", "DET", "DT", "_", 3, "det", "_"),
            ("cuts", "cut", "NOUN", "NNS", "Number=Plur", 1, "obj", "_"),
            ("!", "!", "PUNCT", ".", "_", 1, "punct", "_"),
        ],
        [
            ("If", "if", "SCONJ", "IN", "_", 5, "mark", "BeginSeg=Yes"),
            ("only", "only", "ADV", "RB", "_", 5, "advmod", "_"),
            ("they", "they", "PRON", "PRP", "Number=Plur", 5, "nsubj", "_"),
            ("had", "have", "AUX", "VBD", "Mood=Sub", 5, "aux", "_"),
            ("listened", "listen", "VERB", "VBN", "Mood=Sub", 0, "root", "_"),
            (".", ".", "PUNCT", ".", "_", 5, "punct", "_"),
        ],
        [
            ("A", "a", "DET", "DT", "_", 3, "det", "BeginSeg=Yes"),
            ("total", "total", "ADJ", "JJ", "Degree=Pos", 3, "amod", "_"),
            ("disaster", "disaster", "NOUN", "NN", "Number=Sing", 0, "root", "_"),
            (".", ".", "PUNCT", ".", "_", 3, "punct", "_"),
        ],
        [
            ("Residents", "resident", "NOUN", "NNS", "Number=Plur", 2, "nsubj", "BeginSeg=Yes"),
            ("protested", "protest", "VERB", "VBD", "Tense=Past", 0, "root", "_"),
            ("loudly", "loudly", "ADV", "RB", "_", 2, "advmod", "BeginSeg=Yes"),
            ("downtown", "downtown", "ADV", "RB", "_", 2, "advmod", "_"),
            (".", ".", "PUNCT", ".", "_", 2, "punct", "_"),
        ],
    ],
}
DOCS.append(d1)

# --- doc 2: chat document with speakers, 6 sentences -------------------
d2 = {
    "doc_id": "mini_chat_01",
    "genre": "chat",
    "speakers": ["amy", "amy", "bob", "amy", "bob", "bob"],
    "sents": [
        [
            ("do", "do", "AUX", "VBP", "Mood=Ind", 3, "aux", "BeginSeg=Yes"),
            ("we", "we", "PRON", "PRP", "Number=Plur", 3, "nsubj", "_"),
            ("start", "start", "VERB", "VB", "VerbForm=Inf", 0, "root", "_"),
            ("?", "?", "PUNCT", ".", "_", 3, "punct", "_"),
        ],
        [
            ("no", "no", "INTJ", "UH", "_", 0, "root", "BeginSeg=Yes"),
        ],
        [
            ("thanks", "thanks", "NOUN", "NNS", "Number=Plur", 0, "root", "BeginSeg=Yes"),
        ],
        [
            ("im", "im", "PRON", "PRP", "_", 2, "nsubj", "BeginSeg=Yes"),
            ("ok", "ok", "ADJ", "JJ", "_", 0, "root", "_"),
        ],
        [
            ("wait", "wait", "VERB", "VB", "Mood=Imp", 0, "root", "BeginSeg=Yes"),
            ("for", "for", "ADP", "IN", "_", 3, "case", "_"),
            ("me", "me", "PRON", "PRP", "Number=Sing", 1, "obl", "_"),
        ],
        [
            ("ok", "ok", "INTJ", "UH", "_", 0, "root", "BeginSeg=Yes"),
        ],
    ],
}
DOCS.append(d2)

# --- doc 3: connective-style document, 6 sentences ---------------------
d3 = {
    "doc_id": "mini_conn_01",
    "genre": None,
    "speakers": [None] * 6,
    "sents": [
        [
            ("Prices", "price", "NOUN", "NNS", "Number=Plur", 2, "nsubj", "_"),
            ("rose", "rise", "VERB", "VBD", "Tense=Past", 0, "root", "_"),
            (";", ";", "PUNCT", ",", "_", 2, "punct", "_"),
            ("however", "however", "ADV", "RB", "_", 6, "advmod", "Seg=B-Conn"),
            (",", ",", "PUNCT", ",", "_", 6, "punct", "_"),
            ("sales", "sale", "NOUN", "NNS", "Number=Plur", 7, "nsubj", "_"),
            ("held", "hold", "VERB", "VBD", "Tense=Past", 2, "parataxis", "_"),
            (".", ".", "PUNCT", ".", "_", 2, "punct", "_"),
        ],
        [
            ("As", "as", "ADV", "RB", "_", 4, "advmod", "Seg=B-Conn"),
            ("soon", "soon", "ADV", "RB", "Degree=Pos", 1, "fixed", "Seg=I-Conn"),
            ("as", "as", "SCONJ", "IN", "_", 1, "fixed", "Seg=I-Conn"),
            ("stores", "store", "NOUN", "NNS", "Number=Plur", 5, "nsubj", "_"),
            ("opened", "open", "VERB", "VBD", "Tense=Past", 7, "advcl", "_"),
            (",", ",", "PUNCT", ",", "_", 7, "punct", "_"),
            ("crowds", "crowd", "NOUN", "NNS", "Number=Plur", 0, "root", "_"),
            ("arrived", "arrive", "VERB", "VBD", "Tense=Past", 7, "parataxis", "_"),
            (".", ".", "PUNCT", ".", "_", 7, "punct", "_"),
        ],
        [
            ("But", "but", "CCONJ", "CC", "_", 3, "cc", "Seg=B-Conn"),
            ("nothing", "nothing", "PRON", "NN", "Number=Sing", 3, "nsubj", "_"),
            ("lasted", "last", "VERB", "VBD", "Tense=Past", 0, "root", "_"),
            (".", ".", "PUNCT", ".", "_", 3, "punct", "_"),
        ],
        [
            ("Demand", "demand", "NOUN", "NN", "Number=Sing", 2, "nsubj", "_"),
            ("fell", "fall", "VERB", "VBD", "Tense=Past", 0, "root", "_"),
            ("because", "because", "SCONJ", "IN", "_", 6, "mark", "Seg=B-Conn"),
            ("supply", "supply", "NOUN", "NN", "Number=Sing", 6, "nsubj", "_"),
            ("had", "have", "AUX", "VBD", "Tense=Past", 6, "aux", "_"),
            ("recovered", "recover", "VERB", "VBN", "Tense=Past", 2, "advcl", "_"),
            (".", ".", "PUNCT", ".", "_", 2, "punct", "_"),
        ],
        [
            ("Meanwhile", "meanwhile", "ADV", "RB", "_", 3, "advmod", "Seg=B-Conn"),
            ("rents", "rent", "NOUN", "NNS", "Number=Plur", 3, "nsubj", "_"),
            ("doubled", "double", "VERB", "VBD", "Tense=Past", 0, "root", "_"),
            (".", ".", "PUNCT", ".", "_", 3, "punct", "_"),
        ],
        [
            ("So", "so", "ADV", "RB", "_", 3, "advmod", "Seg=B-Conn"),
            ("people", "people", "NOUN", "NNS", "Number=Plur", 3, "nsubj", "_"),
            ("left", "leave", "VERB", "VBD", "Tense=Past", 0, "root", "_"),
            ("town", "town", "NOUN", "NN", "Number=Sing", 3, "obj", "_"),
            (".", ".", "PUNCT", ".", "_", 3, "punct", "_"),
        ],
    ],
}
DOCS.append(d3)


def conllu_text():
    lines = []
    for doc in DOCS:
        lines.append("# newdoc id = %s" % doc["doc_id"])
        if doc["genre"]:
            lines.append("# meta::genre = %s" % doc["genre"])
        for si, sent in enumerate(doc["sents"]):
            lines.append("# sent_id = %s-%d" % (doc["doc_id"], si + 1))
            speaker = doc["speakers"][si]
            if speaker:
                lines.append("# speaker = %s" % speaker)
            for ti, (form, lemma, upos, xpos, feats, head, deprel, misc) in enumerate(sent):
                lines.append(
                    "\t".join(
                        [str(ti + 1), form, lemma, upos, xpos, feats,
                         str(head), deprel, "_", misc]
                    )
                )
            lines.append("")
    return "\n".join(lines) + "\n"


# .rels rows over doc 1 and doc 2 (token indexes are document-level, 1-based).
REL_ROWS = [
    # doc, u1_toks, u2_toks, u1_txt, u2_txt, s1, s2, u1_sent, u2_sent, dir, orig, label
    ("mini_news_01", "1-5", "7-14", "The mayor announced a plan",
     "Because funding was low , work stopped .",
     "1-6", "7-14", "The mayor announced a plan .",
     "Because funding was low , work stopped .", "1>2", "cause", "cause"),
    ("mini_news_01", "15-19", "20-22", "Why did it fail ?", "Nobody knows .",
     "15-19", "20-22", "Why did it fail ?", "Nobody knows .",
     "1>2", "question", "question"),
    ("mini_news_01", "7-10,12-13", "23-26", "Because funding was low work stopped",
     "STOP the cuts !", "7-14", "23-26",
     "Because funding was low , work stopped .", "STOP the cuts !",
     "1<2", "background", "background"),
    ("mini_news_01", "27-32", "33-36", "If only they had listened .",
     "A total disaster .", "27-32", "33-36", "If only they had listened .",
     "A total disaster .", "1>2", "evaluation", "evaluation"),
    ("mini_news_01", "33-36", "37-41", "A total disaster .",
     "Residents protested loudly downtown .", "33-36", "37-41",
     "A total disaster .", "Residents protested loudly downtown .",
     "1<2", "result", "result"),
    ("mini_chat_01", "1-4", "5", "do we start ?", "no",
     "1-4", "5", "do we start ?", "no", "1>2", "question", "question"),
    ("mini_chat_01", "6", "7-8", "thanks", "im ok",
     "6", "7-8", "thanks", "im ok", "1<2", "acknowledgement", "acknowledgement"),
    ("mini_chat_01", "9-11", "12", "wait for me", "ok",
     "9-11", "12", "wait for me", "ok", "1>2", "question", "acknowledgement"),
]


def rels_text():
    header = ("doc\tunit1_toks\tunit2_toks\tunit1_txt\tunit2_txt\ts1_toks\t"
              "s2_toks\tunit1_sent\tunit2_sent\tdir\torig_label\tlabel")
    return "\n".join([header] + ["\t".join(r) for r in REL_ROWS]) + "\n"


if __name__ == "__main__":
    with open(os.path.join(DATA, "mini.conllu"), "w", encoding="utf-8") as f:
        f.write(conllu_text())
    with open(os.path.join(DATA, "mini.rels"), "w", encoding="utf-8") as f:
        f.write(rels_text())
    n = sum(len(d["sents"]) for d in DOCS)
    print("wrote mini corpus: %d sentences, %d relations" % (n, len(REL_ROWS)))
