import copy

import pytest
import torch

from disco.corpus_io import Direction, parse_conllu, parse_rels
from disco.encoders import resolve_encoder
from disco.errors import ConfigError, ContractError
from disco.features_rel import (
    FIELD_ORDER,
    compute_rel_features,
    load_stoplist,
)
from disco.rel_classifier import (
    RelCheckpoint,
    RelFeatureVectorizer,
    RelModel,
    RelTrainingConfig,
    build_feature_vector,
    build_pair_sequence,
    classify,
    inject_feature_vector,
    predict_relation,
    train_rel_classifier,
)

MINI_CONLLU = "tests/data/mini.conllu"
MINI_RELS = "tests/data/mini.rels"


def load_mini():
    with open(MINI_CONLLU, encoding="utf-8") as f:
        docs = {d.doc_id: d for d in parse_conllu(f.read())}
    with open(MINI_RELS, encoding="utf-8") as f:
        rels = parse_rels(f.read())
    return docs, rels


def mini_triples():
    docs, rels = load_mini()
    stop = load_stoplist("eng")
    return [
        (inst, compute_rel_features(inst, docs[inst.doc_id], rels, stop), inst.label)
        for inst in rels
    ]


class FakeInst:
    def __init__(self, u1, u2, direction):
        self.unit1_text = u1
        self.unit2_text = u2
        self.direction = direction
        self.doc_id = "fake"


def test_pair_sequence_forward_direction_exact():
    inst = FakeInst("do we start ?", "no", Direction.LEFT_TO_RIGHT)
    seq = build_pair_sequence(inst)
    assert seq.text == "[CLS] } do we start ? > [SEP] no [SEP]"
    n_side1 = seq.tokens.index("[SEP]") + 1
    assert seq.segment_ids == [0] * n_side1 + [1] * (len(seq.tokens) - n_side1)


def test_pair_sequence_backward_direction_exact():
    inst = FakeInst("thanks", "im ok", Direction.RIGHT_TO_LEFT)
    seq = build_pair_sequence(inst)
    assert seq.text == "[CLS] thanks [SEP] < im ok { [SEP]"
    assert seq.segment_ids == [0, 0, 0, 1, 1, 1, 1, 1]


def test_pair_sequence_rejects_empty_unit():
    with pytest.raises(ContractError):
        build_pair_sequence(FakeInst("", "ok", Direction.LEFT_TO_RIGHT))


def make_vectorizer(hidden=32, enabled=None):
    torch.manual_seed(0)
    if enabled is None:
        enabled = ("direction", "distance", "lexical_overlap", "genre", "same_speaker")
    return RelFeatureVectorizer(enabled, hidden, genre_labels=["chat", "news"])


def test_vectorizer_layout_contiguous_and_padded():
    vec = make_vectorizer()
    lo_prev = 0
    for name in vec.enabled:
        lo, hi = vec.layout[name]
        assert lo == lo_prev
        assert hi > lo
        lo_prev = hi
    assert vec.width == lo_prev <= vec.hidden_size
    _, rels = load_mini()
    docs, rels = load_mini()
    rec = compute_rel_features(rels[0], docs[rels[0].doc_id], rels)
    out = build_feature_vector(rec, vec)
    assert out.shape == (vec.hidden_size,)
    assert torch.equal(out[vec.width :], torch.zeros(vec.hidden_size - vec.width))


def test_vectorizer_devectorize_round_trip():
    vec = make_vectorizer()
    docs, rels = load_mini()
    rec = compute_rel_features(rels[0], docs[rels[0].doc_id], rels)
    out = build_feature_vector(rec, vec)
    pieces = vec.devectorize(out)
    rebuilt = torch.zeros(vec.hidden_size)
    for name, (lo, hi) in vec.layout.items():
        rebuilt[lo:hi] = pieces[name]
    assert torch.equal(out, rebuilt)


def test_vectorizer_direction_feature_distinguishes():
    vec = make_vectorizer(enabled=("direction",))
    docs, rels = load_mini()
    fwd = next(r for r in rels if r.direction is Direction.LEFT_TO_RIGHT)
    bwd = next(r for r in rels if r.direction is Direction.RIGHT_TO_LEFT)
    rec_f = compute_rel_features(fwd, docs[fwd.doc_id], rels)
    rec_b = compute_rel_features(bwd, docs[bwd.doc_id], rels)
    assert not torch.equal(build_feature_vector(rec_f, vec), build_feature_vector(rec_b, vec))


def test_vectorizer_width_exceeding_hidden_rejected():
    with pytest.raises(ConfigError):
        RelFeatureVectorizer(FIELD_ORDER, 4)


def test_unknown_transform_rejected():
    vec = RelFeatureVectorizer(("distance",), 16, transforms={"distance": "cube"})
    docs, rels = load_mini()
    rec = compute_rel_features(rels[0], docs[rels[0].doc_id], rels)
    with pytest.raises(ConfigError):
        vec(rec)


def test_injection_contract():
    torch.manual_seed(1)
    emb = torch.randn(7, 16)
    mask = torch.ones(7, dtype=torch.long)
    fvec = torch.randn(16)
    out, new_mask = inject_feature_vector(emb, mask, fvec)
    assert out.shape == (8, 16)
    assert new_mask.shape == (8,)
    assert torch.equal(out[0], emb[0])
    assert torch.equal(out[1], fvec)
    assert torch.equal(out[2:], emb[1:])
    assert int(new_mask.sum()) == 8


def test_model_forward_shapes_and_feature_requirement():
    torch.manual_seed(0)
    encoder = resolve_encoder("toy-32-2", 64)
    vec = RelFeatureVectorizer(("direction", "distance"), encoder.hidden_size)
    model = RelModel(encoder, ["a", "b", "c"], vec)
    docs, rels = load_mini()
    rec = compute_rel_features(rels[0], docs[rels[0].doc_id], rels)
    logits = model(rels[0], rec)
    assert logits.shape == (3,)
    with pytest.raises(ContractError):
        model(rels[0], None)


def test_truncation_fits_encoder_and_warns():
    torch.manual_seed(0)
    encoder = resolve_encoder("toy-32-2", 24)
    model = RelModel(encoder, ["x", "y"])
    long_inst = FakeInst("alpha " * 30, "beta " * 30, Direction.LEFT_TO_RIGHT)
    with pytest.warns(UserWarning, match="truncated"):
        ids, segs = model.tokenize_pair(build_pair_sequence(long_inst))
    assert len(ids) <= 24
    assert len(ids) == len(segs)
    # both sides and the pseudo-tokens survive
    words_kept = encoder.tokenizer  # tokenizer round trip not 1:1; check segments
    assert 0 in segs and 1 in segs


def test_classify_returns_distribution():
    torch.manual_seed(0)
    encoder = resolve_encoder("toy-32-2", 64)
    model = RelModel(encoder, ["a", "b"])
    model.eval()
    ckpt = RelCheckpoint(model, RelTrainingConfig(use_features=False))
    docs, rels = load_mini()
    probs = classify(rels[0], ckpt)
    assert set(probs) == {"a", "b"}
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-6)
    assert predict_relation(rels[0], ckpt) in {"a", "b"}


def tiny_rel_config(**kw):
    defaults = dict(
        encoder_name="toy-32-2",
        lr=1e-3,
        epochs=1,
        batch_size=4,
        max_len=64,
    )
    defaults.update(kw)
    return RelTrainingConfig(**defaults)


def test_train_smoke_and_checkpoint_round_trip(tmp_path):
    triples = mini_triples()
    ckpt = train_rel_classifier(triples, triples, tiny_rel_config(), corpus_id="eng.rst.gum")
    assert set(ckpt.labels) == {t[2] for t in triples}
    assert ckpt.feature_layout is not None
    ckpt.save(str(tmp_path / "rel"))
    loaded = RelCheckpoint.load(str(tmp_path / "rel"))
    inst, rec, _ = triples[0]
    a = classify(inst, ckpt, rec)
    b = classify(inst, loaded, rec)
    for lab in a:
        assert a[lab] == pytest.approx(b[lab], abs=1e-6)


def test_train_without_features():
    triples = [(i, None, lab) for i, _, lab in mini_triples()]
    ckpt = train_rel_classifier(triples, triples, tiny_rel_config(use_features=False))
    assert ckpt.model.vectorizer is None
    inst = triples[0][0]
    assert predict_relation(inst, ckpt) in ckpt.labels


def test_direction_feature_can_be_disabled():
    triples = mini_triples()
    ckpt = train_rel_classifier(
        triples,
        triples,
        tiny_rel_config(use_direction_feature=False),
        corpus_id="eng.rst.gum",
    )
    assert "direction" not in ckpt.feature_layout


def test_unseen_dev_label_warns():
    triples = mini_triples()
    dev = copy.deepcopy(triples)
    dev[0] = (dev[0][0], dev[0][1], "never-seen-label")
    with pytest.warns(UserWarning, match="absent from training"):
        train_rel_classifier(triples, dev, tiny_rel_config(), corpus_id="eng.rst.gum")


def test_empty_data_rejected():
    triples = mini_triples()
    with pytest.raises(ContractError):
        train_rel_classifier([], triples, tiny_rel_config())
    with pytest.raises(ContractError):
        train_rel_classifier(triples, [], tiny_rel_config())


def test_training_deterministic_given_seed():
    triples = mini_triples()
    a = train_rel_classifier(triples, triples, tiny_rel_config(seed=3), corpus_id="eng.rst.gum")
    b = train_rel_classifier(triples, triples, tiny_rel_config(seed=3), corpus_id="eng.rst.gum")
    sa, sb = a.model.state_dict(), b.model.state_dict()
    assert sa.keys() == sb.keys()
    for key in sa:
        assert torch.equal(sa[key], sb[key]), key
