"""`disco` command line: train, predict, evaluate, and ablate."""

import argparse
import json
import os
import sys
import traceback

from . import corpus_io, features_rel, features_seg, rel_classifier, scoring, seg_tagger
from .config import load_corpus_config
from .errors import ConfigError, ContractError, FormatError
from .sentence_pipeline import split_on_punctuation


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise ConfigError("cannot read %s: %s" % (path, exc))


def _write(path, text):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _parse_tagging_file(path, cfg=None, scenario="gold"):
    language = cfg.language if cfg else "und"
    framework = cfg.framework if cfg else "rst"
    name = os.path.splitext(os.path.basename(path))[0]
    text = _read(path)
    if path.endswith(".tok") or scenario == "plain":
        docs = corpus_io.parse_tok(text, name, language, framework)
        return [split_on_punctuation(d, language) for d in docs]
    return corpus_io.parse_conllu(text, name, language, framework)


def _load_rel_data(rels_path, docs_path, cfg):
    instances = corpus_io.parse_rels(_read(rels_path))
    docs = {}
    if docs_path:
        for doc in corpus_io.parse_conllu(
            _read(docs_path), language=cfg.language if cfg else "und"
        ):
            docs[doc.doc_id] = doc
    stoplist = features_rel.load_stoplist(cfg.stoplist_language if cfg else "eng")
    data = []
    for inst in instances:
        record = None
        if inst.doc_id in docs:
            record = features_rel.compute_rel_features(
                inst,
                docs[inst.doc_id],
                instances,
                stoplist,
                cfg.head_is_unit1 if cfg else True,
            )
        data.append((inst, record, inst.label))
    return instances, data


def _train_tagging_run(cfg, seed, use_features=True, use_char_static=True):
    train_docs = _parse_tagging_file(cfg.train_path, cfg, cfg.scenario)
    dev_docs = _parse_tagging_file(cfg.dev_path, cfg, cfg.scenario)
    tconf = seg_tagger.TrainingConfig(
        encoder_name=cfg.encoder_name,
        lr_encoder=cfg.lr_encoder,
        lr_other=cfg.lr_other,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        seed=seed,
        decode_mode=cfg.decode_mode,
        runs=1,
        lstm_hidden=cfg.lstm_hidden,
        d_char=cfg.d_char if use_char_static else 0,
        d_static=cfg.d_static if use_char_static else 0,
        d_neighbors=cfg.d_neighbors,
        max_len=cfg.max_len,
        use_features=use_features,
    )
    ckpt = seg_tagger.train_segmenter(train_docs, dev_docs, tconf, cfg.task)
    pred = seg_tagger.predict_segments(dev_docs, ckpt)
    if cfg.task == "seg":
        score = scoring.score_segmentation(dev_docs, pred).f1
    else:
        score = scoring.score_connectives(dev_docs, pred).f1
    return ckpt, score


def _train_rel_run(cfg, seed, use_features=True, use_direction_feature=True):
    _, train_data = _load_rel_data(cfg.train_path, cfg.train_docs_path, cfg)
    _, dev_data = _load_rel_data(cfg.dev_path, cfg.dev_docs_path, cfg)
    rconf = rel_classifier.RelTrainingConfig(
        encoder_name=cfg.encoder_name,
        lr=cfg.lr,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        seed=seed,
        runs=1,
        max_len=cfg.max_len,
        use_features=use_features,
        use_direction_feature=use_direction_feature,
        features=tuple(cfg.features) if cfg.features is not None else None,
        transforms=cfg.transforms,
    )
    ckpt = rel_classifier.train_rel_classifier(train_data, dev_data, rconf, cfg.corpus)
    gold = [lab for _, _, lab in dev_data]
    pred = [
        rel_classifier.predict_relation(
            inst, ckpt, rec if ckpt.model.vectorizer is not None else None
        )
        for inst, rec, _ in dev_data
    ]
    score = scoring.score_relations(gold, pred).accuracy
    return ckpt, score


def _run_condition(cfg, seeds, **ablation):
    """Train one condition over the given seeds; returns (paths, scores)."""
    scores = []
    checkpoints = []
    for seed in seeds:
        if cfg.task == "rel":
            use_features = ablation.get("use_features", True)
            use_dir = ablation.get("use_direction_feature", True)
            ckpt, score = _train_rel_run(cfg, seed, use_features, use_dir)
        else:
            ckpt, score = _train_tagging_run(
                cfg,
                seed,
                ablation.get("use_features", True),
                ablation.get("use_char_static", True),
            )
        checkpoints.append(ckpt)
        scores.append(score)
    return checkpoints, scores


def cmd_train(args):
    cfg = load_corpus_config(args.config)
    if args.runs is not None:
        cfg.runs = args.runs
    if args.seed is not None:
        cfg.seeds = [args.seed]
        cfg.runs = cfg.runs or 1
    if args.scenario:
        cfg.scenario = args.scenario
    if args.out_dir:
        cfg.out_dir = args.out_dir
    if cfg.train_path is None or cfg.dev_path is None:
        raise ConfigError("train_path and dev_path are required for training")
    for path in (cfg.train_path, cfg.dev_path):
        if not os.path.exists(path):
            raise ConfigError("missing data file: %s" % path)
    seeds = cfg.seed_list()
    use_features = not args.no_features
    checkpoints, scores = _run_condition(cfg, seeds, use_features=use_features)
    paths = []
    for seed, ckpt in zip(seeds, checkpoints):
        path = os.path.join(cfg.out_dir, "run-seed%d" % seed)
        ckpt.save(path)
        paths.append(path)
    mean, stdev = scoring.aggregate_runs(scores)
    log = {
        "corpus": cfg.corpus,
        "task": cfg.task,
        "seeds": seeds,
        "checkpoints": paths,
        "dev_scores": scores,
        "mean": mean,
        "stdev": stdev,
    }
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "runlog.json"), "w", encoding="utf-8") as f:
        json.dump(log, f, indent=2)
    for seed, score in zip(seeds, scores):
        print("run seed=%d dev=%.4f" % (seed, score))
    print("aggregate mean=%.4f stdev=%.4f over %d run(s)" % (mean, stdev, len(scores)))
    return 0


def _checkpoint_kind(path):
    meta_path = os.path.join(path, "meta.json")
    if not os.path.exists(meta_path):
        raise ConfigError("no checkpoint meta at %s" % meta_path)
    with open(meta_path, encoding="utf-8") as f:
        return json.load(f).get("kind", "seg")


def cmd_predict(args):
    kind = _checkpoint_kind(args.checkpoint)
    cfg = load_corpus_config(args.config) if args.config else None
    is_rels = args.input.endswith(".rels")
    if kind == "rel" and not is_rels:
        raise ConfigError("relation checkpoint requires a .rels input file")
    if kind == "seg" and is_rels:
        raise ConfigError("tagging checkpoint cannot predict on a .rels file")
    if kind == "rel":
        ckpt = rel_classifier.RelCheckpoint.load(args.checkpoint)
        docs_path = args.docs or (cfg.test_docs_path if cfg else None)
        if ckpt.model.vectorizer is not None and not docs_path:
            raise ConfigError(
                "feature-injected relation model needs --docs (CoNLL-U source)"
            )
        instances, data = _load_rel_data(args.input, docs_path, cfg)
        preds = []
        for inst, record, _ in data:
            preds.append(
                rel_classifier.predict_relation(
                    inst, ckpt, record if ckpt.model.vectorizer is not None else None
                )
            )
        _write(args.output, corpus_io.serialize_rel_predictions(instances, preds))
        if args.dump_features:
            records = [rec for _, rec, _ in data if rec is not None]
            _write(args.dump_features, features_rel.dump_rel_features_tsv(records))
    else:
        ckpt = seg_tagger.Checkpoint.load(args.checkpoint)
        scenario = args.scenario or "gold"
        docs = _parse_tagging_file(args.input, cfg, scenario)
        pred = seg_tagger.predict_segments(docs, ckpt)
        out = []
        for doc in pred:
            labels = [t.seg_label for t in doc.all_tokens()]
            out.append(corpus_io.serialize_seg_predictions(doc, labels))
        _write(args.output, "".join(out))
        if args.dump_features:
            records = []
            for doc in docs:
                records.extend(features_seg.extract_seg_features(doc))
            _write(args.dump_features, features_seg.dump_features_tsv(records))
    print("wrote %s" % args.output)
    return 0


def cmd_evaluate(args):
    if args.task == "rel":
        gold = corpus_io.parse_rels(_read(args.gold))
        pred = corpus_io.parse_rels(_read(args.pred))
        report = scoring.score_relations(
            [i.label for i in gold], [i.label for i in pred]
        )
    else:
        gold = _parse_tagging_file(args.gold)
        pred = _parse_tagging_file(args.pred)
        if args.task == "seg":
            report = scoring.score_segmentation(gold, pred)
        else:
            report = scoring.score_connectives(gold, pred, span_level=args.span_level)
    sys.stdout.write(report.to_text())
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        _write(os.path.join(args.out_dir, "report.json"), report.to_json())
        _write(os.path.join(args.out_dir, "report.txt"), report.to_text())
        if report.confusion is not None:
            _write(os.path.join(args.out_dir, "confusion.csv"), report.confusion_csv())
    return 0


ABLATION_MODES = ("no-feats", "cwe-only", "rel-no-feats")


def cmd_ablate(args):
    cfg = load_corpus_config(args.config)
    if args.mode not in ABLATION_MODES:
        raise ConfigError("unknown ablation mode %r" % args.mode)
    if args.mode == "rel-no-feats" and cfg.task != "rel":
        raise ConfigError("rel-no-feats requires a relation config")
    if args.mode in ("no-feats", "cwe-only") and cfg.task == "rel":
        raise ConfigError("mode %s applies to tagging configs" % args.mode)
    if args.runs is not None:
        cfg.runs = args.runs
    seeds = cfg.seed_list()
    _, base_scores = _run_condition(cfg, seeds)
    if args.mode == "no-feats":
        ablation = {"use_features": False}
    elif args.mode == "cwe-only":
        ablation = {"use_char_static": False}
    else:
        ablation = {"use_features": False, "use_direction_feature": False}
    _, abl_scores = _run_condition(cfg, seeds, **ablation)
    base_mean, base_sd = scoring.aggregate_runs(base_scores)
    abl_mean, abl_sd = scoring.aggregate_runs(abl_scores)
    report = {
        "corpus": cfg.corpus,
        "mode": args.mode,
        "baseline": {"scores": base_scores, "mean": base_mean, "stdev": base_sd},
        "ablated": {"scores": abl_scores, "mean": abl_mean, "stdev": abl_sd},
        "gain": base_mean - abl_mean,
    }
    os.makedirs(cfg.out_dir, exist_ok=True)
    out = os.path.join(cfg.out_dir, "ablation-%s.json" % args.mode)
    with open(out, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2)
    print("baseline mean=%.4f ablated mean=%.4f gain=%.4f"
          % (base_mean, abl_mean, report["gain"]))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="disco",
        description="Discourse segmentation, connective detection, and "
        "relation classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one model per seed")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--runs", type=int, default=None)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--scenario", choices=("gold", "plain"), default=None)
    p_train.add_argument("--out-dir", default=None)
    p_train.add_argument("--no-features", action="store_true")
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="label a shared-task file")
    p_pred.add_argument("--checkpoint", required=True)
    p_pred.add_argument("--input", required=True)
    p_pred.add_argument("--output", required=True)
    p_pred.add_argument("--config", default=None)
    p_pred.add_argument("--docs", default=None,
                        help="CoNLL-U document source for relation features")
    p_pred.add_argument("--scenario", choices=("gold", "plain"), default=None)
    p_pred.add_argument("--dump-features", default=None)
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="score predictions against gold")
    p_eval.add_argument("--gold", required=True)
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--task", required=True, choices=("seg", "conn", "rel"))
    p_eval.add_argument("--out-dir", default=None)
    p_eval.add_argument("--span-level", action="store_true")
    p_eval.set_defaults(func=cmd_evaluate)

    p_abl = sub.add_parser("ablate", help="paired baseline/ablated runs")
    p_abl.add_argument("--config", required=True)
    p_abl.add_argument("--mode", required=True)
    p_abl.add_argument("--runs", type=int, default=None)
    p_abl.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FormatError, ContractError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
