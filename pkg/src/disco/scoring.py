"""Shared-task metrics: P/R/F1 for tagging tasks, accuracy + confusion for
relations, and multi-run aggregation."""

import json
import math
from dataclasses import dataclass, field

from .corpus_io import BEGIN_SEG
from .errors import ContractError


@dataclass
class EvalReport:
    task: str
    precision: float = None
    recall: float = None
    f1: float = None
    accuracy: float = None
    confusion: dict = None  # gold label -> {pred label -> count}
    labels: list = None  # confusion label order (gold frequency desc)
    per_run: list = field(default_factory=list)
    mean: float = None
    stdev: float = None

    def primary_score(self):
        return self.accuracy if self.task == "rel" else self.f1

    def to_json(self):
        out = {"task": self.task}
        for name in ("precision", "recall", "f1", "accuracy", "mean", "stdev"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.per_run:
            out["per_run"] = self.per_run
        if self.confusion is not None:
            out["labels"] = self.labels
            out["confusion"] = self.confusion
        return json.dumps(out, indent=2, sort_keys=True) + "\n"

    def to_text(self):
        lines = ["task: %s" % self.task]
        if self.accuracy is not None:
            lines.append("accuracy : %.4f" % self.accuracy)
        if self.precision is not None:
            lines.append("precision: %.4f" % self.precision)
            lines.append("recall   : %.4f" % self.recall)
            lines.append("f1       : %.4f" % self.f1)
        if self.per_run:
            lines.append("runs     : %s" % " ".join("%.4f" % s for s in self.per_run))
            lines.append("mean     : %.4f  stdev: %.4f" % (self.mean, self.stdev))
        return "\n".join(lines) + "\n"

    def confusion_csv(self):
        if self.confusion is None:
            return ""
        lines = ["gold\\pred," + ",".join(self.labels)]
        for gold in self.labels:
            row = self.confusion.get(gold, {})
            lines.append(gold + "," + ",".join(str(row.get(p, 0)) for p in self.labels))
        return "\n".join(lines) + "\n"


def _prf(tp, n_pred, n_gold):
    precision = tp / n_pred if n_pred > 0 else 0.0
    recall = tp / n_gold if n_gold > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def _check_alignment(gold_docs, pred_docs):
    gold_toks = [t.form for d in gold_docs for t in d.all_tokens()]
    pred_toks = [t.form for d in pred_docs for t in d.all_tokens()]
    if len(gold_toks) != len(pred_toks):
        raise ContractError(
            "token count mismatch: gold %d vs pred %d" % (len(gold_toks), len(pred_toks))
        )
    for i, (g, p) in enumerate(zip(gold_toks, pred_toks)):
        if g != p:
            raise ContractError("token mismatch at position %d: %r vs %r" % (i, g, p))


def _flat_labels(docs):
    return [t.seg_label for d in docs for t in d.all_tokens()]


def score_segmentation(gold_docs, pred_docs):
    """P/R/F over the set of token positions labeled BeginSeg."""
    _check_alignment(gold_docs, pred_docs)
    gold = {i for i, lab in enumerate(_flat_labels(gold_docs)) if lab == BEGIN_SEG}
    pred = {i for i, lab in enumerate(_flat_labels(pred_docs)) if lab == BEGIN_SEG}
    p, r, f = _prf(len(gold & pred), len(pred), len(gold))
    return EvalReport(task="seg", precision=p, recall=r, f1=f)


def score_connectives(gold_docs, pred_docs, span_level=False):
    """P/R/F over labeled token positions with exact BIO-label match.

    With span_level=True, whole (start, end, ...) connective spans must
    match instead of individual positions.
    """
    _check_alignment(gold_docs, pred_docs)
    gold_labels = _flat_labels(gold_docs)
    pred_labels = _flat_labels(pred_docs)
    if span_level:
        gold = set(_bio_spans(gold_labels))
        pred = set(_bio_spans(pred_labels))
    else:
        gold = {(i, lab) for i, lab in enumerate(gold_labels) if lab is not None}
        pred = {(i, lab) for i, lab in enumerate(pred_labels) if lab is not None}
    p, r, f = _prf(len(gold & pred), len(pred), len(gold))
    return EvalReport(task="conn", precision=p, recall=r, f1=f)


def _bio_spans(labels):
    spans = []
    start = None
    for i, lab in enumerate(labels):
        if lab == "B-Conn":
            if start is not None:
                spans.append((start, i - 1))
            start = i
        elif lab == "I-Conn":
            if start is None:
                start = i  # tolerate stray I: treat as span start
        else:
            if start is not None:
                spans.append((start, i - 1))
                start = None
    if start is not None:
        spans.append((start, len(labels) - 1))
    return spans


def score_relations(gold_labels, pred_labels):
    """Accuracy plus a confusion matrix ordered by gold frequency."""
    if len(gold_labels) != len(pred_labels):
        raise ContractError(
            "length mismatch: gold %d vs pred %d" % (len(gold_labels), len(pred_labels))
        )
    if not gold_labels:
        raise ContractError("no instances to score")
    counts = {}
    for lab in gold_labels:
        counts[lab] = counts.get(lab, 0) + 1
    labels = sorted(counts, key=lambda lab: (-counts[lab], lab))
    for lab in pred_labels:
        if lab not in counts:
            labels.append(lab)
            counts[lab] = 0
    confusion = {g: {} for g in labels}
    correct = 0
    for g, p in zip(gold_labels, pred_labels):
        confusion[g][p] = confusion[g].get(p, 0) + 1
        if g == p:
            correct += 1
    return EvalReport(
        task="rel",
        accuracy=correct / len(gold_labels),
        confusion=confusion,
        labels=labels,
    )


def aggregate_runs(scores):
    """Arithmetic mean and sample standard deviation (0 for a single run)."""
    if not scores:
        raise ContractError("cannot aggregate zero runs")
    n = len(scores)
    mean = sum(scores) / n
    if n == 1:
        return mean, 0.0
    var = sum((s - mean) ** 2 for s in scores) / (n - 1)
    return mean, math.sqrt(var)
