"""Binary classification metrics. Labels are 0/1 with 1 = reciprocated."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata


def auc(scores, labels) -> float:
    """Probability a positive outscores a negative; ties count one half.

    Computed from average ranks (Mann-Whitney U).
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def confusion(pred, labels):
    pred = np.asarray(pred).astype(bool)
    labels = np.asarray(labels).astype(bool)
    tp = int(np.sum(pred & labels))
    fp = int(np.sum(pred & ~labels))
    fn = int(np.sum(~pred & labels))
    tn = int(np.sum(~pred & ~labels))
    return tp, fp, fn, tn


def _div(a, b):
    return a / b if b else 0.0


def per_class(pred, labels) -> dict:
    """Precision, recall and F1 for class 1 and class 0 (empty ratios are 0)."""
    tp, fp, fn, tn = confusion(pred, labels)
    out = {}
    for cls, (t, f_pos, f_neg) in ((1, (tp, fp, fn)), (0, (tn, fn, fp))):
        p = _div(t, t + f_pos)
        r = _div(t, t + f_neg)
        out[cls] = {"precision": p, "recall": r, "f1": _div(2 * p * r, p + r)}
    return out


def class_weighted_accuracy(pred, labels) -> float:
    pc = per_class(pred, labels)
    return (pc[0]["recall"] + pc[1]["recall"]) / 2.0


def macro_scores(pred, labels) -> dict:
    pc = per_class(pred, labels)
    return {
        "precision": (pc[0]["precision"] + pc[1]["precision"]) / 2.0,
        "recall": (pc[0]["recall"] + pc[1]["recall"]) / 2.0,
        "f1": (pc[0]["f1"] + pc[1]["f1"]) / 2.0,
    }


def all_metrics(scores, labels, threshold: float = 0.5) -> dict:
    pred = np.asarray(scores, dtype=float) >= threshold
    macro = macro_scores(pred, labels)
    return {
        "cwa": class_weighted_accuracy(pred, labels),
        "auc": auc(scores, labels),
        "avg_precision": macro["precision"],
        "avg_recall": macro["recall"],
        "f_measure": macro["f1"],
    }
