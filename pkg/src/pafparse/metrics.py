"""Keypoint similarity metrics and person-level matching.

Poses are ``(J, 2)`` arrays with NaN rows for missing parts.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NoAnnotatedParts

KAPPA = 0.08
OKS_THRESHOLDS = tuple(np.round(np.arange(0.50, 0.951, 0.05), 2).tolist())


def _present(pose) -> np.ndarray:
    return ~np.isnan(np.asarray(pose, dtype=np.float64)[:, 0])


def person_scale(gt) -> float:
    """Bounding-box diagonal of the annotated parts divided by sqrt(2)."""
    gt = np.asarray(gt, dtype=np.float64)
    pts = gt[_present(gt)]
    if len(pts) == 0:
        raise NoAnnotatedParts("ground truth has no annotated parts")
    span = pts.max(axis=0) - pts.min(axis=0)
    return float(math.hypot(span[0], span[1]) / math.sqrt(2.0))


def head_size(gt, fraction: float = 0.25) -> float:
    """Reference length for PCKh on synthetic people: a fixed fraction of scale."""
    return fraction * person_scale(gt)


def oks(predicted, gt, gt_scale: float, kappa=KAPPA) -> float:
    """Object keypoint similarity.

    Mean over annotated ground-truth parts of ``exp(-d^2 / (2 s^2 k^2))``;
    a part missing from the prediction contributes zero.
    """
    gt = np.asarray(gt, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    ann = _present(gt)
    if not ann.any():
        raise NoAnnotatedParts("ground truth has no annotated parts")
    if gt_scale <= 0:
        raise ValueError("gt_scale must be positive")
    k = np.broadcast_to(np.asarray(kappa, dtype=np.float64), ann.shape)[ann]
    d2 = np.sum((predicted[ann] - gt[ann]) ** 2, axis=1)
    sim = np.exp(-d2 / (2.0 * gt_scale**2 * k**2))
    return float(np.nan_to_num(sim, nan=0.0).mean())


def pckh(predicted, gt, head: float, alpha: float = 0.5) -> float:
    """Fraction of annotated parts predicted within ``alpha * head`` pixels."""
    gt = np.asarray(gt, dtype=np.float64)
    ann = _present(gt)
    if not ann.any():
        raise NoAnnotatedParts("ground truth has no annotated parts")
    if predicted is None:
        return 0.0
    predicted = np.asarray(predicted, dtype=np.float64)
    d = np.hypot(*(predicted[ann] - gt[ann]).T)
    return float(np.mean(np.nan_to_num(d, nan=np.inf) <= alpha * head))


def match_people(preds, gts, kappa=KAPPA) -> list[tuple[int, int, float]]:
    """Greedy one-to-one pairing by descending OKS; ties by (pred, gt) index.

    Returns ``(pred_index, gt_index, oks)`` for every pair with OKS > 0.
    """
    if not len(preds) or not len(gts):
        return []
    scales = [person_scale(g) for g in gts]
    sims = np.array([[oks(p, g, s, kappa) for g, s in zip(gts, scales)] for p in preds])
    flat = sims.ravel()
    order = np.lexsort((np.arange(flat.size), -flat))
    used_p, used_g, out = set(), set(), []
    for idx in order.tolist():
        if flat[idx] <= 0:
            break
        p, g = divmod(idx, len(gts))
        if p in used_p or g in used_g:
            continue
        used_p.add(p)
        used_g.add(g)
        out.append((p, g, float(flat[idx])))
    return out


def average_precision(scored_hits: list[tuple[float, bool]], n_gt: int) -> float:
    """101-point interpolated AP from ``(score, is_true_positive)`` pairs."""
    if n_gt == 0:
        return float("nan")
    if not scored_hits:
        return 0.0
    hits = sorted(scored_hits, key=lambda t: -t[0])
    tp = np.cumsum([h for _, h in hits], dtype=np.float64)
    fp = np.cumsum([not h for _, h in hits], dtype=np.float64)
    recall = tp / n_gt
    precision = tp / (tp + fp)
    # precision envelope, non-increasing in recall
    precision = np.maximum.accumulate(precision[::-1])[::-1]
    ap = 0.0
    for r in np.linspace(0.0, 1.0, 101):
        idx = np.searchsorted(recall, r, side="left")
        ap += precision[idx] if idx < len(precision) else 0.0
    return float(ap / 101)
