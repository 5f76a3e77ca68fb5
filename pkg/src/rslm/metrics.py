"""Detection and segmentation metrics with brute-force-verifiable definitions.

Matching is greedy by descending score against the nearest unmatched
ground-truth center within a Cartesian distance threshold. AP integrates
the precision envelope over the recall steps of the pooled PR curve; mAP
and mAR average over the distance thresholds {1, 2, 4} m, recall taken at
the 0.5 operating score. F1 is also reported at the 0.5 operating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .configs import EvalConfig
from .errors import InputError


def _to_xy(range_m, azimuth_deg):
    az = math.radians(azimuth_deg)
    return range_m * math.sin(az), range_m * math.cos(az)


@dataclass
class MatchResult:
    tp: int
    fp: int
    fn: int
    matched: list  # per-prediction flag, in descending-score order
    matched_gt: list  # per-prediction matched GT index or -1
    order: list  # indices of predictions in descending-score order


def match_detections(preds, gts, dist_thresh_m: float) -> MatchResult:
    """Greedy matching; each GT matches at most one prediction."""
    if dist_thresh_m <= 0:
        raise InputError("dist_thresh_m must be > 0")
    order = sorted(range(len(preds)), key=lambda k: (-preds[k].score, k))
    gt_xy = [_to_xy(r, a) for r, a in gts]
    taken = [False] * len(gts)
    matched, matched_gt = [], []
    tp = 0
    for k in order:
        px, py = _to_xy(preds[k].range_m, preds[k].azimuth_deg)
        best, best_d = -1, dist_thresh_m
        for gi, (gx, gy) in enumerate(gt_xy):
            if taken[gi]:
                continue
            d = math.hypot(px - gx, py - gy)
            if d <= best_d:
                best, best_d = gi, d
        if best >= 0:
            taken[best] = True
            tp += 1
            matched.append(True)
            matched_gt.append(best)
        else:
            matched.append(False)
            matched_gt.append(-1)
    return MatchResult(
        tp=tp,
        fp=len(preds) - tp,
        fn=len(gts) - tp,
        matched=matched,
        matched_gt=matched_gt,
        order=order,
    )


def _pooled_flags(frame_preds, frame_gts, dist_thresh):
    """Pool per-frame greedy matches into (scores, tp_flags, n_gt)."""
    scores, flags = [], []
    n_gt = 0
    for preds, gts in zip(frame_preds, frame_gts):
        n_gt += len(gts)
        res = match_detections(preds, gts, dist_thresh)
        for pos, k in enumerate(res.order):
            scores.append(preds[k].score)
            flags.append(res.matched[pos])
    return np.array(scores), np.array(flags, dtype=bool), n_gt


def ap_from_flags(scores: np.ndarray, flags: np.ndarray, n_gt: int):
    """AP via the precision envelope over the pooled, score-sorted PR curve."""
    if n_gt == 0:
        return 0.0, False  # undefined; reported as 0 with a flag
    if len(scores) == 0:
        return 0.0, True
    order = np.argsort(-scores, kind="stable")
    tp = np.cumsum(flags[order])
    fp = np.cumsum(~flags[order])
    precision = tp / (tp + fp)
    recall = tp / n_gt
    # Envelope: precision at recall r is the max precision at recall >= r.
    env = np.maximum.accumulate(precision[::-1])[::-1]
    ap = 0.0
    prev_r = 0.0
    for p, r in zip(env, recall):
        if r > prev_r:
            ap += (r - prev_r) * p
            prev_r = r
    return float(ap), True


def precision_recall_at(frame_preds, frame_gts, dist_thresh, operating_score):
    tp = fp = n_gt = 0
    for preds, gts in zip(frame_preds, frame_gts):
        kept = [p for p in preds if p.score >= operating_score]
        res = match_detections(kept, gts, dist_thresh)
        tp += res.tp
        fp += res.fp
        n_gt += len(gts)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / n_gt if n_gt else 0.0
    return precision, recall


def average_precision(frame_preds, frame_gts, dist_thresh) -> tuple:
    """AP over pooled predictions at one distance threshold.

    Returns (ap, defined)."""
    scores, flags, n_gt = _pooled_flags(frame_preds, frame_gts, dist_thresh)
    return ap_from_flags(scores, flags, n_gt)


def f1(precision: float, recall: float) -> float:
    if not (0.0 <= precision <= 1.0 and 0.0 <= recall <= 1.0):
        raise InputError("precision/recall must lie in [0, 1]")
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def iou(pred_mask: np.ndarray, gt_mask: np.ndarray) -> float:
    pred = np.asarray(pred_mask)
    gt = np.asarray(gt_mask)
    if pred.shape != gt.shape:
        raise InputError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    pred = pred.astype(bool)
    gt = gt.astype(bool)
    union = np.logical_or(pred, gt).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(pred, gt).sum() / union)


@dataclass
class MetricsReport:
    variant: str
    map_pct: float
    mar_pct: float
    f1_pct: float
    iou_pct: float
    map_std: float = 0.0
    mar_std: float = 0.0
    f1_std: float = 0.0
    iou_std: float = 0.0
    n_seeds: int = 1

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "mAP": self.map_pct,
            "mAR": self.mar_pct,
            "F1": self.f1_pct,
            "IoU": self.iou_pct,
            "mAP_std": self.map_std,
            "mAR_std": self.mar_std,
            "F1_std": self.f1_std,
            "IoU_std": self.iou_std,
            "n_seeds": self.n_seeds,
        }


def evaluate_detection_run(frame_preds, frame_gts, frame_pred_masks, frame_gt_masks, cfg: EvalConfig) -> dict:
    """All raw counts and summary metrics for one evaluated run."""
    per_threshold = {}
    aps, recalls, precisions = [], [], []
    for thresh in cfg.dist_thresholds_m:
        ap, defined = average_precision(frame_preds, frame_gts, thresh)
        p_at, r_at = precision_recall_at(frame_preds, frame_gts, thresh, cfg.operating_score)
        scores, flags, n_gt = _pooled_flags(frame_preds, frame_gts, thresh)
        order = np.argsort(-scores, kind="stable")
        tp_curve = np.cumsum(flags[order]).tolist()
        per_threshold[str(thresh)] = {
            "ap": ap,
            "ap_defined": defined,
            "precision_at_operating": p_at,
            "recall_at_operating": r_at,
            "n_gt": int(n_gt),
            "n_pred": int(len(scores)),
            "tp_curve": tp_curve,
        }
        aps.append(ap)
        precisions.append(p_at)
        recalls.append(r_at)
    mean_ap = float(np.mean(aps))
    mean_ar = float(np.mean(recalls))
    mean_p = float(np.mean(precisions))
    ious = [iou(pm, gm) for pm, gm in zip(frame_pred_masks, frame_gt_masks)]
    return {
        "per_threshold": per_threshold,
        "mAP": mean_ap,
        "mAR": mean_ar,
        "F1_at_operating": f1(mean_p, mean_ar),
        "operating_score": cfg.operating_score,
        "IoU": float(np.mean(ious)) if ious else 1.0,
        "n_frames": len(frame_preds),
    }


def aggregate_reports(variant: str, runs: list) -> MetricsReport:
    """Mean +/- std (population) over per-seed run metric dicts."""
    def stats(key):
        vals = np.array([r[key] for r in runs]) * 100.0
        return float(vals.mean()), float(vals.std())

    m, ms = stats("mAP")
    a, as_ = stats("mAR")
    f, fs = stats("F1_at_operating")
    i, is_ = stats("IoU")
    return MetricsReport(
        variant=variant,
        map_pct=m,
        mar_pct=a,
        f1_pct=f,
        iou_pct=i,
        map_std=ms,
        mar_std=as_,
        f1_std=fs,
        iou_std=is_,
        n_seeds=len(runs),
    )
