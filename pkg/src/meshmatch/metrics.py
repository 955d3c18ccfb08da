"""Overlap IoU and the geodesic-error curve for predicted correspondences."""

import csv
from dataclasses import dataclass

import numpy as np

CURVE_SAMPLES = np.round(np.arange(101) * 0.01, 2)


@dataclass
class GroundTruth:
    """Reference correspondences with per-shape overlap masks."""

    pairs: list  # (x vertex, y vertex)
    overlap_x: np.ndarray
    overlap_y: np.ndarray

    def validate(self):
        for v, w in self.pairs:
            if not (self.overlap_x[v] and self.overlap_y[w]):
                raise ValueError("ground-truth masks inconsistent with pairs")


def iou(predicted, reference):
    """Intersection over union of two binary masks.

    Two empty masks score 1 by convention: a correct prediction of
    "no overlap" is not a failure.
    """
    p = np.asarray(predicted, dtype=bool)
    g = np.asarray(reference, dtype=bool)
    if p.shape != g.shape:
        raise ValueError("mask lengths differ")
    union = int(np.logical_or(p, g).sum())
    if union == 0:
        return 1.0
    return float(np.logical_and(p, g).sum()) / union


def geodesic_error_curve(pred_pairs, gt_pairs, target_mesh):
    """Per-vertex normalized geodesic errors, their cumulative curve, and AUC.

    For every ground-truth-matched source vertex the error is the
    geodesic distance on the target between the predicted and reference
    targets, divided by the square root of the target area; sources the
    prediction leaves unmatched get infinite error. The curve samples
    the fraction of vertices with error <= t at t = 0, 0.01, ..., 1 and
    the AUC is the mean of the 101 samples times 100.
    """
    gt = dict(gt_pairs)
    if not gt:
        raise ValueError("empty ground truth")
    pred = dict(pred_pairs)
    norm = np.sqrt(target_mesh.area)
    if norm <= 0:
        raise ValueError("target mesh has zero area")
    dist_cache = {}
    errors = np.empty(len(gt))
    for i, v in enumerate(sorted(gt)):
        w_true = gt[v]
        w_pred = pred.get(v)
        if w_pred is None:
            errors[i] = np.inf
        elif w_pred == w_true:
            errors[i] = 0.0
        else:
            if w_true not in dist_cache:
                dist_cache[w_true] = target_mesh.geodesic_distances(w_true)
            errors[i] = dist_cache[w_true][w_pred] / norm
    curve = np.array([np.mean(errors <= t) for t in CURVE_SAMPLES])
    auc = float(curve.mean() * 100.0)
    return errors, curve, auc


def write_report_csv(rows, path):
    """Per-pair evaluation report."""
    fields = ["pair_id", "iou", "auc_geoerr", "h_star", "wall_time", "status"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in fields})


def write_curve(curve, path):
    """Curve dump as ``t, fraction`` lines for plotting."""
    with open(path, "w", encoding="utf-8") as fh:
        for t, v in zip(CURVE_SAMPLES, curve):
            fh.write(f"{t:.2f}, {v:.12g}\n")
