"""Vertex correspondences from product-triangle matchings, and coarse-to-fine upsampling."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MatchingResult:
    """Outcome of a matching run on one mesh pair.

    ``selected`` holds product-triangle column indices, ``vertex_pairs``
    the resolved per-vertex map, ``overlap_x``/``overlap_y`` binary
    masks marking vertices that take part in the matching, ``h_star``
    the minimized mean cost g(x*)/x*. ``globally_optimal`` is True only
    when every subproblem the search needed terminated conclusively.
    """

    selected: np.ndarray
    x_star: int
    g_star: float
    h_star: float
    globally_optimal: bool
    vertex_pairs: list = field(default_factory=list)
    overlap_x: np.ndarray = None
    overlap_y: np.ndarray = None
    evaluations: dict = field(default_factory=dict)  # x -> (g, h, status, wall)


def selection_vertex_pairs(space, selected):
    """All (x vertex, y vertex) pairs listed by the selected columns."""
    pairs = set()
    for col in selected:
        xl = space.x_listings[col]
        yl = space.y_listings[col]
        for i in range(3):
            pairs.add((int(xl[i]), int(yl[i])))
    return sorted(pairs)


def to_vertex_correspondences(space, selected, ext_features_x, ext_features_y):
    """Resolve selected product triangles into a per-vertex map.

    Each product triangle contributes its three listed vertex pairs;
    a vertex listed with several partners keeps the partner with the
    smallest vertex-feature distance (ties broken by lower index).
    Returns deduplicated, sorted (x vertex, y vertex) pairs.
    """
    raw = selection_vertex_pairs(space, selected)
    by_x = {}
    for v, w in raw:
        by_x.setdefault(v, []).append(w)
    out = []
    for v in sorted(by_x):
        partners = by_x[v]
        if len(partners) == 1:
            out.append((v, partners[0]))
            continue
        fv = ext_features_x[v]
        best = min(partners, key=lambda w: (float(np.linalg.norm(fv - ext_features_y[w])), w))
        out.append((v, best))
    return out


def overlap_masks(space, selected, n_x_vertices, n_y_vertices):
    """Binary masks of vertices appearing in any selected product triangle."""
    mask_x = np.zeros(n_x_vertices, dtype=bool)
    mask_y = np.zeros(n_y_vertices, dtype=bool)
    for col in selected:
        mask_x[space.x_listings[col]] = True
        mask_y[space.y_listings[col]] = True
    return mask_x, mask_y


def upsample(coarse_pairs, map_x, map_y, fine_features_x, fine_features_y):
    """Lift a coarse vertex map to fine resolution.

    A fine vertex whose coarse image is matched to coarse vertex ``w``
    is matched to the fine preimage of ``w`` nearest in fine feature
    space (ties by lowest index); fine vertices with unmatched coarse
    images stay unmatched. ``coarse_pairs`` must already be resolved to
    one partner per coarse vertex.
    """
    partner = {}
    for v, w in coarse_pairs:
        if v in partner and partner[v] != w:
            raise ValueError("coarse_pairs must map each coarse vertex to one partner")
        partner[v] = w
    pre_y = _preimages(map_y)
    fx = np.asarray(fine_features_x, dtype=np.float64)
    fy = np.asarray(fine_features_y, dtype=np.float64)
    out = []
    for vf, cv in enumerate(map_x.fine_to_coarse):
        w = partner.get(int(cv))
        if w is None:
            continue
        candidates = pre_y[w]
        d = np.linalg.norm(fy[candidates] - fx[vf], axis=1)
        out.append((vf, int(candidates[np.argmin(d)])))
    return out


def upsample_masks(coarse_overlap_x, coarse_overlap_y, map_x, map_y):
    """Fine overlap masks: a fine vertex is matched iff its coarse image is."""
    mask_x = np.asarray(coarse_overlap_x, dtype=bool)[map_x.fine_to_coarse]
    mask_y = np.asarray(coarse_overlap_y, dtype=bool)[map_y.fine_to_coarse]
    return mask_x, mask_y


def _preimages(dmap):
    pre = [[] for _ in range(dmap.n_coarse)]
    for fine, coarse in enumerate(dmap.fine_to_coarse):
        pre[int(coarse)].append(fine)
    return [np.asarray(p, dtype=np.int64) for p in pre]


# ----------------------------------------------------------------------
# text file formats


def save_correspondences(pairs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for i, j in pairs:
            fh.write(f"{i} {j}\n")


def load_correspondences(path):
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                a, b = line.split()
                pairs.append((int(a), int(b)))
    return pairs


def save_mask(mask, path):
    with open(path, "w", encoding="utf-8") as fh:
        for v in np.asarray(mask).astype(int):
            fh.write(f"{v}\n")


def load_mask(path):
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                values.append(int(line))
    return np.asarray(values, dtype=bool)
