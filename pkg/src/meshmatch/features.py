"""Per-vertex features, their transfer across resolutions, and matching costs.

Vertex feature matrices are lifted to the extended element set of a
mesh (vertices, edges, triangles) by averaging, and pairs of lifted
features define the normalized cost vector over product triangles.
"""

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

_DENSE_EIG_LIMIT = 1500


def hks_features(mesh, eig_count=64, time_count=16):
    """Heat-kernel signature features.

    Builds the cotangent Laplacian with lumped vertex-area mass, takes
    the smallest ``eig_count`` eigenpairs and evaluates the heat kernel
    diagonal at ``time_count`` log-spaced times. Each output dimension
    is scaled to zero mean and unit variance across vertices.
    """
    n = mesh.n_vertices
    if eig_count < 1 or eig_count > n:
        raise ValueError("eig_count must be in [1, n_vertices]")
    if time_count < 1:
        raise ValueError("time_count must be positive")
    stiffness = cotangent_laplacian(mesh)
    mass = mesh.vertex_areas()
    if (mass <= 0).any():
        mass = np.maximum(mass, 1e-12 * max(mass.max(), 1.0))
    if n <= _DENSE_EIG_LIMIT:
        vals, vecs = scipy.linalg.eigh(
            stiffness.toarray(), np.diag(mass), subset_by_index=[0, eig_count - 1]
        )
    else:
        vals, vecs = scipy.sparse.linalg.eigsh(
            stiffness, k=eig_count, M=scipy.sparse.diags(mass), sigma=-1e-8, which="LM"
        )
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    vals = np.maximum(vals, 0.0)

    nonzero = vals[vals > 1e-10]
    if len(nonzero):
        t_min = 4.0 * np.log(10.0) / nonzero[-1]
        t_max = 4.0 * np.log(10.0) / nonzero[0]
    else:
        t_min, t_max = 1e-2, 1.0
    times = np.geomspace(t_min, t_max, time_count)

    # hks(v, t) = sum_k exp(-lambda_k t) phi_k(v)^2
    sq = vecs**2
    feats = sq @ np.exp(-np.outer(vals, times))
    mean = feats.mean(axis=0)
    std = feats.std(axis=0)
    std[std < 1e-12] = 0.0
    out = np.zeros_like(feats)
    good = std > 0
    out[:, good] = (feats[:, good] - mean[good]) / std[good]
    if not np.isfinite(out).all():
        raise ValueError("eigensolver produced non-finite features")
    return out


def cotangent_laplacian(mesh):
    """Symmetric cotangent stiffness matrix (positive semidefinite)."""
    v = mesh.vertices
    t = mesh.triangles
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for k in range(3):
        i = t[:, (k + 1) % 3]
        j = t[:, (k + 2) % 3]
        o = t[:, k]
        e1 = v[i] - v[o]
        e2 = v[j] - v[o]
        cross = np.linalg.norm(np.cross(e1, e2), axis=1)
        cross = np.maximum(cross, 1e-12)
        cot = (e1 * e2).sum(axis=1) / cross
        w = 0.5 * cot
        rows.extend([i, j, i, j])
        cols.extend([j, i, i, j])
        vals.extend([-w, -w, w, w])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    lap = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return (lap + lap.T) * 0.5


def position_features(mesh):
    """Vertex coordinates as a 3-dimensional feature matrix."""
    return mesh.vertices.copy()


def save_features(features, path):
    """Write one vertex per line, 17 significant digits per value."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    with open(path, "w", encoding="utf-8") as fh:
        for row in features:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def load_features(path, mesh):
    """Load a plain-text feature matrix and check it against the mesh."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for ln, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append([float(x) for x in line.split()])
            except ValueError as exc:
                raise ValueError(f"{path}: non-numeric entry on line {ln + 1}") from exc
    feats = np.asarray(rows, dtype=np.float64)
    if feats.ndim != 2 or len(feats) != mesh.n_vertices:
        raise ValueError(
            f"{path}: {len(feats)} feature rows for {mesh.n_vertices} vertices"
        )
    if len({len(r) for r in rows}) > 1:
        raise ValueError(f"{path}: ragged feature rows")
    return feats


def transfer_to_coarse(fine_features, dmap):
    """Average fine vertex features over each collapse group."""
    fine_features = np.asarray(fine_features, dtype=np.float64)
    if len(fine_features) != len(dmap.fine_to_coarse):
        raise ValueError("feature row count does not match the decimation map")
    n_coarse = dmap.n_coarse
    sums = np.zeros((n_coarse, fine_features.shape[1]))
    np.add.at(sums, dmap.fine_to_coarse, fine_features)
    counts = np.bincount(dmap.fine_to_coarse, minlength=n_coarse).astype(np.float64)
    return sums / counts[:, None]


def triangle_features(mesh, features):
    """Features for every extended element: vertices, edges, triangles.

    Row layout matches the extended indexing used by the product space:
    ``[0, nV)`` vertices (their own feature), ``[nV, nV+nE)`` edges
    (mean of 2), ``[nV+nE, nV+nE+nF)`` triangles (mean of 3).
    """
    features = np.asarray(features, dtype=np.float64)
    if len(features) != mesh.n_vertices:
        raise ValueError("feature row count does not match the mesh")
    edge_rows = features[mesh.edges].mean(axis=1) if mesh.n_edges else np.zeros((0, features.shape[1]))
    tri_rows = features[mesh.triangles].mean(axis=1) if mesh.n_triangles else np.zeros((0, features.shape[1]))
    return np.concatenate([features, edge_rows, tri_rows], axis=0)


def cost_vector(space, ext_features_x, ext_features_y):
    """Normalized matching cost per product triangle.

    Cost is the Euclidean distance between the two extended-element
    feature vectors of each product triangle, divided by the maximum
    over all product triangles (all zeros when the maximum is zero).
    Entries always land in [0, 1].
    """
    fx = np.asarray(ext_features_x, dtype=np.float64)
    fy = np.asarray(ext_features_y, dtype=np.float64)
    if fx.shape[1] != fy.shape[1]:
        raise ValueError("feature dimensions differ between shapes")
    diff = fx[space.x_elem] - fy[space.y_elem]
    costs = np.linalg.norm(diff, axis=1)
    top = costs.max() if len(costs) else 0.0
    if top > 0:
        costs = costs / top
    return costs
