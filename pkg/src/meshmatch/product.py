"""Product triangle space over a pair of meshes and its constraint system.

A product triangle pairs an extended element (vertex, edge, or
triangle) of one mesh with an element of the other, at least one side
being a genuine triangle. Each is encoded as two ordered vertex
triples: a triangle lists its corners cyclically, an edge uses both
endpoints with exactly one duplicated, a vertex repeats one index three
times. Columns are stored in the canonical (lexicographically smallest)
of their three simultaneous cyclic rotations.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix

KIND_VERTEX = 0
KIND_EDGE = 1
KIND_TRIANGLE = 2


@dataclass
class ProductTriangle:
    """One candidate local match: paired ordered vertex triples."""

    x_listing: tuple
    y_listing: tuple
    x_kind: int
    y_kind: int


@dataclass(frozen=True)
class ProductEdge:
    """Canonically oriented boundary segment of product triangles."""

    tail: tuple  # (x vertex, y vertex)
    head: tuple

    @property
    def kind(self):
        x_vertex = self.tail[0] == self.head[0]
        y_vertex = self.tail[1] == self.head[1]
        if x_vertex:
            return "vertex-edge"
        if y_vertex:
            return "edge-vertex"
        return "edge-edge"


class ProductSpace:
    """Enumerated product triangles with extended-element bookkeeping."""

    def __init__(self, x_listings, y_listings, x_kind, y_kind, x_elem, y_elem, x_face, y_face,
                 n_x_vertices=0, n_y_vertices=0, n_x_triangles=0, n_y_triangles=0):
        self.x_listings = x_listings
        self.y_listings = y_listings
        self.x_kind = x_kind
        self.y_kind = y_kind
        self.x_elem = x_elem
        self.y_elem = y_elem
        self.x_face = x_face
        self.y_face = y_face
        self.n_x_vertices = n_x_vertices
        self.n_y_vertices = n_y_vertices
        self.n_x_triangles = n_x_triangles
        self.n_y_triangles = n_y_triangles

    def __len__(self):
        return len(self.x_listings)

    @property
    def n_columns(self):
        return len(self.x_listings)

    def column(self, i):
        return ProductTriangle(
            tuple(int(v) for v in self.x_listings[i]),
            tuple(int(v) for v in self.y_listings[i]),
            int(self.x_kind[i]),
            int(self.y_kind[i]),
        )


def _edge_listing_patterns(p, q):
    """All six surjective three-position listings of an edge (p, q)."""
    return [(p, p, q), (p, q, p), (q, p, p), (q, q, p), (q, p, q), (p, q, q)]


def _lex_less(a, b):
    """Row-wise lexicographic a < b for equal-width integer arrays."""
    less = np.zeros(len(a), dtype=bool)
    decided = np.zeros(len(a), dtype=bool)
    for c in range(a.shape[1]):
        lt = ~decided & (a[:, c] < b[:, c])
        gt = ~decided & (a[:, c] > b[:, c])
        less |= lt
        decided |= lt | gt
    return less


def _canonicalize(xl, yl):
    """Rotate each (x, y) listing pair to its lexicographic minimum."""
    best = np.concatenate([xl, yl], axis=1)
    best_x, best_y = xl, yl
    for r in (1, 2):
        cx = np.roll(xl, -r, axis=1)
        cy = np.roll(yl, -r, axis=1)
        cand = np.concatenate([cx, cy], axis=1)
        take = _lex_less(cand, best)
        best = np.where(take[:, None], cand, best)
        best_x = np.where(take[:, None], cx, best_x)
        best_y = np.where(take[:, None], cy, best_y)
    return best_x, best_y


def enumerate_product_triangles(mesh_x, mesh_y):
    """Enumerate every product triangle of the pair exactly once.

    Triangle-against-triangle pairs contribute their three cyclic
    alignments (orientation preserving only); triangle-against-edge
    pairs all six surjective edge listings; triangle-against-vertex
    pairs a single column. Triangle x triangle pairs appear once even
    though they lie in both halves of the underlying union.
    """
    nvx, nvy = mesh_x.n_vertices, mesh_y.n_vertices
    nex, ney = mesh_x.n_edges, mesh_y.n_edges
    fx = mesh_x.triangles
    fy = mesh_y.triangles

    blocks = []  # (x_listings, y_listings, x_kind, y_kind, x_elem, y_elem, x_face, y_face)

    def add(xl, yl, xk, yk, xe, ye, xf, yf):
        if len(xl):
            blocks.append(
                (
                    np.asarray(xl, dtype=np.int64).reshape(-1, 3),
                    np.asarray(yl, dtype=np.int64).reshape(-1, 3),
                    xk,
                    yk,
                    np.asarray(xe, dtype=np.int64),
                    np.asarray(ye, dtype=np.int64),
                    np.asarray(xf, dtype=np.int64),
                    np.asarray(yf, dtype=np.int64),
                )
            )

    nfx, nfy = len(fx), len(fy)
    if nfx and nfy:
        # triangle x triangle: three relative rotations per face pair
        xl = []
        yl = []
        xe = []
        ye = []
        xf = []
        yf = []
        for r in range(3):
            rot = np.roll(fx, -r, axis=1)
            xl.append(np.repeat(rot, nfy, axis=0))
            yl.append(np.tile(fy, (nfx, 1)))
            xe.append(np.repeat(np.arange(nfx), nfy) + nvx + nex)
            ye.append(np.tile(np.arange(nfy), nfx) + nvy + ney)
            xf.append(np.repeat(np.arange(nfx), nfy))
            yf.append(np.tile(np.arange(nfy), nfx))
        add(
            np.concatenate(xl),
            np.concatenate(yl),
            KIND_TRIANGLE,
            KIND_TRIANGLE,
            np.concatenate(xe),
            np.concatenate(ye),
            np.concatenate(xf),
            np.concatenate(yf),
        )

    def degenerate_side(mesh_deg, mesh_tri, nv_deg, x_side):
        """Columns pairing triangles of one mesh with edges / vertices of the other."""
        tris = mesh_tri.triangles
        nf = len(tris)
        if nf == 0:
            return
        edge_l = []
        edge_e = []
        for ei, (p, q) in enumerate(mesh_deg.edges):
            for pattern in _edge_listing_patterns(int(p), int(q)):
                edge_l.append(pattern)
                edge_e.append(nv_deg + ei)
        vert_l = [(v, v, v) for v in range(mesh_deg.n_vertices)]
        vert_e = list(range(mesh_deg.n_vertices))
        deg_l = np.asarray(edge_l + vert_l, dtype=np.int64).reshape(-1, 3)
        deg_e = np.asarray(edge_e + vert_e, dtype=np.int64)
        deg_k = np.concatenate(
            [
                np.full(len(edge_l), KIND_EDGE, dtype=np.int8),
                np.full(len(vert_l), KIND_VERTEX, dtype=np.int8),
            ]
        )
        nd = len(deg_l)
        if nd == 0:
            return
        tri_l = np.repeat(tris, nd, axis=0)
        tri_f = np.repeat(np.arange(nf), nd)
        nv_tri = mesh_tri.n_vertices
        ne_tri = mesh_tri.n_edges
        tri_e = tri_f + nv_tri + ne_tri
        deg_l_full = np.tile(deg_l, (nf, 1))
        deg_e_full = np.tile(deg_e, nf)
        deg_k_full = np.tile(deg_k, nf)
        if x_side == "deg":
            blocks.append(
                (deg_l_full, tri_l, deg_k_full, KIND_TRIANGLE, deg_e_full, tri_e,
                 np.full(nf * nd, -1, dtype=np.int64), tri_f)
            )
        else:
            blocks.append(
                (tri_l, deg_l_full, KIND_TRIANGLE, deg_k_full, tri_e, deg_e_full,
                 tri_f, np.full(nf * nd, -1, dtype=np.int64))
            )

    degenerate_side(mesh_y, mesh_x, nvy, "tri")  # triangles of X against degenerates of Y
    degenerate_side(mesh_x, mesh_y, nvx, "deg")  # degenerates of X against triangles of Y

    if not blocks:
        empty = np.zeros((0, 3), dtype=np.int64)
        zero = np.zeros(0, dtype=np.int64)
        return ProductSpace(empty, empty.copy(), np.zeros(0, np.int8), np.zeros(0, np.int8),
                            zero, zero.copy(), zero.copy(), zero.copy(),
                            nvx, nvy, nfx, nfy)

    x_listings = np.concatenate([b[0] for b in blocks])
    y_listings = np.concatenate([b[1] for b in blocks])

    def expand_kind(val, length):
        if np.isscalar(val):
            return np.full(length, val, dtype=np.int8)
        return np.asarray(val, dtype=np.int8)

    x_kind = np.concatenate([expand_kind(b[2], len(b[0])) for b in blocks])
    y_kind = np.concatenate([expand_kind(b[3], len(b[0])) for b in blocks])
    x_elem = np.concatenate([b[4] for b in blocks])
    y_elem = np.concatenate([b[5] for b in blocks])
    x_face = np.concatenate([b[6] for b in blocks])
    y_face = np.concatenate([b[7] for b in blocks])

    x_listings, y_listings = _canonicalize(x_listings, y_listings)
    return ProductSpace(x_listings, y_listings, x_kind, y_kind, x_elem, y_elem, x_face, y_face,
                        nvx, nvy, nfx, nfy)


def boundary_of(pt):
    """Directed boundary segments of a product triangle with signs.

    Returns a list of (ProductEdge, sign) where sign is +1 when the
    directed segment matches the canonical orientation of its product
    edge and -1 when reversed. Segments whose tail equals their head
    (both components repeat) are dropped.
    """
    xl, yl = pt.x_listing, pt.y_listing
    out = []
    for i in range(3):
        j = (i + 1) % 3
        tail = (int(xl[i]), int(yl[i]))
        head = (int(xl[j]), int(yl[j]))
        if tail == head:
            continue
        if tail < head:
            out.append((ProductEdge(tail, head), 1))
        else:
            out.append((ProductEdge(head, tail), -1))
    return out


@dataclass
class ConstraintSystem:
    """Sparse constraint data over product-triangle columns.

    ``pi_x`` and ``pi_y`` are the 0/1 triangle-uniqueness projections,
    ``boundary`` the signed interior-product-edge incidence operator,
    ``boundary_keys`` the interior product edges indexing its rows, and
    ``nb_columns`` the columns eligible for the minimum-matching
    coverage constraint (both sides non-degenerate triangles without
    boundary edges).
    """

    pi_x: csr_matrix
    pi_y: csr_matrix
    boundary: csr_matrix
    boundary_keys: list
    nb_columns: np.ndarray

    @property
    def n_columns(self):
        return self.pi_x.shape[1]


def build_constraints(mesh_x, mesh_y, space):
    """Assemble the projection, boundary, and coverage structures."""
    n = len(space)

    # uniqueness projections: a column covers a mesh triangle only via a
    # non-degenerate side
    tri_cols_x = np.nonzero(space.x_kind == KIND_TRIANGLE)[0]
    pi_x = csr_matrix(
        (np.ones(len(tri_cols_x)), (space.x_face[tri_cols_x], tri_cols_x)),
        shape=(mesh_x.n_triangles, n),
    )
    tri_cols_y = np.nonzero(space.y_kind == KIND_TRIANGLE)[0]
    pi_y = csr_matrix(
        (np.ones(len(tri_cols_y)), (space.y_face[tri_cols_y], tri_cols_y)),
        shape=(mesh_y.n_triangles, n),
    )

    # coverage set: triangle x triangle columns with no boundary edge on
    # either face
    def face_nonboundary(mesh):
        mask = np.ones(mesh.n_triangles, dtype=bool)
        for fi, (a, b, c) in enumerate(mesh.triangles):
            for u, v in ((a, b), (b, c), (c, a)):
                ei = mesh.edge_index(int(u), int(v))
                if ei < 0 or mesh.boundary_edges[ei]:
                    mask[fi] = False
                    break
        return mask

    nb_x = face_nonboundary(mesh_x)
    nb_y = face_nonboundary(mesh_y)
    both_tri = (space.x_kind == KIND_TRIANGLE) & (space.y_kind == KIND_TRIANGLE)
    nb_mask = both_tri.copy()
    nb_mask[both_tri] = nb_x[space.x_face[both_tri]] & nb_y[space.y_face[both_tri]]
    nb_columns = np.nonzero(nb_mask)[0]

    # boundary operator over interior product edges
    xl, yl = space.x_listings, space.y_listings
    entries = {}
    for i in range(3):
        j = (i + 1) % 3
        tx, ty = xl[:, i], yl[:, i]
        hx, hy = xl[:, j], yl[:, j]
        degenerate = (tx == hx) & (ty == hy)
        cols = np.nonzero(~degenerate)[0]
        for c in cols:
            a = (int(tx[c]), int(ty[c]))
            b = (int(hx[c]), int(hy[c]))
            if a < b:
                key, sign = (a, b), 1
            else:
                key, sign = (b, a), -1
            if not _is_interior(key, mesh_x, mesh_y):
                continue
            entries.setdefault(key, []).append((int(c), sign))

    keys = sorted(entries)
    rows, cols, vals = [], [], []
    for r, key in enumerate(keys):
        for c, sign in entries[key]:
            rows.append(r)
            cols.append(c)
            vals.append(sign)
    boundary = csr_matrix(
        (np.asarray(vals, dtype=np.int64), (rows, cols)), shape=(len(keys), n)
    )
    boundary.sum_duplicates()
    return ConstraintSystem(pi_x, pi_y, boundary, keys, nb_columns)


def _is_interior(key, mesh_x, mesh_y):
    (xa, ya), (xb, yb) = key
    if xa == xb:
        if mesh_x.boundary_vertices[xa]:
            return False
    else:
        ei = mesh_x.edge_index(xa, xb)
        if ei < 0 or mesh_x.boundary_edges[ei]:
            return False
    if ya == yb:
        if mesh_y.boundary_vertices[ya]:
            return False
    else:
        ei = mesh_y.edge_index(ya, yb)
        if ei < 0 or mesh_y.boundary_edges[ei]:
            return False
    return True


def dump_constraints(system, path):
    """Write the constraint matrices as sparse triplet text blocks."""
    with open(path, "w", encoding="utf-8") as fh:
        for name, mat in (
            ("pi_x", system.pi_x),
            ("pi_y", system.pi_y),
            ("boundary", system.boundary),
        ):
            coo = mat.tocoo()
            fh.write(f"# {name} {mat.shape[0]} {mat.shape[1]} {coo.nnz}\n")
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {int(v)}\n")
        fh.write(f"# nb_columns {len(system.nb_columns)}\n")
        for c in system.nb_columns:
            fh.write(f"{c}\n")
