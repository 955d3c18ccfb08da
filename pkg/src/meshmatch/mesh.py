"""Triangle mesh data structure with boundary classification and edge-graph geodesics."""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra


class TriangleMesh:
    """Indexed triangle mesh with derived edge and boundary structure.

    Parameters
    ----------
    vertices : array_like
        (n, 3) float coordinates.
    triangles : array_like
        (m, 3) integer vertex indices. The stored winding order is
        preserved; orientation consistency is not enforced here (see
        :func:`meshmatch.preprocess.repair`).

    Attributes
    ----------
    vertices : np.ndarray
        (n, 3) float64, copied from input.
    triangles : np.ndarray
        (m, 3) int64, copied from input.
    edges : np.ndarray
        (k, 2) undirected edges as (min, max) index pairs, sorted
        lexicographically. Edges induced by degenerate faces with
        repeated indices are skipped.
    edge_triangles : list of list of int
        Incident triangle indices per edge. Length 1 marks a boundary
        edge, 2 a manifold interior edge, more a non-manifold edge.
    boundary_edges : np.ndarray
        (k,) bool mask, True where exactly one triangle is incident.
    boundary_vertices : np.ndarray
        (n,) bool mask, True for endpoints of boundary edges.
    """

    def __init__(self, vertices, triangles):
        self.vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3).copy()
        self.triangles = np.asarray(triangles, dtype=np.int64).reshape(-1, 3).copy()
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise ValueError("triangle index out of range")
        self._build_edges()
        self._graph = None

    def _build_edges(self):
        tris = self.triangles
        pairs = []
        for a, b in ((0, 1), (1, 2), (2, 0)):
            pairs.append(tris[:, (a, b)])
        pairs = np.concatenate(pairs, axis=0) if len(tris) else np.zeros((0, 2), np.int64)
        keep = pairs[:, 0] != pairs[:, 1]  # skip self-edges of degenerate faces
        pairs = pairs[keep]
        tri_of_pair = np.tile(np.arange(len(tris)), 3)[keep]
        und = np.sort(pairs, axis=1)
        self.edges, inverse = np.unique(und, axis=0, return_inverse=True) if len(und) else (
            np.zeros((0, 2), np.int64),
            np.zeros(0, np.int64),
        )
        self.edge_triangles = [[] for _ in range(len(self.edges))]
        for e, t in zip(inverse, tri_of_pair):
            self.edge_triangles[e].append(int(t))
        counts = np.array([len(ts) for ts in self.edge_triangles], dtype=np.int64)
        self.boundary_edges = counts == 1
        self.boundary_vertices = np.zeros(len(self.vertices), dtype=bool)
        if self.boundary_edges.any():
            self.boundary_vertices[self.edges[self.boundary_edges].ravel()] = True
        self._edge_index = {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}
        self._edge_counts = counts

    # ------------------------------------------------------------------
    # basic queries

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    def edge_index(self, u, v):
        """Index of the undirected edge (u, v), or -1 if absent."""
        key = (u, v) if u < v else (v, u)
        return self._edge_index.get((int(key[0]), int(key[1])), -1)

    def edge_lengths(self):
        d = self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]]
        return np.linalg.norm(d, axis=1)

    def triangle_areas(self):
        v = self.vertices
        t = self.triangles
        cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def triangle_normals(self, normalize=True):
        v = self.vertices
        t = self.triangles
        n = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        if normalize:
            lens = np.linalg.norm(n, axis=1)
            good = lens > 0
            n[good] /= lens[good, None]
        return n

    @property
    def area(self):
        return float(self.triangle_areas().sum())

    def vertex_areas(self):
        """Lumped per-vertex area: one third of each incident triangle."""
        areas = np.zeros(self.n_vertices)
        np.add.at(areas, self.triangles.ravel(), np.repeat(self.triangle_areas() / 3.0, 3))
        return areas

    # ------------------------------------------------------------------
    # validity checks

    def is_edge_manifold(self):
        return bool(len(self._edge_counts) == 0 or self._edge_counts.max() <= 2)

    def is_vertex_manifold(self):
        """True if the incident faces of every vertex form a single fan."""
        for v in range(self.n_vertices):
            groups = vertex_fan_groups(self, v)
            if len(groups) > 1:
                return False
        return True

    def is_consistently_oriented(self):
        """Every interior edge appears with opposite direction in its two faces."""
        for i, ts in enumerate(self.edge_triangles):
            if len(ts) != 2:
                continue
            u, v = self.edges[i]
            s0 = orientation((u, v), self.triangles[ts[0]])
            s1 = orientation((u, v), self.triangles[ts[1]])
            if s0 * s1 != -1:
                return False
        return True

    def triangle_component_labels(self):
        """Connected-component label per triangle (adjacency via shared edges)."""
        m = self.n_triangles
        rows, cols = [], []
        for ts in self.edge_triangles:
            for i in range(len(ts)):
                for j in range(i + 1, len(ts)):
                    rows.append(ts[i])
                    cols.append(ts[j])
        adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
        n_comp, labels = connected_components(adj, directed=False)
        return labels

    def is_connected(self):
        if self.n_triangles == 0:
            return False
        return len(np.unique(self.triangle_component_labels())) == 1

    def validate(self):
        """Raise ValueError unless the mesh meets all structural invariants."""
        if self.n_triangles == 0:
            raise ValueError("mesh has no triangles")
        if len(np.unique(np.sort(self.triangles, axis=1), axis=0)) != self.n_triangles:
            raise ValueError("duplicate triangles")
        if (self.triangles[:, 0] == self.triangles[:, 1]).any() or (
            self.triangles[:, 1] == self.triangles[:, 2]
        ).any() or (self.triangles[:, 0] == self.triangles[:, 2]).any():
            raise ValueError("triangle with repeated vertex index")
        if not self.is_edge_manifold():
            raise ValueError("non-manifold edge")
        if not self.is_vertex_manifold():
            raise ValueError("non-manifold vertex")
        if not self.is_consistently_oriented():
            raise ValueError("inconsistent orientation")
        if not self.is_connected():
            raise ValueError("mesh is not connected")

    # ------------------------------------------------------------------
    # geodesics

    def _edge_graph(self):
        if self._graph is None:
            w = self.edge_lengths()
            u, v = self.edges[:, 0], self.edges[:, 1]
            n = self.n_vertices
            self._graph = csr_matrix(
                (np.concatenate([w, w]), (np.concatenate([u, v]), np.concatenate([v, u]))),
                shape=(n, n),
            )
        return self._graph

    def geodesic_distances(self, source):
        """Shortest-path distance from ``source`` to every vertex.

        Runs Dijkstra on the edge graph weighted by Euclidean edge
        length. Unreachable vertices get ``inf``.
        """
        d = dijkstra(self._edge_graph(), directed=False, indices=int(source))
        return np.asarray(d)


def orientation(edge, triangle):
    """Signed incidence of an ordered edge in an ordered triangle.

    Returns +1 if ``edge`` appears as a directed side of the triangle's
    cyclic order, -1 if the reversed edge does, 0 if the edge is not a
    side of the triangle.
    """
    u, v = int(edge[0]), int(edge[1])
    a, b, c = int(triangle[0]), int(triangle[1]), int(triangle[2])
    if (u, v) in ((a, b), (b, c), (c, a)):
        return 1
    if (v, u) in ((a, b), (b, c), (c, a)):
        return -1
    return 0


def surface_area(mesh):
    """Total surface area (sum of triangle areas via the cross product)."""
    return mesh.area


def vertex_fan_groups(mesh, v):
    """Partition the faces incident to vertex ``v`` into edge-connected groups.

    A vertex is manifold when this returns at most one group. Faces are
    connected within a group when they share an edge through ``v``.
    """
    incident = np.nonzero((mesh.triangles == v).any(axis=1))[0]
    if len(incident) == 0:
        return []
    incident = [int(f) for f in incident]
    # union-find over incident faces, joined via shared edges at v
    parent = {f: f for f in incident}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in incident:
        tri = mesh.triangles[f]
        for w in tri:
            if w == v:
                continue
            ei = mesh.edge_index(v, int(w))
            if ei < 0:
                continue
            for g in mesh.edge_triangles[ei]:
                if g in parent and g != f:
                    ra, rb = find(f), find(g)
                    if ra != rb:
                        parent[ra] = rb
    groups = {}
    for f in incident:
        groups.setdefault(find(f), []).append(f)
    return [sorted(g) for g in sorted(groups.values(), key=min)]
