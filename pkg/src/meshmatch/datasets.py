"""Synthetic shapes, plane-cut partial shapes, and ground-truthed pairs."""

from dataclasses import dataclass

import numpy as np

from .mesh import TriangleMesh
from .preprocess import repair_with_provenance


def all_cut_normals():
    """The 26 integer plane normals: {-1, 0, 1}^3 without the origin."""
    out = []
    for x in (-1, 0, 1):
        for y in (-1, 0, 1):
            for z in (-1, 0, 1):
                if (x, y, z) != (0, 0, 0):
                    out.append((x, y, z))
    return out


def plane_cut(mesh, normal):
    """Cut off the positive side of the plane through the origin.

    Keeps the triangles whose three vertices all satisfy <normal, v> <= 0,
    then returns the repaired largest connected component together with
    the original vertex index of every surviving vertex. The mesh is
    expected to be mean-centered.
    """
    normal = np.asarray(normal, dtype=np.float64)
    if normal.shape != (3,) or not normal.any():
        raise ValueError("normal must be a nonzero 3-vector")
    below = (mesh.vertices @ normal) <= 0.0
    keep = below[mesh.triangles].all(axis=1)
    if not keep.any():
        raise ValueError("plane cut removed every triangle")
    sub_tris = mesh.triangles[keep]
    used = np.unique(sub_tris)
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    part = TriangleMesh(mesh.vertices[used], remap[sub_tris])
    repaired, vertex_origin, _ = repair_with_provenance(part)
    base_index = used[vertex_origin]
    return repaired, base_index


@dataclass
class SyntheticPair:
    """Two cuts of one base mesh with identity ground truth on shared vertices."""

    mesh_x: TriangleMesh
    mesh_y: TriangleMesh
    base_index_x: np.ndarray
    base_index_y: np.ndarray
    pairs: list
    overlap_x: np.ndarray
    overlap_y: np.ndarray

    @property
    def overlap_fraction(self):
        fx = self.overlap_x.mean() if len(self.overlap_x) else 0.0
        fy = self.overlap_y.mean() if len(self.overlap_y) else 0.0
        return max(float(fx), float(fy))


def synthetic_pair(base, normal_a, normal_b, overlap_range=(0.10, 0.90)):
    """Ground-truthed partial pair from two plane cuts of one mesh.

    Shared base vertices are matched to themselves through the base
    indexing. Pairs whose overlap fraction (on either shape) falls
    outside ``overlap_range`` are rejected with ValueError.
    """
    mesh_x, idx_x = plane_cut(base, normal_a)
    mesh_y, idx_y = plane_cut(base, normal_b)
    lookup_y = {}
    for j, b in enumerate(idx_y):
        lookup_y.setdefault(int(b), j)  # first copy wins for duplicated vertices
    pairs = []
    for i, b in enumerate(idx_x):
        j = lookup_y.get(int(b))
        if j is not None:
            pairs.append((i, j))
    overlap_x = np.zeros(mesh_x.n_vertices, dtype=bool)
    overlap_y = np.zeros(mesh_y.n_vertices, dtype=bool)
    for i, j in pairs:
        overlap_x[i] = True
        overlap_y[j] = True
    lo, hi = overlap_range
    for frac in (overlap_x.mean(), overlap_y.mean()):
        if not lo <= frac <= hi:
            raise ValueError(
                f"overlap fraction {frac:.3f} outside [{lo}, {hi}]"
            )
    return SyntheticPair(mesh_x, mesh_y, idx_x, idx_y, pairs, overlap_x, overlap_y)


def save_ground_truth(base_index, path):
    """Sidecar file: the base vertex index of each partial-shape vertex."""
    with open(path, "w", encoding="utf-8") as fh:
        for b in base_index:
            fh.write(f"{b}\n")


def load_ground_truth(path):
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                values.append(int(line))
    return np.asarray(values, dtype=np.int64)


def pairs_from_base_indices(base_index_x, base_index_y):
    """Identity ground-truth pairs implied by two sidecar index arrays."""
    lookup_y = {}
    for j, b in enumerate(base_index_y):
        lookup_y.setdefault(int(b), j)
    pairs = []
    for i, b in enumerate(base_index_x):
        j = lookup_y.get(int(b))
        if j is not None:
            pairs.append((i, j))
    return pairs


# ----------------------------------------------------------------------
# generated base shapes


def icosphere(subdivisions=1, radius=1.0):
    """Subdivided icosahedron projected onto a sphere, mean-centered."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        verts, faces = _subdivide_on_sphere(verts, faces)
    v = np.asarray(verts, dtype=np.float64) * radius
    v -= v.mean(axis=0)
    return TriangleMesh(v, np.asarray(faces, dtype=np.int64))


def _subdivide_on_sphere(verts, faces):
    verts = list(verts)
    cache = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            p = np.asarray(verts[a]) + np.asarray(verts[b])
            p /= np.linalg.norm(p)
            cache[key] = len(verts)
            verts.append(tuple(p))
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return verts, out


def grid_patch(nx=4, ny=4, width=1.0, height=1.0, bump=0.0):
    """Planar rectangle triangulation, optionally lifted by a smooth bump."""
    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    verts = []
    for y in ys:
        for x in xs:
            z = bump * np.sin(np.pi * x / width) * np.sin(np.pi * y / height)
            verts.append((x, y, z))
    faces = []
    stride = nx + 1
    for j in range(ny):
        for i in range(nx):
            a = j * stride + i
            b = a + 1
            c = a + stride
            d = c + 1
            faces.append((a, b, c))
            faces.append((b, d, c))
    return TriangleMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))


def torus(major_segments=12, minor_segments=8, major_radius=1.0, minor_radius=0.35):
    """Closed torus triangulation, mean-centered at the origin."""
    verts = []
    for i in range(major_segments):
        u = 2.0 * np.pi * i / major_segments
        for j in range(minor_segments):
            v = 2.0 * np.pi * j / minor_segments
            r = major_radius + minor_radius * np.cos(v)
            verts.append((r * np.cos(u), r * np.sin(u), minor_radius * np.sin(v)))
    faces = []
    for i in range(major_segments):
        for j in range(minor_segments):
            a = i * minor_segments + j
            b = ((i + 1) % major_segments) * minor_segments + j
            c = i * minor_segments + (j + 1) % minor_segments
            d = ((i + 1) % major_segments) * minor_segments + (j + 1) % minor_segments
            faces.append((a, b, c))
            faces.append((b, d, c))
    v = np.asarray(verts)
    v -= v.mean(axis=0)
    return TriangleMesh(v, np.asarray(faces, dtype=np.int64))


def subdivided_triangle(levels=1, scale=1.0):
    """Equilateral triangle subdivided into 4^levels faces (a free-boundary patch)."""
    verts = [
        (0.0, 0.0, 0.0),
        (scale, 0.0, 0.0),
        (scale / 2.0, scale * np.sqrt(3.0) / 2.0, 0.0),
    ]
    faces = [(0, 1, 2)]
    for _ in range(levels):
        verts, faces = _subdivide_flat(verts, faces)
    return TriangleMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))


def _subdivide_flat(verts, faces):
    verts = list(verts)
    cache = {}

    def midpoint(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in cache:
            p = (np.asarray(verts[a]) + np.asarray(verts[b])) / 2.0
            cache[key] = len(verts)
            verts.append(tuple(p))
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return verts, out
