"""Mesh repair and edge-collapse decimation with a fine-to-coarse vertex map."""

import heapq
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .mesh import TriangleMesh, orientation, vertex_fan_groups

logger = logging.getLogger(__name__)


@dataclass
class DecimationMap:
    """Traceable record of an edge-collapse decimation.

    Attributes
    ----------
    fine_to_coarse : np.ndarray
        For every fine vertex, the index of its surviving coarse vertex.
        Total and surjective onto the coarse vertex set.
    collapse_log : list of (int, int)
        Ordered (removed_vertex, kept_vertex) pairs in fine indexing.
        Replaying the log from the fine mesh reproduces fine_to_coarse.
    reached_target : bool
        False when no legal collapse remained before hitting the target.
    """

    fine_to_coarse: np.ndarray
    collapse_log: list = field(default_factory=list)
    reached_target: bool = True

    @property
    def n_coarse(self):
        return int(self.fine_to_coarse.max()) + 1 if len(self.fine_to_coarse) else 0

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for fine, coarse in enumerate(self.fine_to_coarse):
                fh.write(f"{fine} {coarse}\n")

    @classmethod
    def load(cls, path):
        fine, coarse = [], []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                a, b = line.split()
                fine.append(int(a))
                coarse.append(int(b))
        order = np.argsort(fine)
        return cls(fine_to_coarse=np.asarray(coarse, dtype=np.int64)[order])


def identity_map(n_vertices):
    return DecimationMap(fine_to_coarse=np.arange(n_vertices, dtype=np.int64))


# ----------------------------------------------------------------------
# repair


def repair(mesh):
    """Repair a triangle soup to the matcher's requirements.

    Output is edge-manifold, vertex-manifold, consistently oriented,
    and restricted to the largest connected component. Raises
    ValueError if nothing remains or the kept component is
    non-orientable.
    """
    repaired, _, _ = repair_with_provenance(mesh)
    return repaired


def repair_with_provenance(mesh):
    """Like :func:`repair`, also returning vertex and face provenance.

    Returns (mesh, vertex_origin, face_origin): ``vertex_origin[i]`` is
    the input vertex index that produced output vertex ``i`` (vertex
    duplicates share an origin), ``face_origin[j]`` the input triangle
    index of output triangle ``j``.
    """
    verts = mesh.vertices.copy()
    faces = [tuple(int(x) for x in t) for t in mesh.triangles]
    face_origin = list(range(len(faces)))
    vertex_origin = list(range(len(verts)))

    # drop faces with repeated vertex indices
    keep = [i for i, f in enumerate(faces) if len(set(f)) == 3]
    faces = [faces[i] for i in keep]
    face_origin = [face_origin[i] for i in keep]

    # drop duplicate faces (same vertex set), keeping the first
    seen = set()
    keep = []
    for i, f in enumerate(faces):
        key = tuple(sorted(f))
        if key not in seen:
            seen.add(key)
            keep.append(i)
    faces = [faces[i] for i in keep]
    face_origin = [face_origin[i] for i in keep]

    # edge-manifoldness: drop the highest-index faces on over-full edges
    while True:
        edge_faces = _edge_faces(faces)
        drop = set()
        for key in sorted(edge_faces):
            incident = edge_faces[key]
            if len(incident) > 2:
                drop.update(sorted(incident)[2:])
        if not drop:
            break
        keep = [i for i in range(len(faces)) if i not in drop]
        faces = [faces[i] for i in keep]
        face_origin = [face_origin[i] for i in keep]
    if not faces:
        raise ValueError("empty mesh after repair")

    # vertex-manifoldness: duplicate each non-manifold vertex per extra fan
    work = TriangleMesh(verts, np.asarray(faces, dtype=np.int64))
    faces_arr = work.triangles.copy()
    new_verts = [verts]
    for v in range(work.n_vertices):
        groups = vertex_fan_groups(work, v)
        if len(groups) <= 1:
            continue
        for group in groups[1:]:
            dup = len(vertex_origin)
            vertex_origin.append(vertex_origin[v])
            new_verts.append(verts[v : v + 1])
            for f in group:
                faces_arr[f][faces_arr[f] == v] = dup
    verts = np.concatenate(new_verts, axis=0)
    faces = [tuple(int(x) for x in t) for t in faces_arr]

    # largest connected component (ties: the one with the lowest face id)
    labels = _face_component_labels(faces)
    sizes = np.bincount(labels)
    best = max(range(len(sizes)), key=lambda c: (sizes[c], -int(np.nonzero(labels == c)[0][0])))
    keep = [i for i in range(len(faces)) if labels[i] == best]
    faces = [faces[i] for i in keep]
    face_origin = [face_origin[i] for i in keep]

    # orientation: BFS from the lowest face, flipping windings to agree
    faces = _orient_faces(faces)

    # compact vertex indexing, preserving relative order
    used = sorted({v for f in faces for v in f})
    remap = {old: new for new, old in enumerate(used)}
    out_faces = np.asarray([[remap[a], remap[b], remap[c]] for a, b, c in faces], dtype=np.int64)
    out_verts = verts[used]
    out_vertex_origin = np.asarray([vertex_origin[u] for u in used], dtype=np.int64)
    out = TriangleMesh(out_verts, out_faces)
    return out, out_vertex_origin, np.asarray(face_origin, dtype=np.int64)


def _edge_faces(faces):
    edge_faces = {}
    for i, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            edge_faces.setdefault(key, []).append(i)
    return edge_faces


def _face_component_labels(faces):
    m = len(faces)
    rows, cols = [], []
    for incident in _edge_faces(faces).values():
        for i in range(len(incident)):
            for j in range(i + 1, len(incident)):
                rows.append(incident[i])
                cols.append(incident[j])
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))
    _, labels = connected_components(adj, directed=False)
    return labels


def _orient_faces(faces):
    edge_faces = _edge_faces(faces)
    out = [tuple(f) for f in faces]
    visited = [False] * len(faces)
    for seed in range(len(faces)):
        if visited[seed]:
            continue
        visited[seed] = True
        queue = [seed]
        while queue:
            f = queue.pop(0)
            a, b, c = out[f]
            for u, v in ((a, b), (b, c), (c, a)):
                key = (u, v) if u < v else (v, u)
                for g in edge_faces[key]:
                    if g == f:
                        continue
                    agree = orientation((u, v), out[g]) == -1
                    if not visited[g]:
                        if not agree:
                            x, y, z = out[g]
                            out[g] = (x, z, y)
                        visited[g] = True
                        queue.append(g)
                    elif not agree:
                        raise ValueError("non-orientable component")
    return out


# ----------------------------------------------------------------------
# decimation


def target_triangle_count(mesh, pair_reference_area, density=100.0):
    """Triangle budget proportional to surface area.

    ``density`` triangles are allotted per unit of ``pair_reference_area``
    (pass the larger area of the pair so the bigger shape receives
    exactly ``density`` triangles). Clamped below at 4.
    """
    if pair_reference_area <= 0 or density <= 0:
        raise ValueError("areas and density must be positive")
    raw = density * mesh.area / pair_reference_area
    return max(4, int(np.floor(raw + 0.5)))


def decimate(mesh, target_triangles):
    """Shortest-edge-first half-edge collapse down to ``target_triangles``.

    Vertices never move: each collapse merges the removed endpoint into
    the kept one (the boundary endpoint when exactly one of the two is
    on the boundary, otherwise the lower index). Collapses that would
    break manifoldness, orphan a vertex, or flip a triangle normal are
    skipped. Stops at the first triangle count <= target.

    Returns (coarse_mesh, DecimationMap). When the target cannot be
    reached the best achieved mesh is returned and the map's
    ``reached_target`` flag is False.
    """
    if target_triangles < 4:
        raise ValueError("target_triangles must be >= 4")
    n = mesh.n_vertices
    if mesh.n_triangles <= target_triangles:
        return mesh, identity_map(n)

    pos = mesh.vertices
    faces = {i: tuple(int(x) for x in t) for i, t in enumerate(mesh.triangles)}
    vfaces = {v: set() for v in range(n)}
    for i, f in faces.items():
        for v in f:
            vfaces[v].add(i)

    def edge_length(u, v):
        return float(np.linalg.norm(pos[u] - pos[v]))

    def common_faces(u, v):
        return vfaces[u] & vfaces[v]

    def neighbors(v):
        out = set()
        for f in vfaces[v]:
            out.update(faces[f])
        out.discard(v)
        return out

    def is_boundary_vertex(v):
        for w in neighbors(v):
            if len(common_faces(v, w)) == 1:
                return True
        return False

    heap = []
    for i, (u, v) in enumerate(mesh.edges):
        heapq.heappush(heap, (edge_length(u, v), int(u), int(v)))

    collapse_log = []
    face_count = len(faces)

    def collapse_legal(u, v):
        shared = common_faces(u, v)
        if not shared or len(shared) > 2:
            return False
        u_bd, v_bd = is_boundary_vertex(u), is_boundary_vertex(v)
        edge_bd = len(shared) == 1
        if u_bd and v_bd and not edge_bd:
            return False  # interior edge joining two boundary verts: pinch
        # link condition: common neighbors must be exactly the opposite verts
        opposite = {w for f in shared for w in faces[f] if w not in (u, v)}
        if (neighbors(u) & neighbors(v)) != opposite:
            return False
        # no orphaned opposite vertex
        for w in opposite:
            if len(vfaces[w]) <= len(common_faces(w, u) & common_faces(w, v)):
                return False
        keep, drop = _keep_drop(u, v, u_bd, v_bd)
        # normal flips among surviving faces around the removed vertex
        for f in vfaces[drop] - shared:
            a, b, c = faces[f]
            before = np.cross(pos[b] - pos[a], pos[c] - pos[a])
            a2, b2, c2 = (keep if x == drop else x for x in (a, b, c))
            after = np.cross(pos[b2] - pos[a2], pos[c2] - pos[a2])
            if float(np.dot(before, after)) < 0.0:
                return False
        return True

    def _keep_drop(u, v, u_bd, v_bd):
        if u_bd != v_bd:
            return (u, v) if u_bd else (v, u)
        return (min(u, v), max(u, v))

    while face_count > target_triangles and heap:
        length, u, v = heapq.heappop(heap)
        if u not in vfaces or v not in vfaces or not common_faces(u, v):
            continue  # stale entry, edge no longer exists
        if not collapse_legal(u, v):
            continue
        keep, drop = _keep_drop(u, v, is_boundary_vertex(u), is_boundary_vertex(v))
        shared = common_faces(keep, drop)
        for f in shared:
            for w in faces[f]:
                vfaces[w].discard(f)
            del faces[f]
            face_count -= 1
        for f in list(vfaces[drop]):
            a, b, c = faces[f]
            faces[f] = tuple(keep if x == drop else x for x in (a, b, c))
            vfaces[drop].discard(f)
            vfaces[keep].add(f)
        del vfaces[drop]
        collapse_log.append((drop, keep))
        # refresh candidate edges whose legality may have changed
        ring = neighbors(keep) | {keep}
        for a in ring:
            for b in neighbors(a):
                if b in ring and a < b:
                    heapq.heappush(heap, (edge_length(a, b), a, b))

    reached = face_count <= target_triangles
    if not reached:
        logger.warning(
            "decimation stopped at %d triangles (target %d): no legal collapse left",
            face_count,
            target_triangles,
        )

    fine_to_coarse = _compose_collapses(n, collapse_log)
    alive = sorted(vfaces.keys())
    remap = {old: new for new, old in enumerate(alive)}
    coarse_faces = np.asarray(
        [[remap[a], remap[b], remap[c]] for a, b, c in faces.values()], dtype=np.int64
    )
    coarse = TriangleMesh(pos[alive], coarse_faces)
    fine_to_coarse = np.asarray([remap[r] for r in fine_to_coarse], dtype=np.int64)
    return coarse, DecimationMap(fine_to_coarse, collapse_log, reached)


def _compose_collapses(n, collapse_log):
    """Resolve chains of (removed, kept) pairs to the surviving root."""
    root = np.arange(n, dtype=np.int64)
    for removed, kept in collapse_log:
        root[removed] = kept
    # path-compress: logs are ordered, so one backward pass suffices,
    # but iterate to a fixed point for safety
    while True:
        nxt = root[root]
        if np.array_equal(nxt, root):
            return root
        root = nxt
