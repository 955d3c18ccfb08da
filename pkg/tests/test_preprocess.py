import numpy as np
import pytest

from meshmatch import datasets
from meshmatch.mesh import TriangleMesh
from meshmatch.preprocess import (
    DecimationMap,
    decimate,
    repair,
    repair_with_provenance,
    target_triangle_count,
)
from conftest import make_strip_row


def bowtie():
    # two triangles sharing only vertex 2
    verts = [[0, 0, 0], [1, 0, 0], [0.5, 0.5, 0], [0, 1, 0], [1, 1, 0]]
    return TriangleMesh(verts, [[0, 1, 2], [2, 3, 4]])


class TestRepair:
    def test_bowtie_splits_vertex_and_keeps_one_triangle(self):
        out = repair(bowtie())
        assert out.n_triangles == 1
        out.validate()

    def test_idempotent_on_clean_mesh(self, strip):
        once = repair(strip)
        assert np.allclose(once.vertices, strip.vertices)
        assert np.array_equal(once.triangles, strip.triangles)
        twice = repair(once)
        assert np.array_equal(twice.triangles, once.triangles)
        assert np.allclose(twice.vertices, once.vertices)

    def test_largest_component_kept(self):
        big = make_strip_row(5)  # 10 triangles
        small = TriangleMesh(
            [[10, 0, 0], [11, 0, 0], [10, 1, 0], [11, 1, 0]],
            [[0, 1, 2], [1, 3, 2]],
        )
        offset = big.n_vertices
        verts = np.concatenate([big.vertices, small.vertices])
        tris = np.concatenate([big.triangles, small.triangles + offset])
        out = repair(TriangleMesh(verts, tris))
        assert out.n_triangles == 10

    def test_inconsistent_winding_fixed(self, strip):
        flipped = TriangleMesh(strip.vertices, [[0, 1, 2], [1, 2, 3]])
        assert not flipped.is_consistently_oriented()
        out = repair(flipped)
        assert out.is_consistently_oriented()

    def test_duplicate_faces_dropped(self, strip):
        tris = np.concatenate([strip.triangles, strip.triangles[:1]])
        out = repair(TriangleMesh(strip.vertices, tris))
        assert out.n_triangles == 2

    def test_degenerate_index_faces_dropped(self, strip):
        tris = np.concatenate([strip.triangles, [[0, 0, 1]]])
        out = repair(TriangleMesh(strip.vertices, tris))
        assert out.n_triangles == 2

    def test_over_full_edge_reduced(self, strip):
        # a third face on the shared edge (1, 2)
        verts = np.concatenate([strip.vertices, [[0.5, 0.5, 1.0]]])
        tris = np.concatenate([strip.triangles, [[1, 2, 4]]])
        out = repair(TriangleMesh(verts, tris))
        assert out.is_edge_manifold()

    def test_empty_after_filtering_raises(self):
        m = TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 0, 1]])
        with pytest.raises(ValueError, match="empty"):
            repair(m)

    def test_provenance_maps_duplicates_to_origin(self):
        out, vertex_origin, face_origin = repair_with_provenance(bowtie())
        assert len(vertex_origin) == out.n_vertices
        assert len(face_origin) == out.n_triangles
        assert set(face_origin) <= {0, 1}


class TestDecimate:
    def test_target_at_or_above_count_is_identity(self, strip):
        out, dmap = decimate(strip, 10)
        assert out.n_triangles == 2
        assert np.array_equal(dmap.fine_to_coarse, np.arange(4))
        assert dmap.collapse_log == []

    def test_grid_patch_reaches_target(self):
        grid = datasets.grid_patch(4, 4)  # 32 triangles
        out, dmap = decimate(grid, 8)
        assert out.n_triangles <= 8
        assert dmap.reached_target
        out.validate()
        # surjectivity: every coarse vertex has at least one preimage
        counts = np.bincount(dmap.fine_to_coarse, minlength=out.n_vertices)
        assert (counts >= 1).all()
        assert dmap.fine_to_coarse.max() == out.n_vertices - 1

    def test_collapse_log_composes_to_map(self):
        grid = datasets.grid_patch(4, 4)
        out, dmap = decimate(grid, 10)
        root = np.arange(grid.n_vertices)
        for removed, kept in dmap.collapse_log:
            root[root == removed] = kept
        alive = sorted(set(root))
        relabel = {v: i for i, v in enumerate(alive)}
        assert np.array_equal(dmap.fine_to_coarse, [relabel[r] for r in root])

    def test_preserves_manifoldness_orientation_connectivity(self):
        sphere = datasets.icosphere(1)
        out, _ = decimate(sphere, 20)
        out.validate()
        assert out.boundary_edges.sum() == 0  # closed stays closed

    def test_vertices_never_move(self):
        grid = datasets.grid_patch(3, 3)
        out, dmap = decimate(grid, 6)
        fine = {tuple(v) for v in grid.vertices}
        assert all(tuple(v) in fine for v in out.vertices)

    def test_target_below_four_rejected(self, strip):
        with pytest.raises(ValueError):
            decimate(strip, 3)

    def test_map_round_trip(self, tmp_path):
        grid = datasets.grid_patch(3, 3)
        _, dmap = decimate(grid, 8)
        path = tmp_path / "map.txt"
        dmap.save(path)
        back = DecimationMap.load(path)
        assert np.array_equal(back.fine_to_coarse, dmap.fine_to_coarse)


class TestTargetTriangleCount:
    def test_equal_area_gives_density(self, single_triangle):
        assert target_triangle_count(single_triangle, single_triangle.area, 100) == 100

    def test_proportional_to_area(self, single_triangle):
        ref = 2.0 * single_triangle.area
        assert target_triangle_count(single_triangle, ref, 100) == 50

    def test_clamped_at_four(self, single_triangle):
        assert target_triangle_count(single_triangle, 1e9 * single_triangle.area, 100) == 4

    def test_positive_inputs_required(self, single_triangle):
        with pytest.raises(ValueError):
            target_triangle_count(single_triangle, 0.0, 100)
