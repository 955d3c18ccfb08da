import numpy as np
import pytest
from hypothesis import given, strategies as st

from meshmatch import datasets
from meshmatch.mesh import TriangleMesh, orientation, surface_area


class TestStructure:
    def test_single_triangle(self, single_triangle):
        m = single_triangle
        assert m.n_edges == 3
        assert m.boundary_edges.all()
        assert m.boundary_vertices.all()
        assert m.area == pytest.approx(0.5)

    def test_closed_tetrahedron(self, tetrahedron):
        assert tetrahedron.n_edges == 6
        assert tetrahedron.boundary_edges.sum() == 0
        assert tetrahedron.boundary_vertices.sum() == 0

    def test_two_triangle_strip(self, strip):
        assert strip.n_edges == 5
        assert strip.boundary_edges.sum() == 4
        assert (~strip.boundary_edges).sum() == 1

    def test_out_of_range_index_rejected(self):
        with pytest.raises(ValueError):
            TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 5]])

    def test_edge_count_identity(self, strip, tetrahedron, single_triangle):
        # |E| = (3 |F| + |E_b|) / 2 on edge-manifold meshes
        for m in (strip, tetrahedron, single_triangle, datasets.icosphere(1)):
            assert 2 * m.n_edges == 3 * m.n_triangles + int(m.boundary_edges.sum())

    def test_validate_passes_on_clean_meshes(self, strip, tetrahedron):
        strip.validate()
        tetrahedron.validate()


class TestOrientation:
    def test_forward_edge(self):
        assert orientation((1, 2), (1, 2, 3)) == 1

    def test_reversed_edge(self):
        assert orientation((2, 1), (1, 2, 3)) == -1

    def test_non_incident_edge(self):
        assert orientation((1, 4), (1, 2, 3)) == 0

    def test_opposite_signs_across_interior_edges(self, strip, tetrahedron):
        for m in (strip, tetrahedron, datasets.icosphere(1)):
            for ei, tris in enumerate(m.edge_triangles):
                if len(tris) != 2:
                    continue
                e = tuple(m.edges[ei])
                s0 = orientation(e, m.triangles[tris[0]])
                s1 = orientation(e, m.triangles[tris[1]])
                assert s0 * s1 == -1

    def test_each_triangle_has_three_incident_edges(self, tetrahedron):
        m = tetrahedron
        total = 0
        for f in m.triangles:
            for e in m.edges:
                if orientation(e, f) != 0:
                    total += 1
        assert total == 3 * m.n_triangles

    @given(st.permutations([1, 2, 3]))
    def test_total_function_on_triangle_relabelings(self, tri):
        for e in [(1, 2), (2, 3), (3, 1), (1, 3), (9, 1)]:
            assert orientation(e, tri) in (-1, 0, 1)


class TestArea:
    def test_unit_right_triangle(self):
        m = TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
        assert surface_area(m) == pytest.approx(0.5)

    def test_additivity_over_disjoint_copies(self):
        verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 0, 0], [6, 0, 0], [5, 1, 0]]
        m = TriangleMesh(verts, [[0, 1, 2], [3, 4, 5]])
        assert surface_area(m) == pytest.approx(1.0)

    def test_degenerate_triangle_contributes_zero(self):
        m = TriangleMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 1, 2]])
        assert surface_area(m) == 0.0

    def test_vertex_areas_sum_to_total(self, tetrahedron):
        assert tetrahedron.vertex_areas().sum() == pytest.approx(tetrahedron.area)


class TestGeodesics:
    def test_source_distance_zero(self, strip):
        assert strip.geodesic_distances(0)[0] == 0.0

    def test_path_graph(self):
        m = TriangleMesh(
            [[0, 0, 0], [1, 0, 0], [2, 0, 0], [1, 1, 0], [2, 1, 0]],
            [[0, 1, 3], [1, 2, 4]],
        )
        # no direct edge between 0 and 2; the path runs through vertex 1
        d = m.geodesic_distances(0)
        assert d[1] == pytest.approx(1.0)
        assert d[2] == pytest.approx(2.0)

    def test_3_4_5_triangle_uses_direct_edge(self):
        m = TriangleMesh([[0, 0, 0], [3, 0, 0], [0, 4, 0]], [[0, 1, 2]])
        assert m.geodesic_distances(1)[2] == pytest.approx(5.0)

    def test_triangle_inequality_sampled(self):
        m = datasets.icosphere(1)
        d = [m.geodesic_distances(s) for s in (0, 7, 23)]
        idx = {0: 0, 7: 1, 23: 2}
        for a in (0, 7, 23):
            for b in (0, 7, 23):
                for v in range(0, m.n_vertices, 5):
                    assert d[idx[a]][v] <= d[idx[a]][b] + d[idx[b]][v] + 1e-12

    def test_unreachable_is_infinite(self):
        verts = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [5, 0, 0], [6, 0, 0], [5, 1, 0]]
        m = TriangleMesh(verts, [[0, 1, 2], [3, 4, 5]])
        assert np.isinf(m.geodesic_distances(0)[3])
