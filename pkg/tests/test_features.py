import numpy as np
import pytest

from meshmatch import datasets, product
from meshmatch.features import (
    cost_vector,
    hks_features,
    load_features,
    position_features,
    save_features,
    transfer_to_coarse,
    triangle_features,
)
from meshmatch.mesh import TriangleMesh
from meshmatch.preprocess import decimate, identity_map


@pytest.fixture(scope="module")
def bumpy_patch():
    return datasets.grid_patch(4, 3, bump=0.3)


class TestHks:
    def test_output_shape(self, bumpy_patch):
        f = hks_features(bumpy_patch, eig_count=10, time_count=7)
        assert f.shape == (bumpy_patch.n_vertices, 7)
        assert np.isfinite(f).all()

    def test_rigid_motion_invariance(self, bumpy_patch):
        angle = 0.7
        rot = np.array(
            [
                [np.cos(angle), -np.sin(angle), 0.0],
                [np.sin(angle), np.cos(angle), 0.0],
                [0.0, 0.0, 1.0],
            ]
        )
        moved = TriangleMesh(bumpy_patch.vertices @ rot.T + [3.0, -1.0, 2.0],
                             bumpy_patch.triangles)
        f0 = hks_features(bumpy_patch, eig_count=12, time_count=8)
        f1 = hks_features(moved, eig_count=12, time_count=8)
        assert np.abs(f0 - f1).max() < 1e-6

    def test_isometric_copies_match_through_bijection(self, bumpy_patch):
        # relabel vertices with a fixed permutation: same surface, new indexing
        perm = np.roll(np.arange(bumpy_patch.n_vertices), 5)
        inv = np.argsort(perm)
        relabeled = TriangleMesh(bumpy_patch.vertices[perm], inv[bumpy_patch.triangles])
        f0 = hks_features(bumpy_patch, eig_count=12, time_count=8)
        f1 = hks_features(relabeled, eig_count=12, time_count=8)
        assert np.abs(f0 - f1[inv]).max() < 1e-6

    def test_constant_mode_gives_equal_features(self, bumpy_patch):
        f = hks_features(bumpy_patch, eig_count=1, time_count=5)
        assert np.abs(f - f[0]).max() < 1e-9

    def test_eig_count_validated(self, bumpy_patch):
        with pytest.raises(ValueError):
            hks_features(bumpy_patch, eig_count=0)
        with pytest.raises(ValueError):
            hks_features(bumpy_patch, eig_count=bumpy_patch.n_vertices + 1)


class TestFeatureFiles:
    def test_zero_file(self, tmp_path, strip):
        path = tmp_path / "w.txt"
        save_features(np.zeros((4, 1)), path)
        f = load_features(path, strip)
        assert f.shape == (4, 1)
        assert (f == 0).all()

    def test_round_trip_bit_exact(self, tmp_path, strip):
        rng = np.random.default_rng(3)
        w = rng.standard_normal((4, 5)) * 10.0 ** rng.integers(-12, 12, size=(4, 5))
        path = tmp_path / "w.txt"
        save_features(w, path)
        assert np.array_equal(load_features(path, strip), w)

    def test_wrong_row_count_rejected(self, tmp_path, strip):
        path = tmp_path / "w.txt"
        save_features(np.zeros((3, 2)), path)
        with pytest.raises(ValueError, match="rows"):
            load_features(path, strip)

    def test_non_numeric_rejected(self, tmp_path, strip):
        path = tmp_path / "w.txt"
        path.write_text("0 0\n1 x\n2 2\n3 3\n")
        with pytest.raises(ValueError, match="non-numeric"):
            load_features(path, strip)


class TestTransfer:
    def test_identity_map_unchanged(self, strip):
        w = np.arange(8.0).reshape(4, 2)
        out = transfer_to_coarse(w, identity_map(4))
        assert np.array_equal(out, w)

    def test_two_to_one_mean(self):
        from meshmatch.preprocess import DecimationMap

        dmap = DecimationMap(fine_to_coarse=np.array([0, 0]))
        out = transfer_to_coarse(np.array([[0.0], [2.0]]), dmap)
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(1.0)

    def test_constant_field_stays_constant(self):
        grid = datasets.grid_patch(3, 3)
        coarse, dmap = decimate(grid, 8)
        w = np.full((grid.n_vertices, 3), 7.5)
        out = transfer_to_coarse(w, dmap)
        assert np.allclose(out, 7.5)
        assert len(out) == coarse.n_vertices


class TestTriangleFeatures:
    def test_vertex_edge_triangle_means(self, single_triangle):
        w = np.array([[0.0], [4.0], [6.0]])
        ext = triangle_features(single_triangle, w)
        m = single_triangle
        assert ext.shape == (m.n_vertices + m.n_edges + m.n_triangles, 1)
        assert np.array_equal(ext[: m.n_vertices], w)
        for ei, (u, v) in enumerate(m.edges):
            assert ext[m.n_vertices + ei, 0] == pytest.approx((w[u, 0] + w[v, 0]) / 2)
        assert ext[-1, 0] == pytest.approx(w.mean())

    def test_constant_field_constant_everywhere(self, tetrahedron):
        ext = triangle_features(tetrahedron, np.full((4, 2), 3.25))
        assert np.allclose(ext, 3.25)


class TestCostVector:
    def test_identical_features_all_zero(self, single_triangle):
        sp = product.enumerate_product_triangles(single_triangle, single_triangle)
        w = position_features(single_triangle)
        ext = triangle_features(single_triangle, w)
        costs = cost_vector(sp, ext, ext)
        # identity-aligned columns cost zero; the max-zero convention would
        # apply only if every column had equal features
        assert costs.min() == 0.0
        assert costs.max() == pytest.approx(1.0)
        zero_cols = np.nonzero(costs == 0)[0]
        assert len(zero_cols) >= 3

    def test_all_equal_features_give_zero_vector(self, single_triangle):
        sp = product.enumerate_product_triangles(single_triangle, single_triangle)
        ext = triangle_features(single_triangle, np.full((3, 2), 1.5))
        costs = cost_vector(sp, ext, ext)
        assert (costs == 0).all()

    def test_max_normalization(self):
        raw = np.array([1.0, 2.0, 4.0])
        assert np.allclose(raw / raw.max(), [0.25, 0.5, 1.0])

    def test_range_and_max_one(self, strip, single_triangle):
        sp = product.enumerate_product_triangles(strip, single_triangle)
        ext_x = triangle_features(strip, position_features(strip))
        ext_y = triangle_features(single_triangle, position_features(single_triangle) + 2.0)
        costs = cost_vector(sp, ext_x, ext_y)
        assert (costs >= 0).all() and (costs <= 1).all()
        assert costs.max() == pytest.approx(1.0)

    def test_dimension_mismatch_rejected(self, single_triangle):
        sp = product.enumerate_product_triangles(single_triangle, single_triangle)
        with pytest.raises(ValueError):
            cost_vector(sp, np.zeros((7, 2)), np.zeros((7, 3)))
