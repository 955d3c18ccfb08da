import numpy as np
import pytest

from meshmatch import io
from meshmatch.mesh import TriangleMesh


def test_off_round_trip(tmp_path, strip):
    path = tmp_path / "strip.off"
    io.save_mesh(strip, path)
    back = io.load_mesh(path)
    assert np.allclose(back.vertices, strip.vertices)
    assert np.array_equal(back.triangles, strip.triangles)


def test_ply_round_trip(tmp_path, tetrahedron):
    path = tmp_path / "tet.ply"
    io.save_mesh(tetrahedron, path)
    back = io.load_mesh(path)
    assert np.allclose(back.vertices, tetrahedron.vertices)
    assert np.array_equal(back.triangles, tetrahedron.triangles)


def test_off_single_triangle_counts(tmp_path):
    path = tmp_path / "tri.off"
    path.write_text("OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    m = io.load_mesh(path)
    assert m.n_edges == 3
    assert m.boundary_edges.all()
    assert m.area == pytest.approx(0.5)


def test_off_counts_on_header_line(tmp_path):
    path = tmp_path / "tri.off"
    path.write_text("OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    assert io.load_mesh(path).n_triangles == 1


def test_off_comments_ignored(tmp_path):
    path = tmp_path / "tri.off"
    path.write_text("OFF\n# a comment\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    assert io.load_mesh(path).n_vertices == 3


def test_non_triangle_face_rejected(tmp_path):
    path = tmp_path / "quad.off"
    path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    with pytest.raises(ValueError, match="not a triangle"):
        io.load_mesh(path)


def test_truncated_off_rejected(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n")
    with pytest.raises(ValueError, match="truncated"):
        io.load_mesh(path)


def test_out_of_range_index_rejected(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n")
    with pytest.raises(ValueError):
        io.load_mesh(path)


def test_binary_ply_rejected(tmp_path):
    path = tmp_path / "bin.ply"
    path.write_text(
        "ply\nformat binary_little_endian 1.0\nelement vertex 0\n"
        "element face 0\nend_header\n"
    )
    with pytest.raises(ValueError, match="ASCII"):
        io.load_mesh(path)


def test_vertex_colors_written_and_preserved(tmp_path, strip):
    colors = np.array([[255, 0, 0], [0, 255, 0], [0, 0, 255], [10, 20, 30]])
    ply = tmp_path / "colored.ply"
    io.save_mesh(strip, ply, vertex_colors=colors)
    text = ply.read_text()
    assert "property uchar red" in text
    assert "255 0 0" in text
    back = io.load_mesh(ply)  # geometry still loads
    assert back.n_vertices == 4

    off = tmp_path / "colored.off"
    io.save_mesh(strip, off, vertex_colors=colors)
    assert off.read_text().startswith("COFF")
    assert io.load_mesh(off).n_triangles == 2


def test_bad_color_shape_rejected(tmp_path, strip):
    with pytest.raises(ValueError):
        io.save_mesh(strip, tmp_path / "x.ply", vertex_colors=[[1, 2, 3]])


def test_unknown_format_rejected(tmp_path, strip):
    with pytest.raises(ValueError, match="unsupported"):
        io.save_mesh(strip, tmp_path / "mesh.stl")


def test_coordinates_round_trip_exactly(tmp_path):
    verts = np.array([[0.1234567890123456, -1e-17, 3.0], [1, 0, 0], [0, 1, 0]])
    m = TriangleMesh(verts, [[0, 1, 2]])
    path = tmp_path / "precise.off"
    io.save_mesh(m, path)
    assert np.array_equal(io.load_mesh(path).vertices, verts)
