import numpy as np
import pytest

from meshmatch.mesh import TriangleMesh


@pytest.fixture
def single_triangle():
    return TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])


@pytest.fixture
def tetrahedron():
    return TriangleMesh(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]],
    )


@pytest.fixture
def strip():
    # two triangles sharing the diagonal edge (1, 2)
    return TriangleMesh(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]],
        [[0, 1, 2], [1, 3, 2]],
    )


@pytest.fixture
def doubled_triangle():
    """Two faces glued along all three edges: a closed degenerate sheet."""
    return TriangleMesh(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0]],
        [[0, 1, 2], [0, 2, 1]],
    )


def make_strip_row(n, length=1.0):
    """A 1 x n quad strip split into 2n triangles."""
    verts = []
    for i in range(n + 1):
        verts.append((i * length / n, 0.0, 0.0))
        verts.append((i * length / n, length / n, 0.0))
    faces = []
    for i in range(n):
        a, b = 2 * i, 2 * i + 1
        c, d = 2 * i + 2, 2 * i + 3
        faces.append((a, c, b))
        faces.append((b, c, d))
    return TriangleMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))
