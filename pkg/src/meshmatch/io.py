"""Readers and writers for OFF and ASCII PLY triangle meshes.

Both writers optionally emit per-vertex RGB colors (COFF / PLY uchar
properties), used to visualize overlap regions and correspondences.
"""

import os

import numpy as np

from .mesh import TriangleMesh


def load_mesh(path, fmt=None):
    """Load a mesh from an OFF or ASCII-PLY file.

    ``fmt`` may be "off" or "ply"; when omitted it is inferred from the
    file extension.
    """
    fmt = _resolve_format(path, fmt)
    if fmt == "off":
        return load_off(path)
    return load_ply(path)


def save_mesh(mesh, path, fmt=None, vertex_colors=None):
    """Write a mesh as OFF or ASCII-PLY, optionally with vertex colors."""
    fmt = _resolve_format(path, fmt)
    if fmt == "off":
        save_off(mesh, path, vertex_colors=vertex_colors)
    else:
        save_ply(mesh, path, vertex_colors=vertex_colors)


def _resolve_format(path, fmt):
    if fmt is None:
        fmt = os.path.splitext(str(path))[1].lstrip(".").lower()
    fmt = fmt.lower()
    if fmt not in ("off", "ply"):
        raise ValueError(f"unsupported mesh format: {fmt!r}")
    return fmt


def _significant_lines(text):
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            yield line


def load_off(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = list(_significant_lines(fh.read()))
    if not lines:
        raise ValueError(f"{path}: empty OFF file")
    header = lines[0]
    idx = 1
    if header.upper().startswith(("OFF", "COFF")):
        rest = header[4:].strip() if header.upper().startswith("COFF") else header[3:].strip()
        if rest:
            counts = rest.split()
        else:
            counts = lines[idx].split()
            idx += 1
    else:
        counts = header.split()
    if len(counts) < 2:
        raise ValueError(f"{path}: malformed OFF counts line")
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed OFF counts line") from exc
    if len(lines) < idx + nv + nf:
        raise ValueError(f"{path}: truncated OFF file")
    verts = np.empty((nv, 3))
    for i in range(nv):
        fields = lines[idx + i].split()
        if len(fields) < 3:
            raise ValueError(f"{path}: bad vertex line {i}")
        verts[i] = [float(x) for x in fields[:3]]
    tris = np.empty((nf, 3), dtype=np.int64)
    for i in range(nf):
        fields = lines[idx + nv + i].split()
        if int(fields[0]) != 3:
            raise ValueError(f"{path}: face {i} is not a triangle")
        tris[i] = [int(x) for x in fields[1:4]]
    return TriangleMesh(verts, tris)


def save_off(mesh, path, vertex_colors=None):
    colors = _check_colors(mesh, vertex_colors)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("COFF\n" if colors is not None else "OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles} {mesh.n_edges}\n")
        for i, v in enumerate(mesh.vertices):
            line = f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}"
            if colors is not None:
                r, g, b = colors[i]
                line += f" {r} {g} {b} 255"
            fh.write(line + "\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def load_ply(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ValueError(f"{path}: not a PLY file")
    nv = nf = None
    vertex_props = []
    current = None
    body_start = None
    for li, raw in enumerate(lines[1:], start=1):
        line = raw.strip()
        if not line or line.startswith("comment"):
            continue
        fields = line.split()
        if fields[0] == "format":
            if fields[1] != "ascii":
                raise ValueError(f"{path}: only ASCII PLY is supported")
        elif fields[0] == "element":
            current = fields[1]
            if current == "vertex":
                nv = int(fields[2])
            elif current == "face":
                nf = int(fields[2])
        elif fields[0] == "property" and current == "vertex":
            vertex_props.append(fields[-1])
        elif fields[0] == "end_header":
            body_start = li + 1
            break
    if nv is None or nf is None or body_start is None:
        raise ValueError(f"{path}: incomplete PLY header")
    body = [l for l in lines[body_start:] if l.strip()]
    if len(body) < nv + nf:
        raise ValueError(f"{path}: truncated PLY body")
    xi, yi, zi = (vertex_props.index(k) for k in ("x", "y", "z"))
    verts = np.empty((nv, 3))
    for i in range(nv):
        fields = body[i].split()
        verts[i] = [float(fields[xi]), float(fields[yi]), float(fields[zi])]
    tris = np.empty((nf, 3), dtype=np.int64)
    for i in range(nf):
        fields = body[nv + i].split()
        if int(fields[0]) != 3:
            raise ValueError(f"{path}: face {i} is not a triangle")
        tris[i] = [int(x) for x in fields[1:4]]
    return TriangleMesh(verts, tris)


def save_ply(mesh, path, vertex_colors=None):
    colors = _check_colors(mesh, vertex_colors)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {mesh.n_vertices}\n")
        fh.write("property float x\nproperty float y\nproperty float z\n")
        if colors is not None:
            fh.write(
                "property uchar red\nproperty uchar green\nproperty uchar blue\n"
            )
        fh.write(f"element face {mesh.n_triangles}\n")
        fh.write("property list uchar int vertex_indices\nend_header\n")
        for i, v in enumerate(mesh.vertices):
            line = f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}"
            if colors is not None:
                r, g, b = colors[i]
                line += f" {r} {g} {b}"
            fh.write(line + "\n")
        for t in mesh.triangles:
            fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def _check_colors(mesh, vertex_colors):
    if vertex_colors is None:
        return None
    colors = np.asarray(vertex_colors, dtype=np.int64)
    if colors.shape != (mesh.n_vertices, 3):
        raise ValueError("vertex_colors must be (n_vertices, 3)")
    if colors.min() < 0 or colors.max() > 255:
        raise ValueError("vertex colors must be in [0, 255]")
    return colors
