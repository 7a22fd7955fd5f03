"""Built-in mesh families: fans, lattices, disks, annuli and cube tetrahedralizations.

Every generator returns ``(top_simplices, coords)`` with top simplices
positively oriented with respect to the standard orientation of the plane or
space whenever the mesh is flat and full-dimensional.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import ConvexHull, Delaunay


def _orient(tops, coords):
    """Reorder each top simplex so that its signed volume is positive."""
    coords = np.asarray(coords, dtype=float)
    out = []
    for t in tops:
        t = list(int(v) for v in t)
        P = coords[t]
        E = P[1:] - P[0]
        if E.shape[0] == E.shape[1] and np.linalg.det(E) < 0:
            t[0], t[1] = t[1], t[0]
        out.append(tuple(t))
    return out


def fan(m: int = 6, radius: float = 1.0, closed: bool = True):
    """Triangle fan around vertex 0 with m rim vertices."""
    ang = 2 * np.pi * np.arange(m) / m
    coords = np.vstack([[0.0, 0.0], radius * np.column_stack([np.cos(ang), np.sin(ang)])])
    count = m if closed else m - 1
    tops = [(0, 1 + i, 1 + (i + 1) % m) for i in range(count)]
    return _orient(tops, coords), coords


def triangular_lattice(nx: int, ny: int, h: float = 1.0):
    """Parallelogram of equilateral triangles with nx by ny cells."""
    coords = np.array([[h * (i + 0.5 * j), h * j * np.sqrt(3) / 2] for j in range(ny + 1) for i in range(nx + 1)])
    vid = lambda i, j: j * (nx + 1) + i
    tops = []
    for j in range(ny):
        for i in range(nx):
            tops.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
            tops.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
    return _orient(tops, coords), coords


def hex_disk(rings: int, h: float = 1.0):
    """Hexagonal patch of equilateral triangles around the origin."""
    pts = {}
    for a in range(-rings, rings + 1):
        for b in range(-rings, rings + 1):
            if max(abs(a), abs(b), abs(a + b)) <= rings:
                pts[(a, b)] = len(pts)
    coords = np.array([[h * (a + 0.5 * b), h * b * np.sqrt(3) / 2] for (a, b) in pts])
    tops = []
    for (a, b), i in pts.items():
        for tri in (((a + 1, b), (a, b + 1)), ((a + 1, b - 1), (a + 1, b))):
            if all(p in pts for p in tri):
                tops.append((i, pts[tri[0]], pts[tri[1]]))
    # the vertex at the origin gets id 0 after sorting by distance
    order = np.argsort(np.linalg.norm(coords, axis=1), kind="stable")
    relabel = np.empty(len(order), dtype=int)
    relabel[order] = np.arange(len(order))
    tops = [tuple(int(relabel[v]) for v in t) for t in tops]
    return _orient(tops, coords[order]), coords[order]


def delaunay(points):
    points = np.asarray(points, dtype=float)
    tri = Delaunay(points)
    return _orient(tri.simplices.tolist(), points), points


def random_disk(n_interior: int, n_boundary: int, rng: np.random.Generator, radius: float = 1.0):
    """Delaunay triangulation of random interior points plus evenly spaced rim points."""
    ang = 2 * np.pi * (np.arange(n_boundary) + rng.uniform(0, 0.3)) / n_boundary
    rim = radius * np.column_stack([np.cos(ang), np.sin(ang)])
    r = radius * 0.92 * np.sqrt(rng.uniform(0, 1, n_interior))
    th = rng.uniform(0, 2 * np.pi, n_interior)
    inner = np.column_stack([r * np.cos(th), r * np.sin(th)])
    return delaunay(np.vstack([rim, inner]))


def sunflower_disk(n: int = 50, radius: float = 1.0):
    """Delaunay triangulation of a Vogel spiral of n points in a disk."""
    k = np.arange(n) + 0.5
    r = radius * np.sqrt(k / n)
    th = k * np.pi * (3 - np.sqrt(5))
    return delaunay(np.column_stack([r * np.cos(th), r * np.sin(th)]))


def random_box_3d(n_points: int, rng: np.random.Generator):
    """Delaunay tetrahedralization of random points in the unit cube (corners included)."""
    corners = np.array(list(itertools.product([0.0, 1.0], repeat=3)))
    pts = np.vstack([corners, rng.uniform(0, 1, (n_points, 3))])
    return delaunay(pts)


# tetrahedralization of the unit cube used by the one-ring augmentation example
CUBE_TETS = [
    ("000", "001", "010", "100"),
    ("001", "010", "100", "101"),
    ("001", "010", "011", "101"),
    ("010", "100", "101", "110"),
    ("010", "011", "101", "110"),
    ("011", "101", "110", "111"),
]


def cube_tets(nx: int = 1, ny: int | None = None, nz: int | None = None, h: float = 1.0):
    """Grid of cubes, each split into the six tetrahedra of ``CUBE_TETS``."""
    ny = nx if ny is None else ny
    nz = nx if nz is None else nz
    vid = lambda i, j, k: (k * (ny + 1) + j) * (nx + 1) + i
    coords = np.array([[h * i, h * j, h * k] for k in range(nz + 1) for j in range(ny + 1) for i in range(nx + 1)], dtype=float)
    tops = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                for tet in CUBE_TETS:
                    tops.append(tuple(vid(i + int(s[0]), j + int(s[1]), k + int(s[2])) for s in tet))
    return _orient(tops, coords), coords


def kuhn_cube(nx: int, h: float | None = None):
    """Freudenthal (Kuhn) subdivision of [0,1]^3 into 6 nx^3 tetrahedra."""
    h = 1.0 / nx if h is None else h
    vid = lambda i, j, k: (k * (nx + 1) + j) * (nx + 1) + i
    coords = np.array([[h * i, h * j, h * k] for k in range(nx + 1) for j in range(nx + 1) for i in range(nx + 1)], dtype=float)
    tops = []
    for k in range(nx):
        for j in range(nx):
            for i in range(nx):
                for perm in itertools.permutations(range(3)):
                    p = [i, j, k]
                    tet = [vid(*p)]
                    for ax in perm:
                        p[ax] += 1
                        tet.append(vid(*p))
                    tops.append(tuple(tet))
    return _orient(tops, coords), coords


def pinched_annulus(m: int = 6):
    """Strip of 2m triangles whose two end edges are coned to one extra vertex.

    The result is an annulus: its first homology has rank one.
    Vertices 0..m-1 form the inner row, m..2m-1 the outer row, 2m is the
    closing vertex.
    """
    ang = np.linspace(0, 2 * np.pi, m + 1)[:-1]
    inner = np.column_stack([np.cos(ang), np.sin(ang)])
    outer = 2.0 * inner
    w = np.array([[1.5 * np.cos(-np.pi / m), 1.5 * np.sin(-np.pi / m)]])
    coords = np.vstack([inner, outer, w])
    tops = []
    for i in range(m - 1):
        a, b, c, d_ = i, i + 1, m + i, m + i + 1
        tops.append((a, c, b))
        tops.append((b, c, d_))
    W = 2 * m
    tops.append((W, 0, m))
    tops.append((W, m - 1, 2 * m - 1))
    return tops, coords


def segments(xs):
    """1D mesh of consecutive intervals through sorted points ``xs``."""
    xs = np.asarray(xs, dtype=float)
    return [(i, i + 1) for i in range(len(xs) - 1)], xs[:, None]


def icosahedral_ball(radius: float = 1.0):
    """Icosahedron coned to its centre: 20 nearly regular, well-centered tetrahedra."""
    g = (1 + np.sqrt(5)) / 2
    pts = []
    for a, b in itertools.product((-1.0, 1.0), repeat=2):
        pts += [(0.0, a, b * g), (a, b * g, 0.0), (b * g, 0.0, a)]
    pts = np.array(pts)
    pts *= radius / np.linalg.norm(pts[0])
    faces = [tuple(int(v) + 1 for v in f) for f in ConvexHull(pts).simplices]
    coords = np.vstack([np.zeros(3), pts])
    return _orient([(0,) + f for f in faces], coords), coords



def icosahedron_surface(radius: float = 1.0):
    """Closed surface of the icosahedron: 20 equilateral triangles in R^3, outward oriented."""
    _, coords = icosahedral_ball(radius)
    X = coords[1:]
    faces = []
    for f in ConvexHull(X).simplices.tolist():
        a, b, c = X[f]
        if np.dot(np.cross(b - a, c - a), a + b + c) < 0:
            f[1], f[2] = f[2], f[1]
        faces.append(tuple(int(v) for v in f))
    return faces, X
