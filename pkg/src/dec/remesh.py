"""Cochain transfer between meshes of one polytope, and pull-back/push-forward.

The transfer weight of a pair (target simplex t, source simplex s) is
sgn(t, s) |V_t ∩ V_s| / |V_s|, where V denotes support volumes. Support
volumes are unions of full-flag elementary simplices of the circumcentric
subdivision, so their overlaps are sums of simplex-simplex intersection
volumes: intervals in 1D, clipped triangles in 2D, clipped tetrahedra in 3D.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp
from scipy.spatial import ConvexHull, QhullError

from .complex import SimplicialComplex, permutation_sign
from .errors import DomainMismatch, NonSimplicialImage, NotInvertible, NotWellCentered, UnsupportedDimension
from .forms import PRIMAL, Cochain
from .geometry import Geometry, _circumcenters


def _flags(G: Geometry):
    """Full-flag elementary simplices: points (F, n+1, n) and, per degree,
    the index of the k-simplex each flag passes through."""
    K, n = G.K, G.n
    P = G.top_points
    combos = [list(itertools.combinations(range(n + 1), j + 1)) for j in range(n + 1)]
    col = [{c: i for i, c in enumerate(cs)} for cs in combos]
    cc = [[_circumcenters(P[:, list(c), :])[0] for c in cs] for cs in combos]
    pts, owners = [], [[] for _ in range(n + 1)]
    for perm in itertools.permutations(range(n + 1)):
        chain = [tuple(sorted(perm[: j + 1])) for j in range(n + 1)]
        pts.append(np.stack([cc[j][col[j][chain[j]]] for j in range(n + 1)], axis=1))
        for k in range(n + 1):
            owners[k].append(K.face_table(n, k)[:, col[k][chain[k]]])
    return np.concatenate(pts), [np.concatenate(o) for o in owners]


def _clip_polygon(subject: list, clip: np.ndarray) -> list:
    """Sutherland-Hodgman clipping of a polygon by a counter-clockwise convex polygon."""
    out = subject
    m = len(clip)
    for i in range(m):
        a, b = clip[i], clip[(i + 1) % m]
        edge = b - a
        inside = lambda p: edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0]) >= 0
        src, out = out, []
        if not src:
            break
        for j in range(len(src)):
            p, q = src[j], src[(j + 1) % len(src)]
            pin, qin = inside(p), inside(q)
            if pin:
                out.append(p)
            if pin != qin:
                dp = q - p
                denom = edge[0] * dp[1] - edge[1] * dp[0]
                if denom == 0:
                    continue
                t = (edge[1] * (p[0] - a[0]) - edge[0] * (p[1] - a[1])) / denom
                out.append(p + t * dp)
    return out


def _ccw(tri: np.ndarray) -> np.ndarray:
    e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
    return tri if e1[0] * e2[1] - e1[1] * e2[0] >= 0 else tri[[0, 2, 1]]


def _area(poly: list) -> float:
    if len(poly) < 3:
        return 0.0
    x = np.array([p[0] for p in poly])
    y = np.array([p[1] for p in poly])
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _hull_volume(V: np.ndarray) -> float:
    if len(V) < 4:
        return 0.0
    try:
        return float(ConvexHull(V).volume)
    except QhullError:
        return 0.0


def _clip_polytope(V: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of conv(V) with normal·x <= offset."""
    s = V @ normal - offset
    keep = V[s <= 0]
    if len(keep) == len(V):
        return V
    if len(keep) == 0:
        return keep
    try:
        hull = ConvexHull(V)
        edges = {tuple(sorted(e)) for simp in hull.simplices for e in itertools.combinations(simp, 2)}
    except QhullError:
        edges = set(itertools.combinations(range(len(V)), 2))
    cut = [V[a] + (s[a] / (s[a] - s[b])) * (V[b] - V[a]) for a, b in edges if (s[a] <= 0) != (s[b] <= 0)]
    return np.vstack([keep] + ([np.array(cut)] if cut else []))


def _overlap(a: np.ndarray, b: np.ndarray) -> float:
    n = a.shape[1]
    if n == 1:
        return max(0.0, min(a.max(), b.max()) - max(a.min(), b.min()))
    if n == 2:
        return _area(_clip_polygon(list(_ccw(a)), _ccw(b)))
    if n == 3:
        V = a
        centroid = b.mean(axis=0)
        for i in range(4):
            face = np.delete(b, i, axis=0)
            normal = np.cross(face[1] - face[0], face[2] - face[0])
            if np.dot(normal, centroid - face[0]) > 0:
                normal = -normal
            V = _clip_polytope(V, normal, float(np.dot(normal, face[0])))
            if len(V) < 4:
                return 0.0
        return _hull_volume(V)
    raise UnsupportedDimension(f"support-volume intersection in dimension {n}")


def _orientation_sign(G: Geometry, k: int) -> np.ndarray:
    """Orientation of top simplices relative to the ambient frame (k = n only)."""
    K = G.K
    X = G.coords
    S = K.simplices(k)
    E = X[S[:, 1:]] - X[S[:, :1]]
    return np.sign(np.linalg.det(E)).astype(int) * K.orientation(k)


def _relative_sign(GM: Geometry, GK: Geometry, k: int, rows, cols) -> np.ndarray:
    n = GK.n
    if k == 0:
        return np.ones(len(rows))
    if k == n:
        return _orientation_sign(GM, k)[rows] * _orientation_sign(GK, k)[cols]
    SM, SK = GM.K.simplices(k), GK.K.simplices(k)
    EM = GM.coords[SM[rows, 1:]] - GM.coords[SM[rows, :1]]
    EK = GK.coords[SK[cols, 1:]] - GK.coords[SK[cols, :1]]
    det = np.linalg.det(EM @ np.swapaxes(EK, 1, 2))
    scale = np.sqrt(np.abs(np.linalg.det(EM @ np.swapaxes(EM, 1, 2)) * np.linalg.det(EK @ np.swapaxes(EK, 1, 2))))
    out = np.sign(det)
    out[np.abs(det) <= 1e-12 * scale] = 0
    return out


def overlap_matrices(GK: Geometry, GM: Geometry) -> list[sp.csr_matrix]:
    """|V_t ∩ V_s| for every degree, as matrices with rows on M and columns on K."""
    n = GK.n
    if GM.n != n:
        raise DomainMismatch("meshes have different dimensions")
    for G in (GK, GM):
        if G.coords is None or G.coords.shape[1] != n:
            raise UnsupportedDimension("transfer needs flat meshes embedded in R^n")
        if not G.well_centered:
            raise NotWellCentered("transfer needs well-centered meshes")
    if n > 3:
        raise UnsupportedDimension(f"transfer in dimension {n}")
    if abs(GK.total_volume - GM.total_volume) > 1e-9 * max(GK.total_volume, GM.total_volume):
        raise DomainMismatch("meshes cover different volumes")
    PK, ownK = _flags(GK)
    PM, ownM = _flags(GM)
    loK, hiK = PK.min(axis=1), PK.max(axis=1)
    loM, hiM = PM.min(axis=1), PM.max(axis=1)
    rows, cols, vals = [], [], []
    tol = 1e-12
    # intersections below this are round-off slivers along shared faces
    floor = 1e-12 * max(GK.total_volume, GM.total_volume)
    for i in range(len(PM)):
        cand = np.flatnonzero(np.all((loK < hiM[i] - tol) & (hiK > loM[i] + tol), axis=1))
        for j in cand:
            v = _overlap(PM[i], PK[j])
            if v > floor:
                rows.append(i)
                cols.append(j)
                vals.append(v)
    F = sp.csr_matrix((vals, (rows, cols)), shape=(len(PM), len(PK)))
    out = []
    for k in range(n + 1):
        AM = sp.csr_matrix((np.ones(len(PM)), (np.arange(len(PM)), ownM[k])), shape=(len(PM), GM.K.num(k)))
        AK = sp.csr_matrix((np.ones(len(PK)), (np.arange(len(PK)), ownK[k])), shape=(len(PK), GK.K.num(k)))
        out.append((AM.T @ F @ AK).tocsr())
    return out


def transfer_matrix(GK: Geometry, GM: Geometry, k: int, overlaps: list | None = None) -> sp.csr_matrix:
    """Transfer of primal k-cochains from K to M."""
    O = (overlaps or overlap_matrices(GK, GM))[k].tocoo()
    sgn = _relative_sign(GM, GK, k, O.row, O.col)
    vals = sgn * O.data / GK.support_volume[k][O.col]
    T = sp.csr_matrix((vals, (O.row, O.col)), shape=O.shape)
    T.eliminate_zeros()
    return T


def transfer(GK: Geometry, GM: Geometry, omega: Cochain) -> Cochain:
    if omega.side != PRIMAL:
        raise DomainMismatch("transfer acts on primal cochains")
    return Cochain(omega.degree, transfer_matrix(GK, GM, omega.degree) @ omega.values, PRIMAL)


# ------------------------------------------------------------ simplicial maps


@dataclass
class SimplicialMap:
    """Vertex map from K to L inducing a map of simplices."""

    K: SimplicialComplex
    L: SimplicialComplex
    vertex_map: Mapping[int, int]

    def matrix(self, k: int) -> sp.csr_matrix:
        """Signed selection matrix: (f* alpha)(s) = alpha(f(s))."""
        K, L, f = self.K, self.L, self.vertex_map
        rows, cols, vals = [], [], []
        orient = K.orientation(k)
        for i, row in enumerate(K.simplices(k).tolist()):
            img = [int(f[v]) for v in row]
            if len(set(img)) < len(img):
                raise NonSimplicialImage(f"{tuple(row)} collapses under the map")
            if orient[i] < 0:
                img[0], img[1] = img[1], img[0]
            try:
                j, s = L.find(img)
            except KeyError:
                raise NonSimplicialImage(f"image of {tuple(row)} is not a simplex of the target") from None
            rows.append(i)
            cols.append(j)
            vals.append(s)
        return sp.csr_matrix((vals, (rows, cols)), shape=(K.num(k), L.num(k)), dtype=np.int64)

    @property
    def bijective(self) -> bool:
        f = self.vertex_map
        imgs = [f[v] for v in self.K.vertices.tolist()]
        if len(set(imgs)) != len(imgs) or sorted(imgs) != sorted(self.L.vertices.tolist()):
            return False
        n = self.K.dim
        if n != self.L.dim or self.K.num(n) != self.L.num(n):
            return False
        mapped = {tuple(sorted(f[v] for v in row)) for row in self.K.simplices(n).tolist()}
        return mapped == {tuple(r) for r in self.L.simplices(n).tolist()}

    def inverse(self) -> "SimplicialMap":
        if not self.bijective:
            raise NotInvertible("map is not a bijection of complexes")
        return SimplicialMap(self.L, self.K, {int(b): int(a) for a, b in self.vertex_map.items()})


def pullback(f: SimplicialMap, alpha: Cochain) -> Cochain:
    if alpha.side != PRIMAL:
        raise DomainMismatch("pull-back acts on primal cochains")
    return Cochain(alpha.degree, f.matrix(alpha.degree) @ alpha.values, PRIMAL)


def pushforward(f: SimplicialMap, alpha: Cochain) -> Cochain:
    return pullback(f.inverse(), alpha)
