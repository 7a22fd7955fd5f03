"""Circumcentric dual geometry.

Every metric quantity is assembled from the elementary simplices of the
circumcentric subdivision. Inside one top simplex a *flag* is a chain of faces
s0 < s1 < ... < sn, which corresponds to an ordering of the top simplex's
vertices. The simplex spanned by the circumcenters of a flag (or of part of it)
is an elementary simplex; dual cells, support volumes and the restricted
volumes used by the wedge, flat and sharp are sums of these.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .complex import SimplicialComplex, local_embed, permutation_sign
from .errors import DegenerateSimplex, NotWellCentered, ZeroVolume

WELL_CENTERED_TOL = 1e-12


def circumcenter(points) -> np.ndarray:
    """Point of the affine span of ``points`` equidistant from all of them."""
    P = np.asarray(points, dtype=float)
    cc, _ = _circumcenters(P[None])
    return cc[0]


def _circumcenters(P: np.ndarray, tol: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
    """Batched circumcenters and barycentric coordinates; P has shape (T, k+1, D)."""
    T, kp1, _ = P.shape
    if kp1 == 1:
        return P[:, 0, :].copy(), np.ones((T, 1))
    E = P[:, 1:, :] - P[:, :1, :]
    G = E @ np.swapaxes(E, 1, 2)
    diag = np.diagonal(G, axis1=1, axis2=2)
    det = np.linalg.det(G)
    ref = np.prod(diag, axis=1)
    if np.any(ref <= 0) or np.any(det <= tol * ref):
        raise DegenerateSimplex("affinely dependent vertices")
    x = np.linalg.solve(2.0 * G, diag[..., None])[..., 0]
    cc = P[:, 0, :] + np.einsum("ti,tid->td", x, E)
    bary = np.concatenate([1.0 - x.sum(axis=1, keepdims=True), x], axis=1)
    return cc, bary


def _volumes(Q: np.ndarray) -> np.ndarray:
    """Unsigned volumes of a batch of simplices, Q of shape (T, m+1, D)."""
    m = Q.shape[1] - 1
    if m == 0:
        return np.ones(Q.shape[0])
    E = Q[:, 1:, :] - Q[:, :1, :]
    det = np.linalg.det(E @ np.swapaxes(E, 1, 2))
    return np.sqrt(np.clip(det, 0.0, None)) / math.factorial(m)


def double_dual_sign(k: int, n: int) -> int:
    if not 0 <= k <= n:
        raise ValueError(f"degree {k} outside 0..{n}")
    return -1 if (k * (n - k)) % 2 else 1


@dataclass
class Geometry:
    """Volume tables of a complex and its circumcentric dual.

    Arrays indexed per degree k:

    ``primal_volume[k]``, ``dual_volume[k]``, ``support_volume[k]``: shape (N_k,).
    ``circumcenters[k]``: shape (N_k, D); only when ambient coordinates are given.
    ``restricted_dual[k]``: shape (T, C) with |*s ∩ t| for the face in column C
        of top simplex t, columns laid out as ``K.face_table(n, k)``.
    ``vertex_restricted[k]``: shape (N_k, k+1), |s ∩ *v| for each vertex v of s
        (vertices in sorted order).
    ``support_vertex[k]``: shape (N_k, k+1), |V_s ∩ *v|.
    """

    K: SimplicialComplex
    coords: np.ndarray | None
    signed: bool
    well_centered: bool
    primal_volume: list[np.ndarray]
    dual_volume: list[np.ndarray]
    support_volume: list[np.ndarray]
    circumcenters: list[np.ndarray] | None
    restricted_dual: list[np.ndarray]
    vertex_restricted: list[np.ndarray]
    support_vertex: list[np.ndarray]
    top_points: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.K.dim

    @property
    def total_volume(self) -> float:
        return float(np.sum(self.primal_volume[self.n]))

    def hodge_weights(self, k: int) -> np.ndarray:
        """Diagonal |*s|/|s| of the primal-to-dual Hodge star in degree k."""
        pv = self.primal_volume[k]
        if np.any(pv == 0):
            raise ZeroVolume(f"zero primal {k}-volume")
        return self.dual_volume[k] / pv

    def elementary_dual(self, k: int, i: int) -> dict[tuple[int, ...], int]:
        """Dual cell of the k-simplex ``i`` as a signed sum of elementary simplices.

        Keys are tuples of simplex indices (one per degree k..n) naming the
        circumcenters that span the elementary simplex.
        """
        K, n = self.K, self.n
        target = tuple(int(x) for x in K.simplices(k)[i])
        out: dict[tuple[int, ...], int] = {}
        tops = K.simplices(n)
        for t, row in enumerate(tops.tolist()):
            if not set(target) <= set(row):
                continue
            rest = [v for v in row if v not in target]
            o_top = int(K.orientation(n)[t])
            o_k = int(K.orientation(k)[i])
            for tail in itertools.permutations(rest):
                order = list(target) + list(tail)
                key = tuple(K.find(order[: j + 1])[0] for j in range(k, n + 1))
                out[key] = o_k * permutation_sign(order) * o_top
        return out


def build_dual(
    K: SimplicialComplex,
    coords=None,
    metric=None,
    signed_volumes: bool = False,
) -> Geometry:
    """Compute circumcenters and all primal, dual and support volume tables.

    Either ``coords`` (one row per vertex id) or an edge-length ``metric`` is
    required. With a metric each top simplex is measured in its own chart.
    """
    n = K.dim
    tops = K.simplices(n)
    T = len(tops)
    if coords is not None:
        X = np.asarray(coords, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[1] < n:
            raise DegenerateSimplex("embedding dimension smaller than complex dimension")
        P = X[tops]
    elif metric is not None:
        P = np.stack([local_embed(t, metric) for t in tops.tolist()]) if T else np.zeros((0, n + 1, n))
        X = None
    else:
        raise ValueError("coordinates or a metric are required")
    D = P.shape[2]

    combos = [list(itertools.combinations(range(n + 1), j + 1)) for j in range(n + 1)]
    col = [{c: i for i, c in enumerate(cs)} for cs in combos]
    cc_loc = [[None] * len(cs) for cs in combos]
    bary_loc = [[None] * len(cs) for cs in combos]
    primal = [np.zeros(K.num(j)) for j in range(n + 1)]
    centers = [np.zeros((K.num(j), D)) for j in range(n + 1)] if X is not None else None
    well_centered = True
    for j in range(n + 1):
        ft = K.face_table(n, j)
        for c, comb in enumerate(combos[j]):
            pts = P[:, list(comb), :]
            cc, bary = _circumcenters(pts)
            cc_loc[j][c], bary_loc[j][c] = cc, bary
            primal[j][ft[:, c]] = _volumes(pts)
            if centers is not None:
                centers[j][ft[:, c]] = cc
            if j >= 1 and np.any(bary < -WELL_CENTERED_TOL):
                well_centered = False
    if not well_centered and not signed_volumes:
        raise NotWellCentered("a circumcenter lies outside its simplex; pass signed_volumes=True")

    restricted = [np.zeros((T, len(combos[k]))) for k in range(n + 1)]
    support_loc = [np.zeros((T, len(combos[k]))) for k in range(n + 1)]
    supvert_loc = [np.zeros((T, len(combos[k]), k + 1)) for k in range(n + 1)]
    vrest_loc = [np.zeros((T, len(combos[k]), k + 1)) for k in range(n + 1)]

    for perm in itertools.permutations(range(n + 1)):
        chain = [tuple(sorted(perm[: j + 1])) for j in range(n + 1)]
        cidx = [col[j][chain[j]] for j in range(n + 1)]
        Q = np.stack([cc_loc[j][cidx[j]] for j in range(n + 1)], axis=1)
        steps = np.ones((T, n))
        if signed_volumes:
            for j in range(n):
                pos = chain[j + 1].index(perm[j + 1])
                steps[:, j] = np.where(bary_loc[j + 1][cidx[j + 1]][:, pos] < 0, -1.0, 1.0)
        full = _volumes(Q) * np.prod(steps, axis=1)
        for k in range(n + 1):
            vpos = chain[k].index(perm[0])
            suffix = _volumes(Q[:, k:, :]) * np.prod(steps[:, k:], axis=1)
            restricted[k][:, cidx[k]] += suffix / math.factorial(k + 1)
            support_loc[k][:, cidx[k]] += full
            supvert_loc[k][:, cidx[k], vpos] += full
            prefix = _volumes(Q[:, : k + 1, :]) * np.prod(steps[:, :k], axis=1)
            vrest_loc[k][:, cidx[k], vpos] += prefix / math.factorial(n - k)

    # the dual of a top simplex is a point: volume 1 by convention, not a flag sum
    restricted[n][:] = 1.0
    dual, support, supvert, vrest = [], [], [], []
    for k in range(n + 1):
        ft = K.face_table(n, k)
        dual.append(np.bincount(ft.ravel(), weights=restricted[k].ravel(), minlength=K.num(k)))
        support.append(np.bincount(ft.ravel(), weights=support_loc[k].ravel(), minlength=K.num(k)))
        sv = np.zeros((K.num(k), k + 1))
        np.add.at(sv, ft.ravel(), supvert_loc[k].reshape(-1, k + 1))
        supvert.append(sv)
        vr = np.zeros((K.num(k), k + 1))
        vr[ft.ravel()] = vrest_loc[k].reshape(-1, k + 1)
        vrest.append(vr)

    return Geometry(
        K=K,
        coords=X,
        signed=signed_volumes,
        well_centered=well_centered,
        primal_volume=primal,
        dual_volume=dual,
        support_volume=support,
        circumcenters=centers,
        restricted_dual=restricted,
        vertex_restricted=vrest,
        support_vertex=supvert,
        top_points=P,
    )


def dual_boundary_matrix(K: SimplicialComplex, k: int):
    """Boundary of dual k-cells as a matrix (rows: dual (k-1)-cells).

    Dual k-cells are indexed by primal (n-k)-simplices. The boundary of the
    dual of s is (-1)^(p+1) times the signed sum of the duals of the cofaces of
    s, where p = n - k is the degree of s; for a vertex this is the sum of the
    duals of its outgoing edges.
    """
    from .errors import DegreeOutOfRange

    n = K.dim
    p = n - k
    if k < 1 or k > n:
        raise DegreeOutOfRange(f"dual boundary degree {k} outside 1..{n}")
    sign = -1 if (p + 1) % 2 else 1
    return (sign * K.boundary_matrix(p + 1).T).tocsr()


def dual_boundary(K: SimplicialComplex, c):
    """Boundary of a dual chain (a ``Chain`` with ``side="dual"``)."""
    from .complex import Chain

    B = dual_boundary_matrix(K, c.degree).tocsc()
    out: dict[int, int] = {}
    for j, cj in c.coeffs.items():
        for q in range(B.indptr[j], B.indptr[j + 1]):
            r = int(B.indices[q])
            out[r] = out.get(r, 0) + int(B.data[q]) * cj
    return Chain(c.degree - 1, out, side="dual")
