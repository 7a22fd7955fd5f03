"""Discrete harmonic maps and discrete Maxwell on prismal space-time complexes."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .complex import SimplicialComplex
from .errors import LightlikeEdge, SingularSystem
from .forms import PRIMAL, Cochain, codifferential_matrix, d_matrix, dual_d_matrix, hodge_matrix
from .geometry import Geometry, build_dual, double_dual_sign

LIGHTLIKE_TOL = 1e-12

# ------------------------------------------------------------------ harmonic


def dirichlet_energy(G: Geometry, phi) -> float:
    """Half the squared discrete L2 norm of d(phi)."""
    dphi = d_matrix(G.K, 0) @ np.asarray(phi, dtype=float)
    return float(np.sum(G.hodge_weights(1) * dphi**2)) / (2 * G.n)


def harmonic_el_residual(G: Geometry, phi) -> np.ndarray:
    """Gradient of the Dirichlet energy with respect to the vertex values."""
    D0 = d_matrix(G.K, 0)
    return (D0.T @ (G.hodge_weights(1) * (D0 @ np.asarray(phi, dtype=float)))) / G.n


def star_d_star_d_0form(G: Geometry, phi) -> np.ndarray:
    """The composition * d * d on a 0-form, assembled from the operator matrices."""
    K, n = G.K, G.n
    M = hodge_matrix(G, n, "dual") @ dual_d_matrix(K, n - 1) @ hodge_matrix(G, 1) @ d_matrix(K, 0)
    return M @ np.asarray(phi, dtype=float)


def harmonic_residual_factor(G: Geometry) -> np.ndarray:
    """Per-vertex factor c with residual = c * (* d * d phi): c = -|*v|/n."""
    return -G.dual_volume[0] / G.n


@dataclass
class DirichletProblem:
    G: Geometry
    boundary_vertices: np.ndarray
    boundary_values: np.ndarray


def solve_harmonic(problem: DirichletProblem, tol: float = 1e-10) -> Cochain:
    """Harmonic extension of boundary values (row elimination)."""
    G = problem.G
    N = G.K.num(0)
    bidx = np.asarray(problem.boundary_vertices, dtype=np.int64)
    bval = np.asarray(problem.boundary_values, dtype=float)
    if len(bidx) == 0:
        raise SingularSystem("no boundary values: solution defined up to a constant")
    D0 = d_matrix(G.K, 0).astype(float)
    L = (D0.T @ sp.diags(G.hodge_weights(1)) @ D0).tocsr()
    interior = np.setdiff1d(np.arange(N), bidx)
    phi = np.zeros(N)
    phi[bidx] = bval
    if len(interior):
        A = L[interior][:, interior].tocsc()
        rhs = -(L[interior][:, bidx] @ bval)
        try:
            with np.errstate(all="raise"):
                x = spla.spsolve(A, rhs)
        except (RuntimeError, FloatingPointError) as exc:
            raise SingularSystem(str(exc)) from None
        if not np.all(np.isfinite(x)):
            raise SingularSystem("singular interior system")
        phi[interior] = x
        res = A @ x - rhs
        scale = max(1.0, float(np.max(np.abs(bval))) if len(bval) else 1.0)
        if np.max(np.abs(res)) > tol * scale * max(1.0, float(abs(A).max())):
            raise SingularSystem(f"residual {np.max(np.abs(res)):.3e} after solve")
    return Cochain(0, phi, PRIMAL)


# ------------------------------------------------------------------ prismal


def edge_causality(dx, dt) -> int:
    """+1 for a spacelike edge, -1 for a timelike one."""
    q = float(np.dot(dx, dx)) - float(dt) ** 2
    if abs(q) < LIGHTLIKE_TOL:
        raise LightlikeEdge(f"lightlike edge with squared length {q:.3e}")
    return 1 if q > 0 else -1


def cell_causality(points, edges) -> int:
    """Causality sign of a cell from its edges; points are (x..., t) rows.

    +1 iff every edge is spacelike. A single vertex (no edges) gets +1.
    """
    P = np.asarray(points, dtype=float)
    sign = 1
    for a, b in edges:
        v = P[b] - P[a]
        if edge_causality(v[:-1], v[-1]) < 0:
            sign = -1
    return sign


class PrismalComplex:
    """Product of a flat spatial simplicial complex with a time grid.

    Cells of degree p are either s x {t_j} (s a spatial p-simplex) or
    s x (t_j, t_j+1) (s a spatial (p-1)-simplex). Horizontal cells come first,
    ordered by time slice then spatial index; vertical cells follow in the
    same pattern.
    """

    def __init__(self, Ks: SimplicialComplex, coords, times, signed_volumes: bool = False):
        self.Ks = Ks
        self.coords = np.asarray(coords, dtype=float)
        self.times = np.asarray(times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        self.Gs = build_dual(Ks, self.coords, signed_volumes=signed_volumes)
        self.m = Ks.dim
        self.n = Ks.dim + 1
        self.M = len(self.times) - 1

    # layout ---------------------------------------------------------------
    def num_h(self, p: int) -> int:
        return self.Ks.num(p) * (self.M + 1)

    def num_v(self, p: int) -> int:
        return self.Ks.num(p - 1) * self.M if p >= 1 else 0

    def num(self, p: int) -> int:
        return self.num_h(p) + self.num_v(p)

    def h_index(self, p: int, i: int, j: int) -> int:
        return j * self.Ks.num(p) + i

    def v_index(self, p: int, i: int, j: int) -> int:
        return self.num_h(p) + j * self.Ks.num(p - 1) + i

    def cells(self, p: int):
        """Yield (kind, spatial index, time index) for every p-cell in order."""
        for j in range(self.M + 1):
            for i in range(self.Ks.num(p)):
                yield ("h", i, j)
        if p >= 1:
            for j in range(self.M):
                for i in range(self.Ks.num(p - 1)):
                    yield ("v", i, j)

    # topology -------------------------------------------------------------
    def boundary_matrix(self, p: int) -> sp.csr_matrix:
        """Boundary of p-cells: d(a x I) = (da) x I + (-1)^|a| (a x {t1} - a x {t0})."""
        Ks, M = self.Ks, self.M
        rows, cols, vals = [], [], []
        Bs = Ks.boundary_matrix(p).tocoo() if 1 <= p <= Ks.dim else None
        Bv = Ks.boundary_matrix(p - 1).tocoo() if 2 <= p <= Ks.dim + 1 else None
        if Bs is not None:
            for j in range(M + 1):
                rows.append(self.h_index(p - 1, Bs.row, j))
                cols.append(self.h_index(p, Bs.col, j))
                vals.append(Bs.data)
        if p >= 1:
            a = np.arange(Ks.num(p - 1))
            s = -1 if (p - 1) % 2 else 1
            for j in range(M):
                if Bv is not None:
                    rows.append(self.v_index(p - 1, Bv.row, j))
                    cols.append(self.v_index(p, Bv.col, j))
                    vals.append(Bv.data)
                rows.append(self.h_index(p - 1, a, j + 1))
                cols.append(self.v_index(p, a, j))
                vals.append(np.full(len(a), s))
                rows.append(self.h_index(p - 1, a, j))
                cols.append(self.v_index(p, a, j))
                vals.append(np.full(len(a), -s))
        if not rows:
            return sp.csr_matrix((self.num(p - 1), self.num(p)), dtype=np.int64)
        return sp.csr_matrix(
            (np.concatenate(vals).astype(np.int64), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.num(p - 1), self.num(p)),
        )

    def d_matrix(self, p: int) -> sp.csr_matrix:
        return self.boundary_matrix(p + 1).T.tocsr()

    def dual_d_matrix(self, k: int) -> sp.csr_matrix:
        """Exterior derivative on dual k-forms (indexed by primal (n-k)-cells)."""
        q = self.n - k
        s = -1 if q % 2 else 1
        return (s * self.boundary_matrix(q)).tocsr()

    # geometry -------------------------------------------------------------
    @cached_property
    def _dual_dt(self) -> np.ndarray:
        t = self.times
        mid = 0.5 * (t[1:] + t[:-1])
        lo = np.concatenate([[t[0]], mid])
        hi = np.concatenate([mid, [t[-1]]])
        return hi - lo

    def primal_volume(self, p: int) -> np.ndarray:
        Gs = self.Gs
        h = np.tile(Gs.primal_volume[p], self.M + 1) if p <= self.m else np.zeros(0)
        if p == 0:
            return h
        v = np.concatenate([Gs.primal_volume[p - 1] * dt for dt in np.diff(self.times)])
        return np.concatenate([h, v])

    def dual_volume(self, p: int) -> np.ndarray:
        Gs = self.Gs
        h = np.concatenate([Gs.dual_volume[p] * w for w in self._dual_dt]) if p <= self.m else np.zeros(0)
        if p == 0:
            return h
        v = np.tile(Gs.dual_volume[p - 1], self.M)
        return np.concatenate([h, v])

    def kappa(self, p: int) -> np.ndarray:
        """Causality sign of every p-cell, from the Lorentzian length of its edges."""
        Ks, X, t = self.Ks, self.coords, self.times
        out = np.empty(self.num(p), dtype=np.int64)
        for c, (kind, i, j) in enumerate(self.cells(p)):
            if kind == "h":
                verts = Ks.simplices(p)[i].tolist()
                pts = [np.append(X[v], t[j]) for v in verts]
                edges = [(a, b) for a in range(len(verts)) for b in range(a + 1, len(verts))]
            else:
                verts = Ks.simplices(p - 1)[i].tolist()
                q = len(verts)
                pts = [np.append(X[v], t[j]) for v in verts] + [np.append(X[v], t[j + 1]) for v in verts]
                edges = [(a, b) for a in range(q) for b in range(a + 1, q)]
                edges += [(q + a, q + b) for a, b in edges]
                edges += [(a, q + a) for a in range(q)]
            out[c] = cell_causality(pts, edges)
        return out

    def boundary_cells(self, p: int) -> np.ndarray:
        """True for p-cells lying on the boundary of the space-time region."""
        bs = self.Ks.boundary_flags
        out = np.zeros(self.num(p), dtype=bool)
        for c, (kind, i, j) in enumerate(self.cells(p)):
            if kind == "h":
                out[c] = j in (0, self.M) or bool(bs[p][i])
            else:
                out[c] = bool(bs[p - 1][i])
        return out

    def lorentz_hodge_matrix(self, p: int, side: str = "primal") -> sp.dia_matrix:
        w = self.kappa(p) * self.dual_volume(p) / self.primal_volume(p)
        if side == "primal":
            return sp.diags(w)
        q = self.n - p
        wq = self.kappa(q) * self.dual_volume(q) / self.primal_volume(q)
        return sp.diags(double_dual_sign(q, self.n) / wq)


def lorentz_hodge(P: PrismalComplex, alpha: Cochain) -> Cochain:
    other = "dual" if alpha.side == PRIMAL else PRIMAL
    return Cochain(P.n - alpha.degree, P.lorentz_hodge_matrix(alpha.degree, alpha.side) @ alpha.values, other)


def lorentz_norm_sq(P: PrismalComplex, alpha: Cochain) -> float:
    k = alpha.degree
    w = P.kappa(k) * P.dual_volume(k) / P.primal_volume(k)
    return float(np.sum(w * alpha.values**2)) / P.n


def maxwell_action(P: PrismalComplex, A) -> float:
    """(1/8) sum over 2-cells of kappa |*s|/|s| <dA, s>^2."""
    F = P.d_matrix(1) @ np.asarray(A, dtype=float)
    w = P.kappa(2) * P.dual_volume(2) / P.primal_volume(2)
    return float(np.sum(w * F**2)) / 8.0


def maxwell_el_residual(P: PrismalComplex, A) -> np.ndarray:
    """Gradient of the Maxwell action with respect to the 1-cell values."""
    D1 = P.d_matrix(1)
    w = P.kappa(2) * P.dual_volume(2) / P.primal_volume(2)
    return (D1.T @ (w * (D1 @ np.asarray(A, dtype=float)))) / 4.0


def maxwell_operator(P: PrismalComplex, A) -> np.ndarray:
    """* d * d A with the Lorentzian Hodge star, assembled from operator matrices."""
    n = P.n
    M = P.lorentz_hodge_matrix(n - 1, "dual") @ P.dual_d_matrix(n - 2) @ P.lorentz_hodge_matrix(2) @ P.d_matrix(1)
    return M @ np.asarray(A, dtype=float)


def maxwell_residual_factor(P: PrismalComplex) -> np.ndarray:
    """Per 1-cell factor c with residual = c * (* d * d A)."""
    return double_dual_sign(1, P.n) * P.kappa(1) * P.dual_volume(1) / P.primal_volume(1) / 4.0


def solve_maxwell(P: PrismalComplex, boundary_values, tol: float = 1e-9) -> np.ndarray:
    """Solve the discrete Maxwell equations with A prescribed on boundary 1-cells.

    Gauge freedom on interior vertices is removed by zeroing A on a spanning
    forest of interior 1-cells that connects every interior vertex to the
    boundary.
    """
    A = np.zeros(P.num(1))
    bnd = P.boundary_cells(1)
    A[bnd] = np.asarray(boundary_values, dtype=float)[bnd] if np.ndim(boundary_values) else boundary_values
    vb = P.boundary_cells(0)
    B1 = P.boundary_matrix(1).tocsc()
    nv = P.num(0)
    # graph on vertices plus a super-node for the boundary; interior edges only
    ends = np.array([B1.indices[B1.indptr[e] : B1.indptr[e + 1]] for e in range(P.num(1))])
    super_node = nv
    remap = np.where(vb, super_node, np.arange(nv))
    interior_edges = np.flatnonzero(~bnd)
    parent = list(range(nv + 1))

    def root(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = []
    for e in interior_edges:
        a, b = root(remap[ends[e, 0]]), root(remap[ends[e, 1]])
        if a != b:
            parent[a] = b
            tree.append(e)
    tree_edges = np.array(tree, dtype=int)
    unknown = np.setdiff1d(interior_edges, tree_edges)
    D1 = P.d_matrix(1).astype(float)
    w = P.kappa(2) * P.dual_volume(2) / P.primal_volume(2)
    L = (D1.T @ sp.diags(w) @ D1).tocsr()
    rows = interior_edges
    Asys = L[rows][:, unknown]
    rhs = -(L[rows] @ A)
    if len(unknown):
        sol = spla.lsqr(Asys, rhs, atol=1e-15, btol=1e-15, iter_lim=100 * len(unknown))[0]
        A[unknown] = sol
    res = L[rows] @ A
    if np.max(np.abs(res), initial=0.0) > tol * max(1.0, float(np.max(np.abs(A), initial=0.0))):
        raise SingularSystem(f"Maxwell residual {np.max(np.abs(res)):.3e}")
    return A
