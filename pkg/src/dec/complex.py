"""Abstract simplicial complexes, integer chains and the boundary operator.

Simplices are stored with sorted vertex ids. Only top-dimensional simplices
carry an orientation sign (taken from the input vertex order); every lower
simplex is oriented by its sorted vertex order.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegenerateSimplex,
    DegreeOutOfRange,
    DuplicateTopSimplex,
    MissingEdgeLength,
    MixedDimension,
    ComplexError,
    NonManifoldWarning,
)


def permutation_sign(seq: Sequence) -> int:
    """Sign of the permutation sorting ``seq`` (entries must be distinct)."""
    order = sorted(range(len(seq)), key=lambda i: seq[i])
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


class SimplicialComplex:
    """Immutable pure simplicial complex built from its top simplices."""

    def __init__(self, simplices: list[np.ndarray], orientation: np.ndarray):
        self._simplices = simplices
        self._orientation = orientation
        self._index = [
            {tuple(int(x) for x in row): i for i, row in enumerate(s)} for s in simplices
        ]
        self._bcache: dict[int, sp.csr_matrix] = {}
        self._ftcache: dict[tuple[int, int], np.ndarray] = {}

    @property
    def dim(self) -> int:
        return len(self._simplices) - 1

    def num(self, k: int) -> int:
        if 0 <= k < len(self._simplices):
            return len(self._simplices[k])
        return 0

    def simplices(self, k: int) -> np.ndarray:
        if 0 <= k < len(self._simplices):
            return self._simplices[k]
        return np.zeros((0, k + 1 if k >= 0 else 0), dtype=np.int64)

    @property
    def vertices(self) -> np.ndarray:
        return self.simplices(0)[:, 0]

    def orientation(self, k: int) -> np.ndarray:
        """Orientation of each stored k-simplex relative to sorted order."""
        if k == self.dim:
            return self._orientation
        return np.ones(self.num(k), dtype=np.int64)

    def top_simplices(self) -> list[tuple[int, ...]]:
        """Top simplices in their stored orientation."""
        out = []
        for row, s in zip(self.simplices(self.dim), self._orientation):
            t = [int(x) for x in row]
            if s < 0:
                t[0], t[1] = t[1], t[0]
            out.append(tuple(t))
        return out

    def find(self, vertices: Sequence[int]) -> tuple[int, int]:
        """Return (index, sign) of an oriented simplex given by a vertex tuple.

        The sign relates the given order to the stored orientation.
        """
        k = len(vertices) - 1
        key = tuple(sorted(int(v) for v in vertices))
        if len(set(key)) != len(key):
            raise ComplexError(f"repeated vertex in {tuple(vertices)}")
        try:
            i = self._index[k][key]
        except (IndexError, KeyError):
            raise KeyError(f"simplex {tuple(vertices)} not in complex") from None
        return i, permutation_sign(list(vertices)) * int(self.orientation(k)[i])

    def contains(self, vertices: Sequence[int]) -> bool:
        k = len(vertices) - 1
        return 0 <= k < len(self._index) and tuple(sorted(vertices)) in self._index[k]

    def boundary_matrix(self, k: int) -> sp.csr_matrix:
        """Integer matrix of the boundary map from k-chains to (k-1)-chains."""
        if k < 1 or k > self.dim:
            raise DegreeOutOfRange(f"boundary degree {k} outside 1..{self.dim}")
        if k not in self._bcache:
            S = self.simplices(k)
            ft = self.face_table(k, k - 1)
            # face obtained by dropping position i comes at column k - i in
            # combinations order
            rows, cols, vals = [], [], []
            orient = self.orientation(k)
            for i in range(k + 1):
                rows.append(ft[:, k - i])
                cols.append(np.arange(len(S)))
                vals.append(((-1) ** i) * orient)
            B = sp.csr_matrix(
                (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                shape=(self.num(k - 1), self.num(k)),
                dtype=np.int64,
            )
            self._bcache[k] = B
        return self._bcache[k]

    def face_table(self, m: int, j: int) -> np.ndarray:
        """Indices of the j-faces of every m-simplex.

        Column c corresponds to ``itertools.combinations(range(m + 1), j + 1)``
        in enumeration order, applied to the sorted vertex list.
        """
        key = (m, j)
        if key not in self._ftcache:
            S = self.simplices(m)
            combos = list(itertools.combinations(range(m + 1), j + 1))
            idx = self._index[j]
            table = np.empty((len(S), len(combos)), dtype=np.int64)
            for r, row in enumerate(S.tolist()):
                for c, comb in enumerate(combos):
                    table[r, c] = idx[tuple(row[p] for p in comb)]
            self._ftcache[key] = table
        return self._ftcache[key]

    @cached_property
    def coface_count(self) -> list[np.ndarray]:
        out = []
        for k in range(self.dim):
            out.append(np.bincount(self.face_table(k + 1, k).ravel(), minlength=self.num(k)))
        out.append(np.zeros(self.num(self.dim), dtype=np.int64))
        return out

    @cached_property
    def boundary_flags(self) -> list[np.ndarray]:
        """Per degree, True for simplices lying in the topological boundary."""
        n = self.dim
        if n < 1:
            return [np.zeros(self.num(0), dtype=bool)]
        bfaces = self.coface_count[n - 1] == 1
        flags = [np.zeros(self.num(k), dtype=bool) for k in range(n + 1)]
        flags[n - 1] = bfaces
        rows = np.flatnonzero(bfaces)
        for j in range(n - 1):
            ft = self.face_table(n - 1, j)[rows]
            flags[j][np.unique(ft)] = True
        return flags

    def chain(self, degree: int, terms: Iterable[tuple[Sequence[int], int]]) -> "Chain":
        """Build a chain from ``(oriented vertex tuple, coefficient)`` pairs."""
        out: dict[int, int] = {}
        for verts, coeff in terms:
            if len(verts) != degree + 1:
                raise DegreeOutOfRange(f"{tuple(verts)} is not a {degree}-simplex")
            i, s = self.find(verts)
            out[i] = out.get(i, 0) + s * coeff
        return Chain(degree, out)

    def __repr__(self) -> str:
        counts = ", ".join(str(self.num(k)) for k in range(self.dim + 1))
        return f"SimplicialComplex(dim={self.dim}, counts=[{counts}])"


def build_complex(top_simplices: Iterable[Sequence[int]]) -> SimplicialComplex:
    """Close a list of equal-dimension top simplices under taking faces."""
    tops = [tuple(int(v) for v in t) for t in top_simplices]
    if not tops:
        return SimplicialComplex([], np.zeros(0, dtype=np.int64))
    n = len(tops[0]) - 1
    if any(len(t) != n + 1 for t in tops):
        raise MixedDimension("all top simplices must have the same dimension")
    seen = {}
    orient = []
    for t in tops:
        if len(set(t)) != len(t):
            raise ComplexError(f"repeated vertex in simplex {t}")
        key = tuple(sorted(t))
        if key in seen:
            raise DuplicateTopSimplex(f"top simplex {key} given twice")
        seen[key] = len(orient)
        orient.append(permutation_sign(t))
    keys = sorted(seen)
    orientation = np.array([orient[seen[k]] for k in keys], dtype=np.int64)
    simplices = []
    for k in range(n + 1):
        if k == n:
            faces = keys
        else:
            faces = sorted({c for t in keys for c in itertools.combinations(t, k + 1)})
        simplices.append(np.array(faces, dtype=np.int64).reshape(len(faces), k + 1))
    K = SimplicialComplex(simplices, orientation)
    if n >= 1 and np.any(K.coface_count[n - 1] > 2):
        bad = int(np.sum(K.coface_count[n - 1] > 2))
        warnings.warn(f"{bad} {n - 1}-simplices have more than two cofaces", NonManifoldWarning)
    return K


@dataclass(frozen=True)
class Chain:
    """Integer (or rational) chain: sparse map from simplex index to coefficient.

    ``side`` is ``"primal"`` for chains of simplices and ``"dual"`` for chains of
    dual cells, where dual cells of degree k are indexed by (n-k)-simplices.
    """

    degree: int
    coeffs: Mapping[int, int] = field(default_factory=dict)
    side: str = "primal"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", {i: c for i, c in self.coeffs.items() if c != 0})

    def __add__(self, other: "Chain") -> "Chain":
        self._check(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, 0) + c
        return Chain(self.degree, out, self.side)

    def __neg__(self) -> "Chain":
        return Chain(self.degree, {i: -c for i, c in self.coeffs.items()}, self.side)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def __rmul__(self, scalar) -> "Chain":
        return Chain(self.degree, {i: scalar * c for i, c in self.coeffs.items()}, self.side)

    def _check(self, other: "Chain"):
        if other.degree != self.degree or other.side != self.side:
            raise DegreeOutOfRange("chains of different degree or side")

    def is_zero(self) -> bool:
        return not self.coeffs

    def to_dense(self, size: int) -> np.ndarray:
        v = np.zeros(size, dtype=object if any(not isinstance(c, (int, np.integer)) for c in self.coeffs.values()) else np.int64)
        for i, c in self.coeffs.items():
            v[i] = c
        return v

    @classmethod
    def from_dense(cls, degree: int, values, side: str = "primal") -> "Chain":
        return cls(degree, {int(i): (int(c) if isinstance(c, (np.integer,)) else c) for i, c in enumerate(values) if c != 0}, side)


def boundary(K: SimplicialComplex, c: Chain) -> Chain:
    """Boundary of a primal chain, in exact arithmetic."""
    k = c.degree
    if k < 1 or k > K.dim:
        raise DegreeOutOfRange(f"boundary of a {k}-chain on a {K.dim}-complex")
    B = K.boundary_matrix(k).tocsc()
    out: dict[int, int] = {}
    for j, cj in c.coeffs.items():
        for p in range(B.indptr[j], B.indptr[j + 1]):
            r = int(B.indices[p])
            out[r] = out.get(r, 0) + int(B.data[p]) * cj
    return Chain(k - 1, out)


# ---------------------------------------------------------------- local metric


def _edge_length(m: Mapping, a: int, b: int):
    if (a, b) in m:
        return m[(a, b)]
    if (b, a) in m:
        return m[(b, a)]
    raise MissingEdgeLength(f"no length for edge ({a}, {b})")


def validate_local_metric(K: SimplicialComplex, m: Mapping[tuple[int, int], float]) -> list[tuple]:
    """Check the local-metric axioms on every edge and every triangle of a top simplex.

    Returns a list of ``(axiom, detail)`` violations; empty iff the metric is valid.
    """
    report = []
    for a, b in K.simplices(1).tolist() if K.dim >= 1 else []:
        d = _edge_length(m, a, b)
        if d < 0:
            report.append(("positive", (a, b), d))
        elif d == 0:
            report.append(("strictly positive", (a, b), d))
        if (a, b) in m and (b, a) in m and m[(a, b)] != m[(b, a)]:
            report.append(("symmetry", (a, b), (m[(a, b)], m[(b, a)])))
    for (a, b), d in m.items():
        if a == b and d != 0:
            report.append(("positive", (a, b), d))
    if K.dim >= 2:
        triples = {tuple(c) for t in K.simplices(K.dim).tolist() for c in itertools.combinations(t, 3)}
        for a, b, c in sorted(triples):
            ab, bc, ac = _edge_length(m, a, b), _edge_length(m, b, c), _edge_length(m, a, c)
            for x, y, z, name in ((ab, bc, ac, (a, c)), (ab, ac, bc, (b, c)), (ac, bc, ab, (a, b))):
                if z > x + y:
                    report.append(("triangle inequality", (a, b, c), name))
    return report


def local_embed(simplex: Sequence[int], m: Mapping[tuple[int, int], float], tol: float = 1e-12) -> np.ndarray:
    """Coordinates in R^n realizing the edge lengths of one n-simplex.

    Gauge: the first vertex sits at the origin and the second on the first axis.
    """
    v = [int(x) for x in simplex]
    n = len(v) - 1
    if n == 0:
        return np.zeros((1, 0))
    d0 = np.array([_edge_length(m, v[0], v[i]) for i in range(1, n + 1)], dtype=float)
    G = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            dij = 0.0 if i == j else _edge_length(m, v[i + 1], v[j + 1])
            G[i, j] = 0.5 * (d0[i] ** 2 + d0[j] ** 2 - dij**2)
    scale = max(float(np.max(d0)), 1e-300) ** 2
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        raise DegenerateSimplex(f"edge lengths of {tuple(v)} are not realizable") from None
    if np.min(np.diag(L)) ** 2 <= tol * scale:
        raise DegenerateSimplex(f"simplex {tuple(v)} has zero volume")
    return np.vstack([np.zeros(n), L])


def simplex_volume(points: np.ndarray) -> float:
    """Unsigned k-volume of a simplex given by k+1 points (Gram determinant)."""
    points = np.asarray(points, dtype=float)
    k = len(points) - 1
    if k == 0:
        return 1.0
    E = points[1:] - points[0]
    return math.sqrt(max(np.linalg.det(E @ E.T), 0.0)) / math.factorial(k)
