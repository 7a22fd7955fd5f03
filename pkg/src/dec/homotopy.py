"""Cone and cocone operators and the discrete Poincare lemma.

A cone table stores, for every simplex s of degree k < n, an integer
(k+1)-chain p(s) with p∂ + ∂p = I. On 0-chains the identity reads
∂p(v) = v - root. All arithmetic here is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .complex import Chain, SimplicialComplex, boundary, build_complex, permutation_sign
from .errors import (
    ConeTableMissing,
    DegreeOutOfRange,
    EnumerationOrderViolation,
    NoConeStructure,
    NotClosed,
    NotIsomorphic,
)

# --------------------------------------------------------------------- cones


def _cone_simplex(K: SimplicialComplex, w: int, i: int, k: int) -> tuple[int, int] | None:
    """Index and sign of w ⋄ s for the stored k-simplex i; None if w ∈ s."""
    verts = [int(v) for v in K.simplices(k)[i]]
    if w in verts:
        return None
    if k == K.dim:
        raise KeyError("cannot cone a top simplex")
    if K.orientation(k)[i] < 0:
        verts[0], verts[1] = verts[1], verts[0]
    return K.find([w] + verts)


def cone(K: SimplicialComplex, w: int, c: Chain) -> Chain:
    """The chain w ⋄ c; simplices already containing w contribute nothing."""
    out: dict[int, int] = {}
    for i, a in c.coeffs.items():
        r = _cone_simplex(K, w, i, c.degree)
        if r is not None:
            j, s = r
            out[j] = out.get(j, 0) + s * a
    return Chain(c.degree + 1, out)


def detect_trivially_star_shaped(K: SimplicialComplex) -> int | None:
    """A vertex w with w ⋄ s in K for every simplex s, or None."""
    n = K.dim
    for w in K.vertices.tolist():
        ok = True
        for k in range(n + 1):
            for row in K.simplices(k).tolist():
                if w in row:
                    continue
                if k == n or not K.contains([w] + row):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return int(w)
    return None


@dataclass
class ConeTable:
    """Cone values p(s) per degree, keyed by simplex index."""

    K: SimplicialComplex
    root: int
    p: list[dict[int, dict[int, int]]]
    order: list = field(default_factory=list)

    def matrix(self, k: int) -> sp.csr_matrix:
        """Integer matrix of p from k-chains to (k+1)-chains."""
        K = self.K
        if k < 0 or k >= K.dim:
            return sp.csr_matrix((K.num(k + 1), K.num(k)), dtype=np.int64)
        rows, cols, vals = [], [], []
        for i in range(K.num(k)):
            if i not in self.p[k]:
                raise ConeTableMissing(f"no cone value for {k}-simplex {i}")
            for j, a in self.p[k][i].items():
                rows.append(j)
                cols.append(i)
                vals.append(a)
        return sp.csr_matrix((vals, (rows, cols)), shape=(K.num(k + 1), K.num(k)), dtype=np.int64)

    def apply(self, c: Chain) -> Chain:
        out: dict[int, int] = {}
        for i, a in c.coeffs.items():
            try:
                val = self.p[c.degree][i]
            except (IndexError, KeyError):
                raise ConeTableMissing(f"no cone value for {c.degree}-simplex {i}") from None
            for j, b in val.items():
                out[j] = out.get(j, 0) + a * b
        return Chain(c.degree + 1, out)


def cone_identity_defect(table: ConeTable, k: int) -> sp.csr_matrix:
    """The integer matrix p∂ + ∂p - I on k-chains (augmented at k = 0)."""
    K = table.K
    n = K.dim
    N = K.num(k)
    D = -sp.identity(N, dtype=np.int64, format="csr")
    if k < n:
        D = D + K.boundary_matrix(k + 1) @ table.matrix(k)
    if k >= 1:
        D = D + table.matrix(k - 1) @ K.boundary_matrix(k)
    else:
        r = K.find([table.root])[0]
        D = D + sp.csr_matrix((np.ones(N, dtype=np.int64), (np.full(N, r), np.arange(N))), shape=(N, N))
    return D.tocsr()


def star_cone(K: SimplicialComplex, w: int | None = None) -> ConeTable:
    """Cone table p(s) = w ⋄ s of a trivially star-shaped complex."""
    if w is None:
        w = detect_trivially_star_shaped(K)
        if w is None:
            raise NoConeStructure("complex is not trivially star-shaped")
    p: list[dict[int, dict[int, int]]] = [{} for _ in range(K.dim)]
    for k in range(K.dim):
        for i in range(K.num(k)):
            r = _cone_simplex(K, w, i, k)
            p[k][i] = {} if r is None else {r[0]: r[1]}
    return ConeTable(K, int(w), p)


def cocone_matrix(table: ConeTable | None, k: int) -> sp.csr_matrix:
    """Matrix of H from k-cochains to (k-1)-cochains: the transpose of p."""
    if table is None:
        raise ConeTableMissing("no cone table")
    if k == 0:
        return sp.csr_matrix((0, table.K.num(0)), dtype=np.int64)
    return table.matrix(k - 1).T.tocsr()


def _exact(values) -> list:
    out = []
    for x in values:
        if isinstance(x, (int, np.integer)):
            out.append(int(x))
        elif isinstance(x, Fraction):
            out.append(x)
        else:
            f = Fraction(float(x))
            out.append(int(f) if f.denominator == 1 else f)
    return out


def _apply_exact(M: sp.csr_matrix, values: Sequence) -> list:
    M = M.tocsr()
    out = []
    for r in range(M.shape[0]):
        acc = 0
        for q in range(M.indptr[r], M.indptr[r + 1]):
            acc += int(M.data[q]) * values[M.indices[q]]
        out.append(acc)
    return out


def cocone(table: ConeTable | None, k: int, alpha) -> list:
    """H applied to a k-cochain, exactly; returns (k-1)-cochain values."""
    return _apply_exact(cocone_matrix(table, k), _exact(alpha))


def exact_d(K: SimplicialComplex, k: int, alpha) -> list:
    """Exterior derivative of a primal k-cochain in exact arithmetic."""
    if k == K.dim:
        return []
    return _apply_exact(K.boundary_matrix(k + 1).T, _exact(alpha))


def poincare_solve(table: ConeTable | None, k: int, alpha) -> list:
    """A (k-1)-cochain beta with d beta = alpha, for a closed k-cochain alpha."""
    if table is None:
        raise NoConeStructure("no cone structure available")
    if k < 1:
        raise DegreeOutOfRange("the Poincare lemma applies to degrees k >= 1")
    a = _exact(alpha)
    if any(x != 0 for x in exact_d(table.K, k, a)):
        raise NotClosed("cochain is not closed")
    return cocone(table, k, a)


# ------------------------------------------------------------- isomorphisms


def logical_cone(table: ConeTable, L: SimplicialComplex, phi: Mapping[int, int]) -> ConeTable:
    """Push a cone table through a vertex bijection K -> L."""
    K = table.K
    phi = {int(a): int(b) for a, b in phi.items()}
    if sorted(phi) != sorted(K.vertices.tolist()) or sorted(phi.values()) != sorted(L.vertices.tolist()):
        raise NotIsomorphic("vertex map is not a bijection of the vertex sets")
    if K.dim != L.dim:
        raise NotIsomorphic("dimensions differ")
    mapped = sorted(tuple(sorted(phi[v] for v in row)) for row in K.simplices(K.dim).tolist())
    if mapped != [tuple(r) for r in L.simplices(L.dim).tolist()]:
        raise NotIsomorphic("vertex map does not carry top simplices onto top simplices")

    def push(k: int, i: int) -> tuple[int, int]:
        verts = [int(v) for v in K.simplices(k)[i]]
        if K.orientation(k)[i] < 0:
            verts[0], verts[1] = verts[1], verts[0]
        return L.find([phi[v] for v in verts])

    p: list[dict[int, dict[int, int]]] = [{} for _ in range(L.dim)]
    for k in range(K.dim):
        for i, val in table.p[k].items():
            li, ls = push(k, i)
            out: dict[int, int] = {}
            for j, a in val.items():
                lj, s = push(k + 1, j)
                out[lj] = out.get(lj, 0) + ls * s * a
            p[k][li] = out
    return ConeTable(L, phi[table.root], p, list(table.order))


# ---------------------------------------------------------- augmentation


@dataclass
class AugmentationScript:
    """Initial top simplex followed by (new vertex, base simplices) steps."""

    initial: tuple[int, ...]
    steps: list[tuple[int, list[tuple[int, ...]]]]

    def to_json(self) -> str:
        return json.dumps(
            {"initial": list(self.initial), "steps": [{"vertex": w, "base": [list(b) for b in base]} for w, base in self.steps]},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "AugmentationScript":
        d = json.loads(text)
        return cls(tuple(d["initial"]), [(int(s["vertex"]), [tuple(b) for b in s["base"]]) for s in d["steps"]])

    def top_simplices(self, upto: int | None = None) -> list[tuple[int, ...]]:
        """Top simplices present after the first ``upto`` steps."""
        steps = self.steps if upto is None else self.steps[:upto]
        tops = [tuple(self.initial)]
        for w, base in steps:
            tops.extend((w,) + tuple(b) for b in base)
        return tops


def _base_groups(base: list[tuple[int, ...]]) -> list[tuple[int, list[tuple[int, ...]]]]:
    """Split base simplices greedily into groups sharing a common vertex."""
    groups: list[tuple[set, list]] = []
    for b in base:
        for common, members in groups:
            if common & set(b):
                common &= set(b)
                members.append(b)
                break
        else:
            groups.append((set(b), [b]))
    return [(min(common), members) for common, members in groups]


def script_from_order(K: SimplicialComplex, order: Sequence[int], strict: bool = True) -> AugmentationScript:
    """Augmentation script adding vertices in ``order``.

    The first n+1 vertices must span a top simplex. Each later vertex is
    coned over the faces opposite to it in the top simplices whose other
    vertices are already present. In strict mode every base must lie on the
    current boundary and in the star of a single vertex.
    """
    n = K.dim
    order = [int(v) for v in order]
    pos = {v: i for i, v in enumerate(order)}
    if sorted(pos) != sorted(K.vertices.tolist()):
        raise EnumerationOrderViolation("order must list every vertex once")
    tops = K.top_simplices()
    first = tuple(order[: n + 1])
    if not K.contains(first):
        raise EnumerationOrderViolation("the first n+1 vertices do not span a top simplex")
    initial = next(t for t in tops if sorted(t) == sorted(first))
    by_last: dict[int, list[tuple[int, ...]]] = {}
    for t in tops:
        if sorted(t) == sorted(first):
            continue
        last = max(t, key=lambda v: pos[v])
        by_last.setdefault(last, []).append(t)
    steps = []
    current = [initial]
    for w in order[n + 1 :]:
        base = []
        for t in by_last.get(w, []):
            i = t.index(w)
            rest = list(t[:i] + t[i + 1 :])
            # orient the base so that w ⋄ base reproduces t's orientation
            if len(rest) > 1 and permutation_sign([w] + rest) != permutation_sign(list(t)):
                rest[0], rest[1] = rest[1], rest[0]
            base.append(tuple(rest))
        if not base:
            raise EnumerationOrderViolation(f"vertex {w} has no top simplex over earlier vertices")
        if strict:
            _check_step(current, w, base)
        steps.append((w, base))
        current.extend((w,) + b for b in base)
    return AugmentationScript(initial, steps)


def _check_step(current: list[tuple[int, ...]], w: int, base: list[tuple[int, ...]]) -> None:
    count: dict[tuple[int, ...], int] = {}
    for t in current:
        for i in range(len(t)):
            f = tuple(sorted(t[:i] + t[i + 1 :]))
            count[f] = count.get(f, 0) + 1
    for b in base:
        if count.get(tuple(sorted(b)), 0) != 1:
            raise EnumerationOrderViolation(f"base simplex {b} of vertex {w} is not on the current boundary")
    if len(_base_groups(base)) != 1:
        raise EnumerationOrderViolation(f"base of vertex {w} is not inside one vertex's star")


def greedy_script(K: SimplicialComplex, initial: Sequence[int] | None = None, strict: bool = True) -> AugmentationScript:
    """Grow from a top simplex, always adding the smallest vertex with a valid base.

    With ``strict=False``, when no vertex has a one-ring base the smallest
    vertex with any nonempty base is added anyway.
    """
    n = K.dim
    tops = K.top_simplices()
    start = tuple(initial) if initial is not None else tops[0]
    present = set(start)
    order = list(start)
    remaining = sorted(set(K.vertices.tolist()) - present)
    current = [t for t in tops if set(t) <= present]
    while remaining:
        for w in remaining:
            base = [tuple(v for v in t if v != w) for t in tops if w in t and set(t) - {w} <= present]
            if not base:
                continue
            try:
                _check_step(current, w, base)
            except EnumerationOrderViolation:
                continue
            break
        else:
            fallback = [w for w in remaining if any(w in t and set(t) - {w} <= present for t in tops)]
            if strict or not fallback:
                raise EnumerationOrderViolation("no vertex can be added with a one-ring base")
            w = fallback[0]
        order.append(w)
        present.add(w)
        remaining.remove(w)
        current = [t for t in tops if set(t) <= present]
    return script_from_order(K, order, strict=strict)


def augmented_cone(K: SimplicialComplex, script: AugmentationScript, strict: bool = True) -> ConeTable:
    """Cone table built by replaying a one-ring augmentation script on K.

    The initial simplex is coned from its first vertex. For each step with
    new vertex w and base centre c, a new simplex s containing c gets p(s) = 0
    and any other new simplex gets p(s) = c ⋄ s + p(c ⋄ ∂s) (with c ⋄ ∂[w] = [c]).
    With ``strict=False`` a base whose simplices share no common vertex is split
    into groups with their own centres; the identity then fails, which is how
    non-contractible complexes are probed.
    """
    n = K.dim
    p: list[dict[int, dict[int, int]]] = [{} for _ in range(n)]
    init = [int(v) for v in script.initial]
    root = init[0]

    def setp(verts, val):
        k = len(verts) - 1
        if k < n:
            p[k][K.find(verts)[0]] = val

    def chain_p(c: Chain) -> dict[int, int]:
        out: dict[int, int] = {}
        for i, a in c.coeffs.items():
            if i not in p[c.degree]:
                raise EnumerationOrderViolation(f"p of {c.degree}-simplex {K.simplices(c.degree)[i].tolist()} needed before it is defined")
            for j, b in p[c.degree][i].items():
                out[j] = out.get(j, 0) + a * b
        return {j: b for j, b in out.items() if b}

    # faces of the initial simplex: cone from its first vertex
    from itertools import combinations

    for k in range(n):
        for comb in combinations(sorted(init), k + 1):
            i = K.find(comb)[0]
            r = _cone_simplex(K, root, i, k)
            p[k][i] = {} if r is None else {r[0]: r[1]}

    for w, base in script.steps:
        groups = _base_groups([tuple(b) for b in base])
        if strict and len(groups) != 1:
            raise EnumerationOrderViolation(f"base of vertex {w} is not inside one vertex's star")
        new: dict[tuple[int, ...], int] = {}
        for gi, (c, members) in enumerate(groups):
            for b in members:
                for k in range(len(b) + 1):
                    for rho in combinations(sorted(b), k):
                        key = tuple(sorted((w,) + rho))
                        prev = new.get(key)
                        if prev is None or (c in rho and groups[prev][0] not in rho):
                            new[key] = gi
        for key in sorted(new, key=len):
            k = len(key) - 1
            if k >= n:
                continue
            c = groups[new[key]][0]
            i = K.find(key)[0]
            if c in key:
                p[k][i] = {}
                continue
            s = Chain(k, {i: 1})
            val = cone(K, c, s)
            if k == 0:
                rhs = Chain(0, {K.find([c])[0]: 1})
            else:
                rhs = cone(K, c, boundary(K, s))
            extra = chain_p(rhs)
            out = dict(val.coeffs)
            for j, b in extra.items():
                out[j] = out.get(j, 0) + b
            p[k][i] = {j: b for j, b in out.items() if b}
    for k in range(n):
        missing = set(range(K.num(k))) - set(p[k])
        if missing:
            raise EnumerationOrderViolation(f"script leaves {len(missing)} {k}-simplices without a cone value")
    return ConeTable(K, root, p, [w for w, _ in script.steps])


def homology_defect_witness(table: ConeTable) -> dict:
    """Probe p∂ + ∂p - I on 1-chains of a complex whose cone table is defective.

    Returns a nonzero defect column, whether it is a cycle, and whether it is
    a boundary (rank test over the rationals).
    """
    import sympy

    K = table.K
    D = cone_identity_defect(table, 1).tocsc()
    cols = [j for j in range(D.shape[1]) if D.indptr[j + 1] > D.indptr[j]]
    if not cols:
        return {"defect": None, "nonzero": False}
    j = cols[0]
    col = D[:, j].toarray().ravel()
    is_cycle = not np.any(K.boundary_matrix(1) @ col)
    B2 = sympy.Matrix(K.boundary_matrix(2).toarray().tolist())
    r0 = B2.rank()
    r1 = B2.row_join(sympy.Matrix(col.tolist())).rank()
    return {
        "edge": K.simplices(1)[j].tolist(),
        "defect": {tuple(K.simplices(1)[i].tolist()): int(col[i]) for i in np.flatnonzero(col)},
        "nonzero": True,
        "is_cycle": bool(is_cycle),
        "is_boundary": r1 == r0,
    }


def first_betti_number(K: SimplicialComplex) -> int:
    """Rank of the first homology over the rationals."""
    import sympy

    if K.dim < 1:
        return 0
    B1 = sympy.Matrix(K.boundary_matrix(1).toarray().tolist())
    r1 = B1.rank()
    r2 = sympy.Matrix(K.boundary_matrix(2).toarray().tolist()).rank() if K.dim >= 2 else 0
    return K.num(1) - r1 - r2
