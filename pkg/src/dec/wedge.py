"""Wedge products: primal-primal (geometric and natural), dual-dual, primal-dual."""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .complex import SimplicialComplex, permutation_sign
from .errors import DegreeMismatch, DegreeOverflow
from .forms import DUAL, PRIMAL, Cochain
from .geometry import Geometry

GEOMETRIC = "geometric"
NATURAL = "natural"


@lru_cache(maxsize=None)
def permutation_table(m: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """All permutations of range(m) with their signs."""
    return tuple((p, permutation_sign(p)) for p in itertools.permutations(range(m)))


def _sorted_values(K: SimplicialComplex, alpha: Cochain) -> np.ndarray:
    """Values of a primal form on sorted-vertex simplices."""
    return alpha.values * K.orientation(alpha.degree)


def wedge_pp(K: SimplicialComplex, alpha: Cochain, beta: Cochain, variant: str = GEOMETRIC, G: Geometry | None = None) -> Cochain:
    """Primal-primal wedge of a k-form and an l-form.

    Sum over permutations tau of the k+l+1 vertices of each (k+l)-simplex of
    sign(tau) * w(tau) * alpha[v_tau0..v_tauk] * beta[v_tauk..v_tau(k+l)], divided
    by (k+l)!. The geometric weight w is |s ∩ *v_tau(k)|/|s|; the natural weight
    is 1/(k+l+1).
    """
    if alpha.side != PRIMAL or beta.side != PRIMAL:
        raise DegreeMismatch("wedge_pp takes primal forms")
    k, l = alpha.degree, beta.degree
    m = k + l
    if m > K.dim:
        raise DegreeOverflow(f"{k} + {l} exceeds dimension {K.dim}")
    if variant == GEOMETRIC:
        if G is None:
            raise ValueError("the geometric variant needs a Geometry")
        weights = G.vertex_restricted[m] / G.primal_volume[m][:, None]
    elif variant != NATURAL:
        raise ValueError(f"unknown variant {variant!r}")
    a = _sorted_values(K, alpha)
    b = _sorted_values(K, beta)
    ftk = K.face_table(m, k)
    ftl = K.face_table(m, l)
    colk = {c: i for i, c in enumerate(itertools.combinations(range(m + 1), k + 1))}
    coll = {c: i for i, c in enumerate(itertools.combinations(range(m + 1), l + 1))}
    total = np.zeros(K.num(m))
    for tau, s in permutation_table(m + 1):
        front, back = tau[: k + 1], tau[k:]
        sa = permutation_sign(front)
        sb = permutation_sign(back)
        term = (s * sa * sb) * a[ftk[:, colk[tuple(sorted(front))]]] * b[ftl[:, coll[tuple(sorted(back))]]]
        if variant == GEOMETRIC:
            term = term * weights[:, tau[k]]
        total += term
    if variant == GEOMETRIC:
        total = total / math.factorial(m)
    else:
        total = total / math.factorial(m + 1)
    return Cochain(m, total * K.orientation(m), PRIMAL)


def geometric_factor_sum(G: Geometry, m: int, k: int) -> np.ndarray:
    """Sum over S_{m+1} of |s ∩ *v_tau(k)|/|s| for every m-simplex s."""
    w = G.vertex_restricted[m] / G.primal_volume[m][:, None]
    out = np.zeros(G.K.num(m))
    for tau, _ in permutation_table(m + 1):
        out += w[:, tau[k]]
    return out


def wedge_dd(K: SimplicialComplex, alpha: Cochain, beta: Cochain) -> Cochain:
    """Dual-dual wedge of a dual k-form and a dual l-form.

    For each (n-k-l)-simplex s and each top simplex t containing it, the
    vertices of t are ordered as [u_0..u_(k+l-1), s_0..s_(n-k-l)], with u the
    vertices of t not in s and both groups sorted. That ordering enters with
    its orientation relative to t, and s with its stored orientation.
    """
    if alpha.side != DUAL or beta.side != DUAL:
        raise DegreeMismatch("wedge_dd takes dual forms")
    n = K.dim
    k, l = alpha.degree, beta.degree
    m = k + l
    if m > n:
        raise DegreeOverflow(f"{k} + {l} exceeds dimension {n}")
    q = n - m
    out = np.zeros(K.num(q))
    tops = K.simplices(n).tolist()
    top_orient = K.orientation(n)
    q_orient = K.orientation(q)
    ft = K.face_table(n, q)
    for t, row in enumerate(tops):
        for c, comb in enumerate(itertools.combinations(range(n + 1), q + 1)):
            s_idx = int(ft[t, c])
            svert = [row[i] for i in comb]
            u = [v for v in row if v not in svert]
            sign0 = permutation_sign(u + svert) * int(top_orient[t]) * int(q_orient[s_idx])
            acc = 0.0
            for tau, st in permutation_table(m):
                ua = [u[i] for i in tau[:l]] + svert
                ub = [u[i] for i in tau[l:]] + svert
                ia, sa = K.find(ua)
                ib, sb = K.find(ub)
                acc += st * sa * alpha.values[ia] * sb * beta.values[ib]
            out[s_idx] += sign0 * acc
    return Cochain(m, out, DUAL)


def wedge_pd(G: Geometry, alpha: Cochain, beta: Cochain) -> np.ndarray:
    """Primal k-form wedge dual (n-k)-form as values on support volumes V_s.

    Returns one value per k-simplex: (1/n) alpha(s) beta(*s).
    """
    if alpha.side != PRIMAL or beta.side != DUAL or alpha.degree + beta.degree != G.n:
        raise DegreeMismatch("wedge_pd needs a primal k-form and a dual (n-k)-form")
    return alpha.values * beta.values / G.n
