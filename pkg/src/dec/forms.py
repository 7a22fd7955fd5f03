"""Discrete forms (cochains) and the linear operators acting on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .complex import Chain, SimplicialComplex
from .errors import DegreeMismatch, DegreeOutOfRange, ZeroVolume
from .geometry import Geometry, double_dual_sign

PRIMAL = "primal"
DUAL = "dual"


@dataclass(frozen=True)
class Cochain:
    """Real values on k-simplices (primal) or on k-cells of the dual.

    Dual k-cells are indexed by the primal (n-k)-simplices they are dual to.
    """

    degree: int
    values: np.ndarray
    side: str = PRIMAL

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values))
        if self.side not in (PRIMAL, DUAL):
            raise ValueError(f"unknown side {self.side!r}")

    def _like(self, other: "Cochain"):
        if not isinstance(other, Cochain) or other.degree != self.degree or other.side != self.side:
            raise DegreeMismatch("cochains differ in degree or side")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._like(other)
        return Cochain(self.degree, self.values + other.values, self.side)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._like(other)
        return Cochain(self.degree, self.values - other.values, self.side)

    def __neg__(self) -> "Cochain":
        return Cochain(self.degree, -self.values, self.side)

    def __mul__(self, s) -> "Cochain":
        return Cochain(self.degree, s * self.values, self.side)

    __rmul__ = __mul__


def _index_degree(n: int, c: Cochain) -> int:
    """Degree of the primal simplices indexing ``c``."""
    return c.degree if c.side == PRIMAL else n - c.degree


def pair(alpha: Cochain, c: Chain) -> float:
    """Evaluate a cochain on a chain of the same degree and side."""
    if alpha.degree != c.degree or alpha.side != c.side:
        raise DegreeMismatch(f"cannot pair a {alpha.side} {alpha.degree}-form with a {c.side} {c.degree}-chain")
    total = 0
    for i, a in c.coeffs.items():
        total = total + a * alpha.values[i]
    return total


# ----------------------------------------------------------- operator matrices


def d_matrix(K: SimplicialComplex, k: int) -> sp.csr_matrix:
    """Exterior derivative on primal k-forms: the transpose of the (k+1)-boundary."""
    n = K.dim
    if k < 0 or k > n:
        raise DegreeOutOfRange(f"degree {k} outside 0..{n}")
    if k == n:
        return sp.csr_matrix((0, K.num(n)), dtype=np.int64)
    return K.boundary_matrix(k + 1).T.tocsr()


def dual_d_matrix(K: SimplicialComplex, k: int) -> sp.csr_matrix:
    """Exterior derivative on dual k-forms: the transpose of the dual boundary.

    With p = n - k the degree of the indexing simplices, this equals
    (-1)^p times the primal boundary of degree p.
    """
    n = K.dim
    if k < 0 or k > n:
        raise DegreeOutOfRange(f"degree {k} outside 0..{n}")
    p = n - k
    if k == n:
        return sp.csr_matrix((0, K.num(0)), dtype=np.int64)
    sign = -1 if p % 2 else 1
    return (sign * K.boundary_matrix(p)).tocsr()


def hodge_matrix(G: Geometry, k: int, side: str = PRIMAL) -> sp.dia_matrix:
    """Diagonal Hodge star acting on k-forms living on ``side``.

    Primal to dual: |*s|/|s|. Dual to primal: the signed inverse, so that
    applying both gives (-1)^(k(n-k)) exactly.
    """
    n = G.n
    if side == PRIMAL:
        return sp.diags(G.hodge_weights(k))
    p = n - k
    dv = G.dual_volume[p]
    if np.any(dv == 0):
        raise ZeroVolume(f"zero dual volume in degree {p}")
    return sp.diags(double_dual_sign(p, n) * G.primal_volume[p] / dv)


def codifferential_matrix(G: Geometry, k: int) -> sp.csr_matrix:
    """Codifferential from primal (k+1)-forms to primal k-forms.

    Composed as (-1)^(nk+1) * star * d_dual * star.
    """
    n = G.n
    if k < 0 or k >= n:
        raise DegreeOutOfRange(f"codifferential into degree {k} needs 0 <= k < {n}")
    sign = -1 if (n * k + 1) % 2 else 1
    M = hodge_matrix(G, n - k, DUAL) @ dual_d_matrix(G.K, n - k - 1) @ hodge_matrix(G, k + 1, PRIMAL)
    return (sign * M).tocsr()


def laplacian_matrix(G: Geometry, k: int) -> sp.csr_matrix:
    """Laplace-deRham d delta + delta d on primal k-forms."""
    n = G.n
    N = G.K.num(k)
    L = sp.csr_matrix((N, N))
    if k >= 1:
        L = L + d_matrix(G.K, k - 1) @ codifferential_matrix(G, k - 1)
    if k < n:
        L = L + codifferential_matrix(G, k) @ d_matrix(G.K, k)
    return L.tocsr()


# ------------------------------------------------------------ cochain functions


def d(K: SimplicialComplex, alpha: Cochain) -> Cochain:
    """Exterior derivative of a primal or dual form."""
    if alpha.side == PRIMAL:
        return Cochain(alpha.degree + 1, d_matrix(K, alpha.degree) @ alpha.values, PRIMAL)
    return Cochain(alpha.degree + 1, dual_d_matrix(K, alpha.degree) @ alpha.values, DUAL)


def hodge(G: Geometry, alpha: Cochain) -> Cochain:
    other = DUAL if alpha.side == PRIMAL else PRIMAL
    return Cochain(G.n - alpha.degree, hodge_matrix(G, alpha.degree, alpha.side) @ alpha.values, other)


def codifferential(G: Geometry, beta: Cochain) -> Cochain:
    """Codifferential of a primal form; zero on 0-forms."""
    if beta.side != PRIMAL:
        raise DegreeMismatch("codifferential is implemented for primal forms")
    if beta.degree == 0:
        return Cochain(-1, np.zeros(0), PRIMAL)
    return Cochain(beta.degree - 1, codifferential_matrix(G, beta.degree - 1) @ beta.values, PRIMAL)


def laplace_deRham(G: Geometry, alpha: Cochain) -> Cochain:
    if alpha.side != PRIMAL:
        raise DegreeMismatch("Laplace-deRham is implemented for primal forms")
    return Cochain(alpha.degree, laplacian_matrix(G, alpha.degree) @ alpha.values, PRIMAL)


def inner_product(G: Geometry, alpha: Cochain, beta: Cochain) -> float:
    """Discrete L2 inner product (1/n) sum <a,s><*b,*s>."""
    if alpha.degree != beta.degree or alpha.side != PRIMAL or beta.side != PRIMAL:
        raise DegreeMismatch("inner product needs two primal forms of equal degree")
    w = G.hodge_weights(alpha.degree)
    return float(np.sum(alpha.values * w * beta.values)) / G.n


def norm(G: Geometry, alpha: Cochain) -> float:
    return float(np.sqrt(inner_product(G, alpha, alpha)))
