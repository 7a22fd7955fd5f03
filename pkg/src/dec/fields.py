"""Discrete vector fields: flat, sharp, divergence, contraction, Lie derivative."""

from __future__ import annotations

import itertools
import warnings

import numpy as np
import scipy.sparse as sp

from .errors import BoundaryIncomplete, DegreeMismatch, UnsupportedDegree, ZeroDualVolume
from .forms import DUAL, PRIMAL, Cochain, codifferential_matrix, d, hodge
from .geometry import Geometry
from .wedge import wedge_pd


def _require_coords(G: Geometry) -> np.ndarray:
    if G.coords is None:
        raise ValueError("vector fields need ambient vertex coordinates")
    return G.coords


def _edge_vectors(G: Geometry) -> np.ndarray:
    X = _require_coords(G)
    E = G.K.simplices(1)
    vec = X[E[:, 1]] - X[E[:, 0]]
    return vec * G.K.orientation(1)[:, None]


def tangency_residual(G: Geometry, X) -> np.ndarray:
    """Norm of the part of each dual-vertex vector normal to its top simplex."""
    X = np.asarray(X, dtype=float)
    P = G.top_points
    E = P[:, 1:, :] - P[:, :1, :]
    out = np.empty(len(X))
    for t in range(len(X)):
        Q, _ = np.linalg.qr(E[t].T)
        out[t] = np.linalg.norm(X[t] - Q @ (Q.T @ X[t]))
    return out


def flat_matrix(G: Geometry) -> sp.csr_matrix:
    """Matrix of flat from the flattened (T*D) dual vector field to primal 1-forms."""
    K, n = G.K, G.n
    dv = G.dual_volume[1]
    if np.any(dv == 0):
        raise ZeroDualVolume("an edge has zero dual volume")
    ft = K.face_table(n, 1)
    vec = _edge_vectors(G)
    T, C = ft.shape
    D = vec.shape[1]
    w = G.restricted_dual[1][:, :, None] * vec[ft] / dv[ft][:, :, None]  # (T, C, D)
    rows = np.broadcast_to(ft[:, :, None], w.shape)
    cols = np.broadcast_to((np.arange(T)[:, None, None] * D + np.arange(D)[None, None, :]), w.shape)
    M = sp.csr_matrix((w.ravel(), (rows.ravel(), cols.ravel())), shape=(K.num(1), T * D))
    M.sum_duplicates()
    return M


def flat(G: Geometry, X) -> Cochain:
    """Primal 1-form from a dual vector field (one vector per top simplex)."""
    X = np.asarray(X, dtype=float)
    return Cochain(1, flat_matrix(G) @ X.ravel(), PRIMAL)


def _barycentric_gradients(G: Geometry) -> np.ndarray:
    """Gradients of barycentric coordinates, shape (T, n+1, D)."""
    P = G.top_points
    E = P[:, 1:, :] - P[:, :1, :]
    pinv = np.linalg.pinv(E)  # (T, D, n)
    grads = np.swapaxes(pinv, 1, 2)  # rows: grad of lambda_1..lambda_n
    g0 = -grads.sum(axis=1, keepdims=True)
    return np.concatenate([g0, grads], axis=1)


def _inward_normals(G: Geometry, i: int, j: int) -> np.ndarray:
    """Unit normal to the edge (i, j) of every top simplex, pointing into it."""
    P = G.top_points
    a, b = P[:, i, :], P[:, j, :]
    e = b - a
    if G.n == 1:
        return e / np.linalg.norm(e, axis=1, keepdims=True)
    centroid = P.mean(axis=1)
    r = centroid - a
    r = r - (np.einsum("td,td->t", r, e) / np.einsum("td,td->t", e, e))[:, None] * e
    return r / np.linalg.norm(r, axis=1, keepdims=True)


def sharp_matrix(G: Geometry, variant: str = "barycentric") -> sp.csr_matrix:
    """Matrix of sharp from primal 1-forms to the flattened (N0*D) vertex field."""
    if variant not in ("barycentric", "normal"):
        raise ValueError(f"unknown sharp variant {variant!r}")
    K, n = G.K, G.n
    tops = K.simplices(n)
    T = len(tops)
    D = G.top_points.shape[2]
    ft = K.face_table(n, 1)
    col = {c: i for i, c in enumerate(itertools.combinations(range(n + 1), 2))}
    orient = K.orientation(1)
    wv = G.restricted_dual[0]  # (T, n+1): |*v ∩ t|
    if variant == "barycentric":
        grads = _barycentric_gradients(G)
        scale = wv / G.dual_volume[0][tops]
    else:
        scale = wv / G.primal_volume[n][:, None]
    rows, cols, vals = [], [], []
    for i in range(n + 1):
        for j in range(n + 1):
            if j == i:
                continue
            e = ft[:, col[(min(i, j), max(i, j))]]
            sgn = orient[e] * (1.0 if i < j else -1.0)
            vec = grads[:, j, :] if variant == "barycentric" else _inward_normals(G, i, j)
            w = (sgn * scale[:, i])[:, None] * vec  # (T, D)
            rows.append((tops[:, i][:, None] * D + np.arange(D)).ravel())
            cols.append(np.repeat(e, D))
            vals.append(w.ravel())
    M = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(K.num(0) * D, K.num(1))
    )
    M.sum_duplicates()
    return M


def sharp(G: Geometry, alpha: Cochain, variant: str = "barycentric") -> np.ndarray:
    """Primal vector field (one vector per vertex) from a primal 1-form.

    ``variant="barycentric"`` (default) weights each top simplex t around v by
    |*v ∩ t|/|*v| and uses the barycentric gradient of the far endpoint of
    each edge [v, w] inside t. ``variant="normal"`` evaluates the unit-normal
    formula with weights |*v ∩ t|/|t|; see the README for why it is not the
    default.
    """
    if alpha.side != PRIMAL or alpha.degree != 1:
        raise DegreeMismatch("sharp takes a primal 1-form")
    if G.K.boundary_flags[0].any():
        warnings.warn("sharp evaluated on vertices with an open one-ring", BoundaryIncomplete)
    M = sharp_matrix(G, variant)
    return (M @ alpha.values).reshape(G.K.num(0), -1)


def divergence(G: Geometry, X) -> Cochain:
    """Divergence as minus the codifferential of the flat."""
    return Cochain(0, -(codifferential_matrix(G, 0) @ flat(G, X).values), PRIMAL)


def divergence_expanded(G: Geometry, X) -> Cochain:
    """Divergence as net outward flux through the dual cell, per unit volume."""
    X = np.asarray(X, dtype=float)
    K, n = G.K, G.n
    E = K.simplices(1)
    ft = K.face_table(n, 1)
    coords = _require_coords(G)
    vec = coords[E[:, 1]] - coords[E[:, 0]]
    unit = vec / np.linalg.norm(vec, axis=1, keepdims=True)
    flux = G.restricted_dual[1] * np.einsum("td,tcd->tc", X, unit[ft])
    e_idx = ft.ravel()
    f = flux.ravel()
    out = np.bincount(E[e_idx, 0], weights=f, minlength=K.num(0))
    out -= np.bincount(E[e_idx, 1], weights=f, minlength=K.num(0))
    return Cochain(0, out / G.dual_volume[0], PRIMAL)


def support_to_vertices(G: Geometry, omega: np.ndarray, k: int) -> Cochain:
    """Turn an n-form given on the support volumes V_s of k-simplices into a 0-form.

    Each value is split over the dual cells *v in proportion |V_s ∩ *v|/|V_s|,
    then divided by the discrete volume form 1 ∧ *1 of *v, which is |*v|/n.
    """
    K = G.K
    frac = G.support_vertex[k] / G.support_volume[k][:, None]
    S = K.simplices(k)
    onv = np.zeros(K.num(0))
    for p in range(k + 1):
        onv += np.bincount(S[:, p], weights=frac[:, p] * omega, minlength=K.num(0))
    return Cochain(0, G.n * onv / G.dual_volume[0], PRIMAL)


def contraction_1form(G: Geometry, X, alpha: Cochain) -> Cochain:
    """Contraction of a vector field with a primal 1-form.

    Computed as (-1)^(n-1) * (*alpha ∧ X-flat); reordering the wedge to
    X-flat ∧ *alpha contributes another (-1)^(n-1), so the signs cancel.
    """
    if alpha.side != PRIMAL or alpha.degree != 1:
        raise UnsupportedDegree("contraction is implemented for primal 1-forms only")
    n = G.n
    star_alpha = hodge(G, alpha)
    s_contract = -1 if (n - 1) % 2 else 1
    s_reorder = -1 if (n - 1) % 2 else 1
    omega = s_contract * s_reorder * wedge_pd(G, flat(G, X), star_alpha)
    return support_to_vertices(G, omega, 1)


def lie_derivative_0form(G: Geometry, X, f: Cochain) -> Cochain:
    """Lie derivative of a 0-form: the contraction of X with df."""
    return contraction_1form(G, X, d(G.K, f))
