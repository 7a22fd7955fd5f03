import numpy as np
import pytest

from dec import build_complex, build_dual, circumcenter, double_dual_sign, dual_boundary
from dec.complex import Chain
from dec.errors import DegenerateSimplex, NotWellCentered
from dec.meshes import hex_disk, icosahedral_ball, random_disk, segments, triangular_lattice

from oracles import circumcenter_2d, signed_distance_to_line

S3 = np.sqrt(3.0)


def two_triangles():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, S3 / 2], [0.5, -S3 / 2]])
    K = build_complex([(0, 1, 2), (1, 0, 3)])
    return K, X


def test_circumcenter_right_triangle():
    assert np.allclose(circumcenter([[0, 0], [1, 0], [0, 1]]), [0.5, 0.5], atol=1e-15)


def test_circumcenter_segment_midpoint():
    assert np.allclose(circumcenter([[0, 0], [2, 0]]), [1, 0])


def test_circumcenter_equilateral_height():
    c = circumcenter([[0, 0], [1, 0], [0.5, S3 / 2]])
    assert abs(c[1] - 1 / (2 * S3)) < 1e-15


def test_circumcenter_in_affine_span_and_equidistant():
    rng = np.random.default_rng(0)
    P = rng.normal(size=(3, 4))
    c = circumcenter(P)
    r = np.linalg.norm(P - c, axis=1)
    assert np.ptp(r) < 1e-10 * r.max()
    # c - P0 lies in the span of the edge vectors
    E = (P[1:] - P[0]).T
    coef, *_ = np.linalg.lstsq(E, c - P[0], rcond=None)
    assert np.linalg.norm(E @ coef - (c - P[0])) < 1e-12


def test_circumcenter_degenerate():
    with pytest.raises(DegenerateSimplex):
        circumcenter([[0, 0], [1, 0], [2, 0]])


def test_single_triangle_top_dual_is_point():
    K = build_complex([(0, 1, 2)])
    G = build_dual(K, [[0, 0], [1, 0], [0.5, S3 / 2]])
    assert G.dual_volume[2][0] == 1.0
    assert G.primal_volume[0].tolist() == [1.0, 1.0, 1.0]


def test_shared_edge_dual_length():
    K, X = two_triangles()
    G = build_dual(K, X)
    i = K.find((0, 1))[0]
    assert abs(G.dual_volume[1][i] - 1 / S3) < 1e-15


def test_boundary_edge_dual_length():
    X = np.array([[0.0, 0.0], [2.0, 0.0], [0.5, 1.5]])
    K = build_complex([(0, 1, 2)])
    G = build_dual(K, X)
    c = circumcenter_2d(*X)
    for e, (a, b) in enumerate(K.simplices(1).tolist()):
        expect = np.linalg.norm(c - (X[a] + X[b]) / 2)
        assert abs(G.dual_volume[1][e] - expect) < 1e-14


def test_double_dual_sign():
    assert double_dual_sign(1, 2) == -1
    assert double_dual_sign(0, 5) == 1
    assert double_dual_sign(2, 3) == 1


def test_not_well_centered_is_fatal_by_default():
    K = build_complex([(0, 1, 2)])
    X = [[0, 0], [4, 0], [2, 0.5]]
    with pytest.raises(NotWellCentered):
        build_dual(K, X)
    G = build_dual(K, X, signed_volumes=True)
    assert not G.well_centered
    assert G.dual_volume[1].min() < 0


def test_signed_dual_edge_matches_bisector_distance():
    rng = np.random.default_rng(7)
    tops, X = random_disk(25, 14, rng)
    K = build_complex(tops)
    G = build_dual(K, X, signed_volumes=True)
    oracle = np.zeros(K.num(1))
    for t in K.simplices(2).tolist():
        c = circumcenter_2d(*X[t])
        for a, b, o in ((t[0], t[1], t[2]), (t[0], t[2], t[1]), (t[1], t[2], t[0])):
            m = (X[a] + X[b]) / 2
            # signed distance of the circumcenter from the edge, towards the interior
            d = signed_distance_to_line(c, X[a], X[b], X[o])
            oracle[K.find((a, b))[0]] += d
    assert np.max(np.abs(G.dual_volume[1] - oracle)) < 1e-12


@pytest.mark.parametrize("mesh", ["lattice", "hex", "ball", "segments"])
def test_support_volumes_partition(mesh):
    tops, X = {
        "lattice": lambda: triangular_lattice(3, 2),
        "hex": lambda: hex_disk(2),
        "ball": icosahedral_ball,
        "segments": lambda: segments([0, 0.3, 0.5, 1.2]),
    }[mesh]()
    K = build_complex(tops)
    G = build_dual(K, X)
    total = G.total_volume
    for k in range(K.dim + 1):
        assert abs(G.support_volume[k].sum() - total) < 1e-10 * total


def test_support_volume_product_formula():
    # |V_s| = k!(n-k)!/n! |s||*s| on flat well-centered meshes
    from math import factorial

    tops, X = icosahedral_ball()
    K = build_complex(tops)
    G = build_dual(K, X)
    n = 3
    for k in range(n + 1):
        c = factorial(k) * factorial(n - k) / factorial(n)
        assert np.allclose(G.support_volume[k], c * G.primal_volume[k] * G.dual_volume[k], rtol=1e-12)


def test_restricted_dual_sums():
    tops, X = hex_disk(2)
    K = build_complex(tops)
    G = build_dual(K, X)
    for k in range(3):
        ft = K.face_table(2, k)
        s = np.bincount(ft.ravel(), weights=G.restricted_dual[k].ravel(), minlength=K.num(k))
        assert np.max(np.abs(s - G.dual_volume[k])) < 1e-12


def test_dual_edges_orthogonal_to_primal():
    tops, X = hex_disk(2)
    K = build_complex(tops)
    G = build_dual(K, X)
    C1, C2 = G.circumcenters[1], G.circumcenters[2]
    ft = K.face_table(2, 1)
    E = K.simplices(1)
    for t in range(K.num(2)):
        for e in ft[t]:
            v = C2[t] - C1[e]
            u = X[E[e, 1]] - X[E[e, 0]]
            assert abs(np.dot(u, v)) < 1e-12


def test_vertex_dual_boundary_is_outgoing_edge_duals():
    tops, X = hex_disk(1)
    K = build_complex(tops)
    c = dual_boundary(K, Chain(2, {0: 1}, side="dual"))
    edges = [i for i, (a, b) in enumerate(K.simplices(1).tolist()) if 0 in (a, b)]
    assert set(c.coeffs) == set(edges)
    for i in edges:
        a, b = K.simplices(1)[i]
        assert c.coeffs[i] == (1 if a == 0 else -1)
    assert dual_boundary(K, c).is_zero()


def test_interior_dual_polygon_closes():
    tops, X = hex_disk(2)
    K = build_complex(tops)
    G = build_dual(K, X)
    C = G.circumcenters
    interior = np.flatnonzero(~K.boundary_flags[0])
    for v in interior:
        db = dual_boundary(K, Chain(2, {int(v): 1}, side="dual"))
        assert len(db.coeffs) == 6
        total = np.zeros(2)
        normal_sum = np.zeros(2)
        for e, s in db.coeffs.items():
            for key, eps in G.elementary_dual(1, e).items():
                total += s * eps * (C[2][key[1]] - C[1][key[0]])
            a, b = K.simplices(1)[e]
            u = X[b] - X[a]
            normal_sum += s * G.dual_volume[1][e] * u / np.linalg.norm(u)
        assert np.linalg.norm(total) < 1e-12
        assert np.linalg.norm(normal_sum) < 1e-12


def test_metric_input_matches_coordinates():
    K, X = two_triangles()
    m = {(a, b): float(np.linalg.norm(X[a] - X[b])) for a, b in K.simplices(1).tolist()}
    G1 = build_dual(K, X)
    G2 = build_dual(K, metric=m)
    for k in range(3):
        assert np.allclose(G1.dual_volume[k], G2.dual_volume[k], atol=1e-14)
