import numpy as np
import pytest

from dec import build_complex, build_dual
from dec.complex import Chain
from dec.errors import DegreeMismatch
from dec.forms import (
    DUAL,
    PRIMAL,
    Cochain,
    codifferential,
    codifferential_matrix,
    d,
    d_matrix,
    hodge,
    hodge_matrix,
    inner_product,
    laplace_deRham,
    laplacian_matrix,
    norm,
    pair,
)
from dec.meshes import fan, hex_disk, icosahedral_ball, icosahedron_surface, random_disk, segments

from oracles import apply_cotan, cotan_laplacian

S3 = np.sqrt(3.0)


def equilateral_pair():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, S3 / 2], [0.5, -S3 / 2]])
    K = build_complex([(0, 1, 2), (1, 0, 3)])
    return K, build_dual(K, X)


# ---------------------------------------------------------------- pairing


def test_pair_bilinear():
    a = Cochain(1, np.array([2.0, 0.0]))
    assert pair(a, Chain(1, {0: 3})) == 6.0


def test_pair_zero_chain():
    a = Cochain(1, np.array([2.0, 5.0]))
    assert pair(a, Chain(1, {})) == 0


def test_pair_cancels():
    a = Cochain(1, np.array([1.0, -1.0]))
    assert pair(a, Chain(1, {0: 1, 1: 1})) == 0.0


def test_pair_degree_mismatch():
    with pytest.raises(DegreeMismatch):
        pair(Cochain(1, np.zeros(2)), Chain(0, {0: 1}))


# --------------------------------------------------------------------- d


def test_dd_zero():
    tops, X = icosahedral_ball()
    K = build_complex(tops)
    for k in range(2):
        assert (d_matrix(K, k + 1) @ d_matrix(K, k)).count_nonzero() == 0


def test_d_on_edge():
    K = build_complex([(0, 1)])
    f = Cochain(0, np.array([3.0, 7.5]))
    assert d(K, f).values.tolist() == [4.5]


def test_d_on_triangle():
    K = build_complex([(0, 1, 2)])
    vals = {(0, 1): 1.5, (0, 2): -2.0, (1, 2): 0.25}
    a = Cochain(1, np.array([vals[tuple(e)] for e in K.simplices(1).tolist()]))
    assert d(K, a).values[0] == vals[(1, 2)] - vals[(0, 2)] + vals[(0, 1)]


def test_stokes_pairing():
    rng = np.random.default_rng(0)
    tops, _ = random_disk(20, 10, rng)
    K = build_complex(tops)
    for k in range(2):
        a = rng.integers(-9, 10, K.num(k))
        c = rng.integers(-5, 6, K.num(k + 1))
        lhs = pair(Cochain(k + 1, d_matrix(K, k) @ a), Chain.from_dense(k + 1, c))
        rhs = pair(Cochain(k, a), Chain.from_dense(k, K.boundary_matrix(k + 1) @ c))
        assert lhs == rhs


def test_d_of_top_form_is_empty():
    K = build_complex([(0, 1, 2)])
    assert d(K, Cochain(2, np.ones(1))).values.shape == (0,)


# ----------------------------------------------------------------- hodge


@pytest.mark.parametrize("mesh", ["hex", "ball", "segments"])
def test_star_star_sign(mesh):
    tops, X = {"hex": lambda: hex_disk(2), "ball": icosahedral_ball, "segments": lambda: segments([0, 0.4, 1.0, 1.1])}[mesh]()
    K = build_complex(tops)
    G = build_dual(K, X)
    n = K.dim
    rng = np.random.default_rng(1)
    for k in range(n + 1):
        a = Cochain(k, rng.normal(size=K.num(k)))
        back = hodge(G, hodge(G, a))
        assert back.side == PRIMAL
        assert np.max(np.abs(back.values - (-1) ** (k * (n - k)) * a.values)) < 1e-12


def test_star_interior_edge():
    K, G = equilateral_pair()
    a = Cochain(1, np.zeros(K.num(1)))
    i = K.find((0, 1))[0]
    a.values[i] = 1.0
    assert abs(hodge(G, a).values[i] - 1 / S3) < 1e-15


def test_star_on_points():
    K = build_complex([(0,), (1,)])
    G = build_dual(K, [[0.0], [1.0]])
    assert np.array_equal(hodge_matrix(G, 0).diagonal(), [1.0, 1.0])


def test_star_metric_identity():
    # <b,s>/|s| equals <*b,*s>/|*s| entrywise
    K, G = equilateral_pair()
    b = Cochain(1, np.arange(1.0, K.num(1) + 1))
    sb = hodge(G, b)
    assert np.allclose(b.values / G.primal_volume[1], sb.values / G.dual_volume[1], rtol=1e-14)


# ------------------------------------------------------------ codifferential


def test_codifferential_of_zero_form_vanishes():
    K, G = equilateral_pair()
    assert codifferential(G, Cochain(0, np.ones(K.num(0)))).values.size == 0


def test_delta_delta_zero():
    tops, X = icosahedral_ball()
    K = build_complex(tops)
    G = build_dual(K, X)
    for k in range(2):
        M = codifferential_matrix(G, k) @ codifferential_matrix(G, k + 1)
        assert abs(M).max() < 1e-12


def test_delta_expansion_on_three_triangle_fan():
    # hand expansion: (delta b)(v) = -(1/|*v|) sum over edges e at v of
    # (|*e|/|e|) b(e) with sign +1 when e points away from v
    tops, X = fan(6, closed=False)
    tops = tops[:3]
    X = X[:5] + np.array([[0.03, -0.02], [0, 0], [0, 0], [0, 0], [0, 0]])
    K = build_complex(tops)
    G = build_dual(K, X)
    rng = np.random.default_rng(2)
    b = rng.normal(size=K.num(1))
    got = codifferential_matrix(G, 0) @ b
    w = G.dual_volume[1] / G.primal_volume[1]
    expect = np.zeros(K.num(0))
    for e, (p, q) in enumerate(K.simplices(1).tolist()):
        expect[p] -= w[e] * b[e]
        expect[q] += w[e] * b[e]
    expect /= G.dual_volume[0]
    assert np.max(np.abs(got - expect)) < 1e-12


# ------------------------------------------------------------- laplacian


def test_laplacian_constant_and_linear():
    tops, X = hex_disk(3)
    K = build_complex(tops)
    G = build_dual(K, X)
    L = laplacian_matrix(G, 0)
    assert np.max(np.abs(L @ np.ones(K.num(0)))) < 1e-12
    f = 0.3 + X @ [1.7, -0.4]
    interior = ~K.boundary_flags[0]
    assert np.max(np.abs((L @ f)[interior])) < 1e-10


@pytest.mark.parametrize("seed", range(3))
def test_laplacian_matches_cotan_formula(seed):
    tops, X = random_disk(30, 16, np.random.default_rng(seed))
    K = build_complex(tops)
    G = build_dual(K, X, signed_volumes=True)
    W, area = cotan_laplacian(tops, X)
    f = np.random.default_rng(seed + 10).normal(size=K.num(0))
    assert np.allclose(laplacian_matrix(G, 0) @ f, apply_cotan(W, area, f), atol=1e-10, rtol=0)


def test_laplace_derham_is_d_delta_plus_delta_d():
    tops, X = icosahedral_ball()
    K = build_complex(tops)
    G = build_dual(K, X)
    a = Cochain(1, np.random.default_rng(4).normal(size=K.num(1)))
    expect = d(K, codifferential(G, a)).values + codifferential(G, d(K, a)).values
    assert np.allclose(laplace_deRham(G, a).values, expect, atol=1e-12)


# --------------------------------------------------------- inner product


def test_inner_product_properties():
    tops, X = hex_disk(2)
    K = build_complex(tops)
    G = build_dual(K, X)
    rng = np.random.default_rng(5)
    a = Cochain(1, rng.normal(size=K.num(1)))
    b = Cochain(1, rng.normal(size=K.num(1)))
    assert abs(inner_product(G, a, b) - inner_product(G, b, a)) < 1e-14
    assert norm(G, a) > 0
    assert norm(G, Cochain(1, np.zeros(K.num(1)))) == 0


def test_norm_single_triangle():
    K = build_complex([(0, 1, 2)])
    G = build_dual(K, [[0, 0], [1, 0], [0.5, S3 / 2]])
    a = Cochain(1, np.array([1.0, 0.0, 0.0]))
    # |*e| = 1/(2 sqrt 3) for a unit equilateral triangle, |e| = 1, n = 2
    assert abs(norm(G, a) ** 2 - 1 / (4 * S3)) < 1e-15


def test_inner_product_rejects_mixed_degrees():
    K, G = equilateral_pair()
    with pytest.raises(DegreeMismatch):
        inner_product(G, Cochain(0, np.zeros(4)), Cochain(1, np.zeros(5)))


def test_adjointness_on_closed_surface():
    tops, X = icosahedron_surface()
    K = build_complex(tops)
    G = build_dual(K, X)
    rng = np.random.default_rng(6)
    for k in range(2):
        a = Cochain(k, rng.normal(size=K.num(k)))
        b = Cochain(k + 1, rng.normal(size=K.num(k + 1)))
        lhs = inner_product(G, d(K, a), b)
        rhs = inner_product(G, a, codifferential(G, b))
        assert abs(lhs - rhs) < 1e-10


def test_dual_hodge_side_bookkeeping():
    K, G = equilateral_pair()
    a = Cochain(1, np.ones(K.num(1)), DUAL)
    s = hodge(G, a)
    assert s.side == PRIMAL and s.degree == 1
