from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp

from dec import boundary, build_complex
from dec.complex import Chain
from dec.errors import ConeTableMissing, EnumerationOrderViolation, NoConeStructure, NotClosed, NotIsomorphic
from dec.homotopy import (
    AugmentationScript,
    augmented_cone,
    cocone,
    cocone_matrix,
    cone,
    cone_identity_defect,
    detect_trivially_star_shaped,
    exact_d,
    first_betti_number,
    greedy_script,
    homology_defect_witness,
    logical_cone,
    poincare_solve,
    script_from_order,
    star_cone,
)
from dec.meshes import cube_tets, fan, icosahedral_ball, kuhn_cube, pinched_annulus, segments, triangular_lattice


def identity_holds(T):
    return all(cone_identity_defect(T, k).count_nonzero() == 0 for k in range(T.K.dim + 1))


def simplex(K, verts, coef=1):
    return K.chain(len(verts) - 1, [(tuple(verts), coef)])


# -------------------------------------------------------------------- cone


def test_cone_of_vertex():
    K = build_complex([(0, 1, 2)])
    assert cone(K, 2, simplex(K, [0])) == simplex(K, [2, 0])


def test_cone_homotopy_formula_on_fan():
    tops, _ = fan(6)
    K = build_complex(tops)
    for k in range(1, 2):
        for i, row in enumerate(K.simplices(k).tolist()):
            if 0 in row:
                continue
            s = Chain(k, {i: 1})
            lhs = boundary(K, cone(K, 0, s)) + cone(K, 0, boundary(K, s))
            assert lhs == s


def test_cone_linear():
    tops, _ = fan(6)
    K = build_complex(tops)
    a, b = simplex(K, [1, 2]), simplex(K, [3, 4], -2)
    assert cone(K, 0, a + b) == cone(K, 0, a) + cone(K, 0, b)


# -------------------------------------------------------- star-shapedness


def test_detect_fan_centre():
    tops, _ = fan(7)
    assert detect_trivially_star_shaped(build_complex(tops)) == 0


def test_detect_annulus_none():
    tops, _ = pinched_annulus(6)
    assert detect_trivially_star_shaped(build_complex(tops)) is None


def test_single_simplex_any_vertex():
    K = build_complex([(3, 5, 8)])
    assert detect_trivially_star_shaped(K) == 3
    for w in (3, 5, 8):
        assert identity_holds(star_cone(K, w))


def test_star_cone_requires_star_shape():
    tops, _ = pinched_annulus(5)
    with pytest.raises(NoConeStructure):
        star_cone(build_complex(tops))


# ----------------------------------------------------------------- cocone


def test_cocone_identity_matrices_on_fan():
    tops, _ = fan(6)
    K = build_complex(tops)
    T = star_cone(K)
    for k in range(1, K.dim + 1):
        d_k = K.boundary_matrix(k + 1).T if k < K.dim else sp.csr_matrix((0, K.num(k)), dtype=np.int64)
        Hd = cocone_matrix(T, k + 1) @ d_k if k < K.dim else sp.csr_matrix((K.num(k), K.num(k)), dtype=np.int64)
        dH = K.boundary_matrix(k).T @ cocone_matrix(T, k)
        assert (Hd + dH - sp.identity(K.num(k), dtype=np.int64)).count_nonzero() == 0


def test_cocone_of_zero_form_is_empty():
    tops, _ = fan(5)
    T = star_cone(build_complex(tops))
    assert cocone(T, 0, [1, 2, 3, 4, 5, 6]) == []


def test_cocone_needs_table():
    with pytest.raises(ConeTableMissing):
        cocone(None, 1, [1])


@pytest.mark.parametrize("mesh", ["fan", "lattice", "cube", "kuhn", "ball", "segments"])
def test_poincare_solve_random_exact_forms(mesh):
    tops, _ = {
        "fan": lambda: fan(6),
        "lattice": lambda: triangular_lattice(3, 3),
        "cube": lambda: cube_tets(2),
        "kuhn": lambda: kuhn_cube(2),
        "ball": icosahedral_ball,
        "segments": lambda: segments([0, 1, 2, 3, 4]),
    }[mesh]()
    K = build_complex(tops)
    T = augmented_cone(K, greedy_script(K))
    rng = np.random.default_rng(0)
    for k in range(1, K.dim + 1):
        for _ in range(5):
            gamma = [int(x) for x in rng.integers(-9, 10, K.num(k - 1))]
            alpha = exact_d(K, k - 1, gamma)
            beta = poincare_solve(T, k, alpha)
            assert exact_d(K, k - 1, beta) == alpha


def test_poincare_solve_rational_values():
    tops, _ = fan(6)
    K = build_complex(tops)
    gamma = [Fraction(i, 3) for i in range(K.num(0))]
    alpha = exact_d(K, 0, gamma)
    beta = poincare_solve(star_cone(K), 1, alpha)
    assert exact_d(K, 0, beta) == alpha
    assert all(isinstance(x, (int, Fraction)) for x in beta)


def test_poincare_solve_zero():
    tops, _ = fan(6)
    K = build_complex(tops)
    assert all(x == 0 for x in poincare_solve(star_cone(K), 1, [0] * K.num(1)))


def test_poincare_rejects_non_closed():
    tops, _ = fan(6)
    K = build_complex(tops)
    alpha = [0] * K.num(1)
    alpha[0] = 1
    with pytest.raises(NotClosed):
        poincare_solve(star_cone(K), 1, alpha)


def test_poincare_without_structure():
    with pytest.raises(NoConeStructure):
        poincare_solve(None, 1, [0])


# ------------------------------------------------------------ logical cone


def test_logical_cone_identity_map():
    tops, _ = fan(6)
    K = build_complex(tops)
    T = star_cone(K)
    U = logical_cone(T, K, {v: v for v in range(K.num(0))})
    assert U.p == T.p


def test_logical_cone_relabelled_fan():
    tops, _ = fan(6)
    K = build_complex(tops)
    perm = {v: (3 * v + 2) % 7 for v in range(7)}
    L = build_complex([tuple(perm[v] for v in t) for t in tops])
    U = logical_cone(star_cone(K), L, perm)
    assert identity_holds(U)
    assert U.root == perm[0]


def test_logical_cone_rejects_non_isomorphism():
    tops, _ = fan(6)
    K = build_complex(tops)
    L = build_complex([(0, 1, 2)])
    with pytest.raises(NotIsomorphic):
        logical_cone(star_cone(K), L, {v: v for v in range(7)})


# ----------------------------------------------------------- augmentation


def test_two_dimensional_single_edge_rules():
    # initial triangle rooted at 2, then w = 3 coned over [0, 1]
    K = build_complex([(2, 0, 1), (0, 3, 1)])
    script = AugmentationScript((2, 0, 1), [(3, [(0, 1)])])
    T = augmented_cone(K, script)
    assert identity_holds(T)
    p = lambda *v: T.apply(simplex(K, list(v)))
    assert p(3) == simplex(K, [0, 3]) + p(0)
    assert p(0, 3).is_zero()
    assert p(1, 3) == simplex(K, [0, 1, 3]) - p(0, 1)
    assert p(0, 1) == simplex(K, [2, 0, 1])


def test_two_dimensional_two_edge_rules():
    K = build_complex([(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 1)])
    script = script_from_order(K, [1, 2, 0, 3, 4])
    T = augmented_cone(K, script)
    assert identity_holds(T)
    p = lambda *v: T.apply(simplex(K, list(v)))
    assert p(4) == simplex(K, [0, 4]) + p(0)
    for v in (1, 3):
        assert p(v, 4) == simplex(K, [0, v, 4]) - p(0, v)
    assert p(0, 4).is_zero()


def test_three_dimensional_one_ring_rules():
    tops, _ = icosahedral_ball()
    K = build_complex(tops)
    script = greedy_script(K)
    T = augmented_cone(K, script)
    assert identity_holds(T)
    p = lambda *v: T.apply(simplex(K, list(v)))
    checked = 0
    for w, base in script.steps:
        assert all(0 in b for b in base)
        assert p(w) == simplex(K, [0, w]) + p(0)
        assert p(0, w).is_zero()
        for b in base:
            x, y = [v for v in b if v != 0]
            for v in (x, y):
                assert p(v, w) == simplex(K, [0, v, w]) - p(0, v)
            assert p(x, y, w) == simplex(K, [0, x, y, w]) + p(0, x, y)
            checked += 1
    assert checked == 19


def test_growth_prefixes_of_lattice():
    tops, _ = triangular_lattice(4, 3)
    K = build_complex(tops)
    S = greedy_script(K)
    for u in range(1, len(S.steps) + 1):
        L = build_complex(S.top_simplices(u))
        assert identity_holds(augmented_cone(L, AugmentationScript(S.initial, S.steps[:u])))


def test_four_dimensional_augmentation():
    K = build_complex([(0, 1, 2, 3, 4), (1, 2, 3, 4, 5), (0, 2, 3, 4, 6)])
    assert identity_holds(augmented_cone(K, greedy_script(K)))


def test_script_json_round_trip():
    tops, _ = triangular_lattice(2, 2)
    S = greedy_script(build_complex(tops))
    R = AugmentationScript.from_json(S.to_json())
    assert R.initial == S.initial and R.steps == S.steps


def test_order_must_start_with_top_simplex():
    tops, _ = triangular_lattice(2, 2)
    K = build_complex(tops)
    with pytest.raises(EnumerationOrderViolation):
        script_from_order(K, [0, 4, 8, 1, 2, 3, 5, 6, 7])


def test_strict_rejects_annulus():
    tops, _ = pinched_annulus(6)
    with pytest.raises(EnumerationOrderViolation):
        greedy_script(build_complex(tops))


def test_incomplete_script_reported():
    K = build_complex([(2, 0, 1), (0, 3, 1)])
    # the script never adds vertex 3, so its simplices get no cone value
    with pytest.raises(EnumerationOrderViolation):
        augmented_cone(K, AugmentationScript((2, 0, 1), []))


# ------------------------------------------------------- counterexample


def test_annulus_counterexample():
    tops, _ = pinched_annulus(6)
    K = build_complex(tops)
    assert first_betti_number(K) == 1
    T = augmented_cone(K, greedy_script(K, strict=False), strict=False)
    w = homology_defect_witness(T)
    assert w["nonzero"] and w["is_cycle"] and not w["is_boundary"]
    # the defect loop goes around the hole: it touches all inner or all outer vertices
    verts = {v for e in w["defect"] for v in e}
    assert set(range(6)) <= verts or set(range(6, 12)) <= verts


def test_contractible_has_no_witness():
    tops, _ = triangular_lattice(2, 2)
    K = build_complex(tops)
    assert homology_defect_witness(augmented_cone(K, greedy_script(K)))["nonzero"] is False
