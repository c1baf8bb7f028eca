import numpy as np
import pytest

from qfa.core import GroupSpec, GroupSubset
from qfa.constructions import gs, quadric, trace_sym_space, union_of_cosets
from qfa.detectors import (
    BOUND_ONLY,
    FOUND,
    NONE,
    SearchBudget,
    Witness,
    affine_embedding_exists,
    cap2_check,
    complement_hop2_witness,
    count_good_copies_H,
    count_tree_encodings,
    count_tree_encodings_naive,
    find_fop2,
    find_good_copy,
    find_hop2,
    find_op,
    fop2_to_vc_witness,
    hodges_extract,
    hop2_to_op_witness,
    hop2_witness_from_reindexed,
    plant_tree_encoding,
    vc2_dim,
    vc2_to_fop2_witness,
    vc_dim,
    verify_good_copy,
)
from qfa.factors import LinearFactor, QuadraticFactor
from qfa.uniformity import reduced_pair

RNG = np.random.default_rng(0xF0F2)


def vec(s):
    return np.array([int(c) for c in s])


# --- order property ---


def test_op_none_on_coset_and_empty():
    sp = GroupSpec(3, 3)
    H = union_of_cosets(LinearFactor(sp, [sp.basis_vector(1)]), [np.zeros(3, dtype=np.int64)])
    assert find_op(H, 2).status == NONE
    assert find_op(GroupSubset(sp), 2).status == NONE


def test_op_witness_in_layered_set():
    n = 5
    A = gs(n, 3)
    sp = A.spec
    a = [sp.basis_vector(i) for i in range(1, n)]
    b = [2 * sp.basis_vector(j + 1) for j in range(1, n)]
    w = Witness("OP", A, {"a": a, "b": b}, k=n - 1)
    assert w.revalidate()
    assert find_op(gs(3, 3), 2).status == FOUND


def test_op_budget_exhaustion_reports_bound_only():
    A = gs(4, 3)
    res = find_op(A, 4, SearchBudget(node_limit=10))
    assert res.status == BOUND_ONLY


# --- hyperplane order property ---


def test_hop2_explicit_witness_revalidates():
    A = gs(4, 3)
    w = Witness(
        "HOP2",
        A,
        {
            "x": [vec("2220"), vec("2210"), vec("2120")],
            "y": [vec("2220"), vec("2200"), vec("0220")],
            "z": [vec("2221"), vec("2011"), vec("2021")],
        },
        k=3,
    )
    assert w.revalidate()


def test_hop2_search_finds_depth3_in_layered_set():
    res = find_hop2(gs(4, 3), 3)
    assert res.status == FOUND and res.witness.revalidate()


def test_hop2_none_small_layered_sets():
    for n in (2, 3):
        assert find_hop2(gs(n, 3), 4).status == NONE


def test_hop2_none_on_quadrics():
    for n in (1, 2, 3):
        assert find_hop2(quadric(n, 3), 2).status == NONE


def test_hop2_reindexed_normalization():
    # u+v+w >= k+2 form on a planted set, normalized by reversing the x role
    sp = GroupSpec(3, 3)
    k = 2
    found = None
    for _ in range(200):
        A = GroupSubset(sp, RNG.random(27) < 0.5)
        res = find_hop2(A, k)
        if res.status == FOUND:
            found = (A, res.witness)
            break
    assert found is not None
    A, w = found
    xs = list(reversed(w.data["x"]))  # to the reindexed form and back
    w2 = hop2_witness_from_reindexed(A, xs, w.data["y"], w.data["z"], k)
    assert w2.revalidate()


# --- functional order property ---


def test_fop2_none_cases():
    assert find_fop2(quadric(2, 3), 2).status == NONE
    sp = GroupSpec(3, 2)
    assert find_fop2(GroupSubset(sp), 2).status == NONE
    assert find_fop2(GroupSubset.full(sp), 2).status == NONE


def test_fop2_found_on_random_and_revalidates():
    sp = GroupSpec(3, 3)
    for _ in range(100):
        A = GroupSubset(sp, RNG.random(27) < 0.5)
        res = find_fop2(A, 2)
        if res.status == FOUND:
            assert res.witness.revalidate()
            return
    pytest.fail("no functional-order witness found on random sets")


# --- VC and VC2 ---


def test_vc_dim_layered_sets():
    k3, w3, st3 = vc_dim(gs(3, 3), 4)
    assert (k3, st3) == (3, FOUND) and w3.revalidate()


def test_vc_dim_trivial_sets():
    sp = GroupSpec(3, 2)
    assert vc_dim(GroupSubset(sp), 3)[0] == 0
    assert vc_dim(GroupSubset.full(sp), 3)[0] == 0


def test_vc2_quadric_at_most_one():
    for n in (2, 3):
        k, w, st = vc2_dim(quadric(n, 3), 2)
        assert st == FOUND and k <= 1


def test_vc2_le_vc_on_random_sets():
    sp = GroupSpec(3, 2)
    for _ in range(40):
        A = GroupSubset(sp, RNG.random(9) < RNG.uniform(0.2, 0.8))
        k2, _, st2 = vc2_dim(A, 2)
        k1, _, st1 = vc_dim(A, 3)
        if st1 == FOUND and st2 == FOUND:
            assert k2 <= k1


# --- cube auto-completion ---


def test_cap2_quadrics_and_cosets():
    for n in (2, 3):
        ok, cube, st = cap2_check(quadric(n, 3))
        assert ok and st == FOUND
    sp = GroupSpec(3, 3)
    H = union_of_cosets(LinearFactor(sp, [sp.basis_vector(1)]), [np.zeros(3, dtype=np.int64)])
    assert cap2_check(H)[0]


def test_cap2_violation_returns_cube():
    sp = GroupSpec(3, 2)
    for _ in range(50):
        A = GroupSubset(sp, RNG.random(9) < 0.6)
        ok, cube, st = cap2_check(A)
        if not ok:
            assert cube.revalidate()
            return
    pytest.fail("no violating cube found on dense random sets")


def test_cap2_agrees_with_staircase_search():
    sp = GroupSpec(3, 2)
    for _ in range(60):
        A = GroupSubset(sp, RNG.random(9) < RNG.uniform(0.2, 0.8))
        ok, _, _ = cap2_check(A)
        assert ok == (find_hop2(A, 2).status == NONE)


# --- tree encodings ---


def test_tree_count_trivial_zero_cases():
    sp = GroupSpec(3, 2)
    full = GroupSubset.full(sp)
    assert count_tree_encodings(GroupSubset(sp), 1, full, full) == 0
    assert count_tree_encodings(full, 1, full, full) == 0


def test_tree_count_matches_naive():
    sp = GroupSpec(3, 2)
    for _ in range(5):
        A = GroupSubset(sp, RNG.random(9) < RNG.uniform(0.2, 0.8))
        Lm = GroupSubset(sp, RNG.random(9) < 0.8)
        Nm = GroupSubset(sp, RNG.random(9) < 0.8)
        for d in (1, 2):
            assert count_tree_encodings(A, d, Lm, Nm) == count_tree_encodings_naive(A, d, Lm, Nm)


def test_tree_depth_cap():
    sp = GroupSpec(3, 2)
    full = GroupSubset.full(sp)
    with pytest.raises(ValueError):
        count_tree_encodings(full, 4, full, full)


# --- staircase extraction ---


def test_extract_from_planted_depth6():
    sp = GroupSpec(3, 12)
    A, w = plant_tree_encoding(sp, 6, seed=1)
    out = hodges_extract(w, 1)
    assert out is not None and out.revalidate()


def test_extract_presentation_order_invariance():
    sp = GroupSpec(3, 12)
    A, w = plant_tree_encoding(sp, 6, seed=2)
    leaves = list(w.data["leaves"].items())
    nodes = list(w.data["nodes"].items())
    RNG.shuffle(leaves)
    RNG.shuffle(nodes)
    w2 = Witness("TREE", A, {"leaves": dict(leaves), "nodes": dict(nodes), "d": 6})
    out = hodges_extract(w2, 1)
    assert out is not None and out.revalidate()


def test_extract_with_adversarial_offbranch_extension():
    sp = GroupSpec(3, 12)
    A, w = plant_tree_encoding(sp, 6, seed=3)
    constrained = set()
    for s, h in w.data["nodes"].items():
        for e, g in w.data["leaves"].items():
            if len(s) < len(e) and e[: len(s)] == s:
                constrained.add(sp.index_of((np.asarray(h) + np.asarray(g)) % 3))
    ind = A.indicator.copy()
    extra = RNG.random(sp.order) < 0.3
    extra[sorted(constrained)] = False
    ind |= extra
    w_adv = Witness("TREE", GroupSubset(sp, ind), dict(w.data))
    assert w_adv.revalidate()
    out = hodges_extract(w_adv, 1)
    assert out is not None and out.revalidate()


def test_extract_rejects_invalid_encoding():
    sp = GroupSpec(3, 4)
    A, w = plant_tree_encoding(sp, 2, seed=5)
    bad = Witness("TREE", GroupSubset(sp), dict(w.data))
    assert hodges_extract(bad, 1) is None


def test_extract_depth2_staircase():
    sp = GroupSpec(3, 6)
    A, w = plant_tree_encoding(sp, 2, seed=4)
    out = hodges_extract(w, 2)
    assert out is not None and out.k == 2 and out.revalidate()


def test_extract_k3_guided():
    sp = GroupSpec(3, 10)
    A, w = plant_tree_encoding(sp, 4, seed=6)
    out = hodges_extract(w, 3)
    assert out is not None and out.revalidate()


# --- good copies ---


def test_good_copy_found_in_qgs_reduced_pair():
    from qfa.constructions import qgs

    A, F = qgs(6, 3)
    FD = QuadraticFactor(F.spec, [], F.matrices[:4])
    rp = reduced_pair(A, FD, 0.01)
    res = find_good_copy(rp, "H", 3)
    assert res.status == FOUND
    assert res.witness.revalidate()
    assert verify_good_copy(rp, res.witness.data["left"], res.witness.data["right"])


def test_good_copy_none_when_no_dense_atoms():
    from qfa.constructions import qgs

    _, F = qgs(4, 3)
    FD = QuadraticFactor(F.spec, [], F.matrices[:2])
    rp = reduced_pair(GroupSubset(F.spec), FD, 0.01)
    assert find_good_copy(rp, "H", 1).status == NONE


def test_good_copy_count_positive_for_layered_set():
    sp = GroupSpec(3, 6)
    mats = trace_sym_space(6, 3)
    B = QuadraticFactor(sp, [sp.basis_vector(1), sp.basis_vector(2)], [mats[0]])
    rp = reduced_pair(gs(6, 3), B, 0.05)
    full_side = np.ones(rp.label_spec.order, dtype=bool)
    assert count_good_copies_H(rp, 2, side=full_side) > 0


def test_good_copy_U_pattern_small():
    sp = GroupSpec(3, 4)
    mats = trace_sym_space(4, 3)
    B = QuadraticFactor(sp, [], [mats[0]])
    rng = np.random.default_rng(9)
    for _ in range(30):
        A = GroupSubset(sp, rng.random(sp.order) < 0.5)
        rp = reduced_pair(A, B, 0.4)
        res = find_good_copy(rp, "U", 1)
        if res.status == FOUND:
            return
    pytest.fail("no box-pattern copy found at eps = 0.4")


# --- affine embeddings ---


def test_affine_embedding_examples():
    h1 = GroupSpec(3, 1)
    g2 = GroupSpec(3, 2)
    A2 = gs(2, 3)
    got = affine_embedding_exists((h1, GroupSubset.from_indices(h1, [1])), (g2, A2))
    assert got is not None
    g, V = got
    for x in range(3):
        img = (np.asarray(g) + V @ np.array([x])) % 3
        assert A2.contains_index(g2.index_of(img)) == (x == 1)
    assert affine_embedding_exists((g2, A2), (g2, A2)) is not None
    assert (
        affine_embedding_exists((h1, GroupSubset.full(h1)), (g2, GroupSubset(g2))) is None
    )


# --- closure transforms ---


def test_transforms_on_found_witnesses():
    sp = GroupSpec(3, 3)
    seen = {"hop2": 0, "fop2": 0, "vc2": 0}
    for t in range(120):
        A = GroupSubset(sp, RNG.random(27) < RNG.uniform(0.25, 0.75))
        res = find_hop2(A, 2)
        if res.status == FOUND:
            assert complement_hop2_witness(res.witness).revalidate()
            assert hop2_to_op_witness(res.witness).revalidate()
            seen["hop2"] += 1
        if t % 4 == 0:
            resf = find_fop2(A, 2)
            if resf.status == FOUND:
                assert fop2_to_vc_witness(resf.witness).revalidate()
                seen["fop2"] += 1
            k2, w2, _ = vc2_dim(A, 2)
            if k2 == 2:
                assert vc2_to_fop2_witness(w2).revalidate()
                seen["vc2"] += 1
    assert min(seen.values()) > 0


def test_intersection_preserves_tameness():
    sp = GroupSpec(3, 2)
    B = quadric(2, 3, c=1)
    assert find_hop2(B, 2).status == NONE
    done = 0
    for _ in range(200):
        A = GroupSubset(sp, RNG.random(9) < 0.5)
        if find_hop2(A, 2).status == NONE:
            assert find_hop2(A.intersect(B), 2).status == NONE
            done += 1
    assert done > 10


def test_cap2_holds_for_arbitrary_quadric_level_sets():
    from qfa.constructions import quadric

    rng = np.random.default_rng(17)
    for n in (2, 3):
        for _ in range(4):
            M = rng.integers(0, 3, size=(n, n))
            M = (M + M.T) % 3
            c = int(rng.integers(0, 3))
            Q = quadric(n, 3, M, c)
            ok, cube, st = cap2_check(Q)
            assert ok and st == FOUND, (n, M.tolist(), c)


def test_union_closure_empirical_at_searchable_depths():
    # unions of two cube-auto-completing sets (quadric level sets) stay free
    # of deep staircases at the searchable depths; witnesses found at shallow
    # depth must revalidate, and verdicts must be definitive either way
    rng = np.random.default_rng(23)
    for n in (2, 3):
        sp = GroupSpec(3, n)
        for _ in range(6):
            M1 = rng.integers(0, 3, size=(n, n)); M1 = (M1 + M1.T) % 3
            M2 = rng.integers(0, 3, size=(n, n)); M2 = (M2 + M2.T) % 3
            A = quadric(n, 3, M1, int(rng.integers(0, 3))).union(
                quadric(n, 3, M2, int(rng.integers(0, 3)))
            )
            for k in (2, 3):
                res = find_hop2(A, k)
                assert res.status in (FOUND, NONE)
                if res.witness is not None:
                    assert res.witness.revalidate()
