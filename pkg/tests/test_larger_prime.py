"""Cross-section of the library at p = 5, guarding against anything
accidentally specialized to p = 3."""

import numpy as np

from qfa.core import GroupSpec, GroupSubset, dft, gauss_sum, idft, matrix_rank
from qfa.constructions import gs, qgs, quadric, trace_sym_space
from qfa.detectors import FOUND, NONE, cap2_check, find_hop2, find_op, vc2_dim
from qfa.factors import (
    AtomLabel,
    QuadraticFactor,
    RankFunction,
    atom_sizes,
    factor_rank,
    make_high_rank,
    refines,
)
from qfa.uniformity import dev2_measure, beta_graph, u2_norm, u3_norm, triad_membership_check
from qfa.regularize import Subgroup, find_uniform_dense_coset

RNG = np.random.default_rng(0xF0F2)


def test_group_arithmetic_and_dft():
    sp = GroupSpec(5, 3)
    for i in (0, 1, 7, 124):
        assert sp.index_of(sp.vector_of(i)) == i
    f = RNG.standard_normal(sp.order)
    fhat = dft(f, sp)
    assert abs((np.abs(fhat) ** 2).sum() - np.mean(f**2)) < 1e-9
    assert np.abs(idft(fhat, sp) - f).max() < 1e-9


def test_gauss_sum_identity_form():
    for n in (1, 2, 3):
        sp = GroupSpec(5, n)
        g = gauss_sum(np.eye(n, dtype=np.int64), np.zeros(n), sp)
        assert abs(abs(g) - 5.0 ** (-n / 2)) < 1e-9


def test_layered_set_and_pieces():
    A = gs(2, 5)
    assert len(A) == (25 - 1) // 4
    Aq, F = qgs(3, 5)
    assert factor_rank(QuadraticFactor(F.spec, [], F.matrices[:2])) == 3
    # density near 1/(p-1)
    assert abs(Aq.density() - 0.25) < 0.1


def test_norms_and_dev2():
    sp = GroupSpec(5, 2)
    assert abs(u2_norm(np.ones(sp.order), sp) - 1) < 1e-9
    f = RNG.uniform(-1, 1, sp.order)
    assert u2_norm(f, sp) <= u3_norm(f, sp) + 1e-9
    sp3 = GroupSpec(5, 3)
    mats = trace_sym_space(3, 5)
    F = QuadraticFactor(sp3, [], [mats[0]])
    from qfa.factors import atom_members

    a0 = atom_members(F, AtomLabel([], [0])).indices()
    a1 = atom_members(F, AtomLabel([], [1])).indices()
    eps, d2 = dev2_measure(beta_graph(F, a0, a1, [2]))
    assert abs(d2 - 1 / 5) < 0.1 and eps < 0.2


def test_triad_membership_and_atom_sizes():
    sp = GroupSpec(5, 2)
    mats = trace_sym_space(2, 5)
    F = QuadraticFactor(sp, [sp.basis_vector(1)], [mats[0]])
    assert triad_membership_check(F)
    sizes = atom_sizes(QuadraticFactor(GroupSpec(5, 3), [], trace_sym_space(3, 5)[:1]))
    assert sum(sizes.values()) == 125


def test_detectors_and_rank_repair():
    Q = quadric(2, 5)
    assert find_hop2(Q, 2).status == NONE
    ok, _, st = cap2_check(Q)
    assert ok and st == FOUND
    k2, _, st = vc2_dim(Q, 2)
    assert st == FOUND and k2 <= 1
    A = gs(2, 5)
    assert find_op(A, 2).status in (FOUND, NONE)
    sp = GroupSpec(5, 3)
    dup = QuadraticFactor(sp, [], [np.eye(3, dtype=np.int64)] * 2)
    out = make_high_rank(dup, RankFunction("x"), 6)
    assert refines(out, dup)


def test_uniform_coset_engine():
    sp = GroupSpec(5, 3)
    A = GroupSubset(sp, RNG.random(sp.order) < 0.5)
    _, _, stats = find_uniform_dense_coset(A, Subgroup(sp, []), 0.3)
    assert stats["uniformity"] <= 0.3
