import numpy as np
import pytest

from nonabelian_qgt.clifford import (C2T_GAMMAS, C2T_ORIENTATION, CP_GAMMAS, COMMUTATOR_TABLE, I4, S0, SY,
                                     anticommutator_check, build_clifford_set, check_global_degeneracy,
                                     commutator_table_residual, kron, table_matrix)
from nonabelian_qgt.errors import ValidationError


def test_generators_anticommute_exactly():
    cset = build_clifford_set()
    assert anticommutator_check(cset) == 0.0
    assert anticommutator_check(CP_GAMMAS) == 0.0
    assert anticommutator_check(C2T_GAMMAS) == 0.0


def test_gamma2_is_sigma0_tau_y():
    assert np.array_equal(build_clifford_set().generator(2), kron(S0, SY))


def test_commutators_hermitian_and_square_to_one():
    cset = build_clifford_set()
    for m in cset.comm.values():
        assert np.array_equal(m, np.conj(m.T))
        assert np.allclose(m @ m, I4, atol=0)


def test_perturbed_set_residual():
    g = list(build_clifford_set().gamma)
    eps = 1e-3
    g[0] = g[0] + eps * g[1]
    # {G1 + e G2, G1 + e G2} - 2 = 2 e^2 and {G1 + e G2, G2} = 2 e
    assert anticommutator_check(g) == pytest.approx(2 * eps, rel=1e-12)


def test_commutator_table_matches_except_printed_typos():
    cset = build_clifford_set()
    bad = [key for key, entry in COMMUTATOR_TABLE.items() if np.max(np.abs(cset.comm[key] - table_matrix(entry))) > 0]
    assert sorted(bad) == [(1, 5), (3, 4)]
    # both printed entries differ from the computed commutator only by a sign
    for key in bad:
        assert np.array_equal(cset.comm[key], -table_matrix(COMMUTATOR_TABLE[key]))
    assert commutator_table_residual(cset) == 2.0


def test_orientation_commutes_with_c2t_triple():
    j = C2T_ORIENTATION
    assert np.array_equal(j, -j.T)
    assert np.array_equal(j @ j, -np.eye(4))
    for g in C2T_GAMMAS:
        assert np.array_equal(g.imag, np.zeros((4, 4)))
        assert np.allclose(j @ g.real, g.real @ j, atol=0)


def test_global_degeneracy_checker(rng):
    ks = rng.normal(size=(20, 3))
    h = lambda k: sum(c * g for c, g in zip(k, CP_GAMMAS))  # noqa: E731
    assert check_global_degeneracy(h, ks) < 1e-14
    cset = build_clifford_set()
    # Gamma_12 anticommutes with Gamma_1, Gamma_23 commutes with it
    good = lambda k: cset.generator(1) + cset.comm[(1, 2)]  # noqa: E731
    bad = lambda k: cset.generator(1) + cset.comm[(2, 3)]  # noqa: E731
    assert check_global_degeneracy(good, ks[:1]) == 0.0
    assert check_global_degeneracy(bad, ks[:1]) == pytest.approx(2.0)


def test_global_degeneracy_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        check_global_degeneracy(lambda k: np.triu(np.ones((4, 4))), [0.0])
