import itertools
import json

import numpy as np
import pytest

from covqec import codespace as cs, groupcodes as gc


@pytest.mark.parametrize("name,order", [("Z2", 2), ("Z5", 5), ("S3", 6), ("D4", 8), ("Q8", 8)])
def test_builtin_groups(name, order):
    G = gc.builtin_group(name)
    assert G.order == order
    for g in range(order):
        assert G.mul(g, G.inv(g)) == 0
        assert G.mul(0, g) == g == G.mul(g, 0)


def test_nonabelian():
    assert not gc.builtin_group("S3").is_abelian()
    assert not gc.builtin_group("Q8").is_abelian()
    assert gc.builtin_group("Z4").is_abelian()


def test_bad_table_rejected():
    with pytest.raises(ValueError):
        gc.FiniteGroup([[0, 1], [0, 1]])


def test_cayley_json():
    G = gc.builtin_group("D4")
    H = gc.FiniteGroup.from_json(json.loads(json.dumps(G.to_json())))
    assert np.array_equal(np.asarray(H.table), np.asarray(G.table))


def test_multipliers():
    G = gc.builtin_group("S3")
    assert np.array_equal(gc.multiplier(G, 0, "left"), np.arange(6))
    for g, h in itertools.product(range(6), repeat=2):
        L, R = gc.multiplier(G, g, "left"), gc.multiplier(G, h, "right")
        assert np.array_equal(L[R], R[L])
        Linv = gc.multiplier(G, G.inv(g), "left")
        assert np.array_equal(L[Linv], np.arange(6))


def test_bitflip_is_repetition():
    code = gc.bitflip_code(gc.builtin_group("Z2"), 3)
    rep = cs.repetition_code(2, 3)
    for a, b in zip(code.columns, rep.columns):
        assert a.terms == b.terms


def test_phaseflip_terms():
    code = gc.phaseflip_code(gc.builtin_group("Z2"), 3)
    assert len(code.columns[0]) == 4
    assert np.allclose(np.abs(code.columns[0].amps), 0.5)
    assert cs.verify_isometry(code) < 1e-15


def test_code_422_shape():
    code = gc.code_422(gc.builtin_group("S3"))
    assert code.d_L == 36 and code.n_sub == 4
    assert cs.verify_isometry(code) < 1e-14


def test_code_422_z2_is_standard():
    # [[4,2,2]]: four codewords, each an equal superposition of two even-weight strings
    code = gc.code_422(gc.builtin_group("Z2"))
    supports = [frozenset(c.terms) for c in code.columns]
    assert all(len(s) == 2 for s in supports)
    assert all(sum(k) % 2 == 0 for s in supports for k in s)
    assert len(set().union(*supports)) == 8


@pytest.mark.parametrize("name", ["Z2", "Z3", "S3"])
def test_code_422_covariance(name):
    G = gc.builtin_group(name)
    code = gc.code_422(G)
    for l in range(G.order):
        Lm, Rm = gc.multiplier(G, l, "left"), gc.multiplier(G, l, "right")
        r1 = gc.verify_transversal_logical(code, [Lm, None, Lm, None], lambda lg: (G.mul(l, lg[0]), lg[1]))
        r2 = gc.verify_transversal_logical(code, [None, None, Rm, Rm], lambda lg: (lg[0], G.mul(lg[1], l)))
        assert r1 == 0 and r2 == 0
    assert gc.verify_transversal_logical(code, [None] * 4, lambda lg: lg) == 0


def test_422_stab_transversal():
    G = gc.builtin_group("S3")
    code = gc.code_422_stabilized(G)
    for l in range(G.order):
        R = gc.multiplier(G, l, "right")
        assert gc.verify_transversal_logical(code, [None, R, R, None], lambda lg: (G.mul(lg[0], l), lg[1])) == 0


def test_code_2m_small_cases():
    Z2 = gc.builtin_group("Z2")
    a, b = gc.code_2m(Z2, 2), gc.code_422_stabilized(Z2)
    assert [c.terms for c in a.columns] == [c.terms for c in b.columns]
    assert gc.stabilizer_residual(gc.code_2m(gc.builtin_group("Z3"), 2)) == 0


def test_code_2m_parity():
    G = gc.builtin_group("S3")
    code = gc.code_2m(G, 3)
    for col in code.columns[:20]:
        for ket in col.labels:
            acc = 0
            for j, h in enumerate(ket):
                acc = G.mul(acc, G.inv(h) if j % 2 == 0 else h)
            assert acc == 0


@pytest.mark.parametrize("name", ["Z2", "Z3", "S3"])
@pytest.mark.parametrize("m", [2, 3])
def test_code_2m_single_erasure(name, m):
    code = gc.code_2m(gc.builtin_group(name), m)
    assert code.d_L == gc.builtin_group(name).order ** (2 * m - 2)
    for i in range(2 * m):
        assert gc.verify_kl_erasure(code, (i,)) < 1e-12


@pytest.mark.parametrize("name", ["Z2", "Z3", "S3"])
def test_kl_checks(name):
    G = gc.builtin_group(name)
    code = gc.code_422(G)
    assert all(gc.verify_kl_erasure(code, (i,)) < 1e-12 for i in range(4))
    assert gc.verify_kl_erasure(gc.phaseflip_code(G, 3), (0,)) > 0.1


def test_five_qudit_pairs_kl():
    code = cs.five_qudit_perfect(2)
    for a in itertools.combinations(range(5), 2):
        assert gc.verify_kl_erasure(code, a) < 1e-12
