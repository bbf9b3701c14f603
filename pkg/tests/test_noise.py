import math

import numpy as np
import pytest

from covqec import codespace as cs, groupcodes as gc, noise, numkit
from conftest import dense_reduced


def test_model_validation():
    with pytest.raises(ValueError):
        noise.ErasureModel(((0,), (1,)), (0.5, 0.6), 2)
    with pytest.raises(ValueError):
        noise.ErasureModel(((0,), (3,)), (0.5, 0.5), 3)
    with pytest.raises(ValueError):
        noise.ErasureModel(((),), (1.0,), 3)
    with pytest.raises(ValueError):
        noise.ErasureModel.from_json({"events": [{"alpha": [0]}]})


def test_standard_models():
    m = noise.uniform_single_erasure(4)
    assert len(m) == 4 and math.isclose(sum(m.probs), 1.0)
    p = noise.all_pairs_erasure(5)
    assert len(p) == 10
    assert np.allclose(p.charge_weights((0, 3)), 1 / 4)
    w = noise.window_erasure(6, 2)
    assert all(len(a) == 2 for a in w.events)
    assert noise.ErasureModel.from_json(w.to_json()) == w


@pytest.mark.parametrize("make,alpha", [
    (lambda: gc.phaseflip_code(gc.builtin_group("Z2"), 3), (0,)),
    (lambda: cs.five_qudit_perfect(2), (1, 3)),
    (lambda: cs.w_state_code(2, 4), (2,)),
])
def test_reduced_operator_matches_dense(make, alpha):
    code = make()
    v = noise.event_view(code, alpha)
    labels = [np.ravel_multi_index(tuple(l), [code.local_dims[i] for i in alpha]) for l in v.env_labels]
    for x in range(code.d_L):
        for y in range(code.d_L):
            full = dense_reduced(code, list(alpha), x, y)
            assert np.allclose(v.rho(x, y), full[np.ix_(labels, labels)], atol=1e-14)
            # labels absent from the code carry no weight
            mask = np.ones(full.shape[0], bool)
            mask[labels] = False
            assert np.allclose(full[mask], 0)


def test_sparse_norms_match_dense(rng):
    import scipy.sparse as sp
    A = sp.random(30, 30, density=0.05, random_state=3) + 1j * sp.random(30, 30, density=0.05, random_state=4)
    assert math.isclose(noise.sparse_trace_norm(A), numkit.trace_norm(A.toarray()), rel_tol=1e-10)
    p = numkit.random_density_matrix(3, rng)
    q = numkit.random_density_matrix(3, rng)
    P = sp.block_diag([p, np.diag([0.2, 0.3])]).tocsr()
    Q = sp.block_diag([q, np.diag([0.5, 0.0])]).tocsr()
    expect = numkit.root_fidelity(P.toarray(), Q.toarray())
    assert math.isclose(noise.sparse_root_fidelity(P, Q), expect, rel_tol=1e-10)


def test_kl_violation_values():
    for name, val in [("Z2", 0.5), ("Z3", 1 / 3), ("S3", 1 / 6)]:
        code = gc.phaseflip_code(gc.builtin_group(name), 3)
        assert math.isclose(noise.event_view(code, (0,)).kl_violation(), val, rel_tol=1e-12)
    assert noise.event_view(cs.three_qutrit(), (1,)).kl_violation() < 1e-15


def test_environment_block_state_traces():
    code = cs.w_state_code(2, 3)
    m = noise.uniform_single_erasure(3)
    phi = np.eye(2).reshape(-1) / math.sqrt(2)
    for alpha, q, blk in noise.environment_block_state(code, m, phi):
        assert math.isclose(np.trace(blk).real, q, rel_tol=1e-12)
        assert np.linalg.eigvalsh(blk).min() > -1e-12


def test_dense_budget():
    code = cs.five_qudit_perfect(5)
    with pytest.raises(noise.BudgetExceeded):
        noise.reduced_logical_operator(code, (0, 1), 0, 0, budget=10)


def test_dicke_view_is_shared():
    code = cs.dicke_thermo(60, 2)
    m = noise.window_erasure(60, 2)
    assert noise.event_view(code, m.events[0]) is noise.event_view(code, m.events[5])
