import json
import math
from functools import reduce

import numpy as np
import pytest

from covqec import codespace as cs, noise, special
from conftest import dense_columns, dense_reduced

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Z = np.diag([1.0, -1.0])


def _pauli(ops):
    return reduce(np.kron, ops)


def _ring_stabilizers():
    # graph-state generators X_i Z_{i-1} Z_{i+1} on a 5-cycle; products of two keep Z^{(x)5}
    K = []
    for i in range(5):
        ops = [I2] * 5
        ops[i] = X
        ops[(i - 1) % 5] = Z
        ops[(i + 1) % 5] = Z
        K.append(_pauli(ops))
    return [K[i] @ K[i + 1] for i in range(4)]


def test_sharp_columns():
    code = cs.three_rotor_sharp(1, 20)
    assert code.d_L == 3
    assert all(len(c) == 41 for c in code.columns)
    assert cs.verify_isometry(code) < 1e-14
    nu, delta = cs.verify_covariance(code)
    assert nu == 0.0 and delta < 1e-14


def test_sharp_total_charge():
    code = cs.three_rotor_sharp(2, 10)
    for x, col in zip(code.logical_labels, code.columns):
        assert np.all(col.labels.sum(axis=1) == x)


def test_smooth_envelope_and_truncation():
    code = cs.three_rotor_smooth(2, 4.0)
    assert code.meta["truncation_mass"] <= 1e-12
    assert math.isclose(code.meta["c_w"], special.envelope_norm(4.0), rel_tol=1e-14)
    assert cs.verify_isometry(code) < 1e-12
    nu, delta = cs.verify_covariance(code)
    assert nu == 0.0 and delta == 0.0
    with pytest.raises(ValueError):
        cs.three_rotor_smooth(2, 4.0, trunc_eps=1e-3)


def test_smooth_rho2_gaussian():
    code = cs.three_rotor_smooth(2, 3.0)
    v = noise.event_view(code, (1,))
    c_w = code.meta["c_w"]
    x = 1
    ix = code.logical_labels.index(x)
    rho = v.rho_sparse(ix, ix).diagonal().real
    labels = v.env_labels[:, 0]
    # subsystem 2 holds y - x with weight exp(-y^2/(2w^2))/c_w
    expect = np.exp(-((labels + x) ** 2) / (2 * 9.0)) / c_w
    kept = rho > 0
    # truncation removes only far-tail labels; kept entries match after renormalization
    assert np.all(expect[~kept] < 1e-12)
    ratio = rho[kept] / expect[kept]
    assert np.allclose(ratio, ratio[0], rtol=1e-10)


def test_three_qutrit_marginals():
    code = cs.three_qutrit()
    for i in range(3):
        for x in range(3):
            r = dense_reduced(code, [i], x, x)
            assert np.allclose(r, np.eye(3) / 3)


def test_three_qutrit_modular_covariance():
    _, dev = cs.verify_covariance(cs.three_qutrit())
    assert dev < 1e-12


def test_five_qubit_matches_stabilizer_projector():
    code = cs.five_qudit_perfect(2)
    assert all(len(c) == 16 for c in code.columns)
    assert all(np.allclose(np.abs(c.amps), 0.25) for c in code.columns)
    P = np.eye(32)
    for S in _ring_stabilizers():
        P = P @ (np.eye(32) + S) / 2
    V = dense_columns(code)
    for x in range(2):
        e = np.zeros(32)
        e[16 * x] = 1.0
        v = P @ e
        v /= np.linalg.norm(v)
        assert math.isclose(abs(np.vdot(v, V[:, x])), 1.0, abs_tol=1e-12)
    # code space equals the projector's range
    assert np.allclose(V @ V.conj().T, P, atol=1e-12)


@pytest.mark.parametrize("D", [2, 3, 5])
def test_five_qudit_orthonormal(D):
    code = cs.five_qudit_perfect(D)
    assert cs.verify_isometry(code) < 1e-12
    assert all(len(c) == D**4 for c in code.columns)


def test_five_qudit_cyclic():
    code = cs.five_qudit_perfect(3)
    for col in code.columns:
        t = col.terms
        rolled = {tuple(np.roll(k, 1)): a for k, a in t.items()}
        assert all(abs(rolled[k] - t[k]) < 1e-14 for k in t)


def test_five_rotor_small():
    code = cs.five_rotor_smooth(1, 1.5)
    assert cs.verify_isometry(code) < 1e-12
    for x, col in zip(code.logical_labels, code.columns):
        assert np.all(col.labels.sum(axis=1) == x)
        t = col.terms
        rolled = {tuple(np.roll(k, 1)): a for k, a in t.items()}
        assert all(abs(rolled[k] - t[k]) < 1e-13 for k in t)
    nu, delta = cs.verify_covariance(code)
    assert nu == 0.0 and delta <= 1e-12


def test_five_rotor_norm_bruteforce():
    w, x = 1.2, 1
    r = range(-12, 13)
    tot = sum(math.exp(-(j * j + k * k + l * l + m * m + (x - j - k - l - m) ** 2) / (2 * w * w))
              for j in r for k in r for l in r for m in r)
    assert math.isclose(cs.five_rotor_norm(w, x), tot, rel_tol=1e-12)


def test_five_rotor_single_site_matches_truncated_code():
    w, phi = 1.5, math.sqrt(2) / 10
    code = cs.five_rotor_smooth(1, w, phi=phi, trunc_eps=1e-9)
    v = noise.event_view(code, (0,))
    labels = list(v.env_labels[:, 0])
    for x, xp in [(0, 0), (0, 1), (-1, 1)]:
        j, vals = cs.five_rotor_single_site(w, phi, x, xp, dps=30)
        rho = v.rho(code.logical_labels.index(x), code.logical_labels.index(xp))
        for jj, val in zip(j, vals):
            a = jj
            b = jj - (x - xp)
            if a in labels and b in labels and abs(val) > 1e-8:
                assert abs(rho[labels.index(a), labels.index(b)] - val) < 1e-5


def test_dicke_small_case():
    code = cs.dicke_thermo(4, 1, levels=1)
    r, rho = code.dicke_reduced(1)
    assert np.allclose(np.diag(rho[0, 0]), [0.5, 0.5])


def test_dicke_levels_spacing():
    code = cs.dicke_thermo(100, 2, levels=2)
    assert code.levels == (0, 10)
    r, rho = code.dicke_reduced(2)
    # off-diagonal blocks vanish since the spacing exceeds twice the window
    assert np.all(rho[0, 1] == 0)
    assert math.isclose(np.trace(rho[1, 1]).real, 1.0, rel_tol=1e-12)


def test_dicke_parity():
    with pytest.raises(ValueError):
        cs.dicke_thermo(5, 1)


def test_w_state_marginal():
    n = 10
    code = cs.w_state_code(2, n)
    assert all(len(c) == n for c in code.columns)
    r = dense_reduced(cs.w_state_code(2, 4), [0], 1, 1)
    assert np.allclose(r, np.diag([0, 1 / 4, 3 / 4]))
    nu, delta = cs.verify_covariance(code)
    assert nu == 0.0 and delta < 1e-14


def test_repetition_code():
    code = cs.repetition_code(3, 4)
    assert cs.verify_isometry(code) == 0.0
    assert cs.verify_covariance(code)[1] < 1e-14


@pytest.mark.parametrize("make", [
    lambda: cs.three_rotor_sharp(1, 5),
    lambda: cs.three_rotor_smooth(2, 2.0),
    cs.three_qutrit,
    lambda: cs.five_qudit_perfect(3),
    lambda: cs.dicke_thermo(40, 1),
    lambda: cs.w_state_code(3, 5),
])
def test_json_round_trip(make):
    code = make()
    d = json.loads(json.dumps(cs.code_to_json(code)))
    back = cs.code_from_json(d)
    assert back.family == code.family and back.d_L == code.d_L
    if code.columns is not None:
        for a, b in zip(code.columns, back.columns):
            assert np.array_equal(a.labels, b.labels)
            assert np.array_equal(a.amps, b.amps)
    assert json.dumps(cs.code_to_json(back)) == json.dumps(cs.code_to_json(code))


def test_sparse_state_validation():
    with pytest.raises(ValueError):
        cs.SparseState(np.array([[0, 1], [0, 1]]), [0.6, 0.8])
    with pytest.raises(ValueError):
        cs.SparseState(np.array([[0, 1], [1, 0]]), [0.6, 0.7])
    s = cs.SparseState(np.array([[0, 1], [1, 0]]), [3.0, 4.0], normalize=True)
    assert math.isclose(np.linalg.norm(s.amps), 1.0)
