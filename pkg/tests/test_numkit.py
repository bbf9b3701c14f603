import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from covqec import numkit


def test_partial_trace_product_state(rng):
    a = numkit.random_density_matrix(2, rng)
    b = numkit.random_density_matrix(3, rng)
    c = numkit.random_density_matrix(2, rng)
    abc = np.kron(np.kron(a, b), c)
    assert np.allclose(numkit.partial_trace(abc, (2, 3, 2), [1]), b)
    assert np.allclose(numkit.partial_trace(abc, (2, 3, 2), [0, 2]), np.kron(a, c))
    # kept subsystems come out in increasing order
    assert np.allclose(numkit.partial_trace(abc, (2, 3, 2), [2, 0]), np.kron(a, c))


def test_partial_trace_matches_loop(rng):
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    expect = np.zeros((3, 3), dtype=complex)
    for i in range(2):
        expect += m[i * 3:(i + 1) * 3, i * 3:(i + 1) * 3]
    assert np.allclose(numkit.partial_trace(m, (2, 3), [1]), expect)


def test_partial_trace_rejects_bad_shape():
    with pytest.raises(ValueError):
        numkit.partial_trace(np.eye(4), (2, 3), [0])


def test_kron_budget():
    with pytest.raises(OverflowError):
        numkit.kron(np.eye(64), np.eye(64), max_entries=1000)


def test_trace_norm_singular_values(rng):
    m = rng.normal(size=(5, 4)) + 1j * rng.normal(size=(5, 4))
    assert np.isclose(numkit.trace_norm(m), np.linalg.svd(m, compute_uv=False).sum())
    assert np.isclose(numkit.operator_norm(m), np.linalg.svd(m, compute_uv=False).max())


def test_fidelity_pure_states(rng):
    u = rng.normal(size=3) + 1j * rng.normal(size=3)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    F = numkit.fidelity(np.outer(u, u.conj()), np.outer(v, v.conj()))
    assert np.isclose(F, abs(np.vdot(u, v)))


def test_fidelity_commuting_is_bhattacharyya():
    p = np.array([0.5, 0.3, 0.2])
    q = np.array([0.1, 0.6, 0.3])
    assert np.isclose(numkit.fidelity(np.diag(p), np.diag(q)), np.sqrt(p * q).sum())


def test_root_fidelity_unnormalized_scaling(rng):
    a = numkit.random_density_matrix(3, rng)
    b = numkit.random_density_matrix(3, rng)
    assert np.isclose(numkit.root_fidelity(4 * a, 9 * b), 6 * numkit.fidelity(a, b))


def test_purified_distance():
    rho = np.diag([1.0, 0.0])
    sig = np.diag([0.5, 0.5])
    assert np.isclose(numkit.purified_distance(rho, sig), np.sqrt(0.5))
    assert numkit.infidelity_from_f(1.0) == 0.0


def test_non_psd_rejected():
    with pytest.raises(ValueError):
        numkit.psd_sqrt(np.diag([1.0, -0.1]))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10_000))
def test_fidelity_properties(d, s):
    g = np.random.default_rng(s)
    a = numkit.random_density_matrix(d, g)
    b = numkit.random_density_matrix(d, g)
    u = numkit.random_unitary(d, g)
    F = numkit.fidelity(a, b)
    assert 0 <= F <= 1 + 1e-12
    assert np.isclose(F, numkit.fidelity(b, a), atol=1e-9)
    assert np.isclose(F, numkit.fidelity(u @ a @ u.conj().T, u @ b @ u.conj().T), atol=1e-9)
    # Fuchs-van de Graaf
    T = numkit.trace_distance(a, b)
    assert 1 - F <= T + 1e-9
    assert T <= np.sqrt(1 - F * F) + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_trace_norm_triangle(s):
    g = np.random.default_rng(s)
    a = g.normal(size=(3, 3)) + 1j * g.normal(size=(3, 3))
    b = g.normal(size=(3, 3)) + 1j * g.normal(size=(3, 3))
    assert numkit.trace_norm(a + b) <= numkit.trace_norm(a) + numkit.trace_norm(b) + 1e-10
