import math

import cvxpy as cp
import numpy as np
import pytest

from covqec import codespace as cs, fidelity as fi, groupcodes as gc, noise, numkit
from conftest import dense_columns


def _omega_dense(code, alpha):
    """Complementary output on reference (x) erased sites for the maximally entangled input."""
    V = dense_columns(code)
    d = code.d_L
    dims = list(code.local_dims)
    rest = [i for i in range(code.n_sub) if i not in alpha]
    DA = int(np.prod([dims[i] for i in alpha]))
    psi = np.zeros((d, DA, V.shape[0] // DA), dtype=complex)
    for x in range(d):
        t = np.transpose(V[:, x].reshape(dims), list(alpha) + rest)
        psi[x] = t.reshape(DA, -1) / math.sqrt(d)
    mat = psi.reshape(d * DA, -1)
    return mat @ mat.conj().T, DA


def _sdp_constant_fidelity(omega, sigma, D):
    n = omega.shape[0]
    Xv = cp.Variable((n, n), complex=True)
    zeta = cp.Variable((D, D), hermitian=True)
    B = cp.kron(sigma, zeta)
    M = cp.bmat([[omega, Xv], [Xv.H, B]])
    cons = [0.5 * (M + M.H) >> 0, zeta >> 0, cp.real(cp.trace(zeta)) == 1]
    prob = cp.Problem(cp.Maximize(cp.real(cp.trace(Xv))), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


def _random_code(rng):
    # random isometry C^2 -> (C^2)^3 with no symmetry
    A = rng.normal(size=(8, 2)) + 1j * rng.normal(size=(8, 2))
    Q, _ = np.linalg.qr(A)
    cols = []
    for x in range(2):
        lab = np.array(np.unravel_index(np.arange(8), (2, 2, 2))).T
        cols.append(cs.SparseState(lab, Q[:, x]))
    return cs.CovariantCode("random", {}, tuple(cols), None, 3, (2, 2, 2))


def test_combine_per_erasure():
    assert math.isclose(fi.combine_per_erasure([(0.5, 1.0), (0.5, 0.0)]), math.sqrt(0.5))
    assert fi.combine_per_erasure([(1.0, 0.3)]) == 0.3


@pytest.mark.parametrize("which", ["w", "phase", "random"])
def test_constant_channel_against_sdp(which, rng):
    code = {"w": lambda: cs.w_state_code(2, 3),
            "phase": lambda: gc.phaseflip_code(gc.builtin_group("Z2"), 3),
            "random": lambda: _random_code(rng)}[which]()
    m = noise.uniform_single_erasure(3)
    per = fi.fe_per_event(code, m)
    for alpha, q, f, gap in per:
        omega, DA = _omega_dense(code, list(alpha))
        ref = _sdp_constant_fidelity(omega, np.eye(code.d_L) / code.d_L, DA)
        # the interior-point solver loses accuracy on the rank-deficient W-state output
        assert abs(f - ref) < (1e-4 if which == "w" else 1e-6)
        assert gap <= 1e-6


@pytest.mark.parametrize("d,n", [(2, 3), (2, 10), (3, 7)])
def test_w_state_closed_form(d, n):
    # omega = |Phi><Phi|/n + (1 - 1/n) I/d (x) |bot><bot|; zeta = diag(a,..,a,b) gives
    # max F = sqrt((n - 1 + 1/d^2)/n) by Cauchy-Schwarz
    per = fi.fe_per_event(cs.w_state_code(d, n), noise.uniform_single_erasure(n))
    for _, _, f, _ in per:
        assert abs(f - math.sqrt((n - 1 + 1 / d**2) / n)) < 1e-9


def test_ascent_matches_sdp_random_state(rng):
    r, D = 2, 3
    omega = numkit.random_density_matrix(r * D, rng)
    sigma = numkit.partial_trace(omega, (r, D), [0])
    res = fi.max_constant_fidelity(omega, sigma, D, tol=1e-13)
    ref = _sdp_constant_fidelity(omega, sigma, D)
    assert abs(res.value - ref) < 1e-6
    assert res.value <= ref + 2e-5 and res.value + res.gap >= ref - 2e-5


def test_exact_codes_have_unit_fidelity():
    for code, m in [(cs.three_qutrit(), noise.uniform_single_erasure(3)),
                    (cs.five_qudit_perfect(3), noise.all_pairs_erasure(5)),
                    (gc.code_422(gc.builtin_group("Z3")), noise.uniform_single_erasure(4))]:
        est = fi.fe_via_constant_channel(code, m)
        assert est.kind == "exact"
        assert abs(est.value - 1.0) < 1e-9


def test_repetition_grid_oracle():
    # the environment holds a full copy: best constant channel gives 1/sqrt(d_L)
    for d in (2, 3):
        est = fi.fe_via_constant_channel(cs.repetition_code(d, 3), noise.uniform_single_erasure(3))
        assert math.isclose(est.value, 1 / math.sqrt(d), rel_tol=1e-9)
    # brute grid over zeta = diag(p, 1-p): F = sum_x sqrt(p_x)/2 maximal at p = 1/2
    grid = max(0.5 * (math.sqrt(p) + math.sqrt(1 - p)) for p in np.linspace(0, 1, 2001))
    assert math.isclose(grid, 1 / math.sqrt(2), rel_tol=1e-9)


def test_w_state_fidelity_above_certificate():
    est = fi.fe_via_constant_channel(cs.w_state_code(2, 50), noise.uniform_single_erasure(50))
    assert est.value >= math.sqrt(1 - (math.sqrt(2) + 2) ** 2 / 50)
    assert est.kind in ("exact", "certified-lower")


def test_petz_below_optimal():
    for code in (cs.w_state_code(2, 5), gc.phaseflip_code(gc.builtin_group("Z3"), 3), cs.three_rotor_sharp(1, 6)):
        m = noise.uniform_single_erasure(code.n_sub)
        opt = fi.fe_via_constant_channel(code, m).value
        petz = fi.petz_recovery_fe(code, m).value
        assert petz <= opt + 1e-9
        # transpose recovery is near-optimal: 1 - f_petz <= 2 (1 - f_opt) up to squaring
        assert 1 - petz**2 <= 2 * (1 - opt**2) + 1e-9


def test_petz_exact_code():
    assert fi.petz_recovery_fe(cs.three_qutrit(), noise.uniform_single_erasure(3)).value == 1.0


def test_heuristic_deterministic_and_above_average():
    code = cs.w_state_code(2, 6)
    m = noise.uniform_single_erasure(6)
    a = fi.worst_case_eps_heuristic(code, m, restarts=3, seed=7)
    b = fi.worst_case_eps_heuristic(code, m, restarts=3, seed=7)
    assert a.value == b.value
    assert a.kind == "heuristic"
    fe = fi.fe_via_constant_channel(code, m).value
    assert a.value >= math.sqrt(1 - fe * fe) - 1e-9


def test_heuristic_skips_over_budget():
    code = cs.five_rotor_smooth(1, 1.5)
    r = fi.worst_case_eps_heuristic(code, noise.all_pairs_erasure(5), restarts=1, budget=50)
    assert math.isnan(r.value) and r.method == "skipped: budget"


def test_classical_fast_path_matches_general():
    code = cs.three_rotor_sharp(1, 4)
    m = noise.uniform_single_erasure(3)
    fast = fi.fe_via_constant_channel(code, m).value
    general = []
    for alpha, q in m:
        v = noise.event_view(code, alpha)
        G = v.gram().toarray()
        sig = np.eye(3) / 3
        res = fi.max_constant_fidelity(G / 3, sig, v.D, tol=1e-13)
        general.append((q, res.value))
    assert abs(fast - fi.combine_per_erasure(general)) < 1e-7
