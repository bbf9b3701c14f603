import math

import pytest
from hypothesis import given, settings, strategies as st

from covqec import reptheory as rt


def test_weyl_known_dimensions():
    assert rt.weyl_dimension((1, 0)) == 2
    assert rt.weyl_dimension((4, 0)) == 5  # spin 2
    assert rt.weyl_dimension((2, 1, 0)) == 8  # adjoint of SU(3)
    assert rt.weyl_dimension((1, 1, 0)) == 3
    assert rt.weyl_dimension((0, 0, 0, 0)) == 1


def test_bad_diagrams():
    with pytest.raises(ValueError):
        rt.weyl_dimension((0, 1))
    with pytest.raises(ValueError):
        rt.weyl_dimension((2, 1))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.integers(0, 4))
def test_symmetric_irrep_is_smallest(d, l1):
    dims = [rt.weyl_dimension(lam) for lam in rt.young_diagrams(d, l1)]
    assert min(dims) == rt.min_dim_given_lambda1(l1, d)
    assert rt.weyl_dimension((l1,) + (0,) * (d - 1)) == math.comb(d - 1 + l1, d - 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 3), st.integers(0, 3))
def test_tableau_count_matches_weyl(d, l1):
    for lam in rt.young_diagrams(d, l1):
        assert len(rt.ssyt_weights(lam)) == rt.weyl_dimension(lam)


def test_generator_norm_is_first_row():
    for d in (2, 3, 4):
        for l1 in range(5):
            assert rt.symmetric_irrep_generator_norm(l1, d) == l1
            for lam in rt.young_diagrams(d, l1):
                assert rt.irrep_generator_norm(lam) <= l1


def test_young_diagram_count():
    # partitions of width <= 3 into at most 2 further rows
    assert len(list(rt.young_diagrams(3, 3))) == 4
    assert list(rt.young_diagrams(1, 0)) == [(0,)]


@pytest.mark.parametrize("d", [2, 3, 5, 17])
@pytest.mark.parametrize("n", [1, 3, 10])
def test_qubit_logical_bound(d, n):
    r = rt.ek_eps_lower_from_dims(2, n, [d] * 3)
    assert r.value == 1 / (2 * n * (d - 1))


@pytest.mark.parametrize("d_L", [2, 3, 10])
def test_local_equals_logical(d_L):
    assert rt.ek_eps_lower_from_dims(d_L, 4, [d_L] * 4).value == 1 / 8


def test_large_scenario():
    ln_d = rt.ek_log_min_subsystem_dim(1000, 10, 1e-3)
    target = 65 * math.log(10)
    assert target / 2 <= ln_d <= 2 * target
    # through exact integers as well
    assert math.isclose(ln_d, math.log(rt.ek_min_subsystem_dim(1000, 10, 1e-3)), rel_tol=1e-12)


def test_vacuous_regime():
    assert rt.ek_min_subsystem_dim(4, 3, 1.5) == 1
    assert rt.ek_log_min_subsystem_dim(4, 3, 1.0) == 0.0


def test_min_dim_inverts_dims_bound():
    # dimensions below the minimum force larger eps
    d_L, n, eps = 3, 2, 0.05
    dmin = rt.ek_min_subsystem_dim(d_L, n, eps)
    assert rt.ek_eps_lower_from_dims(d_L, n, [dmin - 1]).value > eps
