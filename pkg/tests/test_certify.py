import math

import numpy as np
import pytest

from covqec import certify as ce, codespace as cs, noise


@pytest.mark.parametrize("h,m", [(1, 20), (1, 80), (2, 15)])
def test_minorization_sharp_closed_form(h, m):
    c = ce.certify_minorization(cs.three_rotor_sharp(h, m), noise.uniform_single_erasure(3))
    assert abs(c.eps - math.sqrt(4 * h / (2 * m + 1))) < 1e-12
    assert c.nu == 0.0
    # the first subsystem carries no logical information: tr tau_1 = 1
    assert c.per_event[0]["eps"] < 1e-12


def test_reference_and_minorization_agree_up_to_sqrt2():
    for m in (20, 40, 80):
        code = cs.three_rotor_sharp(1, m)
        model = noise.uniform_single_erasure(3)
        a = ce.certify_reference(code, model).bound
        b = ce.certify_minorization(code, model).bound
        assert 1 / math.sqrt(2) - 1e-9 <= a / b <= math.sqrt(2) + 1e-9


@pytest.mark.parametrize("d_L", [2, 3])
@pytest.mark.parametrize("n", [9, 25])
def test_w_state_reference(d_L, n):
    c = ce.certify_reference(cs.w_state_code(d_L, n), noise.uniform_single_erasure(n))
    assert abs(c.nu - 1 / n) < 1e-15
    # F(rho^x, rho^0) = 1 - 1/n, so eps' = sqrt(2/n - 1/n^2)
    assert abs(c.eps - math.sqrt(2 / n - 1 / n**2)) < 1e-12
    assert c.bound <= (math.sqrt(2) + d_L) / math.sqrt(n)


@pytest.mark.xfail(strict=True, reason="sqrt(2/n) is a rounded-up form; the reference certificate is sqrt(2/n - 1/n^2)")
def test_w_state_reference_rounded_form():
    n = 25
    c = ce.certify_reference(cs.w_state_code(2, n), noise.uniform_single_erasure(n))
    assert abs(c.eps - math.sqrt(2 / n)) < 1e-12


def test_w_state_minorization_gives_rounded_form():
    n = 25
    c = ce.certify_minorization(cs.w_state_code(2, n), noise.uniform_single_erasure(n))
    assert abs(c.eps - math.sqrt(2 / n)) < 1e-12


@pytest.mark.parametrize("w", [4, 8])
def test_smooth_reference_centered(w):
    h = 2
    code = cs.three_rotor_smooth(h, w)
    c = ce.certify_reference(code, noise.uniform_single_erasure(3), code.logical_labels.index(0))
    assert c.nu == 0.0
    assert c.bound <= math.sqrt(1 - math.exp(-h * h / (4 * w * w))) + code.meta["truncation_slack"]


def test_exact_code_certificate_zero():
    c = ce.certify_reference(cs.three_qutrit(), noise.uniform_single_erasure(3))
    assert c.bound == 0.0


def test_best_reference_not_worse():
    code = cs.three_rotor_smooth(2, 4.0)
    m = noise.uniform_single_erasure(3)
    assert ce.certify_reference_best(code, m).bound <= ce.certify_reference(code, m).bound


def test_reference_index_range():
    with pytest.raises(ValueError):
        ce.certify_reference(cs.three_qutrit(), noise.uniform_single_erasure(3), 3)


def test_minorization_rejects_non_diagonal():
    code = cs.five_rotor_smooth(1, 1.5)
    with pytest.raises(ValueError, match="certify_reference"):
        ce.certify_minorization(code, noise.all_pairs_erasure(5))


def test_dicke_reference_scales_as_inverse_n():
    Ns = [100, 200, 400, 800]
    vals = [ce.certify_reference(cs.dicke_thermo(N, 2), noise.window_erasure(N, 2)).bound for N in Ns]
    slope = np.polyfit(np.log(Ns), np.log(vals), 1)[0]
    assert abs(slope + 1) < 0.05


@pytest.mark.xfail(strict=True, reason="entrywise minimum of shifted binomials loses O(N^-1/2) mass")
def test_dicke_minorization_inverse_n():
    Ns = [100, 400, 1600]
    vals = [ce.certify_minorization(cs.dicke_thermo(N, 2), noise.window_erasure(N, 2)).bound * N for N in Ns]
    assert max(vals) / min(vals) < 1.25


def test_certificate_json():
    c = ce.certify_minorization(cs.three_rotor_sharp(1, 5), noise.uniform_single_erasure(3))
    d = c.to_json()
    assert d["method"] == "minorization"
    assert math.isclose(d["bound"], c.eps + 3 * math.sqrt(c.nu))
    assert len(d["per_event"]) == 3
