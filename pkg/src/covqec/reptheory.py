"""Irrep dimensions of U(d) and the approximate Eastin-Knill dimension bounds.

Young diagrams are tuples ``(lam_1 >= ... >= lam_d)`` normalized so that
``lam_d = 0``.  The generator used for charges is ``T = diag(1, 0, ..., 0, -1)``,
whose eigenvalues on an irrep are differences between the number of 1s and
the number of ``d``s in semistandard tableaux.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterator, Sequence

from . import special
from .bounds import BoundReport

__all__ = [
    "weyl_dimension",
    "min_dim_given_lambda1",
    "young_diagrams",
    "ssyt_weights",
    "ek_min_subsystem_dim",
    "ek_log_min_subsystem_dim",
    "ek_eps_lower_from_dims",
    "symmetric_irrep_generator_norm",
    "irrep_generator_norm",
]

EXACT_LIMIT = 10_000


def _check_diagram(lam: Sequence[int]) -> tuple:
    lam = tuple(int(v) for v in lam)
    if not lam:
        raise ValueError("empty Young diagram")
    if any(a < b for a, b in zip(lam, lam[1:])):
        raise ValueError("Young diagram parts must be non-increasing")
    if lam[-1] != 0:
        raise ValueError("last part must be 0")
    return lam


def weyl_dimension(lam: Sequence[int]) -> int:
    """``prod_{i<j} (lam_i - lam_j + j - i) / (j - i)`` as an exact integer."""
    lam = _check_diagram(lam)
    d = len(lam)
    acc = Fraction(1)
    for i in range(d):
        for j in range(i + 1, d):
            acc *= Fraction(lam[i] - lam[j] + j - i, j - i)
    if acc.denominator != 1:
        raise ArithmeticError("Weyl product is not an integer")
    return int(acc)


def min_dim_given_lambda1(lambda1: int, d: int) -> int:
    """Dimension ``C(d-1+lambda1, d-1)`` of the symmetric irrep, the smallest with first row ``lambda1``."""
    if lambda1 < 0 or d < 1:
        raise ValueError("need lambda1 >= 0 and d >= 1")
    return math.comb(d - 1 + lambda1, d - 1)


def young_diagrams(d: int, lambda1: int) -> Iterator[tuple]:
    """All normalized diagrams of length ``d`` with first row exactly ``lambda1``."""
    if d == 1:
        if lambda1 == 0:
            yield (0,)
        return

    def rec(prefix, remaining, cap):
        if remaining == 1:
            yield prefix + (0,)
            return
        for v in range(cap, -1, -1):
            yield from rec(prefix + (v,), remaining - 1, v)

    yield from rec((lambda1,), d - 1, lambda1)


def ssyt_weights(lam: Sequence[int]) -> list:
    """Weights (content vectors) of all semistandard tableaux of shape ``lam`` with entries ``1..d``."""
    lam = _check_diagram(lam)
    d = len(lam)
    shape = [v for v in lam if v > 0]
    cells = [(r, c) for r in range(len(shape)) for c in range(shape[r])]
    out = []
    fill: dict = {}

    def rec(k):
        if k == len(cells):
            w = [0] * d
            for v in fill.values():
                w[v - 1] += 1
            out.append(tuple(w))
            return
        r, c = cells[k]
        lo = 1
        if c > 0:
            lo = max(lo, fill[(r, c - 1)])
        if r > 0:
            lo = max(lo, fill[(r - 1, c)] + 1)
        for v in range(lo, d + 1):
            fill[(r, c)] = v
            rec(k + 1)
        fill.pop((r, c), None)

    rec(0)
    return out


def irrep_generator_norm(lam: Sequence[int]) -> int:
    """``||T_lam||_inf`` for ``T = diag(1, 0, ..., 0, -1)`` from the tableau weights."""
    ws = ssyt_weights(lam)
    return max(abs(w[0] - w[-1]) for w in ws)


def symmetric_irrep_generator_norm(lambda1: int, d: int) -> int:
    """``||T||_inf`` on ``Sym^lambda1(C^d)``; equals ``lambda1`` for ``d >= 2``."""
    if d < 1 or lambda1 < 0:
        raise ValueError("need d >= 1, lambda1 >= 0")
    if d == 1:
        return 0
    best = 0
    for mult in combinations_with_replacement(range(d), lambda1):
        best = max(best, abs(mult.count(0) - mult.count(d - 1)))
    return best


def _lambda_star(d_L: int, n: int, eps: float, metric: str) -> int:
    if metric == "worst":
        return math.ceil(1.0 / (2.0 * n * eps))
    if metric == "avg":
        return math.ceil(1.0 / (n * d_L * eps))
    raise ValueError("metric must be 'worst' or 'avg'")


def ek_min_subsystem_dim(d_L: int, n: int, eps: float, metric: str = "worst") -> int:
    """Smallest admissible ``max_i d_i`` for a code with infidelity ``eps``.

    ``max_i d_i >= C(d_L - 1 + ceil(1/(2 n eps)), d_L - 1)``; the ``avg``
    metric uses ``ceil(1/(n d_L eps))``.  For ``eps >= 1`` nothing is
    implied and 1 is returned.
    """
    if d_L < 2 or n < 1 or not eps > 0:
        raise ValueError("need d_L >= 2, n >= 1 and eps > 0")
    if eps >= 1:
        return 1
    lam = _lambda_star(d_L, n, eps, metric)
    return math.comb(d_L - 1 + lam, d_L - 1)


def ek_log_min_subsystem_dim(d_L: int, n: int, eps: float, metric: str = "worst") -> float:
    """Natural log of :func:`ek_min_subsystem_dim`, through log-gamma beyond the exact range."""
    if eps >= 1:
        return 0.0
    lam = _lambda_star(d_L, n, eps, metric)
    if d_L + lam <= EXACT_LIMIT:
        return math.log(math.comb(d_L - 1 + lam, d_L - 1))
    return special.log_binomial(d_L - 1 + lam, d_L - 1)


def _root_minus_one(d: int, k: int) -> float:
    """``d^(1/k) - 1`` with exact results for perfect powers."""
    r = round(d ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 1 and cand**k == d:
            return float(cand - 1)
    return math.expm1(math.log(d) / k)


def _largest_lambda(d_L: int, dmax: int) -> int:
    lo, hi = 0, 1
    while math.comb(d_L - 1 + hi, d_L - 1) <= dmax:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if math.comb(d_L - 1 + mid, d_L - 1) <= dmax:
            lo = mid
        else:
            hi = mid
    return lo


def ek_eps_lower_from_dims(d_L: int, n: int, dims: Sequence[int]) -> BoundReport:
    """Lower bound on ``eps_worst`` given the local dimensions.

    Two routes, the larger of which is reported:

    * closed form ``1/(2 n (d_L - 1)) / max_i (d_i^(1/(d_L-1)) - 1)``;
    * integer inversion: ``lambda*`` is the largest first row with
      ``C(d_L - 1 + lambda*, d_L - 1) <= max_i d_i`` and the bound is
      ``1/(2 n lambda*)`` (infinite when ``lambda* = 0``).
    """
    if d_L < 2 or n < 1 or not dims:
        raise ValueError("need d_L >= 2, n >= 1 and at least one subsystem")
    dmax = max(int(v) for v in dims)
    if dmax < 1:
        raise ValueError("dimensions must be positive")
    k = d_L - 1
    rm = _root_minus_one(dmax, k)
    closed = math.inf if rm == 0 else 1.0 / (2 * n * k * rm)
    lam = _largest_lambda(d_L, dmax)
    integer = math.inf if lam == 0 else 1.0 / (2 * n * lam)
    value = max(closed, integer)
    flags = []
    if value > 1:
        flags.append("no covariant code of this size")
    return BoundReport("eastin-knill", value, "lower-on-eps",
                       {"d_L": d_L, "n": n, "max_d": dmax, "closed_form": closed,
                        "lambda_star": lam, "integer_route": integer,
                        "asymptotic": 1.0 / (2 * n * math.log(dmax)) if dmax > 1 else math.inf},
                       flags)
