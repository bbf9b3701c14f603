"""Scalar special functions for rotor envelopes and Dicke-state marginals.

Theta functions follow the DLMF convention
``theta3(z, q) = sum_y q^(y^2) exp(2 i z y)``, restricted here to a purely
imaginary shift ``z = i s`` with ``s >= 0`` so that every value is real.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, logsumexp

TERM_CUTOFF = 1e-18

__all__ = [
    "theta3",
    "log_theta3",
    "theta2",
    "envelope_norm",
    "gaussian_tail",
    "gaussian_tail_sum",
    "log_binomial",
    "binomial",
    "dicke_coefficient",
    "dicke_marginal",
    "dicke_fidelity",
    "dicke_fidelity_constant",
]


def _shift(z) -> float:
    z = complex(z)
    if z.real != 0.0:
        raise ValueError("theta shift must be purely imaginary")
    if z.imag < 0:
        raise ValueError("theta shift must have non-negative imaginary part")
    return z.imag


def _check_nome(q: float) -> float:
    q = float(q)
    if not 0.0 < q < 1.0:
        raise ValueError(f"nome must lie in (0, 1), got {q}")
    return q


def _lattice_logsum(q: float, s: float, offset: float) -> float:
    # log of term y: (y+offset)^2 ln q + 2 s (y+offset); peak at s/ln(1/q)
    a = -math.log(q)
    peak = s / a
    half = math.sqrt(math.log(1.0 / TERM_CUTOFF) / a) + 2.0
    lo = math.floor(-peak - half - offset) - 1
    hi = math.ceil(peak + half - offset) + 1
    y = np.arange(lo, hi + 1, dtype=float) + offset
    lt = -a * y * y
    # cosh(2 s y) split into both exponentials
    logs = np.concatenate([lt + 2 * s * y, lt - 2 * s * y]) - math.log(2.0)
    return float(logsumexp(np.sort(logs)))


def log_theta3(z, q: float) -> float:
    """Natural log of :func:`theta3`, safe when the value overflows a double."""
    return _lattice_logsum(_check_nome(q), _shift(z), 0.0)


def theta3(z, q: float) -> float:
    """Jacobi ``theta3(z, q)`` for purely imaginary ``z``.

    Parameters
    ----------
    z : complex
        Shift, ``z = i s`` with ``s >= 0``.
    q : float
        Nome in ``(0, 1)``.

    Raises
    ------
    ValueError
        If ``q`` is outside ``(0, 1)`` or ``z`` is not purely imaginary.
    """
    lv = log_theta3(z, q)
    return math.exp(lv) if lv < 709.0 else math.inf


def theta2(q: float) -> float:
    """``theta2(0, q) = sum_y q^((y + 1/2)^2)``."""
    return math.exp(_lattice_logsum(_check_nome(q), 0.0, 0.5))


def envelope_norm(w: float) -> float:
    """``c_w = theta3(0, exp(-1/(2 w^2)))``, the Gaussian envelope normalization."""
    if w <= 0:
        raise ValueError("envelope width must be positive")
    return theta3(0.0, math.exp(-1.0 / (2.0 * w * w)))


def gaussian_tail(W: float, x: float, w: float) -> float:
    """Upper bound ``2 w^2/(W-|x|) exp(-(W-|x|)^2/(2 w^2))`` on a Gaussian lattice tail.

    Bounds ``sum_{|y| > W} exp(-(y +- x)^2 / (2 w^2))`` over integers ``y``.
    """
    gap = W - abs(x)
    if gap <= 0:
        raise ValueError("gaussian_tail requires W > |x|")
    return 2.0 * w * w / gap * math.exp(-gap * gap / (2.0 * w * w))


def gaussian_tail_sum(W: float, x: float, w: float) -> float:
    """Direct value of ``sum_{|y| > W} exp(-(y + x)^2 / (2 w^2))``."""
    reach = abs(x) + w * math.sqrt(2 * math.log(1.0 / TERM_CUTOFF)) + 2
    hi = int(math.ceil(max(W, 0) + reach)) + 1
    y = np.arange(math.floor(W) + 1, hi + 1, dtype=float)
    y = y[y > W]
    vals = np.exp(-((y + x) ** 2) / (2 * w * w)) + np.exp(-((-y + x) ** 2) / (2 * w * w))
    return float(np.sort(vals).sum())


def log_binomial(n: int, k: int) -> float:
    """``ln C(n, k)`` through log-gamma; ``-inf`` outside ``0 <= k <= n``."""
    if k < 0 or k > n or n < 0:
        return -math.inf
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def binomial(n: int, k: int) -> int:
    """Exact integer binomial; zero outside the valid range."""
    if k < 0 or k > n or n < 0:
        return 0
    return math.comb(n, k)


def _half(num: int) -> int | None:
    if num % 2:
        return None
    return num // 2


def dicke_coefficient(r: int, d: int, m: int, N: int) -> float:
    """Marginal weight ``K_{r,d,m}^N`` of a Dicke state on ``d`` sites.

    ``K = C(d, d/2 + r/2) C(N-d, (N-d)/2 + (m-r)/2) / C(N, N/2 + m/2)`` is the
    probability that ``d`` chosen spins carry magnetization ``r`` given total
    magnetization ``m`` over ``N`` spins.  Combinations that break parity or
    fall outside the binomial ranges give 0.
    """
    if d <= 0 or N <= 0 or d > N:
        raise ValueError("need 0 < d <= N")
    a = _half(d + r)
    b = _half(N - d + m - r)
    c = _half(N + m)
    if a is None or b is None or c is None:
        return 0.0
    la = log_binomial(d, a)
    lb = log_binomial(N - d, b)
    lc = log_binomial(N, c)
    if not (np.isfinite(la) and np.isfinite(lb) and np.isfinite(lc)):
        return 0.0
    return float(math.exp(la + lb - lc))


def dicke_marginal(d: int, m: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Magnetizations ``r = -d, -d+2, ..., d`` and their weights ``K_{r,d,m}^N``."""
    r = np.arange(-d, d + 1, 2)
    k = np.array([dicke_coefficient(int(ri), d, m, N) for ri in r])
    return r, k


def dicke_fidelity(d: int, m: int, N: int, m_ref: int = 0) -> float:
    """Bhattacharyya overlap of two Dicke marginals on ``d`` sites."""
    _, k1 = dicke_marginal(d, m, N)
    _, k0 = dicke_marginal(d, m_ref, N)
    return float(np.sqrt(k1 * k0).sum())


def dicke_fidelity_constant(d: int, m: int) -> float:
    """Second-order constant ``D_{d,m} = C_{d,m}/4 + d^2/8``.

    ``C_{d,m} = 2 d^3 + d^2 (2|m| - 1) + d (1 + m^2 + 2|m|)``; the marginal
    fidelity obeys ``F >= 1 - D_{d,m}/N^2 + O(N^-3)``.
    """
    am = abs(m)
    c = 2 * d**3 + d**2 * (2 * am - 1) + d * (1 + m * m + 2 * am)
    return c / 4.0 + d * d / 8.0
