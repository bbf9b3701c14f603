"""Lower bounds on the infidelity of covariant codes under erasure.

Charges on an erasure event are split as ``T_alpha = sum_{i in alpha} T_i / c_i``
where ``c_i`` counts the events that contain subsystem ``i``.  This keeps
``sum_alpha T_alpha = T_A`` for overlapping events (all pairs, sliding
windows) and reduces to ``T_alpha = T_i`` for single erasures.

Codes with a ``Z_M`` charge (``modulus`` set) have no Hermitian generator, so
the bounds of this module do not apply to them; they return zero-valued
reports flagged ``"not-applicable"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.sparse as sp

from . import numkit
from .codespace import CovariantCode, verify_covariance
from .noise import ErasureModel, event_view, sparse_trace_norm, uniform_single_erasure

__all__ = [
    "BoundReport",
    "median_eigenvalue",
    "event_charge_range",
    "thm1_worst_lower",
    "thm2_bounds",
    "exact_eta",
    "charge_tail_eta",
    "correlation_bound_check",
    "correlation_bound_aggregate",
    "environment_observable",
    "environ_distinguishability_lower",
    "max_environ_distinguishability",
]


@dataclass
class BoundReport:
    """A named bound on ``eps`` together with the numbers that produced it."""

    name: str
    value: float
    direction: str
    inputs: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if self.direction not in ("lower-on-eps", "upper-on-eps"):
            raise ValueError(f"bad direction {self.direction!r}")
        if not self.value >= 0:
            raise ValueError("bound value must be non-negative")

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "direction": self.direction,
                "inputs": {k: _num(v) for k, v in self.inputs.items()}, "flags": list(self.flags)}


def _num(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_num(u) for u in v]
    return v


def _na(name: str, why: str) -> BoundReport:
    return BoundReport(name, 0.0, "lower-on-eps", {}, ["not-applicable", why])


def _u1_charge(code: CovariantCode):
    ch = code.charge
    if ch is None:
        return None
    if ch.modulus is not None:
        return None
    return np.asarray(ch.logical, dtype=float)


def median_eigenvalue(T) -> float:
    """Lower median of the eigenvalues of a Hermitian ``T`` (the ``ceil(d/2)``-th smallest)."""
    T = np.asarray(T)
    ev = np.sort(np.linalg.eigvalsh(T) if T.ndim == 2 else T.astype(float))
    return float(ev[(len(ev) + 1) // 2 - 1])


def _weights(model: ErasureModel, alpha) -> np.ndarray:
    return model.charge_weights(alpha)


def _event_charges(code, model, alpha) -> np.ndarray:
    return event_view(code, alpha).env_charge(_weights(model, alpha))


def event_charge_range(code: CovariantCode, model: ErasureModel, alpha) -> tuple[float, float]:
    """``(min, max)`` of ``T_alpha`` over labels that occur in the code."""
    t = _event_charges(code, model, alpha)
    return float(t.min()), float(t.max())


def thm1_worst_lower(code: CovariantCode, model: ErasureModel,
                     covariance: tuple[float, float] | None = None) -> BoundReport:
    """``eps_worst >= (Delta T_L / 2) / max_alpha (Delta T_alpha / q_alpha)``.

    Requires exact covariance.  ``Delta T_alpha`` is the spread of ``T_alpha``
    over the environment labels that actually occur.
    """
    tL = _u1_charge(code)
    if tL is None:
        return _na("thm1", "no U(1) charge")
    nu, delta = covariance if covariance is not None else verify_covariance(code)
    if delta > 1e-10:
        return _na("thm1", f"approximate covariance delta={delta:.3e}")
    dTL = float(tL.max() - tL.min())
    ratios = []
    for alpha, q in model:
        lo, hi = event_charge_range(code, model, alpha)
        ratios.append((hi - lo) / q)
    den = max(ratios)
    value = 0.0 if den <= 0 else 0.5 * dTL / den
    return BoundReport("thm1", value, "lower-on-eps",
                       {"Delta_T_L": dTL, "max_Delta_T_alpha_over_q": den, "delta": delta,
                        "nu": nu, "n": code.n_sub})


def _resolve_cutoffs(code, model, cutoffs):
    out = []
    for alpha, q in model:
        if cutoffs is None:
            lo, hi = event_charge_range(code, model, alpha)
        elif callable(cutoffs):
            lo, hi = cutoffs(alpha)
        elif isinstance(cutoffs, Mapping):
            lo, hi = cutoffs[tuple(alpha)]
        else:
            lo, hi = cutoffs
        if hi < lo:
            raise ValueError(f"cutoff t+ < t- for event {alpha}")
        out.append((float(lo), float(hi)))
    return out


def _tail_matrix(view, tchg, lo, hi, absolute=False):
    """``y[x, x'] = tr(O rho^{x,x'})`` for the diagonal ``O`` = shifted charge outside [lo, hi]."""
    mid = 0.5 * (lo + hi)
    outside = (tchg < lo) | (tchg > hi)
    o = np.where(outside, np.abs(tchg) if absolute else tchg - mid, 0.0)
    d = view.d_L
    y = np.zeros((d, d), dtype=complex)
    if not np.any(o):
        return y
    for x in range(d):
        for xp in range(d):
            y[x, xp] = (view.rho_sparse(x, xp).diagonal() * o).sum()
    return y


def exact_eta(code: CovariantCode, model: ErasureModel, cutoffs=None) -> float:
    """Smallest ``eta`` for which the charge-cutoff condition holds for every logical state.

    The functional ``sigma -> tr(sum_alpha (T_alpha - t_alpha) Pi_alpha^perp
    E(sigma))`` equals ``tr(sigma Y^T)`` with
    ``Y[x, x'] = sum_alpha tr((T_alpha - t_alpha) Pi_alpha^perp rho_alpha^{x,x'})``,
    so its supremum over states is the operator norm of ``Y``.
    """
    return _eta_resolved(code, model, _resolve_cutoffs(code, model, cutoffs))


def _eta_resolved(code, model, cut) -> float:
    Y = np.zeros((code.d_L, code.d_L), dtype=complex)
    for (alpha, _), (lo, hi) in zip(model, cut):
        view = event_view(code, alpha)
        Y += _tail_matrix(view, _event_charges(code, model, alpha), lo, hi)
    if not np.any(Y):
        return 0.0
    return float(numkit.operator_norm(Y))


def charge_tail_eta(code: CovariantCode, t: float, model: ErasureModel | None = None) -> float:
    """Charge-tail estimate ``eta = |K| max_alpha sup_sigma sum_{|t'|>t} |t'| <t'| rho_alpha(sigma) |t'>``.

    ``|K|`` is the number of erasure events (default: single erasures).  The
    supremum over logical states is the largest eigenvalue of the PSD matrix
    ``tr(|T_alpha| Pi^perp rho_alpha^{x,x'})``, so it covers basis states,
    uniform mixtures and all superpositions.
    """
    if t < 0:
        raise ValueError("cutoff must be non-negative")
    if _u1_charge(code) is None:
        raise ValueError("charge_tail_eta needs a U(1) charge")
    model = model or uniform_single_erasure(code.n_sub)
    best = 0.0
    for alpha, _ in model:
        view = event_view(code, alpha)
        y = _tail_matrix(view, _event_charges(code, model, alpha), -t, t, absolute=True)
        if np.any(y):
            best = max(best, float(np.linalg.eigvalsh(0.5 * (y + y.conj().T))[-1]))
    return len(model) * best


def thm2_bounds(code: CovariantCode, model: ErasureModel, cutoffs=None,
                covariance: tuple[float, float] | None = None) -> tuple[BoundReport, BoundReport]:
    """Average- and worst-case lower bounds with charge cutoffs ``t_alpha^-, t_alpha^+``.

    Parameters
    ----------
    cutoffs : None, (lo, hi), mapping alpha -> (lo, hi), or callable
        ``None`` uses the full stored charge range of every event.

    Returns
    -------
    (avg, worst) : BoundReport
        ``avg`` bounds ``eps_e`` and the event average; its inputs also carry
        the alternative numerator ``||T_L - tr(T_L)/d_L||_1 / (2 d_L)`` and the
        bound obtained from it.
    """
    tL = _u1_charge(code)
    if tL is None:
        return _na("thm2-avg", "no U(1) charge"), _na("thm2-worst", "no U(1) charge")
    nu, delta = covariance if covariance is not None else verify_covariance(code)
    cut = _resolve_cutoffs(code, model, cutoffs)
    eta = _eta_resolved(code, model, cut)
    den = max((hi - lo) / q for (lo, hi), (_, q) in zip(cut, model))
    d = len(tL)
    mu = median_eigenvalue(tL)
    n_avg = float(np.abs(tL - mu).sum()) / d
    n_alt = float(np.abs(tL - tL.mean()).sum()) / (2 * d)
    n_worst = 0.5 * float(tL.max() - tL.min())
    inputs = {"Delta_T_L": 2 * n_worst, "mu": mu, "delta": delta, "eta": eta, "nu": nu,
              "max_Delta_T_alpha_over_q": den, "n": code.n_sub,
              "cutoffs": [list(c) for c in cut]}

    def make(name, num):
        flags = []
        raw = num - delta - eta
        if raw <= 0 or den <= 0:
            flags.append("clamped-zero")
            val = 0.0
        else:
            val = raw / den
        return val, flags

    v_avg, f_avg = make("avg", n_avg)
    v_alt, _ = make("alt", n_alt)
    v_w, f_w = make("worst", n_worst)
    avg = BoundReport("thm2-avg", v_avg, "lower-on-eps",
                      {**inputs, "numerator": n_avg, "alt_numerator": n_alt, "alt_value": v_alt}, f_avg)
    worst = BoundReport("thm2-worst", v_w, "lower-on-eps", {**inputs, "numerator": n_worst}, f_w)
    return avg, worst


def correlation_bound_check(code: CovariantCode, model: ErasureModel, eps_e_per_event):
    """``||T_L - tr(T_L)/d_L||_1 / (2 d_L) <= sum_alpha Delta T_alpha eps_e(N^alpha o E)``.

    ``eps_e_per_event`` follows the event order of ``model``.

    Returns
    -------
    (lhs, rhs, holds)
    """
    tL = _u1_charge(code)
    if tL is None:
        raise ValueError("correlation bound needs a U(1) charge")
    eps = list(eps_e_per_event)
    if len(eps) != len(model):
        raise ValueError("need one eps_e per erasure event")
    lhs = float(np.abs(tL - tL.mean()).sum()) / (2 * len(tL))
    rhs = 0.0
    for (alpha, _), e in zip(model, eps):
        lo, hi = event_charge_range(code, model, alpha)
        rhs += (hi - lo) * float(e)
    return lhs, rhs, bool(lhs <= rhs + 1e-12)


def correlation_bound_aggregate(code: CovariantCode, model: ErasureModel) -> BoundReport:
    """``eps_e >= ||T_L - tr(T_L)/d_L||_1 / (2 d_L max_alpha Delta T_alpha / q_alpha)``."""
    tL = _u1_charge(code)
    if tL is None:
        return _na("corr-aggregate", "no U(1) charge")
    num = float(np.abs(tL - tL.mean()).sum()) / (2 * len(tL))
    den = max((lambda r: r[1] - r[0])(event_charge_range(code, model, a)) / q for a, q in model)
    return BoundReport("corr-aggregate", 0.0 if den <= 0 else num / den, "lower-on-eps",
                       {"numerator": num, "max_Delta_T_alpha_over_q": den})


def environment_observable(code: CovariantCode, model: ErasureModel, cutoffs=None,
                           covariance: tuple[float, float] | None = None):
    """Environment observable ``Z = sum_alpha |alpha><alpha| (x) Pi_alpha (T_alpha - t_alpha) / q_alpha``.

    Returns
    -------
    blocks : list of (alpha, labels, diagonal of Z_alpha)
    residual : float
        ``||N_hat_E^dag(Z) - (T_L - nu' I)||_inf`` with ``nu' = nu + sum t_alpha``.
    norm : float
        ``||Z||_inf``.
    """
    tL = _u1_charge(code)
    if tL is None:
        raise ValueError("environment observable needs a U(1) charge")
    nu, _ = covariance if covariance is not None else verify_covariance(code)
    cut = _resolve_cutoffs(code, model, cutoffs)
    d = code.d_L
    adj = np.zeros((d, d), dtype=complex)
    blocks, norm, tsum = [], 0.0, 0.0
    for (alpha, q), (lo, hi) in zip(model, cut):
        view = event_view(code, alpha)
        tchg = _event_charges(code, model, alpha)
        mid = 0.5 * (lo + hi)
        tsum += mid
        inside = (tchg >= lo) & (tchg <= hi)
        z = np.where(inside, tchg - mid, 0.0) / q
        blocks.append((alpha, view.env_labels, z))
        if z.size:
            norm = max(norm, float(np.abs(z).max()))
        for x in range(d):
            for xp in range(d):
                # <x| E^dag(Z_alpha) |x'> = tr(Z_alpha rho^{x',x}), weighted by q
                adj[x, xp] += q * (view.rho_sparse(xp, x).diagonal() * z).sum()
    target = np.diag(tL) - (nu + tsum) * np.eye(d)
    residual = numkit.operator_norm(adj - target)
    return blocks, float(residual), norm


def environ_distinguishability_lower(code: CovariantCode, model: ErasureModel, x: int, xp: int) -> BoundReport:
    """``eps_worst >= delta(N_hat_E(x), N_hat_E(x')) / 2`` for basis inputs ``x, x'``."""
    if x == xp:
        return BoundReport("environ", 0.0, "lower-on-eps", {"x": x, "xp": xp})
    td = 0.0
    for alpha, q in model:
        view = event_view(code, alpha)
        diff = view.rho_sparse(x, x) - view.rho_sparse(xp, xp)
        td += q * 0.5 * sparse_trace_norm(diff)
    return BoundReport("environ", 0.5 * td, "lower-on-eps", {"x": x, "xp": xp, "trace_distance": td})


def max_environ_distinguishability(code: CovariantCode, model: ErasureModel) -> BoundReport:
    """Best :func:`environ_distinguishability_lower` over all pairs of logical basis states."""
    best = BoundReport("environ", 0.0, "lower-on-eps", {"x": 0, "xp": 0})
    for x in range(code.d_L):
        for xp in range(x + 1, code.d_L):
            r = environ_distinguishability_lower(code, model, x, xp)
            if r.value > best.value:
                best = r
    return best
