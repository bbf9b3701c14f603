"""Certified upper bounds on the worst-case infidelity.

If for every erasure event there is a state ``zeta_alpha`` with
``F(rho_alpha^{x,x}, zeta_alpha) >= sqrt(1 - eps^2)`` for all ``x`` and
``||rho_alpha^{x,x'}||_1 <= nu`` for all ``x != x'``, then
``eps_worst <= eps + d_L sqrt(nu)``.  The conditions have to hold for each
event separately, so the global ``eps`` and ``nu`` are maxima over events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numkit
from .codespace import CovariantCode
from .noise import ErasureModel, EventView, event_view, sparse_root_fidelity, sparse_trace_norm

__all__ = ["Certificate", "certify_reference", "certify_minorization", "certify_reference_best"]


@dataclass
class Certificate:
    """Upper bound ``eps + d_L sqrt(nu)`` on ``eps_worst`` with its per-event data."""

    eps: float
    nu: float
    d_L: int
    method: str
    per_event: list = field(default_factory=list)
    slack: float = 0.0

    @property
    def bound(self) -> float:
        return self.eps + self.d_L * math.sqrt(self.nu)

    @property
    def value(self) -> float:
        return self.bound

    def to_json(self) -> dict:
        return {"method": self.method, "eps": self.eps, "nu": self.nu, "d_L": self.d_L,
                "bound": self.bound, "truncation_slack": self.slack,
                "per_event": [{"alpha": list(e["alpha"]), "q": e["q"], "eps": e["eps"], "nu": e["nu"]}
                              for e in self.per_event]}


def _offdiag_nu(view: EventView) -> float:
    nu = 0.0
    for x in range(view.d_L):
        for y in range(x + 1, view.d_L):
            m = view.rho_sparse(x, y)
            if m.nnz and np.abs(m.data).max() > 0:
                nu = max(nu, sparse_trace_norm(m))
    return nu


def _check_states(view: EventView):
    for x in range(view.d_L):
        m = view.rho_sparse(x, x)
        tr = float(m.diagonal().sum().real)
        if abs(tr - 1.0) > 1e-8:
            raise ValueError(f"reduced state rho^{{{x},{x}}} on {view.alpha} has trace {tr}")
        d = m.diagonal()
        if np.any(d.real < -1e-10):
            raise ValueError(f"reduced state rho^{{{x},{x}}} on {view.alpha} is not PSD")


def _is_diag(m) -> bool:
    c = m.tocoo()
    return bool(np.all(c.row == c.col))


def _fid(a, b) -> float:
    if _is_diag(a) and _is_diag(b):
        p = np.clip(a.diagonal().real, 0, None)
        q = np.clip(b.diagonal().real, 0, None)
        return float(np.sqrt(p * q).sum())
    return sparse_root_fidelity(a, b)


def _per_event(code, model, fn):
    out, cache = [], {}
    for alpha, q in model:
        view = event_view(code, alpha)
        if id(view) not in cache:
            cache[id(view)] = fn(view)
        eps, nu = cache[id(view)]
        out.append({"alpha": alpha, "q": q, "eps": eps, "nu": nu})
    return out


def _finish(code, per, method) -> Certificate:
    eps = max(e["eps"] for e in per)
    nu = max(e["nu"] for e in per)
    return Certificate(eps, nu, code.d_L, method, per, float(code.meta.get("truncation_slack", 0.0)))


def certify_reference(code: CovariantCode, model: ErasureModel, reference_index: int = 0) -> Certificate:
    """Certificate with ``zeta_alpha = rho_alpha^{ref,ref}``.

    ``eps_alpha = max_x sqrt(1 - F^2(rho_alpha^{x,x}, zeta_alpha))`` and
    ``nu_alpha = max_{x != x'} ||rho_alpha^{x,x'}||_1``.

    Raises
    ------
    ValueError
        If ``reference_index`` is out of range or a reduced state is not a
        density matrix.
    """
    if not 0 <= reference_index < code.d_L:
        raise ValueError("reference_index out of range")

    def fn(view):
        _check_states(view)
        z = view.rho_sparse(reference_index, reference_index)
        eps = 0.0
        for x in range(view.d_L):
            if x == reference_index:
                continue
            F = min(1.0, _fid(view.rho_sparse(x, x), z))
            eps = max(eps, numkit.infidelity_from_f(F))
        return eps, _offdiag_nu(view)

    return _finish(code, _per_event(code, model, fn), f"reference-state[{reference_index}]")


def certify_reference_best(code: CovariantCode, model: ErasureModel) -> Certificate:
    """Best :func:`certify_reference` over all reference indices (ties: lowest index)."""
    best = None
    for r in range(code.d_L):
        c = certify_reference(code, model, r)
        if best is None or c.bound < best.bound:
            best = c
    return best


def certify_minorization(code: CovariantCode, model: ErasureModel) -> Certificate:
    """Certificate from a common lower operator ``tau_alpha <= rho_alpha^{x,x}``.

    All ``rho_alpha^{x,x}`` must be diagonal in the label basis; ``tau_alpha``
    is their entrywise minimum and ``eps_alpha = sqrt(2 (1 - tr tau_alpha))``.

    Raises
    ------
    ValueError
        If some ``rho_alpha^{x,x}`` has off-diagonal entries; use
        :func:`certify_reference` for such codes.
    """

    def fn(view):
        _check_states(view)
        diags = []
        for x in range(view.d_L):
            m = view.rho_sparse(x, x)
            c = m.tocoo()
            off = c.row != c.col
            if np.any(np.abs(c.data[off]) > 0):
                raise ValueError(f"reduced states on {view.alpha} are not jointly diagonal; "
                                 "use certify_reference")
            diags.append(m.diagonal().real)
        P = np.array(diags)
        tau = np.clip(P.min(axis=0), 0, None)
        # 1 - tr(tau) as a sum of non-negative gaps, exact zero for identical diagonals
        deficit = float(max(math.fsum(row) for row in P - tau))
        return math.sqrt(max(0.0, 2.0 * deficit)), _offdiag_nu(view)

    return _finish(code, _per_event(code, model, fn), "minorization")
