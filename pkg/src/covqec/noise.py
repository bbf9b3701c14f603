"""Erasure models and the environment's view of the code.

For an erasure event ``alpha`` the complementary channel hands the erased
subsystems to the environment.  Everything downstream is built from the
reduced logical operators

    rho_alpha^{x,x'} = tr_{A \\ alpha}( V |x><x'| V^dag ),

which :class:`EventView` computes from the sparse codewords.  Codeword ``x``
is split into a matrix ``M_x[a, r]`` indexed by labels ``a`` on ``alpha`` and
``r`` on the rest, so that ``rho^{x,x'} = M_x M_x'^dag``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from . import numkit
from .codespace import CovariantCode

__all__ = [
    "ErasureModel",
    "EventView",
    "uniform_single_erasure",
    "all_pairs_erasure",
    "window_erasure",
    "reduced_logical_operator",
    "environment_block_state",
    "event_view",
    "sparse_trace_norm",
    "sparse_root_fidelity",
    "DEFAULT_DENSE_BUDGET",
]

PROB_TOL = 1e-12
DEFAULT_DENSE_BUDGET = 4096


class BudgetExceeded(RuntimeError):
    """A dense matrix would exceed the configured dimension budget."""


@dataclass(frozen=True)
class ErasureModel:
    """Erasure at known locations: event ``alpha`` happens with probability ``q``.

    Subsystem indices are zero-based.  ``replacement`` is the label written
    into an erased site; it never affects complementary-channel quantities.
    """

    events: tuple
    probs: tuple
    n_sub: int
    replacement: int = 0
    name: str = "custom"

    def __post_init__(self):
        if len(self.events) == 0 or len(self.events) != len(self.probs):
            raise ValueError("need one probability per erasure event")
        ev = tuple(tuple(sorted(int(i) for i in a)) for a in self.events)
        object.__setattr__(self, "events", ev)
        object.__setattr__(self, "probs", tuple(float(q) for q in self.probs))
        for a in ev:
            if not a:
                raise ValueError("erasure events must be non-empty")
            if len(set(a)) != len(a) or a[0] < 0 or a[-1] >= self.n_sub:
                raise ValueError(f"invalid erasure event {a} for {self.n_sub} subsystems")
        if any(not q > 0 for q in self.probs):
            raise ValueError("event probabilities must be positive")
        if abs(math.fsum(self.probs) - 1.0) > PROB_TOL:
            raise ValueError(f"event probabilities sum to {math.fsum(self.probs)!r}, not 1")

    def __iter__(self):
        return iter(zip(self.events, self.probs))

    def __len__(self):
        return len(self.events)

    @property
    def multiplicity(self) -> np.ndarray:
        """Number of events containing each subsystem."""
        c = np.zeros(self.n_sub, dtype=int)
        for a in self.events:
            c[list(a)] += 1
        return c

    def charge_weights(self, alpha) -> np.ndarray:
        """Weights ``1/c_i`` such that ``T_alpha = sum_{i in alpha} T_i / c_i``.

        With these weights ``sum_alpha T_alpha = T_A`` whenever every
        subsystem is covered by some event.
        """
        c = self.multiplicity
        return 1.0 / c[list(alpha)]

    def to_json(self) -> dict:
        return {"name": self.name, "n_sub": self.n_sub, "replacement": self.replacement,
                "events": [{"alpha": list(a), "q": q} for a, q in self]}

    @classmethod
    def from_json(cls, d: dict) -> "ErasureModel":
        try:
            ev = [e["alpha"] for e in d["events"]]
            q = [e["q"] for e in d["events"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed erasure model: {exc}") from None
        n = d.get("n_sub", 1 + max(max(a) for a in ev))
        return cls(tuple(ev), tuple(q), int(n), int(d.get("replacement", 0)), d.get("name", "custom"))


def uniform_single_erasure(n: int) -> ErasureModel:
    """Each of ``n`` subsystems is lost with probability ``1/n``."""
    if n < 1:
        raise ValueError("n must be positive")
    return ErasureModel(tuple((i,) for i in range(n)), (1.0 / n,) * n, n, name="single")


def all_pairs_erasure(n: int) -> ErasureModel:
    """Every two-subset is lost with equal probability."""
    if n < 2:
        raise ValueError("need at least two subsystems")
    ev = tuple(combinations(range(n), 2))
    return ErasureModel(ev, (1.0 / len(ev),) * len(ev), n, name="pairs")


def window_erasure(n: int, d: int) -> ErasureModel:
    """Periodic windows ``{i, ..., i+d-1 mod n}`` of ``d`` adjacent sites, each with probability ``1/n``."""
    if not 1 <= d <= n:
        raise ValueError("need 1 <= d <= n")
    if d == n:
        return ErasureModel((tuple(range(n)),), (1.0,), n, name=f"window{d}")
    ev = tuple(tuple(sorted((i + k) % n for k in range(d))) for i in range(n))
    return ErasureModel(ev, (1.0 / n,) * n, n, name=f"window{d}")


# ----------------------------------------------------------------------------
# sparse helpers


def _components(pattern: sp.spmatrix, n_rows: int, n_cols: int):
    """Connected components of the bipartite graph rows <-> cols."""
    pat = sp.coo_matrix(pattern)
    if pat.nnz == 0:
        return []
    N = n_rows + n_cols
    adj = sp.coo_matrix((np.ones(pat.nnz), (pat.row, pat.col + n_rows)), shape=(N, N))
    _, lab = connected_components(adj, directed=False)
    rows_lab, cols_lab = lab[:n_rows], lab[n_rows:]
    used = np.unique(np.concatenate([rows_lab[pat.row], cols_lab[pat.col]]))
    order_r = np.argsort(rows_lab, kind="stable")
    order_c = np.argsort(cols_lab, kind="stable")
    sr, sc = rows_lab[order_r], cols_lab[order_c]
    out = []
    for c in used:
        r = order_r[np.searchsorted(sr, c, "left"):np.searchsorted(sr, c, "right")]
        k = order_c[np.searchsorted(sc, c, "left"):np.searchsorted(sc, c, "right")]
        out.append((r, k))
    return out


def sparse_trace_norm(A) -> float:
    """Trace norm of a sparse matrix through its connected blocks."""
    A = sp.csr_matrix(A)
    total = 0.0
    for r, c in _components(A, *A.shape):
        if len(r) == 0 or len(c) == 0:
            continue
        total += numkit.trace_norm(A[r][:, c].toarray())
    return float(total)


def sparse_root_fidelity(A, B) -> float:
    """``tr sqrt(sqrt(A) B sqrt(A))`` for PSD sparse matrices with shared block structure."""
    A = sp.csr_matrix(A)
    B = sp.csr_matrix(B)
    n = A.shape[0]
    pat = (abs(A) + abs(B)).tocsr()
    total = 0.0
    for r, c in _components(pat, n, n):
        idx = np.union1d(r, c)
        total += numkit.root_fidelity(A[idx][:, idx].toarray(), B[idx][:, idx].toarray())
    return float(total)


def _unique_rows(a: np.ndarray):
    if a.shape[1] == 0:
        return np.zeros((1, 0), dtype=np.int64), np.zeros(a.shape[0], dtype=np.int64)
    if a.shape[1] == 1:
        u, inv = np.unique(a[:, 0], return_inverse=True)
        return u.reshape(-1, 1), inv.ravel()
    u, inv = np.unique(a, axis=0, return_inverse=True)
    return u, inv.ravel()


# ----------------------------------------------------------------------------
# event views


class EventView:
    """Reduced logical operators of one erasure event.

    Attributes
    ----------
    alpha : tuple of int
        Erased subsystems.
    d_L : int
    D : int
        Number of distinct environment labels seen by any codeword.
    env_labels : ndarray, shape (D, |alpha|)
        Environment labels; for Dicke codes the single column holds the
        magnetization ``r`` of the erased block.
    """

    def __init__(self, alpha, d_L, env_labels, M=None, dense=None, env_charge=None):
        self.alpha = tuple(alpha)
        self.d_L = int(d_L)
        self.env_labels = env_labels
        self.D = env_labels.shape[0]
        self.M = M  # stacked (d_L * D, R) codeword matrix, rows (x, a)
        self._dense = dense
        self._cache: dict = {}
        self._env_charge = env_charge  # callable(weights) -> per-label charge

    def _rows(self, x):
        return slice(x * self.D, (x + 1) * self.D)

    def slice(self, x: int) -> sp.csr_matrix:
        """``M_x[a, r] = <a, r|psi_x>``."""
        return self.M[self._rows(x)]

    def rho_sparse(self, x: int, xp: int) -> sp.csr_matrix:
        """``rho^{x,x'}`` as a sparse ``D x D`` matrix."""
        if not (0 <= x < self.d_L and 0 <= xp < self.d_L):
            raise IndexError("logical index out of range")
        if "gram" in self._cache:
            return self._cache["gram"][self._rows(x)][:, self._rows(xp)]
        key = (x, xp)
        if key not in self._cache:
            if (xp, x) in self._cache:
                self._cache[key] = self._cache[(xp, x)].conj().T.tocsr()
            elif self._dense is not None:
                self._cache[key] = sp.csr_matrix(self._dense[x, xp])
            else:
                m = (self.slice(x) @ self.slice(xp).conj().T).tocsr()
                m.eliminate_zeros()
                self._cache[key] = m
        return self._cache[key]

    def rho(self, x: int, xp: int, budget: int = DEFAULT_DENSE_BUDGET) -> np.ndarray:
        """Dense ``rho^{x,x'}``."""
        if self.D > budget:
            raise BudgetExceeded(f"environment dimension {self.D} exceeds budget {budget}")
        if self._dense is not None:
            return np.array(self._dense[x, xp], dtype=complex)
        return self.rho_sparse(x, xp).toarray()

    def gram(self) -> sp.csr_matrix:
        """Sparse ``G[(x, a), (x', b)] = rho^{x,x'}[a, b]`` of size ``d_L D``."""
        if "gram" not in self._cache:
            if self._dense is not None:
                n = self.d_L * self.D
                G = sp.csr_matrix(np.transpose(self._dense, (0, 2, 1, 3)).reshape(n, n))
            else:
                G = (self.M @ self.M.conj().T).tocsr()
            G.eliminate_zeros()
            G.sort_indices()
            self._cache["gram"] = G
        return self._cache["gram"]

    def is_diagonal(self, tol: float = 0.0) -> bool:
        """True when every ``rho^{x,x'}`` is diagonal in the label basis."""
        G = sp.coo_matrix(self.gram())
        off = (G.row % self.D) != (G.col % self.D)
        return bool(np.all(np.abs(G.data[off]) <= tol))

    def diag_profiles(self) -> np.ndarray:
        """``P[a, x, x'] = rho^{x,x'}[a, a]``."""
        G = sp.coo_matrix(self.gram())
        sel = (G.row % self.D) == (G.col % self.D)
        P = np.zeros((self.D, self.d_L, self.d_L), dtype=complex)
        P[G.row[sel] % self.D, G.row[sel] // self.D, G.col[sel] // self.D] = G.data[sel]
        return P

    def env_charge(self, weights) -> np.ndarray:
        """Charge ``sum_i w_i T_i`` of every environment label."""
        if self._env_charge is None:
            raise ValueError("code carries no charge data")
        return self._env_charge(np.asarray(weights, dtype=float))

    def kl_violation(self) -> float:
        """Largest entry of ``rho^{x,x'} - delta_{x x'} rho^{0,0}`` over all ``x, x'``."""
        if "kl" not in self._cache:
            G = self.gram()
            r0 = G[: self.D][:, : self.D]
            diff = (G - sp.kron(sp.identity(self.d_L, format="csr"), r0, format="csr")).tocsr()
            self._cache["kl"] = float(np.abs(diff.data).max()) if diff.nnz else 0.0
        return self._cache["kl"]

    def is_exact(self, tol: float = 1e-12) -> bool:
        """Knill-Laflamme pattern: equal diagonal blocks and vanishing off-diagonal blocks."""
        return self.kl_violation() <= tol


def _explicit_view(code: CovariantCode, alpha) -> EventView:
    alpha = tuple(sorted(alpha))
    rest = [i for i in range(code.n_sub) if i not in alpha]
    lab = np.concatenate([c.labels for c in code.columns], axis=0)
    amp = np.concatenate([c.amps for c in code.columns])
    col = np.repeat(np.arange(code.d_L), [len(c) for c in code.columns])
    env_labels, ea = _unique_rows(lab[:, list(alpha)])
    rest_labels, ra = _unique_rows(lab[:, rest])
    D = env_labels.shape[0]
    M = sp.csr_matrix((amp, (col * D + ea, ra)), shape=(code.d_L * D, rest_labels.shape[0]))

    env_charge = None
    if code.charge is not None:
        site_q = code.charge.site_charges(env_labels, alpha)

        def env_charge(w, _q=site_q):
            return _q @ w

    return EventView(alpha, code.d_L, env_labels, M=M, env_charge=env_charge)


def _dicke_view(code, alpha) -> EventView:
    k = len(alpha)
    r, rho = code.dicke_reduced(k)

    def env_charge(w, _r=r):
        if not np.allclose(w, w[0]):
            raise ValueError("Dicke events need equal per-site charge weights")
        return w[0] * _r.astype(float)

    return EventView(tuple(alpha), code.d_L, r.reshape(-1, 1), dense=rho.astype(complex),
                     env_charge=env_charge)


_VIEW_CACHE: dict = {}


def event_view(code: CovariantCode, alpha) -> EventView:
    """Cached :class:`EventView` of ``code`` for erased set ``alpha``.

    Dicke codes are permutation invariant so their views depend on ``|alpha|``
    only and are shared.
    """
    alpha = tuple(sorted(int(i) for i in alpha))
    if not alpha or alpha[0] < 0 or alpha[-1] >= code.n_sub or len(set(alpha)) != len(alpha):
        raise ValueError(f"invalid erased set {alpha}")
    if code.is_implicit:
        key = (id(code), len(alpha))
    else:
        key = (id(code), alpha)
    hit = _VIEW_CACHE.get(key)
    if hit is not None and hit[0] is code:
        return hit[1]
    view = _dicke_view(code, alpha) if code.is_implicit else _explicit_view(code, alpha)
    if len(_VIEW_CACHE) > 256:
        _VIEW_CACHE.clear()
    _VIEW_CACHE[key] = (code, view)
    return view


@dataclass(frozen=True)
class ReducedOperator:
    alpha: tuple
    x: int
    xp: int
    matrix: np.ndarray
    labels: np.ndarray = field(repr=False, default=None)


def reduced_logical_operator(code: CovariantCode, alpha, x: int, xp: int,
                             budget: int = DEFAULT_DENSE_BUDGET) -> ReducedOperator:
    """Dense ``rho_alpha^{x,x'}`` on the labels of ``alpha`` that occur in the code.

    Rows and columns are ordered like ``labels`` (sorted label tuples).

    Raises
    ------
    BudgetExceeded
        If more than ``budget`` distinct labels occur on ``alpha``.
    """
    v = event_view(code, alpha)
    return ReducedOperator(v.alpha, x, xp, v.rho(x, xp, budget), v.env_labels)


def environment_block_state(code: CovariantCode, model: ErasureModel, logical_input,
                            budget: int = DEFAULT_DENSE_BUDGET) -> list:
    """Blocks ``q_alpha sum_{x,x'} rho_alpha^{x,x'} (x) <x|rho_LR|x'>`` on ``A_alpha (x) R``.

    Parameters
    ----------
    logical_input : array_like
        Either a density matrix on ``L (x) R`` (``L`` first) or a state vector.

    Returns
    -------
    list of (alpha, q, ndarray)
    """
    a = np.asarray(logical_input, dtype=complex)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
    d = code.d_L
    if a.shape[0] % d or a.shape[0] != a.shape[1]:
        raise ValueError("logical input must act on L (x) R with L of dimension d_L")
    r = a.shape[0] // d
    R4 = a.reshape(d, r, d, r)
    out = []
    for alpha, q in model:
        v = event_view(code, alpha)
        if v.D * r > budget:
            raise BudgetExceeded(f"block dimension {v.D * r} exceeds budget {budget}")
        blk = np.zeros((v.D * r, v.D * r), dtype=complex)
        for x in range(d):
            for y in range(d):
                c = R4[x, :, y, :]
                if np.any(c):
                    blk += np.kron(v.rho(x, y, budget), c)
        out.append((alpha, q, q * blk))
    return out
