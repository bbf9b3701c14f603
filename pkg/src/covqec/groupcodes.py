"""Codes covariant under finite groups, built from Cayley tables.

Subsystem labels are element indices ``0..|G|-1`` with the identity at
index 0 for the built-in groups.  ``X_left(g)|h> = |gh>`` and
``X_right(g)|h> = |hg>`` act on labels as permutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product
from typing import Callable, Mapping, Sequence

import numpy as np

from .codespace import CovariantCode, SparseState
from .noise import event_view

__all__ = [
    "FiniteGroup",
    "GroupCode",
    "builtin_group",
    "bitflip_code",
    "phaseflip_code",
    "code_422",
    "code_422_stabilized",
    "code_2m",
    "multiplier",
    "verify_transversal_logical",
    "verify_kl_erasure",
    "stabilizer_residual",
]


class FiniteGroup:
    """Finite group given by its multiplication table ``table[a, b] = a * b``.

    Raises
    ------
    ValueError
        If the table is not a group table (closure, identity, inverses,
        associativity on all triples for order up to 24, on a sample beyond).
    """

    def __init__(self, table, name: str = "G", seed: int = 0):
        t = np.asarray(table, dtype=np.int64)
        n = t.shape[0]
        if t.shape != (n, n) or n < 1:
            raise ValueError("Cayley table must be square")
        if t.min() < 0 or t.max() >= n:
            raise ValueError("table entries out of range")
        for row in t:
            if len(set(row.tolist())) != n:
                raise ValueError("table rows must be permutations")
        for col in t.T:
            if len(set(col.tolist())) != n:
                raise ValueError("table columns must be permutations")
        ids = [e for e in range(n) if np.all(t[e] == np.arange(n)) and np.all(t[:, e] == np.arange(n))]
        if not ids:
            raise ValueError("no identity element")
        e = ids[0]
        if n <= 24:
            a, b, c = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
            ok = np.all(t[t[a, b], c] == t[a, t[b, c]])
        else:
            rng = np.random.default_rng(seed)
            a, b, c = rng.integers(0, n, (3, 20000))
            ok = np.all(t[t[a, b], c] == t[a, t[b, c]])
        if not ok:
            raise ValueError("table is not associative")
        inv = np.array([int(np.nonzero(t[g] == e)[0][0]) for g in range(n)])
        t.setflags(write=False)
        inv.setflags(write=False)
        self.table = t
        self.identity = e
        self.inverse = inv
        self.name = name

    @property
    def order(self) -> int:
        return self.table.shape[0]

    def __len__(self):
        return self.order

    def mul(self, *gs) -> int:
        out = self.identity
        for g in gs:
            out = int(self.table[out, g])
        return out

    def inv(self, g) -> int:
        return int(self.inverse[g])

    def is_abelian(self) -> bool:
        return bool(np.all(self.table == self.table.T))

    def to_json(self) -> dict:
        return {"name": self.name, "order": self.order, "table": self.table.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "FiniteGroup":
        try:
            table = d["table"]
        except (KeyError, TypeError):
            raise ValueError("group JSON needs a 'table' entry") from None
        if "order" in d and int(d["order"]) != len(table):
            raise ValueError("order does not match table size")
        return cls(table, d.get("name", "G"))


def _closure(gens, mul, ident):
    elems = [ident]
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                b = mul(a, g)
                if b not in seen:
                    seen.add(b)
                    elems.append(b)
                    nxt.append(b)
        frontier = nxt
    index = {g: i for i, g in enumerate(elems)}
    table = [[index[mul(a, b)] for b in elems] for a in elems]
    return table


def _perm_group(gens, k, name):
    def mul(p, q):  # (p q)(i) = p(q(i))
        return tuple(p[q[i]] for i in range(k))

    return FiniteGroup(_closure(gens, mul, tuple(range(k))), name)


def builtin_group(name: str) -> FiniteGroup:
    """``"Zn"`` (e.g. ``"Z3"``), ``"S3"``, ``"D4"`` or ``"Q8"``; identity is element 0."""
    if name.startswith("Z") and name[1:].isdigit():
        n = int(name[1:])
        if n < 1:
            raise ValueError("Zn needs n >= 1")
        return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], name)
    if name == "S3":
        return _perm_group([(1, 0, 2), (1, 2, 0)], 3, name)
    if name == "D4":
        return _perm_group([(1, 2, 3, 0), (0, 3, 2, 1)], 4, name)
    if name == "Q8":
        one = np.eye(2, dtype=complex)
        qi = np.array([[1j, 0], [0, -1j]])
        qj = np.array([[0, 1], [-1, 0]], dtype=complex)

        def key(m):
            return tuple(np.round(m, 9).ravel().tolist())

        mats = {key(one): one}

        def mul(a, b):
            m = mats[a] @ mats[b]
            k = key(m)
            mats.setdefault(k, m)
            return k

        mats[key(qi)] = qi
        mats[key(qj)] = qj
        return FiniteGroup(_closure([key(qi), key(qj)], mul, key(one)), name)
    raise ValueError(f"unknown group {name!r}")


@dataclass(frozen=True, eq=False)
class GroupCode(CovariantCode):
    """A :class:`CovariantCode` whose labels are group elements of ``group``."""

    group: FiniteGroup | None = None


def _make(G, family, params, n_sub, logical, builder) -> GroupCode:
    cols = []
    for lg in logical:
        terms = builder(lg)
        cols.append(SparseState.from_terms(terms))
    return GroupCode(family=family, params={"group": G.name, **params}, columns=tuple(cols), charge=None,
                     n_sub=n_sub, local_dims=(G.order,) * n_sub,
                     logical_labels=tuple(logical), group=G)


def bitflip_code(G: FiniteGroup, M: int) -> GroupCode:
    """``|g> -> |g, ..., g>`` on ``M`` subsystems."""
    if M < 1:
        raise ValueError("M must be positive")
    return _make(G, "bitflip", {"M": M}, M, [(g,) for g in range(G.order)],
                 lambda lg: {(lg[0],) * M: 1.0})


def phaseflip_code(G: FiniteGroup, M: int) -> GroupCode:
    """``|g> -> |G|^{-(M-1)/2} sum_{h_1 ... h_M = g} |h_1, ..., h_M>``."""
    if M < 1:
        raise ValueError("M must be positive")
    amp = G.order ** (-(M - 1) / 2)

    def build(lg):
        g = lg[0]
        terms = {}
        for hs in product(range(G.order), repeat=M - 1):
            last = G.mul(G.inv(G.mul(*hs)) if hs else G.identity, g)
            terms[hs + (last,)] = amp
        return terms

    return _make(G, "phaseflip", {"M": M}, M, [(g,) for g in range(G.order)], build)


def code_422(G: FiniteGroup) -> GroupCode:
    """``|g1, g2> -> |G|^{-1/2} sum_g |g, g^-1 g1, g g2, g^-1 g1 g2>``."""
    amp = 1 / math.sqrt(G.order)

    def build(lg):
        g1, g2 = lg
        return {(g, G.mul(G.inv(g), g1), G.mul(g, g2), G.mul(G.inv(g), g1, g2)): amp for g in range(G.order)}

    return _make(G, "422", {}, 4, list(product(range(G.order), repeat=2)), build)


def _telescoped(G, gs, m):
    """Unstabilized label tuple ``(e, g1, g2 g1, g2 g3, g4 g3, ..., g_{2m-2})``."""
    h = [G.identity, gs[0]]
    for j in range(3, 2 * m):
        a, b = gs[j - 2], gs[j - 3]  # g_{j-1}, g_{j-2} with one-based g
        h.append(G.mul(a, b) if j % 2 else G.mul(b, a))
    h.append(gs[2 * m - 3])
    return h


def code_2m(G: FiniteGroup, m: int) -> GroupCode:
    """``[[2m, 2m-2, 2]]_G`` code stabilized by left multiplication on every site.

    ``|g_1..g_{2m-2}> -> |G|^{-1/2} sum_g S_g |e, g_1, g_2 g_1, g_2 g_3,
    g_4 g_3, ..., g_{2m-2}>``: odd sites ``j >= 3`` hold ``g_{j-1} g_{j-2}``,
    even sites ``j < 2m`` hold ``g_{j-2} g_{j-1}`` and the last site holds
    ``g_{2m-2}``.  Every stored ket obeys
    ``h_1^-1 h_2 h_3^-1 h_4 ... h_{2m} = e``.
    """
    if m < 2:
        raise ValueError("code_2m needs m >= 2")
    amp = 1 / math.sqrt(G.order)

    def build(lg):
        base = _telescoped(G, lg, m)
        return {tuple(G.mul(g, h) for h in base): amp for g in range(G.order)}

    code = _make(G, "2m", {"m": m}, 2 * m, list(product(range(G.order), repeat=2 * m - 2)), build)
    res = stabilizer_residual(code)
    if res > 1e-12:  # pragma: no cover - construction guarantees invariance
        raise ArithmeticError(f"stabilizer invariance violated: {res}")
    return code


def code_422_stabilized(G: FiniteGroup) -> GroupCode:
    """``|g1, g2> -> |G|^{-1/2} sum_g |g, g g1, g g2 g1, g g2>``, the ``m = 2`` case of :func:`code_2m`."""
    code = code_2m(G, 2)
    return GroupCode(family="422-stab", params=code.params | {}, columns=code.columns, charge=None,
                     n_sub=4, local_dims=code.local_dims, logical_labels=code.logical_labels, group=G)


def multiplier(G: FiniteGroup, g: int, side: str) -> np.ndarray:
    """Permutation ``perm[h]`` of labels for ``X_left(g): h -> gh`` or ``X_right(g): h -> hg``."""
    if side == "left":
        return G.table[g].copy()
    if side == "right":
        return G.table[:, g].copy()
    raise ValueError("side must be 'left' or 'right'")


def _apply(col: SparseState, perms) -> dict:
    lab = col.labels.copy()
    for i, p in enumerate(perms):
        if p is not None:
            lab[:, i] = np.asarray(p)[lab[:, i]]
    return {tuple(r.tolist()): a for r, a in zip(lab, col.amps)}


def _dict_dist(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return math.sqrt(sum(abs(a.get(k, 0) - b.get(k, 0)) ** 2 for k in keys))


def verify_transversal_logical(code: CovariantCode, physical: Sequence, expected_logical) -> float:
    """``max_x || (P_1 (x) ... (x) P_n) V|x> - V|expected(x)> ||``.

    Parameters
    ----------
    physical : sequence
        One label permutation per subsystem, ``None`` for the identity.
    expected_logical : callable or mapping
        Maps a logical label (tuple of element indices) to its image.
    """
    if len(physical) != code.n_sub:
        raise ValueError("need one physical factor per subsystem")
    labels = list(code.logical_labels)
    index = {lab: i for i, lab in enumerate(labels)}
    f = expected_logical if callable(expected_logical) else (lambda lg: expected_logical[lg])
    worst = 0.0
    for i, col in enumerate(code.columns):
        target = code.columns[index[tuple(f(labels[i]))]]
        worst = max(worst, _dict_dist(_apply(col, physical), target.terms))
    return worst


def stabilizer_residual(code: GroupCode) -> float:
    """``max_{l, x} ||S_l V|x> - V|x>||`` with ``S_l`` the left multiplier on every site."""
    G = code.group
    worst = 0.0
    for l in range(G.order):
        perm = multiplier(G, l, "left")
        for col in code.columns:
            worst = max(worst, _dict_dist(_apply(col, [perm] * code.n_sub), col.terms))
    return worst


def verify_kl_erasure(code: CovariantCode, subsystem_set) -> float:
    """Largest deviation of ``<x| O |x'>`` from ``delta_{x x'} c(O)`` over matrix units on the set.

    For a matrix unit ``|a><b|`` the matrix element is the entry ``[b, a]`` of
    ``rho^{x',x}``, so the violation is the largest entry of
    ``rho^{x,x'} - delta_{x x'} rho^{0,0}``.
    """
    return event_view(code, tuple(subsystem_set)).kl_violation()
