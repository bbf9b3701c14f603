"""Covariant code families as explicit sparse isometries.

A code is a list of codewords (one :class:`SparseState` per logical basis
index) together with the charge data that makes it covariant.  Subsystem
labels are signed integers, so rotor charges can be stored directly as labels.

The Dicke-state family is the exception: its codewords live on ``N`` spins and
are never expanded.  :class:`DickeCode` instead provides its reduced operators
in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
import scipy.sparse as sp

from . import special

__all__ = [
    "SparseState",
    "PhysicalCharge",
    "ChargeSpec",
    "CovariantCode",
    "DickeCode",
    "three_rotor_sharp",
    "three_rotor_smooth",
    "three_qutrit",
    "five_qudit_perfect",
    "five_rotor_smooth",
    "five_rotor_single_site",
    "five_rotor_norm",
    "dicke_thermo",
    "w_state_code",
    "repetition_code",
    "verify_isometry",
    "verify_covariance",
    "code_to_json",
    "code_from_json",
]

NORM_TOL = 1e-10
DEFAULT_PHI = math.sqrt(2.0) / 10.0


# ----------------------------------------------------------------------------
# data types


class SparseState:
    """Normalized state stored as unique label rows and complex amplitudes.

    Parameters
    ----------
    labels : array_like of int, shape (k, n)
        One row of subsystem labels per basis ket.
    amps : array_like of complex, shape (k,)
        Amplitudes.  Exact zeros are dropped.
    normalize : bool
        Rescale to unit norm instead of checking it.
    """

    __slots__ = ("labels", "amps")

    def __init__(self, labels, amps, normalize: bool = False):
        lab = np.asarray(labels, dtype=np.int64)
        amp = np.asarray(amps, dtype=complex).ravel()
        if lab.ndim != 2 or lab.shape[0] != amp.shape[0]:
            raise ValueError("labels must be (k, n) with one amplitude per row")
        if not np.all(np.isfinite(amp)):
            raise ValueError("non-finite amplitude")
        nz = amp != 0
        lab, amp = lab[nz], amp[nz]
        if lab.shape[0] == 0:
            raise ValueError("state has no nonzero amplitude")
        uniq, inv = np.unique(lab, axis=0, return_inverse=True)
        if uniq.shape[0] != lab.shape[0]:
            raise ValueError("duplicate label tuples in sparse state")
        norm2 = float(np.vdot(amp, amp).real)
        if normalize:
            amp = amp / math.sqrt(norm2)
        elif abs(norm2 - 1.0) > NORM_TOL:
            raise ValueError(f"state norm^2 = {norm2!r} is not 1")
        lab.setflags(write=False)
        amp.setflags(write=False)
        self.labels = lab
        self.amps = amp

    @classmethod
    def from_terms(cls, terms: dict, normalize: bool = False) -> "SparseState":
        keys = list(terms)
        return cls(np.array(keys, dtype=np.int64).reshape(len(keys), -1),
                   np.array([terms[k] for k in keys]), normalize=normalize)

    @property
    def terms(self) -> dict:
        return {tuple(int(v) for v in row): complex(a) for row, a in zip(self.labels, self.amps)}

    @property
    def n_sub(self) -> int:
        return self.labels.shape[1]

    def __len__(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class PhysicalCharge:
    """Diagonal local charge: ``scale * label`` unless a lookup table is given."""

    scale: float = 1.0
    table: tuple | None = None  # ((label, charge), ...)

    def __call__(self, labels) -> np.ndarray:
        labels = np.asarray(labels)
        if self.table is None:
            return self.scale * labels.astype(float)
        lut = dict(self.table)
        try:
            return np.array([lut[int(v)] for v in labels.ravel()], dtype=float).reshape(labels.shape)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]} has no charge assigned") from None

    def to_json(self):
        if self.table is None:
            return {"scale": self.scale}
        return {"table": [[int(a), float(b)] for a, b in self.table]}

    @classmethod
    def from_json(cls, d):
        if "table" in d:
            return cls(table=tuple((int(a), float(b)) for a, b in d["table"]))
        return cls(scale=float(d.get("scale", 1.0)))


@dataclass(frozen=True)
class ChargeSpec:
    """Logical and strictly local physical charges.

    ``logical[x]`` is the eigenvalue of ``T_L`` on logical basis index ``x``;
    ``physical[i]`` maps labels of subsystem ``i`` to eigenvalues of ``T_i``.
    For codes covariant under ``Z_M`` rather than ``U(1)`` set ``modulus``.
    """

    logical: tuple
    physical: tuple
    nu: float = 0.0
    modulus: int | None = None

    def __post_init__(self):
        if not all(math.isfinite(float(v)) for v in self.logical):
            raise ValueError("logical charges must be finite")

    @property
    def T_L(self) -> np.ndarray:
        return np.diag(np.asarray(self.logical, dtype=float))

    def site_charges(self, labels: np.ndarray, sites: Sequence[int]) -> np.ndarray:
        """Charges of label rows restricted to ``sites``; shape ``labels.shape``."""
        labels = np.asarray(labels)
        out = np.empty(labels.shape, dtype=float)
        for c, i in enumerate(sites):
            out[:, c] = self.physical[i](labels[:, c])
        return out

    def to_json(self):
        return {
            "logical": [float(v) for v in self.logical],
            "physical": [p.to_json() for p in self.physical],
            "nu": self.nu,
            "modulus": self.modulus,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            logical=tuple(float(v) for v in d["logical"]),
            physical=tuple(PhysicalCharge.from_json(p) for p in d["physical"]),
            nu=float(d.get("nu", 0.0)),
            modulus=d.get("modulus"),
        )


@dataclass(frozen=True, eq=False)
class CovariantCode:
    """Encoding isometry ``|x> -> columns[x]`` with attached charge data.

    Attributes
    ----------
    family : str
        Family tag, e.g. ``"three_rotor_sharp"``.
    params : dict
        Constructor parameters (JSON-serializable).
    columns : tuple of SparseState
        Codewords; ``None`` for implicit codes.
    charge : ChargeSpec or None
        ``None`` when no abelian charge is attached (non-abelian group codes).
    n_sub : int
        Number of physical subsystems.
    local_dims : tuple
        Local dimension per subsystem, ``None`` for unbounded rotor labels.
    meta : dict
        Diagnostics such as truncation mass.
    """

    family: str
    params: dict
    columns: tuple | None
    charge: ChargeSpec | None
    n_sub: int
    local_dims: tuple
    meta: dict = field(default_factory=dict)
    logical_labels: tuple | None = None

    @property
    def d_L(self) -> int:
        return len(self.columns)

    @property
    def is_implicit(self) -> bool:
        return False

    def column_matrix(self, alpha: Sequence[int]):
        """Sparse column data split along ``alpha`` and its complement.

        Returns
        -------
        env_labels : ndarray, shape (D, |alpha|)
            Distinct labels on ``alpha`` appearing in any codeword (sorted).
        rest_labels : ndarray, shape (R, n - |alpha|)
            Distinct labels on the complement.
        M : scipy.sparse.csr_matrix, shape (d_L * D, R)
            ``M[x*D + a, r] = <a, r | psi_x>``.
        """
        alpha = list(alpha)
        rest = [i for i in range(self.n_sub) if i not in alpha]
        lab = np.concatenate([c.labels for c in self.columns], axis=0)
        amp = np.concatenate([c.amps for c in self.columns])
        col = np.repeat(np.arange(self.d_L), [len(c) for c in self.columns])
        env_labels, ea = _unique_rows(lab[:, alpha])
        rest_labels, ra = _unique_rows(lab[:, rest])
        D = env_labels.shape[0]
        M = sp.csr_matrix((amp, (col * D + ea, ra)), shape=(self.d_L * D, rest_labels.shape[0]))
        return env_labels, rest_labels, M


def _unique_rows(a: np.ndarray):
    if a.shape[1] == 0:
        return np.zeros((1, 0), dtype=np.int64), np.zeros(a.shape[0], dtype=np.int64)
    if a.shape[1] == 1:
        u, inv = np.unique(a[:, 0], return_inverse=True)
        return u.reshape(-1, 1), inv.ravel()
    u, inv = np.unique(a, axis=0, return_inverse=True)
    return u, inv.ravel()


@dataclass(frozen=True, eq=False)
class DickeCode(CovariantCode):
    """Dicke-state code on ``N`` spins, analysed through binomial marginals only.

    Spin labels are ``0`` (down) and ``1`` (up); the local charge is
    ``sigma_z = 2 label - 1`` and the logical charge is the magnetization
    ``m`` of each codeword.  Reduced operators on ``k`` sites are expressed in
    the Dicke basis ``|h_r^k>`` of those sites, ``r = -k, -k+2, ..., k``.
    """

    levels: tuple = ()

    @property
    def d_L(self) -> int:
        return len(self.levels)

    @property
    def is_implicit(self) -> bool:
        return True

    def dicke_reduced(self, k: int):
        """``(r values, rho)`` with ``rho[x, x', a, b] = <h_{r_a}| rho_k^{m_x, m_x'} |h_{r_b}>``."""
        N = self.params["N"]
        r = np.arange(-k, k + 1, 2)
        K = np.array([[special.dicke_coefficient(int(ri), k, m, N) for ri in r] for m in self.levels])
        d = self.d_L
        rho = np.zeros((d, d, len(r), len(r)))
        for x, mx in enumerate(self.levels):
            for y, my in enumerate(self.levels):
                # r' = r + m' - m keeps the complementary magnetization fixed
                shift = my - mx
                for a, ra in enumerate(r):
                    rb = ra + shift
                    if -k <= rb <= k:
                        b = (rb + k) // 2
                        rho[x, y, a, b] = math.sqrt(K[x, a] * K[y, b])
        return r, rho

    def column_matrix(self, alpha):
        raise NotImplementedError("Dicke codewords are never expanded")


# ----------------------------------------------------------------------------
# constructors


def _rotor_charge(n: int, logical) -> ChargeSpec:
    return ChargeSpec(logical=tuple(float(v) for v in logical),
                      physical=tuple(PhysicalCharge() for _ in range(n)))


def three_rotor_sharp(h: int, m: int) -> CovariantCode:
    """Three-rotor code with a flat cutoff.

    ``|x> -> (2m+1)^{-1/2} sum_{y=-m}^{m} |-3y, y-x, 2(x+y)>`` for
    ``x = -h, ..., h``.  Subsystem labels are the local charges.

    Raises
    ------
    ValueError
        If ``m < h`` or ``h < 1``.
    """
    if h < 1 or m < h:
        raise ValueError("three_rotor_sharp needs m >= h >= 1")
    y = np.arange(-m, m + 1)
    amp = np.full(y.size, 1.0 / math.sqrt(2 * m + 1))
    cols = []
    for x in range(-h, h + 1):
        lab = np.stack([-3 * y, y - x, 2 * (x + y)], axis=1)
        cols.append(SparseState(lab, amp))
    return CovariantCode(
        family="three_rotor_sharp",
        params={"h": h, "m": m},
        columns=tuple(cols),
        charge=_rotor_charge(3, range(-h, h + 1)),
        n_sub=3,
        local_dims=(None, None, None),
        logical_labels=tuple(range(-h, h + 1)),
    )


def _envelope_cutoff(w: float, trunc_eps: float) -> tuple[int, float]:
    """Smallest ``Y`` whose neglected mass of ``exp(-y^2/2w^2)/c_w`` is below ``trunc_eps``."""
    cw = special.envelope_norm(w)
    Y = max(1, int(math.ceil(w * math.sqrt(2 * math.log(2.0 / trunc_eps)))))
    while True:
        tail = special.gaussian_tail_sum(Y, 0.0, w) / cw
        if tail < trunc_eps:
            # shrink while still valid, the formula above overshoots
            while Y > 1:
                t2 = special.gaussian_tail_sum(Y - 1, 0.0, w) / cw
                if t2 >= trunc_eps:
                    break
                Y, tail = Y - 1, t2
            return Y, tail
        Y += 1


def three_rotor_smooth(h: int, w: float, trunc_eps: float = 1e-12) -> CovariantCode:
    """Three-rotor code with a Gaussian envelope of width ``w``.

    ``|x> -> c_w^{-1/2} sum_y exp(-y^2/(4 w^2)) |-3y, y-x, 2(x+y)>`` with the sum
    truncated to ``|y| <= Y``.  ``Y`` is the smallest cutoff whose neglected
    weight is below ``trunc_eps``; the kept columns are renormalized and the
    neglected weight is stored in ``meta["truncation_mass"]``.
    """
    if h < 1:
        raise ValueError("h must be a positive integer")
    if w <= 0:
        raise ValueError("w must be positive")
    if not 0 < trunc_eps <= 1e-6:
        raise ValueError("trunc_eps must lie in (0, 1e-6]")
    Y, mass = _envelope_cutoff(w, trunc_eps)
    y = np.arange(-Y, Y + 1)
    amp = np.exp(-(y.astype(float) ** 2) / (4 * w * w))
    amp = amp / math.sqrt(np.sum(amp**2))
    cols = []
    for x in range(-h, h + 1):
        lab = np.stack([-3 * y, y - x, 2 * (x + y)], axis=1)
        cols.append(SparseState(lab, amp, normalize=True))
    return CovariantCode(
        family="three_rotor_smooth",
        params={"h": h, "w": w, "trunc_eps": trunc_eps},
        columns=tuple(cols),
        charge=_rotor_charge(3, range(-h, h + 1)),
        n_sub=3,
        local_dims=(None, None, None),
        meta={"Y": Y, "truncation_mass": mass, "truncation_slack": math.sqrt(mass),
              "c_w": special.envelope_norm(w)},
        logical_labels=tuple(range(-h, h + 1)),
    )


def three_qutrit() -> CovariantCode:
    """Qutrit secret-sharing code ``|j> -> 3^{-1/2} sum_k |k, k-j, k+j>`` (mod 3).

    Covariant under ``Z_3`` generated by ``Z (x) 1 (x) Z^-1``; the logical
    charge of ``|j>`` is ``-j mod 3``.
    """
    cols = []
    for j in range(3):
        k = np.arange(3)
        lab = np.stack([k, (k - j) % 3, (k + j) % 3], axis=1)
        cols.append(SparseState(lab, np.full(3, 1 / math.sqrt(3))))
    charge = ChargeSpec(logical=tuple(float((-j) % 3) for j in range(3)),
                        physical=(PhysicalCharge(1.0), PhysicalCharge(0.0), PhysicalCharge(-1.0)),
                        modulus=3)
    return CovariantCode("three_qutrit", {}, tuple(cols), charge, 3, (3, 3, 3))


def five_qudit_perfect(D: int) -> CovariantCode:
    """Five-qudit code from the tensor ``delta_{x, j+k+l+m+n} omega^{jk+kl+lm+mn+nj}``.

    Indices are taken mod ``D`` and ``omega = exp(2 pi i / D)``.  Each codeword
    has ``D^4`` terms of modulus ``1/D^2``.
    """
    if D < 2:
        raise ValueError("D must be at least 2")
    g = np.array(np.meshgrid(*[np.arange(D)] * 4, indexing="ij")).reshape(4, -1).T
    cols = []
    for x in range(D):
        n = (x - g.sum(axis=1)) % D
        lab = np.concatenate([g, n[:, None]], axis=1)
        j, k, l, m_, nn = lab.T
        e = (j * k + k * l + l * m_ + m_ * nn + nn * j) % D
        cols.append(SparseState(lab, np.exp(2j * np.pi * e / D) / D**2))
    charge = ChargeSpec(logical=tuple(float(x) for x in range(D)),
                        physical=tuple(PhysicalCharge() for _ in range(5)), modulus=D)
    return CovariantCode("five_qudit_perfect", {"D": D}, tuple(cols), charge, 5, (D,) * 5)


def _five_rotor_phase(lab: np.ndarray) -> np.ndarray:
    j, k, l, m, n = (lab[:, i].astype(float) for i in range(5))
    return j * k + k * l + l * m + m * n + n * j


def five_rotor_norm(w: float, x: int) -> float:
    """Untruncated normalization ``c_{w,x} = sum_{j+k+l+m+n=x} exp(-sum j^2/(2 w^2))``."""
    Y = int(math.ceil(w * 12)) + abs(x) + 2
    t = np.arange(-Y, Y + 1)
    u = np.exp(-(t.astype(float) ** 2) / (2 * w * w))
    c = u.copy()
    for _ in range(4):
        c = np.convolve(c, u)
    off = 5 * Y
    return float(c[x + off])


def _ball_points(x: int, R2: float) -> np.ndarray:
    """Integer points in Z^5 with coordinate sum ``x`` and squared norm ``<= R2``."""
    R = int(math.floor(math.sqrt(R2))) + 1
    r = np.arange(-R, R + 1)
    km = np.array(np.meshgrid(r, r, r, indexing="ij")).reshape(3, -1).T
    q3 = (km.astype(float) ** 2).sum(axis=1)
    s3 = km.sum(axis=1)
    chunks = []
    for j in r:
        n = x - j - s3
        tot = j * j + q3 + n.astype(float) ** 2
        sel = tot <= R2
        if np.any(sel):
            chunks.append(np.concatenate(
                [np.full((int(sel.sum()), 1), j), km[sel], n[sel, None]], axis=1))
    return np.concatenate(chunks, axis=0).astype(np.int64)


def five_rotor_smooth(h: int, w: float, phi: float = DEFAULT_PHI, trunc_eps: float = 1e-6,
                      max_terms: int = 5_000_000) -> CovariantCode:
    """Five-rotor code with a cyclic Gaussian envelope.

    Column ``x`` (``x = -h..h``) is the normalized sum over ``(j,k,l,m,n)`` with
    ``j+k+l+m+n = x`` of ``exp(-(j^2+...+n^2)/(4 w^2)) exp(2 pi i phi
    (jk+kl+lm+mn+nj))``.  The lattice is cut to a ball ``sum j_i^2 <= R^2``,
    which respects the cyclic symmetry; ``R`` grows until the neglected
    weight of every column is below ``trunc_eps``.

    Raises
    ------
    MemoryError
        If a column would exceed ``max_terms`` stored kets.
    """
    if h < 1 or w <= 0 or phi <= 0:
        raise ValueError("need h >= 1, w > 0, phi > 0")
    if not 0 < trunc_eps <= 1e-6:
        raise ValueError("trunc_eps must lie in (0, 1e-6]")
    # the constrained Gaussian is chi^2 with 4 dof in units of w^2
    t = 8.0
    while math.exp(-t / 2) * (1 + t / 2) > trunc_eps:
        t += 0.25
    R2 = w * w * t + h * h / 5.0
    cols, masses = [], []
    for x in range(-h, h + 1):
        cx = five_rotor_norm(w, x)
        while True:
            est = math.pi**2 / 2 * R2**2 / math.sqrt(5)
            if est > max_terms:
                raise MemoryError(f"five-rotor column needs about {est:.0f} kets")
            lab = _ball_points(x, R2)
            r2 = (lab.astype(float) ** 2).sum(axis=1)
            wt = np.exp(-r2 / (2 * w * w))
            mass = 1.0 - wt.sum() / cx
            if mass < trunc_eps:
                break
            R2 *= 1.1
        amp = np.sqrt(wt) * np.exp(2j * np.pi * phi * _five_rotor_phase(lab))
        cols.append(SparseState(lab, amp, normalize=True))
        masses.append(max(mass, 0.0))
    mass = max(masses)
    return CovariantCode(
        family="five_rotor_smooth",
        params={"h": h, "w": w, "phi": phi, "trunc_eps": trunc_eps},
        columns=tuple(cols),
        charge=_rotor_charge(5, range(-h, h + 1)),
        n_sub=5,
        local_dims=(None,) * 5,
        meta={"R2": R2, "truncation_mass": mass, "truncation_slack": math.sqrt(mass)},
        logical_labels=tuple(range(-h, h + 1)),
    )


def five_rotor_single_site(w: float, phi: float, x: int, xp: int, dps: int = 60):
    """High-precision single-site reduced operator of the untruncated five-rotor code.

    The operator ``rho_1^{x,x'}`` is supported on the band ``|j><j - (x - x')|``
    and its entries are, with ``u(k) = exp(-k^2/(2 w^2))`` and ``g = u * u``,

        exp(-(j^2 + j'^2)/(4 w^2)) / sqrt(c_x c_x') *
        sum_a exp(2 pi i phi (x - x') a) g(a) g(x - j - a),

    where ``a`` collects the two neighbours of the erased site.  All lattice
    sums run until terms fall below ``10^-dps`` relative to the peak.

    Returns
    -------
    j : ndarray of int
        Row labels of the band.
    vals : ndarray of complex
        Band entries, rounded to double precision at the end.
    """
    import mpmath

    with mpmath.workdps(dps):
        w2 = mpmath.mpf(w) ** 2
        cut = int(math.ceil(float(w) * math.sqrt(2 * dps * math.log(10)))) + abs(x) + abs(xp) + 2
        ks = range(-2 * cut, 2 * cut + 1)
        u = {k: mpmath.exp(-mpmath.mpf(k) ** 2 / (2 * w2)) for k in range(-2 * cut, 2 * cut + 1)}

        def conv(f, g_, lo, hi):
            out = {}
            for a in range(lo, hi + 1):
                s = mpmath.mpf(0)
                for k in f:
                    if (a - k) in g_:
                        s += f[k] * g_[a - k]
                out[a] = s
            return out

        base = {k: u[k] for k in range(-cut, cut + 1)}
        g = conv(base, base, -2 * cut, 2 * cut)
        g4 = conv(g, g, -2 * cut, 2 * cut)

        def norm(xx):
            return mpmath.fsum(base[j] * g4[xx - j] for j in range(-cut, cut + 1) if (xx - j) in g4)

        cx, cxp = norm(x), norm(xp)
        delta = x - xp
        two_pi_phi = 2 * mpmath.pi * mpmath.mpf(phi) * delta
        js, vals = [], []
        for j in range(-cut, cut + 1):
            jp = j - delta
            if not -cut <= jp <= cut:
                continue
            s = x - j
            acc = mpmath.mpc(0)
            for a in g:
                b = s - a
                if b in g:
                    acc += mpmath.exp(1j * two_pi_phi * a) * g[a] * g[b]
            pref = mpmath.exp(-(mpmath.mpf(j) ** 2 + mpmath.mpf(jp) ** 2) / (4 * w2)) / mpmath.sqrt(cx * cxp)
            js.append(j)
            vals.append(complex(pref * acc))
    return np.array(js), np.array(vals)


def dicke_thermo(N: int, d: int, levels: int = 2) -> DickeCode:
    """Dicke-state code on ``N`` spins protecting against loss of ``d`` sites.

    The codewords are Dicke states of magnetization
    ``m_0, m_0 + 2(2d+1), ...`` with ``m_0 = -((levels-1)//2) * 2(2d+1)``, so
    two levels give ``m in {0, 4d+2}``.  The spacing exceeds ``2d`` which makes
    the off-diagonal reduced operators on ``d`` sites vanish exactly.

    Raises
    ------
    ValueError
        On odd ``N`` or when a level exceeds ``N/2`` in magnitude.
    """
    if N % 2:
        raise ValueError("N must be even")
    if d < 1 or levels < 1 or d > N:
        raise ValueError("need 1 <= d <= N and levels >= 1")
    step = 2 * (2 * d + 1)
    m0 = -((levels - 1) // 2) * step
    ms = tuple(m0 + i * step for i in range(levels))
    if any(abs(m) > N // 2 for m in ms):
        raise ValueError("magnetization levels must satisfy |m| <= N/2")
    if any((N + m) % 2 for m in ms):
        raise ValueError("parity mismatch between N and m")
    charge = ChargeSpec(logical=tuple(float(m) for m in ms),
                        physical=tuple(PhysicalCharge(table=((0, -1.0), (1, 1.0))) for _ in range(N)))
    return DickeCode(
        family="dicke_thermo",
        params={"N": N, "d": d, "levels": levels},
        columns=None,
        charge=charge,
        n_sub=N,
        local_dims=(2,) * N,
        levels=ms,
        logical_labels=ms,
    )


def w_state_code(d_L: int, n: int) -> CovariantCode:
    """W-state code ``|x> -> n^{-1/2} sum_i |bot..x_i..bot>`` on ``n`` qudits of dim ``d_L+1``.

    The extra label ``bot`` is stored as ``d_L``.  Logical charges are
    ``x - (d_L-1)/2`` and the local charge assigns the logical charge to label
    ``x`` and zero to ``bot``.
    """
    if d_L < 1 or n < 1:
        raise ValueError("need d_L >= 1 and n >= 1")
    cols = []
    for x in range(d_L):
        lab = np.full((n, n), d_L, dtype=np.int64)
        np.fill_diagonal(lab, x)
        cols.append(SparseState(lab, np.full(n, 1 / math.sqrt(n))))
    t = [x - (d_L - 1) / 2 for x in range(d_L)]
    table = tuple([(x, t[x]) for x in range(d_L)] + [(d_L, 0.0)])
    charge = ChargeSpec(logical=tuple(t), physical=tuple(PhysicalCharge(table=table) for _ in range(n)))
    return CovariantCode("w_state", {"d_L": d_L, "n": n}, tuple(cols), charge, n, (d_L + 1,) * n)


def repetition_code(d_L: int, n: int) -> CovariantCode:
    """``|x> -> |x, x, ..., x>``; every subsystem holds a full copy of the logical label."""
    cols = [SparseState(np.full((1, n), x), [1.0]) for x in range(d_L)]
    t = [x - (d_L - 1) / 2 for x in range(d_L)]
    charge = ChargeSpec(logical=tuple(n * v for v in t),
                        physical=tuple(PhysicalCharge(table=tuple((x, t[x]) for x in range(d_L)))
                                       for _ in range(n)))
    return CovariantCode("repetition", {"d_L": d_L, "n": n}, tuple(cols), charge, n, (d_L,) * n)


# ----------------------------------------------------------------------------
# verification


def _column_sparse(code: CovariantCode):
    lab = np.concatenate([c.labels for c in code.columns], axis=0)
    amp = np.concatenate([c.amps for c in code.columns])
    col = np.repeat(np.arange(code.d_L), [len(c) for c in code.columns])
    u, inv = _unique_rows(lab)
    A = sp.csr_matrix((amp, (inv, col)), shape=(u.shape[0], code.d_L))
    return u, A


def verify_isometry(code: CovariantCode) -> float:
    """``max |<psi_x|psi_x'> - delta_{x x'}|`` over all column pairs."""
    if code.is_implicit:
        return 0.0
    _, A = _column_sparse(code)
    G = (A.conj().T @ A).toarray()
    return float(np.abs(G - np.eye(code.d_L)).max())


def verify_covariance(code: CovariantCode) -> tuple[float, float]:
    """Best offset ``nu`` and residual ``delta = ||(T_L - nu) - V^dag T_A V||_inf``.

    For ``U(1)`` charges the optimal ``nu`` is the midpoint of the spectrum of
    ``T_L - V^dag T_A V``.  For ``Z_M`` charges the residual is the largest
    deviation of ``exp(2 pi i T_A / M)`` from the expected phase on any stored
    ket, with ``nu`` fixed by the first ket of column 0.
    """
    if code.charge is None:
        raise ValueError("code carries no abelian charge")
    ch = code.charge
    if code.is_implicit:
        # Dicke codewords have sharp magnetization equal to the logical charge
        return 0.0, 0.0
    if ch.modulus is not None:
        M = ch.modulus
        tot0 = ch.site_charges(code.columns[0].labels[:1], range(code.n_sub)).sum()
        nu = float((ch.logical[0] - tot0) % M)
        dev = 0.0
        for x, col in enumerate(code.columns):
            tot = ch.site_charges(col.labels, range(code.n_sub)).sum(axis=1)
            ph = np.exp(2j * np.pi * tot / M)
            want = np.exp(2j * np.pi * (ch.logical[x] - nu) / M)
            dev = max(dev, float(np.abs(ph - want).max()))
        return nu, dev
    u, A = _column_sparse(code)
    tA = ch.site_charges(u, range(code.n_sub)).sum(axis=1)
    VTV = (A.conj().T @ sp.diags(tA) @ A).toarray()
    Dm = ch.T_L - VTV
    Dm = 0.5 * (Dm + Dm.conj().T)
    ev = np.linalg.eigvalsh(Dm)
    nu = 0.5 * (ev[0] + ev[-1])
    delta = 0.5 * (ev[-1] - ev[0])
    if abs(nu) < 1e-13:
        nu = 0.0
    return float(nu), float(max(delta, 0.0))


# ----------------------------------------------------------------------------
# serialization


def code_to_json(code: CovariantCode) -> dict:
    """JSON form ``{family, params, columns, charges, ...}``.

    Each column is a list of ``[label-tuple, re, im]`` entries.
    """
    if code.is_implicit:
        cols = None
    else:
        cols = [[[row.tolist(), float(a.real), float(a.imag)] for row, a in zip(c.labels, c.amps)]
                for c in code.columns]
    extra = {}
    if hasattr(code, "group"):
        extra["group"] = code.group.to_json()
    return {
        "family": code.family,
        "params": code.params,
        "columns": cols,
        "charges": None if code.charge is None else code.charge.to_json(),
        "n_sub": code.n_sub,
        "local_dims": list(code.local_dims) if not code.is_implicit else None,
        "meta": code.meta,
        "logical_labels": None if code.logical_labels is None else [
            list(v) if isinstance(v, tuple) else v for v in code.logical_labels],
        **extra,
    }


def code_from_json(d: dict) -> CovariantCode:
    """Inverse of :func:`code_to_json`."""
    if d["family"] == "dicke_thermo":
        p = d["params"]
        return dicke_thermo(p["N"], p["d"], p["levels"])
    cols = []
    for c in d["columns"]:
        lab = np.array([e[0] for e in c], dtype=np.int64)
        amp = np.array([complex(e[1], e[2]) for e in c])
        cols.append(SparseState(lab, amp))
    charge = None if d.get("charges") is None else ChargeSpec.from_json(d["charges"])
    ll = d.get("logical_labels")
    if ll is not None:
        ll = tuple(tuple(v) if isinstance(v, list) else v for v in ll)
    kw = dict(family=d["family"], params=d["params"], columns=tuple(cols), charge=charge,
              n_sub=int(d["n_sub"]), local_dims=tuple(d["local_dims"]), meta=d.get("meta", {}),
              logical_labels=ll)
    if "group" in d:
        from .groupcodes import FiniteGroup, GroupCode

        return GroupCode(**kw, group=FiniteGroup.from_json(d["group"]))
    return CovariantCode(**kw)
