"""Compact matrix groups SO(n), SU(n), Sp(n) and the seven quotient
families built on them.

Sp(n) points are stored in the 2n x 2n complex form
``q = z + jw  ->  [[z, w], [-conj(w), conj(z)]]``. All quotient
computations happen in the total group; a quotient is described by its
total group, the subgroup K and an orthonormal basis of the horizontal
space m (the orthogonal complement of Lie(K)).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from symmin.matrix_core import D, Dt, X, Y, matrix_exp, trace_metric

GS_TOL = 1e-10

SPACE_IDS = (
    "so_n",
    "su_n",
    "sp_n",
    "su_n_so_n",
    "sp_n_u_n",
    "so_2n_u_n",
    "su_2n_sp_n",
    "gr_r",
    "gr_c",
    "gr_h",
)
GROUP_SPACES = ("so_n", "su_n", "sp_n")
GRASSMANNIANS = ("gr_r", "gr_c", "gr_h")

_LABELS = {
    "so_n": "SO({n})",
    "su_n": "SU({n})",
    "sp_n": "Sp({n})",
    "su_n_so_n": "SU({n})/SO({n})",
    "sp_n_u_n": "Sp({n})/U({n})",
    "so_2n_u_n": "SO({n2})/U({n})",
    "su_2n_sp_n": "SU({n2})/Sp({n})",
    "gr_r": "SO({N})/SO({m})xSO({n})",
    "gr_c": "U({N})/U({m})xU({n})",
    "gr_h": "Sp({N})/Sp({m})xSp({n})",
}


class MembershipError(ValueError):
    """A point or tangent vector violates the group/algebra relations."""


@dataclass(frozen=True)
class GroupId:
    family: str
    n: int

    def __post_init__(self):
        if self.family not in ("SO", "SU", "Sp"):
            raise ValueError(f"unknown group family {self.family!r}")
        if self.n < 1:
            raise ValueError("group size must be positive")

    @property
    def embedding_dim(self) -> int:
        return 2 * self.n if self.family == "Sp" else self.n

    @property
    def real_dim(self) -> int:
        n = self.n
        if self.family == "SO":
            return n * (n - 1) // 2
        if self.family == "SU":
            return n * n - 1
        return n * (2 * n + 1)

    def __str__(self):
        return f"{self.family}({self.n})"


def _table_row(space_id: str, n: int, m: Optional[int]):
    F = Fraction
    if space_id == "so_n":
        return F(-(n - 1), 2), F(-1, 2)
    if space_id == "su_n":
        return F(-(n * n - 1), n), F(-(n - 1), n)
    if space_id == "sp_n":
        return F(-(2 * n + 1), 2), F(-1, 2)
    if space_id == "su_n_so_n":
        return F(-2 * (n * n + n - 2), n), F(-4 * (n - 1), n)
    if space_id == "sp_n_u_n":
        return F(-2 * (n + 1)), F(-2)
    if space_id == "so_2n_u_n":
        return F(-2 * (n - 1)), F(-1)
    if space_id == "su_2n_sp_n":
        return F(-2 * (2 * n * n - n - 1), n), F(-2 * (n - 1), n)
    N = m + n
    if space_id == "gr_r":
        return F(-N), F(-2)
    if space_id == "gr_c":
        return F(-2 * N), F(-2)
    return F(-2 * N), F(-1)


@dataclass(frozen=True)
class SpaceDescriptor:
    """One of the ten families at concrete sizes.

    For the Grassmannians ``m`` is the dimension of the subspaces and ``n``
    the codimension; elsewhere ``m`` is None.
    """

    space: str
    n: int
    m: Optional[int] = None
    total_group: GroupId = field(init=False)
    expected_lambda: Fraction = field(init=False)
    expected_mu: Fraction = field(init=False)

    def __post_init__(self):
        sid, n, m = self.space, self.n, self.m
        if sid not in SPACE_IDS:
            raise ValueError(f"unknown space {sid!r}; expected one of {SPACE_IDS}")
        if n < 1:
            raise ValueError("n must be positive")
        if sid in GRASSMANNIANS:
            if m is None or m < 1:
                raise ValueError(f"{sid} needs m >= 1")
            if sid == "gr_r" and m == 1 and n == 1:
                raise ValueError("gr_r needs (m, n) != (1, 1)")
            if m + n > 8:
                raise ValueError("supported range is m + n <= 8")
        else:
            if m is not None:
                raise ValueError(f"{sid} takes no m")
            if n > 8:
                raise ValueError("supported range is n <= 8")
        if sid == "so_n" and n < 3:
            raise ValueError("so_n needs n >= 3")
        if sid == "su_n" and n < 2:
            raise ValueError("su_n needs n >= 2")
        if sid == "su_n_so_n" and n < 2:
            raise ValueError("su_n_so_n needs n >= 2")
        if sid == "so_2n_u_n" and n < 2:
            raise ValueError("so_2n_u_n needs n >= 2")
        if sid == "su_2n_sp_n" and 2 * n > 8:
            raise ValueError("supported range is 2n <= 8")
        if sid == "so_2n_u_n" and 2 * n > 8:
            raise ValueError("supported range is 2n <= 8")

        if sid in ("so_n", "gr_r", "so_2n_u_n"):
            fam = "SO"
        elif sid in ("sp_n", "sp_n_u_n", "gr_h"):
            fam = "Sp"
        else:
            fam = "SU"
        size = n
        if sid in ("so_2n_u_n", "su_2n_sp_n"):
            size = 2 * n
        elif sid in GRASSMANNIANS:
            size = m + n
        lam, mu = _table_row(sid, n, m)
        object.__setattr__(self, "total_group", GroupId(fam, size))
        object.__setattr__(self, "expected_lambda", lam)
        object.__setattr__(self, "expected_mu", mu)

    @property
    def is_quotient(self) -> bool:
        return self.space not in GROUP_SPACES

    @property
    def label(self) -> str:
        N = (self.m or 0) + self.n
        return _LABELS[self.space].format(n=self.n, n2=2 * self.n, m=self.m, N=N)

    @property
    def horizontal_basis_recipe(self) -> str:
        return "full-algebra" if not self.is_quotient else f"m:{self.space}"

    def to_json(self) -> dict:
        return {
            "space": self.space,
            "label": self.label,
            "n": self.n,
            "m": self.m,
            "total_group": str(self.total_group),
            "lambda": str(self.expected_lambda),
            "mu": str(self.expected_mu),
        }

    def __str__(self):
        return self.label


def space(space_id: str, n: int, m: Optional[int] = None) -> SpaceDescriptor:
    return SpaceDescriptor(space_id, n, m)


@dataclass(frozen=True)
class TangentBasis:
    elements: tuple
    kind: str

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    def gram(self) -> np.ndarray:
        return gram_matrix(self.elements)


def gram_matrix(mats: Sequence[np.ndarray]) -> np.ndarray:
    if len(mats) == 0:
        return np.zeros((0, 0))
    flat = np.array([np.ravel(M) for M in mats])
    return np.real(flat.conj() @ flat.T)


def orthonormalize(mats: Sequence[np.ndarray], tol: float = GS_TOL) -> List[np.ndarray]:
    """Modified Gram-Schmidt in the trace metric, dropping dependent input."""
    out: List[np.ndarray] = []
    for M in mats:
        V = np.array(M, dtype=complex)
        for _ in range(2):
            for B in out:
                V = V - trace_metric(B, V) * B
        nrm = np.sqrt(max(trace_metric(V, V), 0.0))
        if nrm > tol:
            out.append(V / nrm)
    return out


# ---------------------------------------------------------------------------
# block helpers


def _blk(a, b, c, d):
    return np.block([[a, b], [c, d]])


def _sp_embed(z, w):
    return _blk(z, w, -np.conj(w), np.conj(z))


def _zero(n):
    return np.zeros((n, n), dtype=complex)


def _pairs(n):
    return [(r, s) for r in range(1, n + 1) for s in range(r + 1, n + 1)]


# ---------------------------------------------------------------------------
# Lie algebra bases


def _so_basis(n):
    return [Y(r, s, n) for r, s in _pairs(n)]


def _su_basis(n):
    out = [Y(r, s, n) for r, s in _pairs(n)]
    out += [1j * X(r, s, n) for r, s in _pairs(n)]
    out += orthonormalize([1j * D(r, s, n) for r, s in _pairs(n)])
    return out


def _sp_element(kind, r, s, n):
    """One element of the orthonormal basis of sp(n) (s unused for D_t)."""
    c = 1 / np.sqrt(2)
    Z0 = _zero(n)
    if kind == "Ya":
        M = Y(r, s, n)
        return c * _blk(M, Z0, Z0, M)
    M = X(r, s, n) if kind[0] == "X" else Dt(r, n)
    tail = kind[1]
    if tail == "a":
        return c * _blk(1j * M, Z0, Z0, -1j * M)
    if tail == "b":
        return c * _blk(Z0, 1j * M, 1j * M, Z0)
    return c * _blk(Z0, M, -M, Z0)


def _sp_basis(n, pairs=None, diag=None):
    pairs = _pairs(n) if pairs is None else pairs
    diag = range(1, n + 1) if diag is None else diag
    out = []
    for r, s in pairs:
        for kind in ("Ya", "Xa", "Xb", "Xc"):
            out.append(_sp_element(kind, r, s, n))
    for t in diag:
        for kind in ("Da", "Db", "Dc"):
            out.append(_sp_element(kind, t, None, n))
    return out


def algebra_basis(group: GroupId) -> TangentBasis:
    """Orthonormal basis (trace metric) of the Lie algebra of ``group``."""
    n = group.n
    if group.family == "SO":
        els = _so_basis(n)
    elif group.family == "SU":
        els = _su_basis(n)
    else:
        els = _sp_basis(n)
    return TangentBasis(tuple(els), "full-algebra")


def _horizontal_spanning(sp: SpaceDescriptor) -> List[np.ndarray]:
    sid, n, m = sp.space, sp.n, sp.m
    Z0 = _zero(n)
    if sid == "su_n_so_n":
        return [1j * X(r, s, n) for r, s in _pairs(n)] + [1j * D(r, s, n) for r, s in _pairs(n)]
    if sid == "sp_n_u_n":
        out = []
        for r, s in _pairs(n):
            M = X(r, s, n)
            out.append(0.5j * _blk(M, Z0, Z0, -M))
            out.append(0.5j * _blk(Z0, M, M, Z0))
        for t in range(1, n + 1):
            M = Dt(t, n)
            out.append(1j / np.sqrt(2) * _blk(M, Z0, Z0, -M))
            out.append(1j / np.sqrt(2) * _blk(Z0, M, M, Z0))
        return out
    if sid == "so_2n_u_n":
        out = []
        for r, s in _pairs(n):
            M = Y(r, s, n)
            out.append(_blk(M, Z0, Z0, -M) / np.sqrt(2))
            out.append(_blk(Z0, M, M, Z0) / np.sqrt(2))
        return out
    if sid == "su_2n_sp_n":
        out = []
        for r, s in _pairs(n):
            Ym, Xm = Y(r, s, n), X(r, s, n)
            out.append(0.5 * _blk(Ym, Z0, Z0, -Ym))
            out.append(0.5 * _blk(1j * Xm, Z0, Z0, 1j * Xm))
            out.append(0.5 * _blk(Z0, Ym, Ym, Z0))
            out.append(0.5 * _blk(Z0, 1j * Ym, -1j * Ym, Z0))
        for r, s in _pairs(n):
            Dm = D(r, s, n)
            out.append(0.5 * _blk(1j * Dm, Z0, Z0, 1j * Dm))
        return out
    N = m + n
    cross = [(r, s) for r in range(1, m + 1) for s in range(m + 1, N + 1)]
    if sid == "gr_r":
        return [Y(r, s, N) for r, s in cross]
    if sid == "gr_c":
        return [Y(r, s, N) for r, s in cross] + [1j * X(r, s, N) for r, s in cross]
    if sid == "gr_h":
        return _sp_basis(N, pairs=cross, diag=[])
    raise ValueError(f"{sid} is not a quotient family")


def horizontal_basis(sp: SpaceDescriptor) -> TangentBasis:
    """Orthonormal basis of the horizontal space m of the quotient ``sp``.

    The listed generators are orthonormalized; dependent ones (the D_rs
    spanning sets) are dropped.
    """
    if not sp.is_quotient:
        raise ValueError(f"{sp.space} is a group, not a quotient family")
    return TangentBasis(tuple(orthonormalize(_horizontal_spanning(sp))), "horizontal-m")


def _subgroup_spanning(sp: SpaceDescriptor) -> List[np.ndarray]:
    sid, n, m = sp.space, sp.n, sp.m
    Z0 = _zero(n)
    if sid == "su_n_so_n":
        return _so_basis(n)
    if sid in ("sp_n_u_n", "so_2n_u_n"):
        # u(n) as d/dt of x+iy -> [[x, y], [-y, x]] (Sp) or [[x, -y], [y, x]] (SO)
        sgn = 1 if sid == "sp_n_u_n" else -1
        out = []
        for r, s in _pairs(n):
            M = Y(r, s, n)
            out.append(_blk(M, Z0, Z0, M))
        sym = [X(r, s, n) for r, s in _pairs(n)] + [Dt(t, n) for t in range(1, n + 1)]
        for M in sym:
            out.append(_blk(Z0, sgn * M, -sgn * M, Z0))
        return out
    if sid == "su_2n_sp_n":
        # sp(n) in the [[Z, -conj(W)], [W, conj(Z)]] parameterization
        out = []
        skew = [Y(r, s, n) for r, s in _pairs(n)]
        skew += [1j * X(r, s, n) for r, s in _pairs(n)]
        skew += [1j * Dt(t, n) for t in range(1, n + 1)]
        for Zm in skew:
            out.append(_blk(Zm, Z0, Z0, np.conj(Zm)))
        sym = [X(r, s, n) for r, s in _pairs(n)] + [Dt(t, n) for t in range(1, n + 1)]
        for Wr in sym:
            for Wm in (Wr, 1j * Wr):
                out.append(_blk(Z0, -np.conj(Wm), Wm, Z0))
        return out
    N = m + n
    inner = [(r, s) for r, s in _pairs(N) if s <= m or r > m]
    if sid == "gr_r":
        return [Y(r, s, N) for r, s in inner]
    if sid == "gr_c":
        out = [Y(r, s, N) for r, s in inner] + [1j * X(r, s, N) for r, s in inner]
        out += [1j * D(t, t + 1, N) for t in range(1, N)]
        return out
    if sid == "gr_h":
        return _sp_basis(N, pairs=inner)
    raise ValueError(f"{sid} is not a quotient family")


def subgroup_basis(sp: SpaceDescriptor) -> TangentBasis:
    """Orthonormal basis of Lie(K) inside the total group's algebra."""
    if not sp.is_quotient:
        raise ValueError(f"{sp.space} is a group, not a quotient family")
    return TangentBasis(tuple(orthonormalize(_subgroup_spanning(sp))), "subgroup-k")


def subgroup_dim(sp: SpaceDescriptor) -> int:
    """dim K from the family formula."""
    sid, n, m = sp.space, sp.n, sp.m
    if sid == "su_n_so_n":
        return n * (n - 1) // 2
    if sid in ("sp_n_u_n", "so_2n_u_n"):
        return n * n
    if sid == "su_2n_sp_n":
        return n * (2 * n + 1)
    if sid == "gr_r":
        return m * (m - 1) // 2 + n * (n - 1) // 2
    if sid == "gr_c":
        return m * m + n * n - 1
    if sid == "gr_h":
        return m * (2 * m + 1) + n * (2 * n + 1)
    raise ValueError(f"{sid} is not a quotient family")


# ---------------------------------------------------------------------------
# membership


def _fro(A):
    return float(np.linalg.norm(A))


def membership_residual(group: GroupId, x: np.ndarray) -> float:
    """Deviation of ``x`` from the defining relations of ``group``; 0 iff member."""
    x = np.asarray(x, dtype=complex)
    d = group.embedding_dim
    if x.shape != (d, d):
        raise ValueError(f"{group} expects {d}x{d} matrices, got {x.shape}")
    res = _fro(x @ x.conj().T - np.eye(d))
    if group.family == "SO":
        res = max(res, abs(np.linalg.det(x) - 1), _fro(x.imag))
    elif group.family == "SU":
        res = max(res, abs(np.linalg.det(x) - 1))
    else:
        n = group.n
        res = max(res, _fro(x - _sp_embed(x[:n, :n], x[:n, n:])))
    return float(res)


def algebra_residual(group: GroupId, V: np.ndarray) -> float:
    V = np.asarray(V, dtype=complex)
    d = group.embedding_dim
    if V.shape != (d, d):
        raise ValueError(f"{group} expects {d}x{d} matrices, got {V.shape}")
    res = _fro(V + V.conj().T)
    if group.family == "SO":
        res = max(res, _fro(V.imag))
    elif group.family == "SU":
        res = max(res, abs(np.trace(V)))
    else:
        n = group.n
        res = max(res, _fro(V - _sp_embed(V[:n, :n], V[:n, n:])))
    return float(res)


def check_member(group: GroupId, x: np.ndarray, tol: float = 1e-9) -> None:
    res = membership_residual(group, x)
    if not res < tol:
        raise MembershipError(f"point not in {group}: residual {res:.3e} >= {tol:g}")


# ---------------------------------------------------------------------------
# sampling


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _haar_orthogonal(n, rng):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    return Q


def _haar_unitary(n, rng):
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def _haar_sp(n, rng):
    """Quaternionic Gram-Schmidt on Gaussian columns, complex form."""

    def pair(c):
        return np.concatenate([-np.conj(c[n:]), np.conj(c[:n])])

    cols = []
    for _ in range(n):
        c = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
        for _ in range(2):
            for b in cols:
                c = c - np.vdot(b, c) * b
                pb = pair(b)
                c = c - np.vdot(pb, c) * pb
        cols.append(c / np.linalg.norm(c))
    return np.column_stack(cols + [pair(c) for c in cols])


def haar_sample(group: GroupId, rng_seed=0) -> np.ndarray:
    """Haar-distributed element of ``group``.

    ``rng_seed`` is anything ``numpy.random.default_rng`` accepts (an int, a
    tuple of ints) or a Generator.
    """
    rng = _rng(rng_seed)
    n = group.n
    if group.family == "SO":
        Q = _haar_orthogonal(n, rng)
        if np.linalg.det(Q) < 0:
            Q[:, -1] = -Q[:, -1]
        return Q.astype(complex)
    if group.family == "SU":
        Q = _haar_unitary(n, rng)
        Q[:, -1] = Q[:, -1] / np.linalg.det(Q)
        return Q
    return _haar_sp(n, rng)


def unitary_in_sp(u: np.ndarray) -> np.ndarray:
    """x + iy in U(n) -> [[x, y], [-y, x]] in Sp(n)."""
    return _blk(u.real, u.imag, -u.imag, u.real).astype(complex)


def unitary_in_so(u: np.ndarray) -> np.ndarray:
    """x + iy in U(n) -> [[x, -y], [y, x]] in SO(2n)."""
    return _blk(u.real, -u.imag, u.imag, u.real).astype(complex)


def sp_in_su(q: np.ndarray) -> np.ndarray:
    """Sp(n) element as a point of SU(2n).

    The [[z, w], [-conj w, conj z]] form and the [[Z, -conj W], [W, conj Z]]
    form describe the same matrix set (take W = -conj w), so the embedding is
    the inclusion; only the parameterization of the block entries differs.
    """
    return np.asarray(q, dtype=complex).copy()


def subgroup_sample(sp: SpaceDescriptor, rng_seed=0) -> np.ndarray:
    """Haar sample of K embedded in the total group."""
    rng = _rng(rng_seed)
    sid, n, m = sp.space, sp.n, sp.m
    if sid == "su_n_so_n":
        return haar_sample(GroupId("SO", n), rng)
    if sid == "sp_n_u_n":
        return unitary_in_sp(_haar_unitary(n, rng))
    if sid == "so_2n_u_n":
        return unitary_in_so(_haar_unitary(n, rng))
    if sid == "su_2n_sp_n":
        return sp_in_su(haar_sample(GroupId("Sp", n), rng))
    if sid == "gr_r":
        out = np.zeros((m + n, m + n), dtype=complex)
        out[:m, :m] = haar_sample(GroupId("SO", m), rng) if m > 1 else 1
        out[m:, m:] = haar_sample(GroupId("SO", n), rng) if n > 1 else 1
        return out
    if sid == "gr_c":
        out = np.zeros((m + n, m + n), dtype=complex)
        out[:m, :m] = _haar_unitary(m, rng)
        out[m:, m:] = _haar_unitary(n, rng)
        out[:, -1] /= np.linalg.det(out)
        return out
    if sid == "gr_h":
        q1 = haar_sample(GroupId("Sp", m), rng)
        q2 = haar_sample(GroupId("Sp", n), rng)
        z = np.zeros((m + n, m + n), dtype=complex)
        w = np.zeros_like(z)
        z[:m, :m], w[:m, :m] = q1[:m, :m], q1[:m, m:]
        z[m:, m:], w[m:, m:] = q2[:n, :n], q2[:n, n:]
        return _sp_embed(z, w)
    raise ValueError(f"{sid} is not a quotient family")


# ---------------------------------------------------------------------------
# retraction


def retract(x: np.ndarray, V: np.ndarray, group: Optional[GroupId] = None,
            tol: float = 1e-9) -> np.ndarray:
    """Step along the one-parameter subgroup: x * exp(V).

    With ``group`` given, the preconditions (x in G, V in Lie(G)) are checked.
    """
    if group is not None:
        check_member(group, x, tol)
        res = algebra_residual(group, V)
        if not res < tol:
            raise MembershipError(f"tangent vector not in Lie({group}): residual {res:.3e}")
    return np.asarray(x) @ matrix_exp(V)


def combine(coeffs: Sequence[float], basis: Sequence[np.ndarray]) -> np.ndarray:
    """Real linear combination of basis matrices."""
    out = np.zeros_like(basis[0])
    for c, B in zip(coeffs, basis):
        out = out + c * B
    return out
