"""Dense complex matrix kernel: canonical basis matrices, the trace metric,
the matrix exponential and a few constant matrices.

Indices in the public API are 1-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

SQRT2 = np.sqrt(2.0)

_PAIR_TAGS = ("X", "Y", "D_pair")
_TAGS = ("E",) + _PAIR_TAGS + ("D_single",)


class BasisIndexError(ValueError):
    """Raised for basis indices outside the admissible range."""


@dataclass(frozen=True)
class BasisKind:
    """Tag and 1-based indices of a canonical basis matrix.

    ``E`` uses ``(r, s)`` with ``1 <= r, s <= n``; ``X``, ``Y`` and
    ``D_pair`` need ``r < s``; ``D_single`` uses ``r`` alone as ``t``.
    """

    tag: str
    r: int
    s: Optional[int] = None

    def check(self, n: int) -> None:
        if self.tag not in _TAGS:
            raise ValueError(f"unknown basis tag {self.tag!r}")
        if self.tag == "D_single":
            if not 1 <= self.r <= n:
                raise BasisIndexError(f"D_single index t={self.r} outside 1..{n}")
            return
        if self.s is None:
            raise BasisIndexError(f"{self.tag} needs two indices")
        if not (1 <= self.r <= n and 1 <= self.s <= n):
            raise BasisIndexError(f"indices ({self.r}, {self.s}) outside 1..{n}")
        if self.tag in _PAIR_TAGS and not self.r < self.s:
            raise BasisIndexError(f"{self.tag} needs r < s, got ({self.r}, {self.s})")


def basis_matrix(kind: BasisKind, n: int) -> np.ndarray:
    """Return the n x n matrix E_rs, X_rs, Y_rs, D_rs or D_t.

    X, Y and D_pair carry the 1/sqrt(2) factor so that they have unit norm
    in the trace metric. ``D_single`` is E_tt; the 1/sqrt(2) of the
    symplectic basis lives in the block embedding.
    """
    kind.check(n)
    out = np.zeros((n, n), dtype=complex)
    r = kind.r - 1
    if kind.tag == "D_single":
        out[r, r] = 1.0
        return out
    s = kind.s - 1
    if kind.tag == "E":
        out[r, s] = 1.0
    elif kind.tag == "X":
        out[r, s] = out[s, r] = 1.0 / SQRT2
    elif kind.tag == "Y":
        out[r, s] = 1.0 / SQRT2
        out[s, r] = -1.0 / SQRT2
    else:
        out[r, r] = 1.0 / SQRT2
        out[s, s] = -1.0 / SQRT2
    return out


def E(r, s, n):
    return basis_matrix(BasisKind("E", r, s), n)


def X(r, s, n):
    return basis_matrix(BasisKind("X", r, s), n)


def Y(r, s, n):
    return basis_matrix(BasisKind("Y", r, s), n)


def D(r, s, n):
    return basis_matrix(BasisKind("D_pair", r, s), n)


def Dt(t, n):
    return basis_matrix(BasisKind("D_single", t), n)


def trace_metric(Z: np.ndarray, W: np.ndarray) -> float:
    """Standard metric g(Z, W) = Re trace(conj(Z)^t W)."""
    Z = np.asarray(Z)
    W = np.asarray(W)
    if Z.shape != W.shape:
        raise ValueError(f"dimension mismatch: {Z.shape} vs {W.shape}")
    # Re tr(Z^* W) is the real part of the Frobenius pairing
    return float(np.real(np.vdot(Z, W)))


def matrix_exp(A: np.ndarray) -> np.ndarray:
    """Matrix exponential (Pade scaling-and-squaring)."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix_exp: non-finite input")
    return expm(A)


def J(n: int) -> np.ndarray:
    """J_n = [[0, I_n], [-I_n, 0]]."""
    if n < 1:
        raise ValueError("J_n needs n >= 1")
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = np.eye(n)
    out[n:, :n] = -np.eye(n)
    return out


def I_mn(m: int, n: int) -> np.ndarray:
    """I_{m,n} = diag(I_m, -I_n)."""
    if m < 1 or n < 1:
        raise ValueError("I_{m,n} needs positive sizes")
    return np.diag(np.r_[np.ones(m), -np.ones(n)]).astype(complex)


def P(m: int, size: int) -> np.ndarray:
    """Diagonal projector onto the first m of ``size`` coordinates."""
    if m < 1 or size < m:
        raise ValueError(f"projector P_{m} needs 1 <= m <= {size}")
    return np.diag(np.r_[np.ones(m), np.zeros(size - m)]).astype(complex)


def constant_matrix(name: str, *sizes: int) -> np.ndarray:
    """Named constants: ``J_n`` (n), ``I_mn`` (m, n), ``P_m`` (m, m+n)."""
    if name == "J_n":
        return J(*sizes)
    if name == "I_mn":
        return I_mn(*sizes)
    if name == "P_m":
        return P(*sizes)
    raise ValueError(f"unknown constant matrix {name!r}")


def check_finite(x: np.ndarray, what: str = "matrix") -> None:
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} has non-finite entries")
