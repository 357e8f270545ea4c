"""Directional derivatives along one-parameter subgroups, gradient
components, the tension field tau and the conformality operator kappa.

Both operators are computed in a left-invariant orthonormal frame of the
total group G::

    tau(phi)        = sum_X  X(X(phi))
    kappa(phi, psi) = sum_X  X(phi) X(psi)

with X(phi)(x) = d/ds phi(x exp(sX)) at s = 0. For a bi-invariant metric
the covariant correction term of the Laplacian drops out (nabla_X X = 0).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from symmin.catalog import EigenfunctionSpec, TermShape, evaluate
from symmin.groups import TangentBasis, algebra_basis, haar_sample
from symmin.matrix_core import matrix_exp

CROSS_CHECK_TOL = 1e-5

# central-difference stencils: offsets k (in units of h) and weights
_STENCILS = {
    (2, 1): ((1, 0.5), (-1, -0.5)),
    (2, 2): ((1, 1.0), (0, -2.0), (-1, 1.0)),
    (4, 1): ((2, -1 / 12), (1, 8 / 12), (-1, -8 / 12), (-2, 1 / 12)),
    (4, 2): ((2, -1 / 12), (1, 16 / 12), (0, -30 / 12), (-1, 16 / 12), (-2, -1 / 12)),
}


@dataclass(frozen=True)
class DerivativeEngine:
    """How directional derivatives are computed.

    mode
        ``"exact"`` (closed forms on the term shapes) or ``"fd"`` (central
        differences of s -> phi(x exp(sX))).
    fd_step, fd_order, richardson
        Finite-difference settings; one Richardson level combines the
        stencil at h and 2h.
    fd_step2
        Step for second derivatives. Their rounding error grows like
        eps/h^2, which at h = 1e-4 reaches ~1e-6 for tau on the largest
        groups in use; 1e-3 keeps it near 1e-8 while the 4th-order
        truncation error stays far below that.
    """

    mode: str = "exact"
    fd_step: float = 1e-4
    fd_order: int = 4
    richardson: bool = True
    fd_step2: float = 1e-3

    def __post_init__(self):
        if self.mode not in ("exact", "fd"):
            raise ValueError(f"engine mode must be 'exact' or 'fd', got {self.mode!r}")
        for name in ("fd_step", "fd_step2"):
            h = getattr(self, name)
            if not 1e-8 <= h <= 1e-2:
                raise ValueError(f"{name} {h:g} outside [1e-8, 1e-2]")
        if self.fd_order not in (2, 4):
            raise ValueError("fd_order must be 2 or 4")

    @classmethod
    def exact(cls):
        return cls("exact")

    @classmethod
    def fd(cls, **kw):
        return cls("fd", **kw)

    def describe(self) -> str:
        if self.mode == "exact":
            return "exact"
        r = "+rich" if self.richardson else ""
        return f"fd(h={self.fd_step:g},h2={self.fd_step2:g},o{self.fd_order}{r})"


EXACT = DerivativeEngine.exact()
FD = DerivativeEngine.fd()


# ---------------------------------------------------------------------------
# exact derivatives on term shapes


def _term_derivative(t: TermShape, x: np.ndarray, X: np.ndarray, order: int) -> complex:
    if t.kind == "L":
        xX = x @ X
        M = xX if order == 1 else xX @ X
        return complex(np.sum(t.A * M))
    Xs = X.T if t.kind == "Q" else X.conj().T
    other = x.T if t.kind == "Q" else x.conj().T
    B = t.B
    if order == 1:
        inner = X @ B + B @ Xs
    else:
        inner = X @ X @ B + 2 * X @ B @ Xs + B @ Xs @ Xs
    return complex(np.trace(t.A @ x @ inner @ other))


def _exact(spec: EigenfunctionSpec, x, X, order) -> complex:
    return sum((_term_derivative(t, x, X, order) for t in spec.terms), 0j)


# ---------------------------------------------------------------------------
# finite differences


def _as_callable(f) -> Callable[[np.ndarray], complex]:
    if isinstance(f, EigenfunctionSpec):
        return lambda y: evaluate(f, y, check=False)
    return f


def _fd_raw(f, x, X, order, h, stencil_order):
    # exp(k h X) for k = +-1, +-2 from one exponential; the group is compact
    # so exp(-hX) = exp(hX)^*
    E1 = matrix_exp(h * X)
    steps = {1: E1, 2: E1 @ E1}
    total = 0j
    for k, w in _STENCILS[(stencil_order, order)]:
        if k == 0:
            y = x
        elif k > 0:
            y = x @ steps[k]
        else:
            y = x @ steps[-k].conj().T
        total += w * f(y)
    return total / h ** order


def fd_derivative(f, x: np.ndarray, X: np.ndarray, order: int,
                  engine: DerivativeEngine = FD) -> complex:
    """Central-difference derivative of s -> f(x exp(sX)) at 0.

    ``f`` is a spec or any callable on group elements.
    """
    f = _as_callable(f)
    h = engine.fd_step if order == 1 else engine.fd_step2
    p = engine.fd_order
    d1 = _fd_raw(f, x, X, order, h, p)
    if not engine.richardson:
        return d1
    d2 = _fd_raw(f, x, X, order, 2 * h, p)
    return (2 ** p * d1 - d2) / (2 ** p - 1)


def dir_derivative(spec: EigenfunctionSpec, x: np.ndarray, X: np.ndarray, order: int = 1,
                   engine: DerivativeEngine = EXACT) -> complex:
    """d^k/ds^k phi(x exp(sX)) at s = 0 for k = ``order`` in {1, 2}."""
    if order not in (1, 2):
        raise ValueError(f"derivative order must be 1 or 2, got {order}")
    x = np.asarray(x, dtype=complex)
    X = np.asarray(X, dtype=complex)
    if engine.mode == "exact":
        return _exact(spec, x, X, order)
    return fd_derivative(spec, x, X, order, engine)


@dataclass
class CrossCheck:
    exact: complex
    fd: complex
    disagreement: float
    flagged: bool


def cross_check(spec, x, X, order=1, fd_engine: DerivativeEngine = FD,
                tol: float = CROSS_CHECK_TOL) -> CrossCheck:
    """Compare both engines; ``flagged`` marks relative disagreement > tol."""
    e = dir_derivative(spec, x, X, order, EXACT)
    f = dir_derivative(spec, x, X, order, fd_engine)
    rel = abs(e - f) / (1 + abs(e))
    return CrossCheck(e, f, rel, rel > tol)


# ---------------------------------------------------------------------------
# frame operators


def _basis_for(spec, basis):
    if basis is None:
        return algebra_basis(spec.group)
    return basis


def gradient_components(spec: EigenfunctionSpec, x: np.ndarray,
                        basis: Optional[TangentBasis] = None,
                        engine: DerivativeEngine = EXACT) -> np.ndarray:
    """Components X_i(phi)(x) of the gradient in an orthonormal basis.

    Without ``basis`` the full algebra basis of the total group is used.
    """
    B = _basis_for(spec, basis)
    return np.array([dir_derivative(spec, x, X, 1, engine) for X in B], dtype=complex)


def gradient_norm(spec, x, basis=None, engine=EXACT) -> float:
    c = gradient_components(spec, x, basis, engine)
    return float(np.sqrt(np.sum(np.abs(c) ** 2)))


def tension_field(spec: EigenfunctionSpec, x: np.ndarray, engine: DerivativeEngine = EXACT,
                  basis: Optional[Sequence[np.ndarray]] = None) -> complex:
    """tau(phi)(x) = sum over an orthonormal frame of second derivatives."""
    B = _basis_for(spec, basis)
    return sum((dir_derivative(spec, x, X, 2, engine) for X in B), 0j)


def conformality(spec_a: EigenfunctionSpec, spec_b: EigenfunctionSpec, x: np.ndarray,
                 engine: DerivativeEngine = EXACT,
                 basis: Optional[Sequence[np.ndarray]] = None) -> complex:
    """kappa(phi, psi)(x) = sum_X X(phi) X(psi)."""
    if spec_a.space != spec_b.space:
        raise ValueError(f"space mismatch: {spec_a.space} vs {spec_b.space}")
    B = _basis_for(spec_a, basis)
    return sum((dir_derivative(spec_a, x, X, 1, engine) * dir_derivative(spec_b, x, X, 1, engine)
                for X in B), 0j)


# ---------------------------------------------------------------------------
# residual checks


@dataclass
class EigenResidualReport:
    max_tau_residual: float
    max_kappa_residual: float
    samples: int
    engine: DerivativeEngine
    median_abs_phi: float = 0.0
    flags: List[str] = field(default_factory=list)


def _sample_residuals(spec, lam, mu, engine, basis, seed, i):
    x = haar_sample(spec.group, (seed, i))
    phi = evaluate(spec, x, check=False)
    tau = tension_field(spec, x, engine, basis)
    kap = conformality(spec, spec, x, engine, basis)
    rt = abs(tau - lam * phi) / (1 + abs(phi))
    rk = abs(kap - mu * phi * phi) / (1 + abs(phi) ** 2)
    return rt, rk, abs(phi)


def eigen_residuals(spec: EigenfunctionSpec, samples: int = 50, seed: int = 0,
                    engine: DerivativeEngine = EXACT, lam=None, mu=None,
                    threads: int = 1) -> EigenResidualReport:
    """Normalized residuals of tau = lambda phi and kappa = mu phi^2 at Haar points.

    Sample i is drawn from ``default_rng((seed, i))`` so results do not
    depend on ``threads``. ``lam``/``mu`` override the spec's values.
    """
    lam = float(spec.lambda_ if lam is None else lam)
    mu = float(spec.mu if mu is None else mu)
    if samples <= 0:
        return EigenResidualReport(0.0, 0.0, 0, engine, 0.0, ["no samples"])
    basis = algebra_basis(spec.group)
    work = lambda i: _sample_residuals(spec, lam, mu, engine, basis, seed, i)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(work, range(samples)))
    else:
        rows = [work(i) for i in range(samples)]
    arr = np.array(rows)
    return EigenResidualReport(float(arr[:, 0].max()), float(arr[:, 1].max()), samples,
                               engine, float(np.median(arr[:, 2])))


def product_rule_residual(spec_a: EigenfunctionSpec, spec_b: EigenfunctionSpec,
                          x: np.ndarray, engine: DerivativeEngine = EXACT,
                          fd_engine: DerivativeEngine = FD) -> float:
    """|tau(phi psi) - (phi tau(psi) + 2 kappa(phi, psi) + psi tau(phi))|.

    The left side differentiates the pointwise product with finite
    differences; the right side uses ``engine``.
    """
    if spec_a.space != spec_b.space:
        raise ValueError(f"space mismatch: {spec_a.space} vs {spec_b.space}")
    basis = algebra_basis(spec_a.group)
    prod = lambda y: evaluate(spec_a, y, check=False) * evaluate(spec_b, y, check=False)
    lhs = sum((fd_derivative(prod, x, X, 2, fd_engine) for X in basis), 0j)
    fa = evaluate(spec_a, x, check=False)
    fb = evaluate(spec_b, x, check=False)
    rhs = (fa * tension_field(spec_b, x, engine, basis)
           + 2 * conformality(spec_a, spec_b, x, engine, basis)
           + fb * tension_field(spec_a, x, engine, basis))
    return float(abs(lhs - rhs))
