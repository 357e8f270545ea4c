"""Zero fibres of eigenfunctions: locating them, classifying regularity,
the gallery of known critical points, and a numerical mean-curvature
witness for minimality.

Everything happens on the total group G with the left-invariant
orthonormal frame {E_i} of :func:`symmin.groups.algebra_basis`. A real
tangent vector at x is stored by its coefficient vector t (the matrix is
x * sum_i t_i E_i).
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.linalg import null_space

from symmin.catalog import EigenfunctionSpec, build, evaluate
from symmin.groups import (
    algebra_basis,
    check_member,
    combine,
    haar_sample,
    membership_residual,
    space,
)
from symmin.matrix_core import matrix_exp
from symmin.operators import EXACT, gradient_components

PHI_STOP = 1e-12
PHI_CONVERGED = 1e-10
MEMBERSHIP_TOL = 1e-9
REGULAR_GRAD = 1e-3
CRITICAL_GRAD = 1e-8
CONFORMAL_FLAG = 1e-3


@dataclass
class FiberPoint:
    x: np.ndarray
    abs_phi: float
    grad_norm: float
    iterations: int
    converged: bool
    membership: float = 0.0
    restart: int = 0

    def to_json(self) -> dict:
        return {
            "x": [[[float(z.real), float(z.imag)] for z in row] for row in self.x],
            "abs_phi": self.abs_phi,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _jacobian(spec, x, basis) -> Tuple[np.ndarray, complex]:
    """Real 2 x d Jacobian of (Re phi, Im phi) in the frame, and phi(x)."""
    c = gradient_components(spec, x, basis, EXACT)
    return np.vstack([c.real, c.imag]), evaluate(spec, x, check=False)


def find_fiber_point(spec: EigenfunctionSpec, seed=0, max_iter: int = 500, step: float = 1.0,
                     restart: int = 0, x0: Optional[np.ndarray] = None,
                     method: str = "gauss-newton") -> FiberPoint:
    """Descend f = |phi|^2 from a Haar start (or ``x0``) to a zero of phi.

    Each iteration takes a direction t in the frame coefficients and a
    step x <- x exp(alpha sum t_i E_i) with Armijo backtracking (initial
    ``step``, shrink 0.5, slope 1e-4). ``method="gauss-newton"`` uses the
    minimum-norm solution of J t = -(Re phi, Im phi), falling back to the
    steepest-descent direction -grad f when that fails to decrease f;
    ``method="gradient"`` uses steepest descent only.
    """
    if spec.lambda_ is not None and spec.lambda_ == spec.mu:
        raise ValueError("lambda == mu: a zero of phi is not guaranteed")
    if method not in ("gauss-newton", "gradient"):
        raise ValueError(f"unknown method {method!r}")
    group = spec.group
    basis = algebra_basis(group)
    x = haar_sample(group, (seed, restart)) if x0 is None else np.array(x0, dtype=complex)
    check_member(group, x, MEMBERSHIP_TOL)

    J, phi = _jacobian(spec, x, basis)
    it = 0
    while abs(phi) >= PHI_STOP and it < max_iter:
        r = np.array([phi.real, phi.imag])
        f = float(r @ r)
        grad_f = 2 * J.T @ r
        directions = []
        if method == "gauss-newton":
            directions.append(-np.linalg.lstsq(J, r, rcond=None)[0])
        directions.append(-grad_f)
        moved = False
        for t in directions:
            slope = float(grad_f @ t)
            if not slope < 0:
                continue
            alpha = step
            for _ in range(60):
                y = x @ matrix_exp(alpha * combine(t, basis))
                fy = abs(evaluate(spec, y, check=False)) ** 2
                if fy <= f + 1e-4 * alpha * slope:
                    x, moved = y, True
                    break
                alpha *= 0.5
            if moved:
                break
        it += 1
        if not moved:
            break
        J, phi = _jacobian(spec, x, basis)
    mem = membership_residual(group, x)
    gn = float(np.linalg.norm(J))
    return FiberPoint(x, abs(phi), gn, it, bool(abs(phi) < PHI_CONVERGED and mem < MEMBERSHIP_TOL),
                      mem, restart)


def find_fiber_points(spec: EigenfunctionSpec, seed=0, restarts: int = 20, threads: int = 1,
                      **kw) -> List[FiberPoint]:
    """Independent descents; restart i starts from Haar sample (seed, i)."""
    work = lambda i: find_fiber_point(spec, seed, restart=i, **kw)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(work, range(restarts)))
    return [work(i) for i in range(restarts)]


def regularity_check(spec: EigenfunctionSpec, fp: FiberPoint) -> Tuple[str, float]:
    """Classify a converged fibre point as regular, critical or undecided."""
    if not fp.converged:
        raise ValueError("regularity_check needs a converged fibre point")
    g = float(np.linalg.norm(gradient_components(spec, fp.x)))
    if g > REGULAR_GRAD:
        return "regular", g
    if g < CRITICAL_GRAD:
        return "critical", g
    return "undecided", g


# ---------------------------------------------------------------------------
# tangent and normal frames


def jacobian_singular_values(spec: EigenfunctionSpec, x: np.ndarray) -> np.ndarray:
    """Singular values of the real 2 x d Jacobian of (u, v), padded with a
    zero third value (a 2-row matrix has rank at most 2)."""
    J, _ = _jacobian(spec, x, algebra_basis(spec.group))
    s = np.linalg.svd(J, compute_uv=False)
    return np.concatenate([s, [0.0]])


def _require_regular(spec, fp):
    cls, g = regularity_check(spec, fp)
    if cls != "regular":
        raise ValueError(f"fibre point is {cls} (grad_norm {g:.3e}); need a regular point")


def fiber_tangent_coefficients(spec: EigenfunctionSpec, x: np.ndarray) -> np.ndarray:
    """Rows: orthonormal coefficient vectors spanning ker(du) ∩ ker(dv)."""
    J, _ = _jacobian(spec, x, algebra_basis(spec.group))
    _, _, Vt = np.linalg.svd(J)
    return Vt[2:]


def fiber_tangent_basis(spec: EigenfunctionSpec, fp: FiberPoint) -> List[np.ndarray]:
    """Orthonormal left-invariant directions tangent to the fibre at fp.x.

    The tangent vector at x is x @ T for each returned algebra element T.
    """
    _require_regular(spec, fp)
    basis = algebra_basis(spec.group)
    return [combine(row, basis) for row in fiber_tangent_coefficients(spec, fp.x)]


def _normal_frame(spec, x, basis):
    """Gram-Schmidt of (grad u, grad v) in frame coefficients, plus the
    relative difference of the two gradient norms."""
    c = gradient_components(spec, x, basis, EXACT)
    gu, gv = c.real, c.imag
    nu, nv = np.linalg.norm(gu), np.linalg.norm(gv)
    n1 = gu / nu
    w = gv - (n1 @ gv) * n1
    n2 = w / np.linalg.norm(w)
    return n1, n2, abs(nu - nv)


def mean_curvature_estimate(spec: EigenfunctionSpec, fp: FiberPoint, h: float = 1e-3,
                            diagnostics: Optional[dict] = None) -> float:
    """Norm of the mean curvature vector of the level set through fp.x.

    For each tangent direction T_k the unit normals N_a (in frame
    coefficients n_a) are differentiated along x exp(sT_k) with a central
    difference of step h; H_a = -sum_k <d n_a / ds, t_k>. The frame
    connection term <[T, N], T> vanishes for a bi-invariant metric.
    """
    if not 1e-6 <= h <= 1e-2:
        raise ValueError(f"curvature step h={h:g} outside [1e-6, 1e-2]")
    _require_regular(spec, fp)
    basis = algebra_basis(spec.group)
    tangents = fiber_tangent_coefficients(spec, fp.x)
    _, _, gap = _normal_frame(spec, fp.x, basis)
    H = np.zeros(2)
    for t in tangents:
        E = matrix_exp(h * combine(t, basis))
        p1, p2, _ = _normal_frame(spec, fp.x @ E, basis)
        m1, m2, _ = _normal_frame(spec, fp.x @ E.conj().T, basis)
        H[0] -= t @ (p1 - m1) / (2 * h)
        H[1] -= t @ (p2 - m2) / (2 * h)
    if diagnostics is not None:
        diagnostics["gradient_norm_gap"] = gap
        diagnostics["conformality_violation"] = bool(gap > CONFORMAL_FLAG)
        diagnostics["H"] = H.tolist()
    return float(np.linalg.norm(H))


# ---------------------------------------------------------------------------
# gallery of critical points


@dataclass(frozen=True)
class CriticalCase:
    case_id: str
    space_id: str
    n: int
    m: Optional[int]
    params: Dict[str, tuple]
    construct: Callable[[], np.ndarray]
    description: str
    expected: str = "critical"

    @property
    def space(self):
        return space(self.space_id, self.n, self.m)

    def spec(self) -> EigenfunctionSpec:
        params = {k: np.array(v, dtype=complex) for k, v in self.params.items()}
        return build(self.space, params, allow_critical=True)


@dataclass
class GalleryResult:
    case: CriticalCase
    x: np.ndarray
    phi: complex
    grad_norm: float

    @property
    def passed(self) -> bool:
        return abs(self.phi) < 1e-12 and self.grad_norm < 1e-10


def _to_det_one(x):
    """Flip or rotate the phase of the last column so that det x = 1."""
    x = np.array(x, dtype=complex)
    x[:, -1] /= np.linalg.det(x)
    return x


def _so3_isotropic(theta=0.7):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s, 0], [-s, c, 0], [0, 0, 1]], dtype=complex)


def _grass_r_22(theta=0.3, alpha=0.3):
    c, s = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([[0, 0, c, s], [0, 0, -s, c], [ca, sa, 0, 0], [-sa, ca, 0, 0]],
                    dtype=complex)


def _grass_r_generic(u, v, m):
    """First m columns orthogonal to u and v, completed to SO(m+n)."""
    K = null_space(np.vstack([u, v]))  # (m+n) x (m+n-2), orthonormal
    first = K[:, :m]
    rest = null_space(first.T)
    return _to_det_one(np.hstack([first, rest]))


def _grass_r_n1(u, v):
    """Columns (u/|u|, v/|v|, completion, x~) with x~ orthogonal to u, v."""
    xt = null_space(np.vstack([u, v]))[:, :1]
    head = np.column_stack([u / np.linalg.norm(u), v / np.linalg.norm(v)])
    mid = null_space(np.hstack([head, xt]).T)
    return _to_det_one(np.hstack([head, mid, xt]))


def _grass_c(a, b, n):
    abar = np.conj(a) / np.linalg.norm(a)
    bn = b / np.linalg.norm(b)
    V = null_space(np.vstack([abar, bn]).conj())
    if n >= 2:
        z = np.column_stack([V, abar, bn])
        z[:, 0] /= np.linalg.det(z)
    else:
        z = np.column_stack([abar, bn, V])
        z[:, -1] /= np.linalg.det(z)
    return z


def _grass_h(j, alpha, N, n):
    """z = (v_1, ..., e_j, e_alpha) (n >= 2) or (e_j, e_alpha, v_1, ...), w = 0."""
    I = np.eye(N)
    rest = [I[:, t] for t in range(N) if t not in (j, alpha)]
    cols = rest + [I[:, j], I[:, alpha]] if n >= 2 else [I[:, j], I[:, alpha]] + rest
    z = np.column_stack(cols).astype(complex)
    out = np.zeros((2 * N, 2 * N), dtype=complex)
    out[:N, :N] = z
    out[N:, N:] = np.conj(z)
    return out


_U5 = np.array([1, 0, 1, 0, 0.0])
_V5 = np.array([0, 1, 0, -1, 0.0])
_U4 = np.array([1, 0, 1, 0.0])
_V4 = np.array([0, 1, 0, 1.0])
_AC4 = (1, 1j, 1, -1)
_BC4 = (0, 0, 1, 1)
_AC3 = (1, 1j, 0)
_BC3 = (1, 1j, 1)


def _e(k, N):
    v = [0.0] * N
    v[k] = 1.0
    return tuple(v)


CASES: Dict[str, CriticalCase] = {c.case_id: c for c in [
    CriticalCase("so3-isotropic-p", "so_n", 3, None,
                 {"a": (1, 1j, 0), "p": (1, 1j, 0)}, _so3_isotropic,
                 "SO(3), a = p = (1,i,0), rotation about the third axis (theta = 0.7)"),
    CriticalCase("grassR-2-2", "gr_r", 2, 2, {"a": (1, 1j, 0, 0)}, _grass_r_22,
                 "real Grassmannian m = n = 2, a = (1,i,0,0), block matrix (theta = alpha = 0.3)"),
    CriticalCase("grassR-generic", "gr_r", 3, 2, {"a": tuple(_U5 + 1j * _V5)},
                 lambda: _grass_r_generic(_U5, _V5, 2),
                 "real Grassmannian m = 2, n = 3, first m columns orthogonal to Re a and Im a"),
    CriticalCase("grassR-n1", "gr_r", 1, 3, {"a": tuple(_U4 + 1j * _V4)},
                 lambda: _grass_r_n1(_U4, _V4),
                 "real Grassmannian m = 3, n = 1, columns (u/|u|, v/|v|, completion, x~)"),
    CriticalCase("so4-u2-old-family", "so_2n_u_n", 2, None,
                 {"a": (1, 1j, 0, 0), "b": (0, 0, 1, 1j)},
                 lambda: np.array([[0, 0, 0, -1], [0, 0, 1, 0], [1, 0, 0, 0], [0, 1, 0, 0]],
                                  dtype=complex),
                 "SO(4)/U(2), a = (1,i,0,0), b = (0,0,1,i), permutation-type matrix"),
    CriticalCase("grassC-generic", "gr_c", 2, 2, {"a": _AC4, "b": _BC4},
                 lambda: _grass_c(np.array(_AC4), np.array(_BC4, dtype=complex), 2),
                 "complex Grassmannian m = n = 2, columns (v_1, v_2, conj(a)/|a|, b/|b|)"),
    CriticalCase("grassC-n1", "gr_c", 1, 2, {"a": _AC3, "b": _BC3},
                 lambda: _grass_c(np.array(_AC3), np.array(_BC3, dtype=complex), 1),
                 "complex Grassmannian m = 2, n = 1, columns (conj(a)/|a|, b/|b|, v_1)"),
    CriticalCase("grassH-pair", "gr_h", 2, 2, {"a": _e(0, 4), "b": _e(1, 4)},
                 lambda: _grass_h(0, 1, 4, 2),
                 "quaternionic Grassmannian m = n = 2, phi_12, z = (e_3, e_4, e_1, e_2), w = 0"),
    CriticalCase("grassH-n1", "gr_h", 1, 3, {"a": _e(1, 4), "b": _e(3, 4)},
                 lambda: _grass_h(1, 3, 4, 1),
                 "quaternionic Grassmannian m = 3, n = 1, phi_24, z = (e_2, e_4, e_1, e_3), w = 0"),
]}


def critical_gallery(case_id: str) -> GalleryResult:
    """Build the closed-form critical point of ``case_id`` and measure it."""
    if case_id not in CASES:
        raise KeyError(f"unknown gallery case {case_id!r}; known: {sorted(CASES)}")
    case = CASES[case_id]
    spec = case.spec()
    x = case.construct()
    phi = evaluate(spec, x)
    g = float(np.linalg.norm(gradient_components(spec, x)))
    return GalleryResult(case, x, phi, g)
