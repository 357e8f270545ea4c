"""The ten eigenfunction families, compiled into trace-term shapes.

Every function is stored as a sum of terms

* ``L(C)``:   x -> trace(C x^t)
* ``Q(A, B)``: x -> trace(A x B x^t)
* ``S(A, B)``: x -> trace(A x B x^*)

on the total group, plus a constant offset. The shapes are what the exact
derivative engine in :mod:`symmin.operators` differentiates.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from symmin.groups import (
    SpaceDescriptor,
    check_member,
    subgroup_sample,
)
from symmin.matrix_core import J, P

ZERO_TOL = 1e-12

#: parameter names each family takes; optional ones are marked with "?"
FAMILY_PARAMS = {
    "so_n": ("a", "p"),
    "su_n": ("a", "v"),
    "sp_n": ("a", "u?", "v?"),
    "su_n_so_n": ("a",),
    "sp_n_u_n": ("a",),
    "so_2n_u_n": ("a", "b"),
    "su_2n_sp_n": ("a", "b"),
    "gr_r": ("a",),
    "gr_c": ("a", "b"),
    "gr_h": ("a", "b?"),
}

#: constraints that only matter for regularity of the zero fibre; the
#: function is an eigenfunction without them.
REGULARITY_CONSTRAINTS = frozenset({
    "(p,p)≠0",
    "(a,a)=0 [regular sub-family]",
    "(a,b)=0 [regular sub-family]",
    "b complex multiple of a real vector [regular sub-family]",
})


class ConstraintViolation(ValueError):
    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("parameter constraints violated: " + "; ".join(self.violations))


@dataclass(frozen=True)
class TermShape:
    kind: str  # "L", "Q" or "S"
    A: np.ndarray
    B: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("L", "Q", "S"):
            raise ValueError(f"unknown term kind {self.kind!r}")
        if (self.kind == "L") != (self.B is None):
            raise ValueError("L terms take one matrix, Q/S terms take two")

    def evaluate(self, x: np.ndarray) -> complex:
        if self.kind == "L":
            return complex(np.sum(self.A * x))  # trace(C x^t)
        other = x.T if self.kind == "Q" else x.conj().T
        return complex(np.trace(self.A @ x @ self.B @ other))


@dataclass(frozen=True)
class EigenfunctionSpec:
    """A function on the total group of ``space`` with its expected eigenvalues.

    ``lambda_`` and ``mu`` are None for synthetic functions that are not
    catalog entries (for example constants or level-set controls).
    """

    space: SpaceDescriptor
    params: Mapping[str, Tuple[complex, ...]]
    terms: Tuple[TermShape, ...]
    lambda_: Optional[Fraction]
    mu: Optional[Fraction]
    offset: complex = 0j
    label: str = ""

    @property
    def group(self):
        return self.space.total_group

    def shifted(self, c: complex) -> "EigenfunctionSpec":
        """The function phi - c (not an eigenfunction for c != 0)."""
        return EigenfunctionSpec(self.space, self.params, self.terms, None, None,
                                 self.offset - c, f"{self.label}-({c})")

    def params_json(self) -> Dict[str, list]:
        return {k: [[float(z.real), float(z.imag)] for z in v] for k, v in sorted(self.params.items())}


# ---------------------------------------------------------------------------
# parameter handling


def _to_complex(value) -> complex:
    if isinstance(value, str):
        return complex(Fraction(value))
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex entries are [re, im] pairs, got {value!r}")
        return complex(_to_complex(value[0]).real, _to_complex(value[1]).real)
    if isinstance(value, Fraction):
        return complex(float(value))
    return complex(value)


def parse_vector(values) -> np.ndarray:
    """Vector from numbers, fraction strings or [re, im] pairs."""
    return np.array([_to_complex(v) for v in values], dtype=complex)


def parse_params(text_or_obj) -> Dict[str, np.ndarray]:
    """Parse ``{"a": [[re, im], ...], ...}`` (a JSON string or a dict)."""
    obj = json.loads(text_or_obj) if isinstance(text_or_obj, str) else text_or_obj
    if not isinstance(obj, dict):
        raise ValueError("parameters must be a JSON object")
    return {str(k): parse_vector(v) for k, v in obj.items()}


def _e(k, size):
    out = np.zeros(size, dtype=complex)
    out[k] = 1
    return out


def default_params(sp: SpaceDescriptor) -> Dict[str, np.ndarray]:
    """A valid (and, where the family allows it, regular) parameter set."""
    sid, n = sp.space, sp.n
    if sid == "so_n":
        return {"a": _e(0, n) + 1j * _e(1, n), "p": _e(0, n)}
    if sid == "su_n":
        return {"a": _e(0, n), "v": _e(1, n)}
    if sid == "sp_n":
        return {"a": _e(0, n), "v": _e(0, n), "u": 0.5j * _e(0, n)}
    if sid == "su_n_so_n":
        return {"a": _e(0, n) + 0.5j * _e(1, n)}
    if sid == "sp_n_u_n":
        return {"a": _e(0, 2 * n) + 0.5j * _e(1, 2 * n)}
    if sid == "so_2n_u_n":
        return {"a": _e(0, 2 * n) + 1j * _e(1, 2 * n), "b": _e(2, 2 * n)}
    if sid == "su_2n_sp_n":
        return {"a": _e(0, 2 * n), "b": _e(1, 2 * n)}
    N = sp.m + n
    if sid == "gr_r":
        return {"a": _e(0, N) + 1j * _e(1, N)}
    if sid == "gr_c":
        return {"a": _e(0, N), "b": _e(1, N)}
    return {"a": _e(0, N) + 1j * _e(1, N)}


def _param_length(sp: SpaceDescriptor) -> int:
    if sp.space in ("so_n", "su_n", "sp_n", "su_n_so_n"):
        return sp.n
    if sp.space in ("sp_n_u_n", "so_2n_u_n", "su_2n_sp_n"):
        return 2 * sp.n
    return sp.m + sp.n


def _bil(a, b):
    """Complex bilinear form (a, b) = sum a_k b_k."""
    return complex(np.sum(a * b))


def _small(z, scale=1.0):
    return abs(z) <= ZERO_TOL * max(1.0, scale)


def _independent(a, b):
    M = np.vstack([a, b])
    s = np.linalg.svd(M, compute_uv=False)
    return s[-1] > ZERO_TOL * max(1.0, s[0])


def _normalize_params(sp: SpaceDescriptor, params) -> Tuple[Dict[str, np.ndarray], List[str]]:
    """Fill optional vectors, check names and lengths."""
    problems: List[str] = []
    if isinstance(params, str):
        params = parse_params(params)
    if any(isinstance(v, np.ndarray) and v.ndim == 2 for v in params.values()):
        problems.append("matrix-valued parameter unsupported (use the vector form a)")
        return {}, problems
    given = {k: np.asarray(parse_vector(v) if not isinstance(v, np.ndarray) else v, dtype=complex)
             for k, v in params.items()}
    names = FAMILY_PARAMS[sp.space]
    required = [nm for nm in names if not nm.endswith("?")]
    allowed = {nm.rstrip("?") for nm in names}
    for k in given:
        if k not in allowed:
            problems.append(f"unknown parameter {k!r} for {sp.space}")
    for k in required:
        if k not in given:
            problems.append(f"missing parameter {k!r}")
    L = _param_length(sp)
    for k, v in given.items():
        if k in allowed and v.shape != (L,):
            problems.append(f"parameter {k!r} must have length {L}")
        if not np.all(np.isfinite(v)):
            problems.append(f"parameter {k!r} has non-finite entries")
    if problems:
        return given, problems
    if sp.space == "sp_n":
        given.setdefault("u", np.zeros(L, dtype=complex))
        given.setdefault("v", np.zeros(L, dtype=complex))
    if sp.space == "gr_h":
        given.setdefault("b", given["a"].copy())
    return given, problems


def validate(sp: SpaceDescriptor, params, require_regular: bool = False) -> List[str]:
    """Every violated family constraint (empty list means ok).

    ``require_regular`` adds the constraints of the regular SO(2n)/U(n)
    sub-family. The SO(n) condition (p,p)≠0 is always reported; it is a
    regularity condition and :func:`build` accepts it with ``allow_critical``.
    """
    P_, problems = _normalize_params(sp, params)
    if problems:
        return problems
    out: List[str] = []
    sid = sp.space
    a = P_.get("a")
    nz = lambda v: np.linalg.norm(v) > ZERO_TOL
    if sid == "so_n":
        p = P_["p"]
        if not nz(a):
            out.append("a≠0")
        if not _small(_bil(a, a), np.vdot(a, a).real):
            out.append("(a,a)=0")
        if not nz(p):
            out.append("p≠0")
        if _small(_bil(p, p), np.vdot(p, p).real):
            out.append("(p,p)≠0")
    elif sid == "su_n":
        if not nz(a):
            out.append("a≠0")
        if not nz(P_["v"]):
            out.append("v≠0")
    elif sid == "sp_n":
        if not nz(a):
            out.append("a≠0")
        if not (nz(P_["u"]) or nz(P_["v"])):
            out.append("(u,v) not both 0")
    elif sid in ("su_n_so_n", "sp_n_u_n"):
        if not nz(a):
            out.append("a≠0")
    elif sid in ("so_2n_u_n", "su_2n_sp_n"):
        b = P_["b"]
        if not _independent(a, b):
            out.append("a,b linearly independent")
        if sid == "so_2n_u_n":
            scale = np.vdot(a, a).real * np.vdot(b, b).real
            if not _small(_bil(a, a) * _bil(b, b) - _bil(a, b) ** 2, scale):
                out.append("(a,a)(b,b)-(a,b)²=0")
            if require_regular:
                if not _small(_bil(a, a), np.vdot(a, a).real):
                    out.append("(a,a)=0 [regular sub-family]")
                if not _small(_bil(a, b), np.linalg.norm(a) * np.linalg.norm(b)):
                    out.append("(a,b)=0 [regular sub-family]")
                k = int(np.argmax(np.abs(b)))
                if nz(b) and np.linalg.norm((b / b[k]).imag) > ZERO_TOL:
                    out.append("b complex multiple of a real vector [regular sub-family]")
    elif sid == "gr_r":
        if not nz(a):
            out.append("a≠0")
        if not _small(_bil(a, a), np.vdot(a, a).real):
            out.append("(a,a)=0")
    elif sid == "gr_c":
        b = P_["b"]
        if not nz(a):
            out.append("a≠0")
        if not nz(b):
            out.append("b≠0")
        if not _small(_bil(a, b), np.linalg.norm(a) * np.linalg.norm(b)):
            out.append("⟨a,b̄⟩=0")
    elif sid == "gr_h":
        b = P_["b"]
        if not nz(a):
            out.append("a≠0")
        if not nz(b):
            out.append("b≠0")
        tag = "(a,a)=0" if np.array_equal(a, b) else "(a,b)=0"
        if not _small(_bil(a, b), np.linalg.norm(a) * np.linalg.norm(b)):
            out.append(tag)
    return out


# ---------------------------------------------------------------------------
# construction


def _terms(sp: SpaceDescriptor, P_: Dict[str, np.ndarray]) -> List[TermShape]:
    sid, n = sp.space, sp.n
    a = P_["a"]
    if sid == "so_n":
        return [TermShape("L", np.outer(P_["p"], a))]
    if sid == "su_n":
        return [TermShape("L", np.outer(a, P_["v"]))]
    if sid == "sp_n":
        C = np.zeros((2 * n, 2 * n), dtype=complex)
        C[:n, :n] = np.outer(a, P_["v"])
        C[:n, n:] = np.outer(a, P_["u"])
        return [TermShape("L", C)]
    if sid == "su_n_so_n":
        return [TermShape("Q", np.outer(a, a), np.eye(n, dtype=complex))]
    if sid == "sp_n_u_n":
        return [TermShape("Q", np.outer(a, a), np.eye(2 * n, dtype=complex))]
    if sid in ("so_2n_u_n", "su_2n_sp_n"):
        b = P_["b"]
        A = (np.outer(a, b) - np.outer(b, a)) / np.sqrt(2)
        return [TermShape("Q", A, J(n))]
    m = sp.m
    N = m + n
    if sid == "gr_r":
        return [TermShape("Q", np.outer(a, a), P(m, N))]
    b = P_["b"]
    if sid == "gr_c":
        return [TermShape("S", np.outer(b, a), P(m, N))]
    A = np.zeros((2 * N, 2 * N), dtype=complex)
    A[:N, :N] = np.outer(b, a)
    Pt = np.zeros((2 * N, 2 * N), dtype=complex)
    Pt[:N, :N] = P(m, N)
    Pt[N:, N:] = P(m, N)
    return [TermShape("S", A, Pt)]


def build(sp: SpaceDescriptor, params=None, allow_critical: bool = False,
          require_regular: bool = False) -> EigenfunctionSpec:
    """Compile the family function of ``sp`` for the given parameters.

    Raises :class:`ConstraintViolation` listing every violated constraint.
    Regularity-only constraints are waived with ``allow_critical``.
    """
    if params is None:
        params = default_params(sp)
    violations = validate(sp, params, require_regular=require_regular)
    if allow_critical:
        violations = [v for v in violations if v not in REGULARITY_CONSTRAINTS]
    if violations:
        raise ConstraintViolation(violations)
    P_, _ = _normalize_params(sp, params)
    frozen = {k: tuple(complex(z) for z in v) for k, v in sorted(P_.items())}
    return EigenfunctionSpec(sp, frozen, tuple(_terms(sp, P_)),
                             sp.expected_lambda, sp.expected_mu, 0j, sp.space)


def constant_spec(sp: SpaceDescriptor, value: complex) -> EigenfunctionSpec:
    """Constant function (no terms); tau and kappa of it vanish."""
    return EigenfunctionSpec(sp, {}, (), None, None, complex(value), f"const({value})")


def evaluate(spec: EigenfunctionSpec, x: np.ndarray, check: bool = True,
             tol: float = 1e-9) -> complex:
    """Value of the function at ``x`` in the total group."""
    x = np.asarray(x, dtype=complex)
    if check:
        check_member(spec.group, x, tol)
    return sum((t.evaluate(x) for t in spec.terms), spec.offset)


def invariance_residual(spec: EigenfunctionSpec, x: np.ndarray, k_samples: int = 20,
                        seed=0) -> float:
    """max |phi(x k) - phi(x)| over Haar samples k of the subgroup K."""
    if not spec.space.is_quotient:
        raise ValueError(f"{spec.space.space} is not a quotient family")
    base = evaluate(spec, x)
    worst = 0.0
    for i in range(k_samples):
        k = subgroup_sample(spec.space, (seed, i))
        worst = max(worst, abs(evaluate(spec, x @ k, check=False) - base))
    return worst


#: the two parameter groups scaled by C and D in :func:`scaling_identity`
_SCALE_GROUPS = {
    "so_n": (("a",), ("p",)),
    "su_n": (("a",), ("v",)),
    "sp_n": (("a",), ("u", "v")),
    "so_2n_u_n": (("a",), ("b",)),
    "su_2n_sp_n": (("a",), ("b",)),
    "gr_c": (("a",), ("b",)),
    "gr_h": (("a",), ("b",)),
}


def scaling_identity(spec: EigenfunctionSpec, C: complex, D: complex, x: np.ndarray):
    """Return (phi_{Ca, Dp}(x), C*D*phi_{a,p}(x)).

    For families with a single parameter vector (the function is quadratic
    in it) the vector is scaled by C and D must equal C.
    """
    sid = spec.space.space
    params = {k: np.array(v) for k, v in spec.params.items()}
    if sid in _SCALE_GROUPS:
        first, second = _SCALE_GROUPS[sid]
        for k in first:
            params[k] = C * params[k]
        for k in second:
            params[k] = D * params[k]
    else:
        if C != D:
            raise ValueError(f"{sid} has one parameter vector; C and D must be equal")
        params["a"] = C * params["a"]
    scaled = build(spec.space, params, allow_critical=True)
    return evaluate(scaled, x), C * D * evaluate(spec, x)
