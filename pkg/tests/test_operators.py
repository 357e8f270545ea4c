import numpy as np
import pytest

from symmin.catalog import build, constant_spec, evaluate
from symmin.groups import algebra_basis, haar_sample, horizontal_basis, space, subgroup_basis
from symmin.matrix_core import Y
from symmin.operators import (
    EXACT,
    FD,
    DerivativeEngine,
    conformality,
    cross_check,
    dir_derivative,
    eigen_residuals,
    fd_derivative,
    gradient_components,
    product_rule_residual,
    tension_field,
)


def test_engine_validation():
    with pytest.raises(ValueError):
        DerivativeEngine("fd", fd_step=1e-1)
    with pytest.raises(ValueError):
        DerivativeEngine("fd", fd_step=1e-9)
    with pytest.raises(ValueError):
        DerivativeEngine("fd", fd_order=3)
    with pytest.raises(ValueError):
        DerivativeEngine("symbolic")
    assert DerivativeEngine().mode == "exact"


def test_invalid_order():
    s = build(space("su_n", 2))
    with pytest.raises(ValueError):
        dir_derivative(s, np.eye(2), algebra_basis(s.group)[0], 3)


def test_constant_function_has_zero_derivatives():
    sp = space("so_n", 3)
    c = constant_spec(sp, 2.0 - 1j)
    x = haar_sample(sp.total_group, 1)
    for X in algebra_basis(sp.total_group):
        for order in (1, 2):
            assert dir_derivative(c, x, X, order, EXACT) == 0
            assert abs(dir_derivative(c, x, X, order, FD)) < 1e-9
    assert tension_field(c, x) == 0


def test_so_n_first_derivative_expansion():
    # Y_rs(phi) = (-a_r (p, x_s) + a_s (p, x_r)) / sqrt 2; the 1/sqrt 2 is the
    # normalization of Y_rs
    a = np.array([1, 1j, 0, 0])
    p = np.array([0.3, -1, 2, 0.5])
    s = build(space("so_n", 4), {"a": a, "p": p})
    x = haar_sample(s.group, 4)
    for r in range(1, 5):
        for t in range(r + 1, 5):
            want = (-a[r - 1] * (p @ x[:, t - 1]) + a[t - 1] * (p @ x[:, r - 1])) / np.sqrt(2)
            assert abs(dir_derivative(s, x, Y(r, t, 4), 1) - want) < 1e-14


SPECS = [
    ("so_n", 5, None), ("su_n", 3, None), ("sp_n", 2, None), ("su_n_so_n", 3, None),
    ("sp_n_u_n", 2, None), ("so_2n_u_n", 2, None), ("su_2n_sp_n", 2, None),
    ("gr_r", 2, 2), ("gr_c", 2, 2), ("gr_h", 2, 2),
]


@pytest.mark.parametrize("sid,n,m", SPECS)
def test_fd_matches_exact(sid, n, m):
    s = build(space(sid, n, m))
    B = algebra_basis(s.group)
    rng = np.random.default_rng(5)
    for i in range(5):
        x = haar_sample(s.group, (2, i))
        X = sum(c * Z for c, Z in zip(rng.standard_normal(len(B)), B))
        X = X / np.sqrt(np.real(np.vdot(X, X)))
        for order in (1, 2):
            cc = cross_check(s, x, X, order)
            assert cc.disagreement < 1e-6
            assert not cc.flagged


def test_cross_check_flags_disagreement():
    s = build(space("su_n", 2))
    x = haar_sample(s.group, 0)
    X = algebra_basis(s.group)[0]
    coarse = DerivativeEngine("fd", fd_step=1e-2, fd_order=2, richardson=False,
                              fd_step2=1e-2)
    assert cross_check(s, x, 8 * X, 2, fd_engine=coarse).flagged


def test_second_order_stencil_converges():
    f = lambda y: y[0, 0] ** 3
    x = np.eye(2, dtype=complex)
    X = np.array([[1j, 0], [0, -1j]])
    # f(x exp(sX)) = exp(3is): first derivative 3i, second -9
    e2 = DerivativeEngine("fd", fd_step=1e-3, fd_order=2, richardson=False)
    assert abs(fd_derivative(f, x, X, 1, e2) - 3j) < 1e-4
    assert abs(fd_derivative(f, x, X, 2, FD) + 9) < 1e-7


def test_tension_so5_and_su3_so3():
    s = build(space("so_n", 5))
    for i in range(50):
        x = haar_sample(s.group, (0, i))
        phi = evaluate(s, x)
        assert abs(tension_field(s, x) + 2 * phi) < 1e-9
    s = build(space("su_n_so_n", 3))
    for i in range(20):
        x = haar_sample(s.group, (1, i))
        assert abs(tension_field(s, x) + 20 / 3 * evaluate(s, x)) < 1e-9


def test_conformality_sp2_and_grc():
    s = build(space("sp_n", 2))
    for i in range(20):
        x = haar_sample(s.group, (3, i))
        phi = evaluate(s, x)
        assert abs(conformality(s, s, x) + 0.5 * phi ** 2) < 1e-9
    s = build(space("gr_c", 2, 2))
    for i in range(50):
        x = haar_sample(s.group, (4, i))
        phi = evaluate(s, x)
        assert abs(conformality(s, s, x) + 2 * phi ** 2) < 1e-9


def test_conformality_bilinear_zero_and_mismatch():
    s = build(space("su_n", 3))
    z = constant_spec(s.space, 0.0)
    x = haar_sample(s.group, 2)
    assert conformality(s, z, x) == 0
    with pytest.raises(ValueError):
        conformality(s, build(space("su_n", 4)), x)


@pytest.mark.parametrize("sid,n,m", SPECS)
def test_table_rows_small(sid, n, m):
    s = build(space(sid, n, m))
    r = eigen_residuals(s, 10, 1, EXACT)
    assert r.max_tau_residual < 1e-9 and r.max_kappa_residual < 1e-9
    r = eigen_residuals(s, 5, 1, FD)
    assert r.max_tau_residual < 1e-6 and r.max_kappa_residual < 1e-6


def test_wrong_lambda_negative_control():
    s = build(space("su_n", 3))
    r = eigen_residuals(s, 30, 0, EXACT, lam=s.lambda_ + 1)
    # |tau - (lambda+1) phi| = |phi|; here |phi| = |z_12| <= 1
    assert r.max_tau_residual >= 0.5 * r.median_abs_phi


def test_zero_samples():
    r = eigen_residuals(build(space("su_n", 2)), 0)
    assert (r.max_tau_residual, r.max_kappa_residual, r.samples) == (0.0, 0.0, 0)
    assert "no samples" in r.flags


def test_threads_do_not_change_results():
    s = build(space("sp_n", 2))
    a = eigen_residuals(s, 12, 9, FD, threads=1)
    b = eigen_residuals(s, 12, 9, FD, threads=3)
    assert (a.max_tau_residual, a.max_kappa_residual) == (b.max_tau_residual, b.max_kappa_residual)


@pytest.mark.parametrize("sid,n,m", [s for s in SPECS if s[0] not in ("so_n", "su_n", "sp_n")])
def test_tension_basis_invariance(sid, n, m):
    s = build(space(sid, n, m))
    split = list(horizontal_basis(s.space)) + list(subgroup_basis(s.space))
    for i in range(5):
        x = haar_sample(s.group, (8, i))
        assert abs(tension_field(s, x) - tension_field(s, x, basis=split)) < 1e-10


def test_product_rule_examples():
    sp = space("so_n", 4)
    f1 = build(sp, {"a": [1, 1j, 0, 0], "p": [1, 0, 0, 0]})
    f2 = build(sp, {"a": [0, 0, 1, 1j], "p": [0.5, 1, 0, 0]})
    one = constant_spec(sp, 1.0)
    for i in range(5):
        x = haar_sample(sp.total_group, (6, i))
        assert product_rule_residual(f1, f2, x) < 1e-6
        assert product_rule_residual(f1, f1, x) < 1e-6
        assert product_rule_residual(f1, one, x) < 1e-6


def test_gradient_components_count():
    s = build(space("sp_n", 2))
    c = gradient_components(s, haar_sample(s.group, 0))
    assert c.shape == (10,)
