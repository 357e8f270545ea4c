"""``symmin`` command-line front end.

Exit codes: 0 when every check passes, 1 when any check fails, 2 on usage
or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from symmin.catalog import (
    ConstraintViolation,
    EigenfunctionSpec,
    build,
    constant_spec,
    invariance_residual,
    parse_params,
)
from symmin.fiber import (
    CASES,
    critical_gallery,
    find_fiber_points,
    jacobian_singular_values,
    mean_curvature_estimate,
    regularity_check,
)
from symmin.groups import SPACE_IDS, GRASSMANNIANS, haar_sample, space, subgroup_basis
from symmin.operators import DerivativeEngine, eigen_residuals, gradient_components, product_rule_residual
from symmin.report import ReportSink, VerificationReport

TOL_EXACT = 1e-9
TOL_FD = 1e-6
TOL_CURVATURE = 1e-3
TOL_INVARIANCE = 1e-12
TOL_VERTICAL = 1e-10
TOL_PRODUCT = 1e-6
TOL_CRITICAL_PHI = 1e-12
TOL_CRITICAL_GRAD = 1e-10
MIN_REGULAR_GRAD = 1e-3
MIN_CONVERGED_FRACTION = 0.8
CONTROL_H = 1e-2
CONTROL_FRACTION = 0.8

DEFAULT_TABLE_SIZES = (
    ("so_n", 4, None),
    ("su_n", 3, None),
    ("sp_n", 2, None),
    ("su_n_so_n", 3, None),
    ("sp_n_u_n", 2, None),
    ("so_2n_u_n", 2, None),
    ("su_2n_sp_n", 2, None),
    ("gr_r", 2, 2),
    ("gr_c", 2, 2),
    ("gr_h", 2, 2),
)

KINDS = ("eigen", "invariance", "regularity", "minimality", "product-rules")


class ConfigError(ValueError):
    """Bad combination of command-line options (exit code 2)."""


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.t0 = time.perf_counter()

    def ms(self) -> int:
        return int(round((time.perf_counter() - self.t0) * 1000)) if self.enabled else 0


def _report(spec: EigenfunctionSpec, check, residual, tol, samples, seed, engine, timer):
    return VerificationReport(spec.space.label, spec.params_json(), check, float(residual),
                              float(tol), int(samples), int(seed), engine, timer.ms())


# ---------------------------------------------------------------------------
# check runners (each returns a list of reports)


def run_eigen(spec, samples=50, seed=0, engine: DerivativeEngine = DerivativeEngine(),
              tol=None, threads=1, timing=False) -> List[VerificationReport]:
    tol = (TOL_EXACT if engine.mode == "exact" else TOL_FD) if tol is None else tol
    timer = _Timer(timing)
    rep = eigen_residuals(spec, samples, seed, engine, threads=threads)
    name = engine.describe()
    return [
        _report(spec, "eigen:tau", rep.max_tau_residual, tol, samples, seed, name, timer),
        _report(spec, "eigen:kappa", rep.max_kappa_residual, tol, samples, seed, name, timer),
    ]


def run_invariance(spec, samples=20, seed=0, k_samples=20, threads=1, timing=False,
                   tol=None) -> List[VerificationReport]:
    if not spec.space.is_quotient:
        raise ConfigError(f"{spec.space.space} is not a quotient family")
    timer = _Timer(timing)
    K = subgroup_basis(spec.space)

    def one(i):
        x = haar_sample(spec.group, (seed, i))
        inv = invariance_residual(spec, x, k_samples, (seed, i))
        vert = max((abs(c) for c in gradient_components(spec, x, K)), default=0.0)
        return inv, vert

    rows = _map(one, range(samples), threads)
    inv = max((r[0] for r in rows), default=0.0)
    vert = max((r[1] for r in rows), default=0.0)
    return [
        _report(spec, "invariance:subgroup", inv, TOL_INVARIANCE if tol is None else tol,
                samples, seed, "exact", timer),
        _report(spec, "invariance:vertical-derivative", vert, TOL_VERTICAL, samples, seed,
                "exact", timer),
    ]


def run_regularity(spec, restarts=20, seed=0, threads=1, timing=False) -> List[VerificationReport]:
    timer = _Timer(timing)
    try:
        fps = find_fiber_points(spec, seed, restarts, threads)
    except ValueError as err:
        return [_report(spec, f"regularity:rejected ({err})", float("inf"), 0.0, restarts, seed,
                        "exact", timer)]
    conv = [f for f in fps if f.converged]
    frac = len(conv) / max(restarts, 1)
    grads = [regularity_check(spec, f)[1] for f in conv]
    min_grad = min(grads) if grads else 0.0
    inv = 1.0 / min_grad if min_grad > 0 else float("inf")
    return [
        _report(spec, "regularity:unconverged-fraction", 1.0 - frac, 1.0 - MIN_CONVERGED_FRACTION,
                restarts, seed, "exact", timer),
        _report(spec, "regularity:inverse-min-grad-norm", inv, 1.0 / MIN_REGULAR_GRAD,
                restarts, seed, "exact", timer),
    ]


def run_gallery_case(case_id, timing=False) -> List[VerificationReport]:
    timer = _Timer(timing)
    res = critical_gallery(case_id)
    spec = res.case.spec()
    return [
        _report(spec, f"critical[{case_id}]:abs-phi", abs(res.phi), TOL_CRITICAL_PHI, 1, 0,
                "exact", timer),
        _report(spec, f"critical[{case_id}]:grad-norm", res.grad_norm, TOL_CRITICAL_GRAD, 1, 0,
                "exact", timer),
    ]


def run_minimality(spec, points=10, seed=0, control: Optional[complex] = None, h=1e-3,
                   threads=1, timing=False, tol=TOL_CURVATURE) -> List[VerificationReport]:
    """Mean curvature and Jacobian rank at ``points`` regular fibre points.

    With ``control`` the level set phi = control is examined instead and
    the check asks for ||H|| > 1e-2 at >= 80% of the points.
    """
    timer = _Timer(timing)
    target = spec if control is None else spec.shifted(control)
    fps = [f for f in find_fiber_points(target, seed, 2 * points, threads) if f.converged]
    fps = [f for f in fps if regularity_check(target, f)[0] == "regular"][:points]
    curv = _map(lambda f: mean_curvature_estimate(target, f, h), fps, threads)
    sig = [jacobian_singular_values(target, f.x) for f in fps]
    n = len(fps)
    short = float(points - n)
    if control is not None:
        below = sum(1 for H in curv if not H > CONTROL_H) + (points - n)
        return [_report(spec, f"minimality:control-level({control})-flat-fraction",
                        below / points, 1.0 - CONTROL_FRACTION, n, seed, "exact", timer)]
    s2 = min((s[1] for s in sig), default=0.0)
    return [
        _report(spec, "minimality:missing-regular-points", short, 0.0, n, seed, "exact", timer),
        _report(spec, "minimality:max-mean-curvature", max(curv, default=float("inf")), tol,
                n, seed, "exact", timer),
        _report(spec, "codimension:sigma3", max((s[2] for s in sig), default=float("inf")),
                1e-8, n, seed, "exact", timer),
        _report(spec, "codimension:inverse-sigma2", 1.0 / s2 if s2 > 0 else float("inf"), 1e3,
                n, seed, "exact", timer),
    ]


def run_product_rules(spec, samples=50, seed=0, other: Optional[EigenfunctionSpec] = None,
                      threads=1, timing=False, tol=TOL_PRODUCT) -> List[VerificationReport]:
    timer = _Timer(timing)
    one_fn = constant_spec(spec.space, 1.0)
    pairs = [("square", spec), ("constant-one", one_fn)]
    if other is not None:
        pairs.append(("pair", other))
    out = []
    for tag, psi in pairs:
        def one(i, psi=psi):
            x = haar_sample(spec.group, (seed, i))
            return product_rule_residual(spec, psi, x)
        res = max(_map(one, range(samples), threads), default=0.0)
        out.append(_report(spec, f"product-rule:{tag}", res, tol, samples, seed, "fd-vs-exact",
                           timer))
    return out


def _map(fn, items, threads):
    items = list(items)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# ---------------------------------------------------------------------------
# commands


def _engine(name: str) -> DerivativeEngine:
    return DerivativeEngine("exact") if name == "exact" else DerivativeEngine("fd")


def _space_from_args(args):
    if args.space not in SPACE_IDS:
        raise ConfigError(f"unknown space {args.space!r}; choose from {', '.join(SPACE_IDS)}")
    if args.n is None:
        raise ConfigError("--n is required")
    if args.space in GRASSMANNIANS and args.m is None:
        raise ConfigError(f"{args.space} needs --m")
    return space(args.space, args.n, args.m if args.space in GRASSMANNIANS else None)


def _open_sink(args):
    stream = open(args.out, "a", encoding="utf-8") if args.out else sys.stdout
    csv_stream = open(args.csv, "a", encoding="utf-8", newline="") if args.csv else None
    return ReportSink(stream, csv_stream), [s for s in (stream, csv_stream)
                                            if s not in (None, sys.stdout)]


def _summary(reports, stream):
    for r in reports:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag}  {r.space:28s} {r.check:46s} {r.residual:.3e} (tol {r.tolerance:.0e})",
              file=stream)


def cmd_table(args) -> int:
    engine = _engine(args.engine)
    sizes = []
    for sid, n, m in DEFAULT_TABLE_SIZES:
        if args.n is not None:
            n = args.n
        if args.m is not None and sid in GRASSMANNIANS:
            m = args.m
        sizes.append(space(sid, n, m))
    sink, files = _open_sink(args) if args.out else (ReportSink(None), [])
    ok = True
    print(f"{'space':28s} {'lambda':>8s} {'mu':>8s} {'tau-res':>10s} {'kappa-res':>10s}  status")
    for sp in sizes:
        spec = build(sp)
        reps = run_eigen(spec, args.samples, args.seed, engine, threads=args.threads,
                         timing=args.timing)
        sink.extend(reps)
        good = all(r.passed for r in reps)
        ok &= good
        print(f"{sp.label:28s} {str(sp.expected_lambda):>8s} {str(sp.expected_mu):>8s} "
              f"{reps[0].residual:10.2e} {reps[1].residual:10.2e}  {'pass' if good else 'FAIL'}")
    for f in files:
        f.close()
    return 0 if ok else 1


def _parse_complex(text):
    return complex(text.replace(" ", "").replace("i", "j"))


def cmd_verify(args) -> int:
    if args.gallery:
        if args.kind != "regularity":
            raise ConfigError("--gallery only applies to 'verify regularity'")
        if args.gallery not in CASES:
            raise ConfigError(f"unknown gallery case {args.gallery!r}")
        reports = run_gallery_case(args.gallery, args.timing)
    else:
        if args.space is None:
            raise ConfigError("--space is required")
        sp = _space_from_args(args)
        params = parse_params(args.params) if args.params else None
        spec = build(sp, params, require_regular=args.require_regular)
        samples = args.samples
        if args.kind == "eigen":
            reports = run_eigen(spec, samples or 50, args.seed, _engine(args.engine),
                                tol=args.tol, threads=args.threads, timing=args.timing)
        elif args.kind == "invariance":
            reports = run_invariance(spec, samples or 20, args.seed, threads=args.threads,
                                     timing=args.timing, tol=args.tol)
        elif args.kind == "regularity":
            reports = run_regularity(spec, samples or 20, args.seed, args.threads, args.timing)
        elif args.kind == "minimality":
            control = _parse_complex(args.control) if args.control else None
            reports = run_minimality(spec, samples or 10, args.seed, control,
                                     threads=args.threads, timing=args.timing,
                                     tol=args.tol or TOL_CURVATURE)
        else:
            other = None
            if args.params2:
                other = build(sp, parse_params(args.params2), allow_critical=True)
            reports = run_product_rules(spec, samples or 50, args.seed, other, args.threads,
                                        args.timing, tol=args.tol or TOL_PRODUCT)
    sink, files = _open_sink(args)
    sink.extend(reports)
    for f in files:
        f.close()
    if args.out:
        _summary(reports, sys.stdout)
    return 0 if all(r.passed for r in reports) else 1


def cmd_gallery(args) -> int:
    if args.action == "list":
        for cid, case in CASES.items():
            print(f"{cid:20s} {case.space.label:26s} {case.description}")
        return 0
    if args.case_id is None:
        raise ConfigError("gallery run needs a case id")
    if args.case_id not in CASES:
        raise ConfigError(f"unknown gallery case {args.case_id!r}")
    res = critical_gallery(args.case_id)
    print(f"case      {args.case_id}")
    print(f"space     {res.case.space.label}")
    print(f"phi(x)    {res.phi.real:+.3e}{res.phi.imag:+.3e}i")
    print(f"grad_norm {res.grad_norm:.3e}")
    verdict = "critical confirmed" if res.passed else "NOT critical"
    print(f"result    {verdict} (expected {res.case.expected})")
    if args.out:
        sink, files = _open_sink(args)
        sink.extend(run_gallery_case(args.case_id))
        for f in files:
            f.close()
    return 0 if res.passed else 1


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symmin",
                                description="Verify eigenfunctions on classical symmetric "
                                            "spaces and the minimality of their zero fibres.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--out", help="append JSON-lines reports to this file")
        sp.add_argument("--csv", help="append a CSV mirror of the reports")
        sp.add_argument("--timing", action="store_true",
                        help="record wall_time_ms (otherwise 0, keeping output reproducible)")

    t = sub.add_parser("table", help="reproduce the eigenvalue table")
    t.add_argument("--engine", choices=("exact", "fd"), default="exact")
    t.add_argument("--samples", type=int, default=50)
    t.add_argument("--n", type=int, help="size n for every family")
    t.add_argument("--m", type=int, help="size m for the Grassmannians")
    common(t)

    v = sub.add_parser("verify", help="run one verification suite")
    v.add_argument("kind", choices=KINDS)
    v.add_argument("--space", help=f"one of: {', '.join(SPACE_IDS)}")
    v.add_argument("--n", type=int)
    v.add_argument("--m", type=int)
    v.add_argument("--params", help='JSON object, e.g. {"a": [[1,0],[0,1],[0,0]], "p": [1,0,0]}')
    v.add_argument("--params2", help="second parameter set (product-rules pair check)")
    v.add_argument("--samples", type=int, default=None)
    v.add_argument("--engine", choices=("exact", "fd"), default="exact")
    v.add_argument("--tol", type=float, default=None, help="override the default tolerance")
    v.add_argument("--gallery", help="gallery case id (verify regularity only)")
    v.add_argument("--control", help="complex level c for a non-eigen control (minimality)")
    v.add_argument("--require-regular", action="store_true",
                   help="also enforce regular sub-family constraints")
    common(v)

    g = sub.add_parser("gallery", help="critical-point gallery; cases: " + ", ".join(CASES))
    g.add_argument("action", choices=("list", "run"))
    g.add_argument("case_id", nargs="?")
    g.add_argument("--out")
    g.add_argument("--csv")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"table": cmd_table, "verify": cmd_verify, "gallery": cmd_gallery}
    try:
        return handlers[args.command](args)
    except (ConfigError, ConstraintViolation, ValueError, json.JSONDecodeError) as err:
        print(f"symmin: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
