"""Command-line front end.

Exit codes: 0 pass, 1 verification failed, 2 domain or axiom error,
3 configuration or IO error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io
from .affine import AffineKappa, domain_check, grading_from_catalog, verify_prop2
from .catalog import catalog, kappa0
from .cdybe import (
    EXACT_TOL,
    FD_TOL,
    cdyb_constancy_report,
    check_equivariance,
    proposition1_suite,
    sample_points,
)
from .drmatrix import (
    canonical_r,
    dirac_D,
    dirac_D_field,
    rational_cartan,
    reduce,
    reduced_canonical,
    trig_cartan,
    zero_field,
)
from .elliptic import EllipticRParams, elliptic_R, loop_consistency
from .errors import AxiomViolation, BadParams, DiracRMatrixError, DomainError, ParseError, ShapeError, UnknownName
from .lie import axiom_residuals, make_chain, parse_element

EXIT_PASS, EXIT_FAIL, EXIT_DOMAIN, EXIT_CONFIG = 0, 1, 2, 3
SUITES = ("cdybe", "equivariance", "prop1", "prop2", "elliptic-consistency", "all")


@dataclass
class SuiteConfig:
    suite: str
    algebra: dict
    chain: str = "auto"
    r_field: str = "canonical+"
    kappa: str | None = None
    radius: float | None = None
    seed: int = 0
    samples: int | None = None
    tol: float | None = None
    derivative: str = "auto"
    mu: str = "identity"
    window: int = 3
    k: str = "-1"
    omega: str | None = None
    extra: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


# ---------------------------------------------------------------- helpers


def _algebra_spec(args) -> dict:
    if getattr(args, "file", None):
        return {"file": args.file}
    name = getattr(args, "catalog", None) or getattr(args, "G", None)
    if not name:
        raise ParseError("give --catalog NAME or --file PATH")
    spec = {"catalog": name}
    for key in ("n", "d", "p"):
        val = getattr(args, key, None)
        if val is not None:
            spec[key] = val
    return spec


def load_algebra_spec(spec: dict, tol=1e-10):
    if "file" in spec:
        return io.load_algebra(spec["file"], tol)
    params = {k: v for k, v in spec.items() if k != "catalog"}
    return catalog(spec["catalog"], **params)


def _parse_element(A, text):
    try:
        return parse_element(A, text)
    except ValueError as exc:
        raise ParseError(f"cannot parse element {text!r}: {exc}") from exc


def _parse_complex(text, what):
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError as exc:
        raise ParseError(f"cannot parse {what} {text!r}") from exc


def default_K(A, spec="auto"):
    """Label list of the dynamical subalgebra ``K``."""
    kind = A.meta.get("catalog")
    if spec in ("auto", "cartan"):
        if kind == "e_selfdual" and spec == "auto":
            return [l for l in A.labels if l[0] in "JT"]
        if kind == "oscillator" and spec == "auto":
            return [l for l in A.labels if l in ("c", "N")]
        labels = [l for l in A.labels if l.startswith("H")]
        if not labels:
            raise ParseError(f"no Cartan labels in {A.name}; pass --K explicitly")
        return labels
    labels = [s.strip() for s in spec.split(",") if s.strip()]
    bad = [l for l in labels if l not in A.labels]
    if bad:
        raise ParseError(f"unknown labels in --K: {bad}")
    return labels


def default_kappa(A):
    kind = A.meta.get("catalog")
    if kind == "sl":
        n = A.meta["n"]
        j = np.arange(n)
        diag = 0.37 * j + 0.05 * j**2
        diag = diag - diag.mean()
        return np.concatenate([np.cumsum(diag)[: n - 1], np.zeros(A.dim - (n - 1))]).astype(complex)
    if kind == "e_selfdual":
        return 0.1 * kappa0(A)
    if kind == "oscillator":
        return A.element({"N": 0.5, "c": 0.2})
    raise ParseError(f"no default kappa for {A.name}; pass --kappa")


def default_radius(A):
    return 0.02 if A.meta.get("catalog") == "e_selfdual" else 0.1


def build_field(A, name, dyn_labels=None):
    table = {
        "canonical+": lambda: canonical_r(A, +1),
        "canonical-": lambda: canonical_r(A, -1),
        "canonical0": lambda: canonical_r(A, 0),
        "zero": lambda: zero_field(A),
    }
    if name not in table:
        raise ParseError(f"unknown field {name!r}; choose from {sorted(table)}")
    return table[name]()


def _sign(text):
    table = {"+": 1, "+1": 1, "1": 1, "-": -1, "-1": -1, "0": 0}
    if str(text) not in table:
        raise ParseError(f"sign must be +, - or 0, got {text!r}")
    return table[str(text)]


# ---------------------------------------------------------------- commands


def cmd_algebra_validate(args):
    spec = _algebra_spec(args)
    doc = {"command": "algebra validate", "algebra": spec}
    try:
        A = load_algebra_spec(spec, args.tol or 1e-10)
    except AxiomViolation as exc:
        doc.update(
            {
                "pass": False,
                "error": type(exc).__name__,
                "message": str(exc),
                "where": list(exc.where) if exc.where is not None else None,
                "residual": exc.residual,
            }
        )
        _emit(args, doc)
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    doc.update({"name": A.name, "dim": A.dim, "labels": list(A.labels), "residuals": axiom_residuals(A), "pass": True})
    _emit(args, doc)
    return EXIT_PASS


def cmd_rmatrix(args):
    A = load_algebra_spec(_algebra_spec(args))
    kappa = _parse_element(A, args.kappa) if args.kappa else default_kappa(A)
    sign = _sign(args.sign)
    construction = args.construction
    needs_chain = construction in ("reduced-canonical", "dirac-D", "reduce")
    meta = {"construction": construction, "sign": sign}
    if needs_chain:
        K = default_K(A, args.K)
        chain = make_chain(A, K, description=f"K={K}")
        if chain.M.shape[1] % 2:
            dirac_D(chain, kappa)  # singular for every kappa
        meta["K"] = K
    if construction == "canonical":
        r = canonical_r(A, sign)
    elif construction == "reduced-canonical":
        r = reduced_canonical(A, K, sign)
    elif construction == "reduce":
        r = reduce(canonical_r(A, sign), chain)
    elif construction == "dirac-D":
        r = dirac_D_field(chain)
    elif construction == "trig-cartan":
        r = trig_cartan(A, sign)
    elif construction == "rational-cartan":
        r = rational_cartan(A)
    else:
        raise ParseError(f"unknown construction {construction!r}")
    value = r(kappa)
    doc = io.rmatrix_to_dict(A, kappa, value, r.sym_part, meta)
    _emit(args, doc)
    return EXIT_PASS


def _tol(cfg, exact):
    if cfg.tol is not None:
        return cfg.tol
    return EXACT_TOL if exact else FD_TOL


def _points(A, K_labels, cfg, center, domain_test):
    K = A.coord_subspace(K_labels)
    radius = cfg.radius if cfg.radius is not None else default_radius(A)
    return sample_points(center, K, radius, cfg.samples or 5, cfg.seed, domain_test)


def _finite_suites(A, cfg, which):
    reports = []
    center = _parse_element(A, cfg.kappa) if cfg.kappa else default_kappa(A)
    r = build_field(A, cfg.r_field)
    full = list(A.labels)
    modes = [cfg.derivative] if cfg.derivative != "both" else ["exact", "fd"]
    for mode in modes:
        exact = mode in ("exact", "auto") and r.exact_derivative is not None
        if "cdybe" in which:
            pts = _points(A, full, cfg, center, r.domain_test)
            reports.append(cdyb_constancy_report(r, pts, mode, _tol(cfg, exact)))
        if "equivariance" in which:
            pts = _points(A, full, cfg, center, r.domain_test)
            reports.append(check_equivariance(r, pts, mode, _tol(cfg, exact)))
        if "prop1" in which:
            K = default_K(A, cfg.chain)
            chain = make_chain(A, K, description=f"K={K}")
            rstar = reduce(r, chain)
            pts = _points(A, K, cfg, chain.P_K @ center, rstar.domain_test)
            reports.append(proposition1_suite(chain, r, pts, mode, _tol(cfg, exact)))
    return reports


def _affine_setup(A, cfg):
    g = grading_from_catalog(A, cfg.mu)
    omega = _parse_element(A, cfg.omega) if cfg.omega else np.zeros(A.dim, dtype=complex)
    k = _parse_complex(cfg.k, "k")
    return g, AffineKappa(omega, k, 0.0)


def _affine_suites(A, cfg, which):
    reports = []
    g, kap = _affine_setup(A, cfg)
    if "prop2" in which:
        modes = [cfg.derivative] if cfg.derivative != "both" else ["exact", "fd"]
        for mode in modes:
            mode = "exact" if mode == "auto" else mode
            reports.append(
                verify_prop2(g, kap, cfg.window, cfg.samples or 50, cfg.seed, mode, _tol(cfg, mode == "exact"))
            )
    if "elliptic-consistency" in which:
        reports.append(loop_consistency(g, kap, tol=cfg.tol if cfg.tol is not None else 1e-6))
    return reports


def run_suite(cfg: SuiteConfig):
    A = load_algebra_spec(cfg.algebra)
    if cfg.suite == "all":
        which = set(SUITES) - {"all"}
        if cfg.derivative == "auto":
            cfg.derivative = "both"
    else:
        which = {cfg.suite}
    reports = _finite_suites(A, cfg, which) + (
        _affine_suites(A, cfg, which) if which & {"prop2", "elliptic-consistency"} else []
    )
    return reports


def cmd_verify(args):
    if args.suite not in SUITES:
        raise ParseError(f"unknown suite {args.suite!r}")
    cfg = SuiteConfig(
        suite=args.suite,
        algebra=_algebra_spec(args),
        chain=args.K,
        r_field=args.r,
        kappa=args.kappa,
        radius=args.radius,
        seed=args.seed,
        samples=args.samples,
        tol=args.tol,
        derivative=args.derivative,
        mu=args.mu,
        window=args.window,
        k=args.k,
        omega=args.omega,
    )
    if cfg.tol is not None and not cfg.tol > 0:
        raise ParseError("--tol must be positive")
    resolved = asdict(cfg)
    reports = run_suite(cfg)
    passed = all(r.passed for r in reports)
    doc = {
        "command": "verify",
        "config": resolved,
        "reports": [r.to_dict() for r in reports],
        "summary": [
            {"check": r.check_name, "pass": r.passed, "max_residual": float(r.max_residual), "tol": r.tolerance}
            for r in reports
        ],
        "pass": passed,
    }
    _emit(args, doc)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.check_name}: max residual {r.max_residual:.3e} (tol {r.tolerance:.1e})", file=sys.stderr)
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_export_grading(args):
    A = load_algebra_spec(_algebra_spec(args))
    g = grading_from_catalog(A, args.mu)
    doc = io.grading_document(g)
    if args.k is not None:
        omega = _parse_element(A, args.omega) if args.omega else np.zeros(A.dim, dtype=complex)
        rep = domain_check(g, AffineKappa(omega, _parse_complex(args.k, "k")), args.window)
        doc["domain"] = rep.to_dict()
    _emit(args, doc)
    return EXIT_PASS


def cmd_elliptic_eval(args):
    A = load_algebra_spec(_algebra_spec(args))
    g = grading_from_catalog(A, args.mu)
    omega = _parse_element(A, args.omega) if args.omega else np.zeros(A.dim, dtype=complex)
    p = EllipticRParams(g, omega, _parse_complex(args.z, "z"), _parse_complex(args.tau, "tau"))
    _emit(args, io.elliptic_document(elliptic_R(p)))
    return EXIT_PASS


def _emit(args, doc):
    text = io.write_json(getattr(args, "out", None), doc)
    if getattr(args, "out", None) in (None, "-"):
        sys.stdout.write(text)


# ---------------------------------------------------------------- parser


def _add_global(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--tol", type=float, default=d, help="override every tolerance")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0)
    p.add_argument("--samples", type=int, default=d, help="sample points or element pairs")
    p.add_argument("--out", default=d, help="output JSON path (default stdout)")


def _add_algebra(p, allow_file=True):
    p.add_argument("--catalog", help="catalog name, e.g. sl3, e_selfdual, oscillator")
    p.add_argument("--G", help="alias of --catalog for affine commands")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--p", type=float)
    if allow_file:
        p.add_argument("--file", help="algebra JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dirac-rmatrix", description="Dynamical r-matrices, Dirac reduction and CDYBE checks.")
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    alg = sub.add_parser("algebra", help="algebra utilities")
    alg_sub = alg.add_subparsers(dest="action", parser_class=_Parser)
    alg_sub.required = True
    val = alg_sub.add_parser("validate", help="check Lie and invariance axioms")
    _add_algebra(val)
    _add_global(val, suppress=True)
    val.set_defaults(func=cmd_algebra_validate)

    rm = sub.add_parser("rmatrix", help="evaluate and export an r-matrix")
    _add_algebra(rm)
    _add_global(rm, suppress=True)
    rm.add_argument(
        "--construction",
        default="reduced-canonical",
        choices=["canonical", "reduced-canonical", "reduce", "dirac-D", "trig-cartan", "rational-cartan"],
    )
    rm.add_argument("--K", default="auto", help="auto, cartan, or comma-separated labels")
    rm.add_argument("--kappa", help='e.g. "0.3H + 0.1E"')
    rm.add_argument("--sign", default="+")
    rm.set_defaults(func=cmd_rmatrix)

    ver = sub.add_parser("verify", help="run a verification suite")
    ver.add_argument("suite", help="|".join(SUITES))
    _add_algebra(ver)
    _add_global(ver, suppress=True)
    ver.add_argument("--K", default="auto")
    ver.add_argument("--r", default="canonical+", help="canonical+, canonical-, canonical0, zero")
    ver.add_argument("--kappa")
    ver.add_argument("--radius", type=float)
    ver.add_argument("--derivative", default="auto", choices=["auto", "exact", "fd", "both"])
    ver.add_argument("--mu", default="identity", help="identity or coxeter")
    ver.add_argument("--window", type=int, default=3)
    ver.add_argument("--k", default="-1", help="coefficient of d")
    ver.add_argument("--omega", help="element of G_0")
    ver.set_defaults(func=cmd_verify)

    eg = sub.add_parser("export-grading", help="write the eigenspace grading of an automorphism")
    _add_algebra(eg)
    _add_global(eg, suppress=True)
    eg.add_argument("--mu", default="identity")
    eg.add_argument("--k", default=None, help="also report the affine domain check for this k")
    eg.add_argument("--omega")
    eg.add_argument("--window", type=int, default=3)
    eg.set_defaults(func=cmd_export_grading)

    el = sub.add_parser("elliptic", help="theta-function r-matrix")
    el_sub = el.add_subparsers(dest="action", parser_class=_Parser)
    el_sub.required = True
    ev = el_sub.add_parser("eval", help="evaluate the block operator at (omega, z, tau)")
    _add_algebra(ev)
    _add_global(ev, suppress=True)
    ev.add_argument("--mu", default="identity")
    ev.add_argument("--omega")
    ev.add_argument("--z", required=True)
    ev.add_argument("--tau", required=True)
    ev.set_defaults(func=cmd_elliptic_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ParseError, UnknownName, BadParams, ShapeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AxiomViolation, DomainError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DiracRMatrixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
