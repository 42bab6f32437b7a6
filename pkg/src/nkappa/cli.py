from __future__ import annotations
import argparse
import sys

import numpy as np

from . import config, formats
from .batch import generate_corpus, scan, write_corpus
from .classify import classify_full
from .colligation import example2_block, impedance_V, schur_colligation, transfer_W, validate
from .config import KernelConfig, LimitConfig, RealizeConfig
from .console import log, log_verbose
from .errors import (
    DomainError,
    InconsistencyError,
    NKappaError,
    NonStabilizationError,
    ResolventError,
)
from .factorize import factorize, t19_check
from .kernel import negative_squares
from .ratfun import example2_value
from .realize import held_out_points, pf_realize, realize_rkps, roundtrip_verify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCONSISTENT = 2
EXIT_UNSTABLE = 3


def _kernel_cfg(args) -> KernelConfig:
    overrides = {"seed": args.seed, "grid_start": args.kernel_grid_start, "grid_max": args.kernel_grid_max}
    if args.tol is not None:
        overrides["tol"] = args.tol
    return KernelConfig.from_env(**overrides)


def _points(args):
    if getattr(args, "z", None):
        return [formats.parse_complex(z) for z in args.z]
    if getattr(args, "points_file", None):
        return formats.parse_points(formats.read_json(args.points_file))
    raise ValueError("give -z a+bi or --points-file FILE")


def _fmt(M) -> str:
    A = np.atleast_2d(M)
    if A.shape == (1, 1):
        return formats.format_complex(A[0, 0])
    return "[" + "; ".join(" ".join(formats.format_complex(x) for x in row) for row in A) + "]"


def cmd_kappa(args) -> int:
    V = formats.read_function(args.file)
    est = negative_squares(V, _kernel_cfg(args))
    log("kappa", f"kappa={est.kappa} stabilized={est.stabilized}")
    log_verbose("kappa", f"history={est.counts} grids={est.grids_used}")
    if args.output:
        formats.write_json(args.output, formats.format_plain({
            "kappa": est.kappa,
            "stabilized": est.stabilized,
            "history": [list(c) for c in est.counts],
            "grids_used": est.grids_used,
        }))
    return EXIT_OK if est.stabilized else EXIT_UNSTABLE


def cmd_classify(args) -> int:
    V = formats.read_function(args.file)
    report = classify_full(V, _kernel_cfg(args), LimitConfig())
    log("classify", f"kappa={report.kappa.kappa} subclass={report.subclass} realizable={report.realizable}")
    log("classify", f"growth={report.cond_growth} strict={report.cond_strict} decay_on_B={report.cond_decay_on_B}")
    if report.infinity is not None:
        log("classify", f"infinity={report.infinity.label}")
    if args.output:
        formats.write_json(args.output, formats.format_report(report))
    if args.csv:
        formats.write_text(args.csv, scan(V))
    return EXIT_OK if report.kappa.stabilized else EXIT_UNSTABLE


def cmd_factor(args) -> int:
    V = formats.read_function(args.file)
    cfg = _kernel_cfg(args)
    fact = factorize(V, cfg)
    ok, route = t19_check(V, cfg)
    log("factor", f"kappa={fact.kappa} deg p={fact.p.degree} deg q={fact.q.degree}")
    log("factor", f"p={fact.p!r} q={fact.q!r}")
    log("factor", f"realizable={ok} ({route})")
    if args.output:
        formats.write_json(args.output, formats.format_factorization(fact))
    return EXIT_OK


def cmd_realize(args) -> int:
    V = formats.read_function(args.file)
    if args.method == "pf":
        c = pf_realize(V)
    else:
        c = realize_rkps(V, RealizeConfig())
    report = validate(c)
    log("realize", f"n={c.n} kappa={c.metric.kappa} valid={report.passed}")
    if args.output:
        formats.write_json(args.output, formats.format_colligation(c))
    if not report.passed:
        for p in report.problems:
            log("realize", p)
        return EXIT_INCONSISTENT
    return EXIT_OK


def _evaluate(args, tag: str, f) -> int:
    c = formats.read_colligation(args.model)
    failed = 0
    for z in _points(args):
        try:
            log(tag, f"z={formats.format_complex(z)} value={_fmt(f(c, z))}")
        except ResolventError as e:
            log(tag, f"z={formats.format_complex(z)} {e}")
            failed += 1
    return EXIT_INCONSISTENT if failed else EXIT_OK


def cmd_verify(args) -> int:
    V = formats.read_function(args.file)
    c = formats.read_colligation(args.model)
    cfg = _kernel_cfg(args)
    points = formats.parse_points(formats.read_json(args.points_file)) if args.points_file else held_out_points(args.points, cfg.seed)
    report = roundtrip_verify(V, c, points, args.tol_verify, cfg, require_minimal=not args.allow_nonminimal)
    log("verify", f"passed={report.passed} max_err={report.max_impedance_error:.3e} "
                  f"kernel_identity={report.kernel_identity_residual:.3e} minimal={report.minimal}")
    for p in report.problems:
        log("verify", p)
    return EXIT_OK if report.passed else EXIT_INCONSISTENT


def cmd_schur(args) -> int:
    block = example2_block(args.gamma, args.d, args.nodes)
    c = schur_colligation(block)
    log("schur", f"nodes={args.nodes} state dim={c.n} kappa={c.metric.kappa}")
    for z in (args.z or ["2i"]):
        zz = formats.parse_complex(z)
        model = impedance_V(c, zz)[0, 0]
        exact = example2_value(zz, args.gamma, args.d)
        log("schur", f"z={formats.format_complex(zz)} model={formats.format_complex(model)} "
                     f"closed form={formats.format_complex(exact)} err={abs(model - exact):.3e}")
    if args.output:
        formats.write_json(args.output, formats.format_colligation(c))
    return EXIT_OK


def cmd_scan(args) -> int:
    V = formats.read_function(args.file)
    text = scan(V, LimitConfig())
    if args.output:
        formats.write_text(args.output, text)
        log("scan", f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_corpus(args) -> int:
    seed = config.env_seed(args.seed)
    entries = generate_corpus(args.count, tuple(args.kappa), args.poles, seed, realizable_only=not args.mixed)
    path = write_corpus(entries, args.outdir, seed)
    log("corpus", f"{len(entries)} functions, manifest {path}")
    return EXIT_OK


COMMANDS = {
    "kappa": cmd_kappa,
    "classify": cmd_classify,
    "factor": cmd_factor,
    "realize": cmd_realize,
    "transfer": lambda args: _evaluate(args, "transfer", transfer_W),
    "impedance": lambda args: _evaluate(args, "impedance", impedance_V),
    "verify": cmd_verify,
    "schur": cmd_schur,
    "scan": cmd_scan,
    "corpus": cmd_corpus,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nkappa", description="Generalized Nevanlinna functions and their realizations")
    parser.add_argument("--seed", type=lambda s: int(s, 0), default=config.DEFAULT_SEED, help="Sampling seed (NKAPPA_SEED overrides)")
    parser.add_argument("--tol", type=float, default=None, help="Relative eigenvalue threshold")
    parser.add_argument("--kernel-grid-start", type=int, default=config.KERNEL_GRID_START)
    parser.add_argument("--kernel-grid-max", type=int, default=config.KERNEL_GRID_MAX)
    parser.add_argument("--quiet", action="store_true", help="Non-verbose printing")
    parser.add_argument("--verbose", action="store_true", help="Log every grid and attempt")

    sub = parser.add_subparsers(dest="cmd")
    for verb, help_text in (("kappa", "Count negative squares of the kernel"),
                            ("classify", "Full classification report"),
                            ("factor", "Factor V = p p#/(q q#) V0"),
                            ("scan", "CSV trace along the imaginary axis")):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("-f", "--file", required=True, help="Function JSON")
        p.add_argument("-o", "--output", help="Write the result here")
        if verb == "classify":
            p.add_argument("--csv", help="Also write the ray trace CSV")

    p_real = sub.add_parser("realize", help="Minimal colligation of a rational V")
    p_real.add_argument("-f", "--file", required=True)
    p_real.add_argument("-o", "--output")
    p_real.add_argument("--method", choices=["rkps", "pf"], default="rkps")

    for verb in ("transfer", "impedance"):
        p = sub.add_parser(verb, help=f"Evaluate the {verb} function of a colligation")
        p.add_argument("-m", "--model", required=True, help="Colligation JSON")
        p.add_argument("-z", action="append", help="Point as a+bi (repeatable; -z -2+0.5i and -z=-2+0.5i both work)")
        p.add_argument("--points-file", help="Points JSON")

    p_ver = sub.add_parser("verify", help="Round-trip check of a model against V")
    p_ver.add_argument("-f", "--file", required=True)
    p_ver.add_argument("-m", "--model", required=True)
    p_ver.add_argument("--points", type=int, default=50, help="Number of held-out points")
    p_ver.add_argument("--points-file", help="Points JSON instead of held-out points")
    p_ver.add_argument("--tol", dest="tol_verify", type=float, default=1e-6)
    p_ver.add_argument("--allow-nonminimal", action="store_true")

    p_schur = sub.add_parser("schur", help="Quadrature model of example2")
    p_schur.add_argument("--gamma", type=float, default=1.0)
    p_schur.add_argument("--d", type=float, default=0.0)
    p_schur.add_argument("--nodes", type=int, default=config.QUAD_NODES)
    p_schur.add_argument("-z", action="append", help="Point as a+bi (repeatable)")
    p_schur.add_argument("-o", "--output")

    p_corp = sub.add_parser("corpus", help="Generate test functions and a manifest")
    p_corp.add_argument("--count", type=int, default=20)
    p_corp.add_argument("--kappa", type=int, nargs="+", default=[0, 1, 2])
    p_corp.add_argument("--poles", type=int, default=3)
    p_corp.add_argument("--mixed", action="store_true", help="Include non-realizable functions")
    p_corp.add_argument("--outdir", required=True)
    return parser


def _attach_points(argv):
    """Glue each -z to its value so points like -2+0.5i are not read as options."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok == "-z":
            out.append("-z" + next(it, ""))
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _attach_points(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    if args.verbose:
        config.VERBOSE = True
    if args.quiet:
        config.VERBOSE = False
    if not args.cmd:
        parser.print_help()
        return EXIT_USAGE

    try:
        return COMMANDS[args.cmd](args)
    except InconsistencyError as e:
        log("error", f"inconsistency: {e}")
        return EXIT_INCONSISTENT
    except NonStabilizationError as e:
        log("error", f"no stabilization: {e}")
        return EXIT_UNSTABLE
    except DomainError as e:
        log("error", str(e))
        return EXIT_INCONSISTENT
    except (ValueError, OSError) as e:
        log("error", str(e))
        return EXIT_USAGE
    except NKappaError as e:
        log("error", str(e))
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    raise SystemExit(main())
