"""Command-line front end.

One artifact file per run plus a sidecar ``<stem>.meta.json`` holding the
package version and the full parameter record, so every output can be
regenerated from its sidecar.  Artifacts are byte-identical across runs
with the same configuration.

Exit codes: 0 success, 1 usage error (bad flags, symbol syntax, parameter
caps), 2 numerical failure (solver non-convergence), 3 refused diagnostic
(an explicitly requested winding or probe classification that would not be
trustworthy).

This module imports the numeric stack lazily: ``--threads`` caps the BLAS
worker pools through environment variables, which are only honored if set
before numpy/scipy load.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict, dataclass
from typing import Optional

from .errors import (
    ArityError,
    BergspecError,
    CapExceededError,
    DegenerateGridError,
    EmptyRegionError,
    IllConditionedWindingError,
    ProbeLocationError,
    SolverError,
    SymbolSyntaxError,
)

OUTDIR_ENV = "BERGSPEC_OUTDIR"

_THREAD_ENV = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)

_JSON_ONLY = ("spectrum", "ess1d", "ess2d", "verify")


@dataclass(frozen=True)
class RunConfig:
    """Parameter record stored in the artifact sidecar."""

    subcommand: str
    symbol: Optional[str] = None
    n: Optional[int] = None
    n2: Optional[int] = None
    q_r: Optional[int] = None
    q_theta: Optional[int] = None
    grid: Optional[dict] = None
    eps: Optional[float] = None
    m_theta: Optional[int] = None
    out: Optional[str] = None
    format: str = "json"
    seed: int = 0
    extras: Optional[dict] = None

    def record(self) -> dict:
        rec = {k: v for k, v in asdict(self).items()
               if v is not None and k != "extras"}
        if self.extras:
            rec.update(self.extras)
        return rec


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the documented contract is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _apply_threads(threads: int) -> None:
    if threads < 0:
        raise BergspecError("--threads must be >= 0")
    if threads == 0:
        return
    if "numpy" in sys.modules:
        _warn("thread cap requested after numeric libraries loaded; "
              "BLAS pools may ignore it")
    for var in _THREAD_ENV:
        os.environ[var] = str(threads)


def _build_parser() -> _ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--out", help="artifact path (overrides --outdir)")
    common.add_argument("--outdir",
                        help=f"output directory (default ${OUTDIR_ENV} or .)")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="artifact format (csv: matrix and pseudo only)")
    common.add_argument("--threads", type=int, default=0,
                        help="cap BLAS worker threads (0 = auto)")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized solvers")

    symbolp = _ArgumentParser(add_help=False)
    symbolp.add_argument("--symbol", required=True,
                         help="symbol expression, e.g. 'z+conj(w)'")

    quadp = _ArgumentParser(add_help=False)
    quadp.add_argument("--q-r", type=int, default=None,
                       help="radial quadrature nodes (default 64)")
    quadp.add_argument("--q-theta", type=int, default=None,
                       help="angular quadrature nodes (default 256)")

    gridp = _ArgumentParser(add_help=False)
    gridp.add_argument("--re-min", type=float, default=-1.5)
    gridp.add_argument("--re-max", type=float, default=1.5)
    gridp.add_argument("--im-min", type=float, default=-1.5)
    gridp.add_argument("--im-max", type=float, default=1.5)
    gridp.add_argument("--n-re", type=int, default=None,
                       help="grid columns (default 201)")
    gridp.add_argument("--n-im", type=int, default=None,
                       help="grid rows (default 201)")

    epsp = _ArgumentParser(add_help=False)
    epsp.add_argument("--eps", type=float, default=1e-3,
                      help="pseudospectrum threshold")

    parser = _ArgumentParser(
        prog="bergspec",
        description="Toeplitz operators on Bergman spaces: matrices, "
                    "spectra, pseudospectra, essential spectra.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("matrix", parents=[common, symbolp, quadp],
                       help="assemble a truncated Toeplitz matrix")
    p.add_argument("--n", type=int, default=16, help="1D section size")
    p.add_argument("--n2", type=int, default=4, help="2D per-factor size")
    p.set_defaults(handler=_cmd_matrix)

    p = sub.add_parser("spectrum", parents=[common, symbolp, quadp],
                       help="eigenvalues of the section, with residuals")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--n2", type=int, default=4)
    p.set_defaults(handler=_cmd_spectrum)

    p = sub.add_parser("pseudo", parents=[common, symbolp, quadp, gridp, epsp],
                       help="sigma_min grid of the section")
    p.add_argument("--n", type=int, default=120)
    p.add_argument("--n2", type=int, default=8)
    p.set_defaults(handler=_cmd_pseudo)

    p = sub.add_parser("ess1d", parents=[common, symbolp],
                       help="boundary-symbol range of a one-variable symbol")
    p.add_argument("--m-theta", type=int, default=256)
    p.set_defaults(handler=_cmd_ess1d)

    p = sub.add_parser("ess2d", parents=[common, symbolp, quadp, epsp],
                       help="essential spectrum union over boundary slices")
    p.add_argument("--n", type=int, default=120, help="slice section size")
    p.add_argument("--m", type=int, default=64, help="theta nodes per family")
    p.add_argument("--m-theta", type=int, default=256,
                   help="boundary samples inside each slice estimate")
    p.add_argument("--resolution", type=int, default=201,
                   help="shared grid resolution per axis")
    p.add_argument("--pad", type=float, default=0.5,
                   help="padding around the sampled boundary range")
    p.add_argument("--no-refine", action="store_true",
                   help="skip the doubled-theta stability round")
    p.set_defaults(handler=_cmd_ess2d)

    p = sub.add_parser("verify", parents=[common, symbolp, quadp, epsp],
                       help="winding diagnostic or finite-section probe check")
    p.add_argument("--winding", nargs=2, type=float, metavar=("RE", "IM"),
                   help="winding number of the boundary curve about RE+IM*i")
    p.add_argument("--probe", nargs=2, type=float, metavar=("RE", "IM"),
                   action="append",
                   help="probe point for the finite-section check (repeatable)")
    p.add_argument("--m-theta", type=int, default=256)
    p.add_argument("--n", type=int, default=120)
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--n2", type=int, default=16,
                   help="per-factor size of the probe sections")
    p.add_argument("--resolution", type=int, default=201)
    p.add_argument("--pad", type=float, default=0.5)
    p.add_argument("--no-refine", action="store_true")
    p.set_defaults(handler=_cmd_verify)

    p = sub.add_parser("selftest", parents=[common],
                       help="run the built-in oracle suite")
    p.set_defaults(handler=_cmd_selftest)

    return parser


def _artifact_path(args, default_stem: str) -> str:
    ext = "csv" if args.format == "csv" else "json"
    if args.out:
        path = args.out
    else:
        outdir = args.outdir or os.environ.get(OUTDIR_ENV) or "."
        path = os.path.join(outdir, f"{default_stem}.{ext}")
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def _write_artifact(path: str, text: str, config: RunConfig) -> None:
    from . import __version__
    from .serialize import json_text

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    sidecar = os.path.splitext(path)[0] + ".meta.json"
    with open(sidecar, "w", encoding="utf-8") as fh:
        fh.write(json_text({"version": __version__, "config": config.record()}))
    print(path)
    print(sidecar)


def _check_format(args) -> None:
    if args.subcommand in _JSON_ONLY and args.format != "json":
        raise BergspecError(
            f"{args.subcommand} artifacts are JSON only; csv is available "
            "for matrix and pseudo")


def _make_quad(args, e):
    """Build the quadrature rule, doubling the defaults for symbols with
    no exactness guarantee (Abs/Re/Im/Exp nodes) unless the user chose."""
    from .quadrature import build_quadrature
    from .toeplitz import DEFAULT_Q_R, DEFAULT_Q_THETA

    explicit = args.q_r is not None or args.q_theta is not None
    q_r = args.q_r if args.q_r is not None else DEFAULT_Q_R
    q_theta = args.q_theta if args.q_theta is not None else DEFAULT_Q_THETA
    if e.has_nonpolynomial_node and not explicit:
        q_r, q_theta = 2 * DEFAULT_Q_R, 2 * DEFAULT_Q_THETA
        _warn("symbol contains abs/re/im/exp (quadrature is not exact); "
              f"doubling the rule to Q_r={q_r}, Q_theta={q_theta}")
    return build_quadrature(q_r, q_theta), q_r, q_theta


def _build_section(args, e, quad):
    from .toeplitz import build_toeplitz_1d, build_toeplitz_2d

    if e.is_two_variable:
        return build_toeplitz_2d(e, args.n2, quad), None, args.n2
    return build_toeplitz_1d(e, args.n, quad), args.n, None


def _cmd_matrix(args) -> int:
    from .serialize import matrix_to_csv, matrix_to_json
    from .symbols import parse

    e = parse(args.symbol)
    quad, q_r, q_theta = _make_quad(args, e)
    m, n1, n2 = _build_section(args, e, quad)
    text = matrix_to_csv(m) if args.format == "csv" else matrix_to_json(m)
    path = _artifact_path(args, "matrix")
    config = RunConfig(subcommand="matrix", symbol=args.symbol, n=n1, n2=n2,
                       q_r=q_r, q_theta=q_theta, out=path, format=args.format,
                       seed=args.seed, extras={"mode": m.meta["mode"]})
    _write_artifact(path, text, config)
    return 0


def _cmd_spectrum(args) -> int:
    from .serialize import spectrum_to_json
    from .spectra import eigenvalues
    from .symbols import parse

    _check_format(args)
    e = parse(args.symbol)
    quad, q_r, q_theta = _make_quad(args, e)
    m, n1, n2 = _build_section(args, e, quad)
    spec = eigenvalues(m)
    path = _artifact_path(args, "spectrum")
    config = RunConfig(subcommand="spectrum", symbol=args.symbol, n=n1, n2=n2,
                       q_r=q_r, q_theta=q_theta, out=path, format=args.format,
                       seed=args.seed)
    _write_artifact(path, spectrum_to_json(spec), config)
    return 0


def _grid_from_args(args, default_res: int = 201):
    from .spectra import GridSpec

    n_re = args.n_re if args.n_re is not None else default_res
    n_im = args.n_im if args.n_im is not None else default_res
    return GridSpec(args.re_min, args.re_max, args.im_min, args.im_max,
                    n_re, n_im)


def _cmd_pseudo(args) -> int:
    from .serialize import pseudo_to_csv, pseudo_to_json
    from .spectra import pseudospectrum
    from .symbols import parse

    e = parse(args.symbol)
    quad, q_r, q_theta = _make_quad(args, e)
    m, n1, n2 = _build_section(args, e, quad)
    default_res = 201
    if m.entries.shape[0] > 200 and args.n_re is None and args.n_im is None:
        # beyond the batched solver a per-node SVD runs; keep that feasible
        default_res = 51
        _warn("large section uses per-node SVD; defaulting the grid to "
              "51x51 (override with --n-re/--n-im)")
    grid = _grid_from_args(args, default_res)
    psd = pseudospectrum(m, grid, args.eps, seed=args.seed)
    text = pseudo_to_csv(psd) if args.format == "csv" else pseudo_to_json(psd)
    path = _artifact_path(args, "pseudo")
    config = RunConfig(subcommand="pseudo", symbol=args.symbol, n=n1, n2=n2,
                       q_r=q_r, q_theta=q_theta, grid=grid.as_dict(),
                       eps=args.eps, out=path, format=args.format,
                       seed=args.seed, extras={"method": psd.meta["method"]})
    _write_artifact(path, text, config)
    return 0


def _cmd_ess1d(args) -> int:
    from .serialize import region_to_json
    from .spectra import essential_spectrum_1d
    from .symbols import parse

    _check_format(args)
    e = parse(args.symbol)
    region = essential_spectrum_1d(e, args.m_theta)
    path = _artifact_path(args, "ess1d")
    config = RunConfig(subcommand="ess1d", symbol=args.symbol,
                       m_theta=args.m_theta, out=path, format=args.format,
                       seed=args.seed)
    _write_artifact(path, region_to_json(region), config)
    return 0


def _run_ess2d(args, e, quad):
    from .essential import essential_spectrum_2d

    return essential_spectrum_2d(
        e, n=args.n, eps=args.eps, m=args.m, m_theta=args.m_theta,
        resolution=args.resolution, pad=args.pad,
        refine=not args.no_refine, seed=args.seed, quad=quad)


def _cmd_ess2d(args) -> int:
    from .serialize import essential_result_to_json
    from .symbols import parse

    _check_format(args)
    e = parse(args.symbol)
    quad, q_r, q_theta = _make_quad(args, e)
    result = _run_ess2d(args, e, quad)
    path = _artifact_path(args, "ess2d")
    config = RunConfig(subcommand="ess2d", symbol=args.symbol, n=args.n,
                       q_r=q_r, q_theta=q_theta, eps=args.eps,
                       m_theta=args.m_theta, out=path, format=args.format,
                       seed=args.seed,
                       extras={"m": args.m, "resolution": args.resolution,
                               "pad": args.pad, "refine": not args.no_refine})
    _write_artifact(path, essential_result_to_json(result), config)
    return 0


def _cmd_verify(args) -> int:
    from .serialize import json_text, verify_report_to_json
    from .symbols import parse

    _check_format(args)
    if (args.winding is None) == (not args.probe):
        raise BergspecError("verify needs exactly one of --winding or --probe")
    e = parse(args.symbol)
    path = _artifact_path(args, "verify")
    if args.winding is not None:
        from .spectra import winding_number

        lam = complex(args.winding[0], args.winding[1])
        k = winding_number(e, lam, args.m_theta)
        config = RunConfig(subcommand="verify", symbol=args.symbol,
                           m_theta=args.m_theta, out=path, format=args.format,
                           seed=args.seed,
                           extras={"mode": "winding",
                                   "lambda": [lam.real, lam.imag]})
        text = json_text({"symbol": args.symbol,
                          "lambda": lam,
                          "m_theta": args.m_theta,
                          "winding": k})
        _write_artifact(path, text, config)
        return 0
    from .essential import verify_against_2d_sections

    quad, q_r, q_theta = _make_quad(args, e)
    probes = [complex(re, im) for re, im in args.probe]
    result = _run_ess2d(args, e, quad)
    report = verify_against_2d_sections(e, result, probes, n2=args.n2,
                                        eps=args.eps, quad=quad)
    config = RunConfig(subcommand="verify", symbol=args.symbol, n=args.n,
                       n2=args.n2, q_r=q_r, q_theta=q_theta, eps=args.eps,
                       m_theta=args.m_theta, out=path, format=args.format,
                       seed=args.seed,
                       extras={"mode": "probe", "m": args.m,
                               "resolution": args.resolution, "pad": args.pad,
                               "refine": not args.no_refine,
                               "probes": [[p.real, p.imag] for p in probes]})
    _write_artifact(path, verify_report_to_json(report), config)
    return 0


def _cmd_selftest(args) -> int:
    from .selftest import run_selftest

    failures = run_selftest(verbose=True)
    return 0 if not failures else 2


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_threads(args.threads)
        return _dispatch(args)
    except SymbolSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArityError, CapExceededError, DegenerateGridError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IllConditionedWindingError, ProbeLocationError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (EmptyRegionError, BergspecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    import numpy as np

    try:
        return args.handler(args)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"linear algebra failure: {exc}") from exc


if __name__ == "__main__":
    sys.exit(main())
