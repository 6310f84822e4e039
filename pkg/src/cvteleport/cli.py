"""Command-line driver: sweeps, one-shot evaluations, self-test and plotting."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import ConfigError, CVTeleportError

EXIT_OK, EXIT_COMPUTE, EXIT_USAGE = 0, 1, 2


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _add_resource_args(p):
    p.add_argument("--n", type=int, default=0, help="Fock number of the displaced state")
    p.add_argument("--k", type=int, default=0, help="photons added or subtracted")
    p.add_argument("--op", choices=("none", "add", "subtract"), default=None,
                   help="photon operation (default: none if k=0, else add)")
    p.add_argument("--alpha", type=_complex, default=0.0, help="displacement, e.g. 1.5 or 1+0.5j")
    p.add_argument("--deform", default="identity",
                   help="identity | sqrt_n | inv_sqrt_n | inv_pow:P | table:v0,v1,...")
    p.add_argument("--variant", choices=("prime", "double_prime"), default="prime")
    p.add_argument("--nmax", type=int, default=None, help="Fock cutoff (default: automatic)")
    p.add_argument("--tail-tol", type=float, default=1e-12)
    p.add_argument("--no-tail-check", action="store_true",
                   help="accept truncated states whose tail mass exceeds --tail-tol")


def _spec_and_cutoff(args):
    from .fock import Cutoff, DeformationFn
    from .states import ResourceSpec, default_cutoff

    op = args.op or ("none" if args.k == 0 else "add")
    try:
        f = DeformationFn.parse(args.deform)
    except ValueError as exc:
        raise ConfigError(f"--deform: {exc}") from None
    spec = ResourceSpec(args.n, args.k, op, args.alpha, f, args.variant)
    c = default_cutoff(spec, args.tail_tol)
    return spec, Cutoff(args.nmax or c.nmax, args.tail_tol, not args.no_tail_check)


def _emit(args, doc, text):
    print(json.dumps(doc) if args.json else text)


def cmd_fidelity(args):
    from .charfun import InputSpec
    from .teleport import fidelity

    spec, c = _spec_and_cutoff(args)
    if args.input == "coherent":
        inp = InputSpec.coherent(args.alpha0)
    else:
        inp = InputSpec.squeezed(args.r, args.zeta)
    res = fidelity(inp, spec, args.method, c)
    doc = {"fidelity": res.value, "method": res.method, "resource": res.resource_meta,
           "input": res.input_meta, "convergence": res.convergence}
    _emit(args, doc, f"{res.value:.12g}")


def cmd_entanglement(args):
    from .correlations import entanglement_entropy
    from .states import make_resource

    spec, c = _spec_and_cutoff(args)
    e, _ = entanglement_entropy(make_resource(spec, c))
    val = e / 0.6931471805599453 if args.bits else e
    _emit(args, {"entropy": val, "unit": "bits" if args.bits else "nats", "resource": spec.meta()}, f"{val:.12g}")


def cmd_epr(args):
    from .correlations import epr_variance
    from .states import make_resource

    spec, c = _spec_and_cutoff(args)
    vx, vp = epr_variance(make_resource(spec, c))
    _emit(args, {"var_xminus": vx, "var_pplus": vp, "resource": spec.meta()}, f"{vx:.12g} {vp:.12g}")


def cmd_sweep(args):
    from .plot import emit_plot
    from .sweep import load_config, run_sweep

    cfg = load_config(args.config)
    paths = run_sweep(cfg, jobs=args.jobs, outdir=args.outdir)
    for p in paths:
        print(p)
        if args.plot:
            print(emit_plot(p))
    failed = [p for p in paths if p.with_suffix(".errors.log").exists()]
    return EXIT_COMPUTE if failed and args.strict else EXIT_OK


def cmd_selftest(args):
    from .selftest import run_selftest

    return EXIT_OK if run_selftest() else EXIT_COMPUTE


def cmd_plot(args):
    from .plot import emit_plot

    try:
        print(emit_plot(args.csv, args.output, args.title, args.ylabel))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvteleport", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a JSON sweep config and write CSVs")
    p.add_argument("config")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--outdir", default=None, help="output directory (overrides config and $CVTELEPORT_OUTDIR)")
    p.add_argument("--plot", action="store_true", help="also write an SVG next to each CSV")
    p.add_argument("--strict", action="store_true", help="exit 1 if any point failed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fidelity", help="teleportation fidelity for one resource")
    p.add_argument("--input", choices=("coherent", "squeezed"), default="coherent")
    p.add_argument("--alpha0", type=_complex, default=0.0, help="coherent input amplitude")
    p.add_argument("--r", type=float, default=0.0, help="squeezing modulus of the input")
    p.add_argument("--zeta", type=float, default=0.0, help="squeezing angle of the input")
    p.add_argument("--method", choices=("series", "quadrature"), default="series")
    _add_resource_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("entanglement", help="entanglement entropy of the two-mode resource")
    _add_resource_args(p)
    p.add_argument("--bits", action="store_true", help="report log2 units instead of nats")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_entanglement)

    p = sub.add_parser("epr", help="Var(x1 - x2) and Var(p1 + p2) of the resource")
    _add_resource_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_epr)

    p = sub.add_parser("selftest", help="run the oracle cross-checks")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("plot", help="render a sweep CSV as SVG")
    p.add_argument("csv")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--title", default=None)
    p.add_argument("--ylabel", default=None)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args) or EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CVTeleportError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        # bad parameter combinations (e.g. op none with k > 0) are usage errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
