"""Command-line front end: ``fspec <subcommand> [options]``.

Exit codes: 0 success, 1 verification or computation failure, 2 usage or
I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .asymptotics import End, expansion_fit, resonance_norms
from .config import RunConfig, ScanRecord, load_config
from .determinant import SpectralPoint, determinant_estimate, lattice_integral
from .errors import DomainError, InvalidArgument, SpectralError
from .lattice import SpectralParams, band_edges, wrap
from .spectral import Side, classify_regime, find_eigenvalue, mu_zero, sweep_no_eigenvalues
from .verify import PASS, report_json, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_PI_TOKEN = re.compile(
    r"^(?P<coef>[+-]?(?:\d+\.?\d*|\.\d+)?(?:e[+-]?\d+)?)\*?pi(?:/(?P<den>\d+\.?\d*))?$"
)


def parse_angle(token: str) -> float:
    """Decimal radians or multiples of pi: ``pi``, ``-pi``, ``pi/2``, ``0.5pi``."""
    text = token.strip().lower()
    m = _PI_TOKEN.match(text)
    if m:
        coef = m.group("coef")
        value = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef)
        value = float(coef) if value is None else value
        den = float(m.group("den")) if m.group("den") else 1.0
        return value * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {token!r}") from None


def parse_point(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated coordinates, got {text!r}")
    try:
        return wrap([parse_angle(p) for p in parts])
    except InvalidArgument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_mu(text: str) -> float:
    """A coupling: a number, ``mu0`` or a multiple such as ``1.5mu0``."""
    t = text.strip().lower()
    if t.endswith("mu0"):
        coef = t[:-3].rstrip("*")
        try:
            factor = float(coef) if coef else 1.0
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad coupling {text!r}") from None
        return factor * mu_zero()
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coupling {text!r}") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad number list {text!r}") from None


def parse_mu_range(text: str) -> list[float]:
    values = [parse_mu(v) for v in text.split(",") if v.strip()]
    if len(values) not in (1, 2):
        raise argparse.ArgumentTypeError("range takes one or two values")
    return values


def parse_range(text: str) -> list[float]:
    values = parse_floats(text)
    if len(values) not in (1, 2):
        raise argparse.ArgumentTypeError("range takes one or two values")
    return values


def _num(x: float) -> str:
    return f"{x:.12g}"


def _out(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(args) -> SpectralParams:
    mu = args.mu if args.mu is not None else mu_zero()
    return SpectralParams(args.gamma, mu)


def cmd_band(args) -> int:
    edges = band_edges(args.k)
    _out(args, f"m={_num(edges.m)} M={_num(edges.M)}\n")
    return EXIT_OK


def cmd_integral(args) -> int:
    res = lattice_integral(SpectralPoint(args.k, args.z), args.tol)
    _out(args, f"I={res.value:.15g} error={res.error_estimate:.3g}\n")
    return EXIT_OK


def cmd_det(args) -> int:
    res = determinant_estimate(SpectralPoint(args.k, args.z), _params(args), args.tol)
    _out(args, f"Delta={res.value:.15g} error={res.error_estimate:.3g}\n")
    return EXIT_OK


def cmd_eigen(args) -> int:
    params = _params(args)
    sides = [Side.BELOW, Side.ABOVE] if args.side == "both" else [Side(f"{args.side}_band")]
    lines = []
    for side in sides:
        rep = find_eigenvalue(args.k, params, side, quad_tol=args.tol)
        if rep.found:
            lines.append(f"{side.value}: z={rep.eigenvalue:.15g} residual={rep.residual:.3g}")
        else:
            lines.append(f"{side.value}: none (edge Delta={rep.edge_value:.6g})")
    _out(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_classify(args) -> int:
    reg = classify_regime(_params(args))
    _out(args, f"lower={reg.lower.value} upper={reg.upper.value}\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    zs = args.z_list if args.z_list else [-1.0, -1e-2, 18.01, 19.0]
    rep = sweep_no_eigenvalues(args.grid, zs, args.tol, mu=args.mu, gamma=args.gamma)
    lines = [f"points={rep.points} samples={rep.samples} violations={len(rep.violations)} "
             f"min_margin={rep.min_margin:.6g}"]
    for v in rep.violations:
        lines.append(f"k=({', '.join(_num(c) for c in v.k)}) z={_num(v.z)} Delta={v.delta:.6g}")
    _out(args, "\n".join(lines) + "\n")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_expansion(args) -> int:
    fit = expansion_fit(End(args.end))
    data = {
        "end": fit.end.value,
        "fitted_exponent": fit.fitted_exponent,
        "fitted_prefactor": fit.fitted_prefactor,
        "reference_prefactor": fit.reference_prefactor,
        "k_prefactor": fit.k_prefactor,
        "k_reference": fit.k_reference,
        "remainder_constant": fit.remainder_constant,
    }
    _out(args, json.dumps(data, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_resonance(args) -> int:
    res = resonance_norms(End(args.end), tol=args.tol)
    data = {
        "l1_value": res.l1_value.value,
        "deltas": list(res.deltas),
        "truncated_l2_values": list(res.truncated_l2_values),
        "divergence_exponent": res.divergence_exponent,
    }
    _out(args, json.dumps(data, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _axis(bounds: Sequence[float], steps: int) -> list[float]:
    if len(bounds) == 1 or steps == 1:
        return [float(bounds[0])]
    return [float(v) for v in np.linspace(bounds[0], bounds[1], steps)]


def scan_record(gamma: float, mu: float, cfg: RunConfig) -> ScanRecord:
    params = SpectralParams(gamma, mu)
    reg = classify_regime(params)
    below = find_eigenvalue((0.0, 0.0, 0.0), params, Side.BELOW, cfg.root_tol, quad_tol=cfg.quad_tol)
    above = find_eigenvalue((math.pi,) * 3, params, Side.ABOVE, cfg.root_tol, quad_tol=cfg.quad_tol)
    return ScanRecord(gamma, mu, reg.lower.label, reg.upper.label,
                      below.eigenvalue, above.eigenvalue, below.residual, above.residual)


def scan_csv(gammas, mus, cfg: RunConfig) -> str:
    grid = [(g, m) for g in gammas for m in mus]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        records = list(pool.map(lambda gm: scan_record(gm[0], gm[1], cfg), grid))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ScanRecord.HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def cmd_scan(args) -> int:
    cfg = args.config_obj
    if args.steps < 1:
        raise InvalidArgument("steps must be at least 1")
    text = scan_csv(_axis(args.gamma_range, args.steps), _axis(args.mu_range, args.steps), cfg)
    args.out = args.out or cfg.scan_path
    _out(args, text)
    return EXIT_OK


def cmd_verify_all(args) -> int:
    cfg = args.config_obj
    checks = run_suite(cfg, args.only)
    args.out = args.out or cfg.report_path
    _out(args, report_json(checks))
    failing = [c for c in checks if c.status != PASS]
    for c in failing:
        print(f"{c.status.upper()}: {c.check_name} {c.detail}".rstrip(), file=sys.stderr)
    return EXIT_OK if not failing else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fspec",
        description="Spectral laboratory for the two-channel lattice operator on the 3-torus.",
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="seed for sampled k points")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s (kernel backend: {kernels.BACKEND})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, *, k=False, z=False, physics=False, tol=True):
        p = sub.add_parser(name, help=help_text)
        if k:
            p.add_argument("--k", type=parse_point, required=True,
                           help="quasi-momentum, e.g. 0,0,0 or pi,pi/2,-1.2")
        if z:
            p.add_argument("--z", type=float, required=True, help="spectral parameter")
        if physics:
            p.add_argument("--gamma", type=float, default=6.0)
            p.add_argument("--mu", type=parse_mu, default=None, help="coupling; accepts mu0 multiples")
        if tol:
            p.add_argument("--tol", type=float, default=None, help="quadrature relative tolerance")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--config", dest="sub_config", help=argparse.SUPPRESS)
        p.add_argument("--seed", dest="sub_seed", type=int, help=argparse.SUPPRESS)
        p.set_defaults(func=func)
        return p

    add("band", cmd_band, "essential band edges m(k), M(k)", k=True, tol=False)
    add("integral", cmd_integral, "the lattice integral I(k; z)", k=True, z=True)
    add("det", cmd_det, "the Fredholm determinant", k=True, z=True, physics=True)
    p = add("eigen", cmd_eigen, "discrete eigenvalues outside the band", k=True, physics=True)
    p.add_argument("--side", choices=("below", "above", "both"), default="both")
    add("classify", cmd_classify, "predicted regime for (gamma, mu)", physics=True, tol=False)
    p = add("sweep", cmd_sweep, "sign sweep of the determinant over a k-grid", physics=True)
    p.add_argument("--grid", type=int, default=5, help="grid nodes per axis")
    p.add_argument("--z", dest="z_list", type=parse_floats, help="comma-separated z samples")
    for name, func, text in (("expansion", cmd_expansion, "threshold expansion fit"),
                             ("resonance", cmd_resonance, "L1 and truncated L2 norms of f1")):
        p = add(name, func, text)
        p.add_argument("--end", choices=("lower", "upper"), default="lower")
    p = add("scan", cmd_scan, "regime scan over a (gamma, mu) grid, CSV output")
    p.add_argument("--gamma-range", type=parse_range, required=True, help="lo[,hi]")
    p.add_argument("--mu-range", type=parse_mu_range, required=True, help="lo[,hi]; mu0 multiples allowed")
    p.add_argument("--steps", type=int, default=5)
    p = add("verify-all", cmd_verify_all, "run the verification suite, JSON report")
    p.add_argument("--grid", type=int, help="k-grid size of the sweep check")
    p.add_argument("--only", action="append", help="restrict to a check group (repeatable)")
    return parser


def _resolve_config(args) -> RunConfig:
    path = args.sub_config or args.config
    seed = args.sub_seed if args.sub_seed is not None else args.seed
    overrides = {"seed": seed, "quad_tol": args.tol, "sweep_grid": getattr(args, "grid", None)
                 if args.command == "verify-all" else None}
    cfg = load_config(path, overrides=overrides)
    if args.tol is None:
        args.tol = cfg.quad_tol
    return cfg


_VALUE_FLAGS = {"--k", "--z", "--gamma", "--mu", "--gamma-range", "--mu-range"}


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    # "--z -1,-0.01" would otherwise read the list as an option
    out, it = [], iter(argv)
    for token in it:
        if token in _VALUE_FLAGS:
            value = next(it, None)
            out.append(token if value is None else f"{token}={value}")
        else:
            out.append(token)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    if not hasattr(args, "tol"):
        args.tol = None
    try:
        args.config_obj = _resolve_config(args)
        return args.func(args)
    except (InvalidArgument, DomainError) as exc:
        print(f"fspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fspec: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpectralError as exc:
        print(f"fspec: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
