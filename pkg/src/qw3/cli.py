"""Command-line front end: scans, root finding, eigenvector export, evolution.

Data go to CSV, structured records to JSON; every output artifact gets a
.manifest.json sidecar recording the command, parameters, version, wall time
and a digest of the resolved coin configuration. Identical inputs produce
byte-identical data files. Exit codes: 0 success, 2 configuration error,
3 numerical-validity error. QW3_THREADS bounds the scan worker count.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .coin import (
    CoinField,
    ConfigError,
    field_homogeneous,
    field_one_defect,
    field_two_phase,
    make_fourier,
    make_grover,
    parse_field_config,
    phase_scale,
    serialize_field,
)
from .evolution import SimulationError, StateVector, default_initial_state, evolve
from .spectral import (
    EigenvalueRecord,
    find_roots,
    grid_samples,
    lambda0_adjudicate,
    lambda0_set,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

THETA_PRESETS = (np.pi / 12, 3 * np.pi / 12, 7 * np.pi / 12, 11 * np.pi / 12)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _config_digest(field: CoinField) -> str:
    canonical = json.dumps(serialize_field(field), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_manifest(
    out: Path, command: str, params: dict, field: CoinField, started: float
) -> None:
    manifest = {
        "command": command,
        "parameters": params,
        "version": __version__,
        "wall_time_s": time.perf_counter() - started,
        "config_digest": _config_digest(field),
    }
    _write_atomic(
        out.with_name(out.name + ".manifest.json"),
        json.dumps(manifest, sort_keys=True, indent=2) + "\n",
    )


def _resolve_field(args: argparse.Namespace) -> CoinField:
    if args.config is not None:
        return parse_field_config(Path(args.config).read_text(encoding="utf-8"))
    if args.model is None:
        raise ConfigError("provide either --config or --model")
    base = {"fourier": make_fourier, "grover": make_grover}[args.coin]()
    shifted = phase_scale(base, args.theta) if args.theta else base
    if args.model == "one-defect":
        return field_one_defect(base, shifted)
    if args.model == "two-phase":
        return field_two_phase(base, shifted)
    return field_homogeneous(shifted)


def _record_json(r: EigenvalueRecord) -> dict:
    return {
        "lambda": r.lam,
        "abs_chi": r.chi_residual,
        "zeta_left": [r.zeta_left.real, r.zeta_left.imag],
        "zeta_right": [r.zeta_right.real, r.zeta_right.imag],
        "op_residual": r.op_residual,
        "source": r.source,
    }


def _all_records(field: CoinField, grid: int, refine_tol: float):
    scan = find_roots(field, grid_n=grid, refine_tol=refine_tol)
    records = sorted(scan.records + lambda0_adjudicate(field), key=lambda r: r.lam)
    return records, scan.diagnostics


def cmd_validate(args: argparse.Namespace) -> int:
    field = _resolve_field(args)
    print(f"coin field ok: window [{field.x_minus}, {field.x_plus}), "
          f"{len(field.defects)} defect site(s), "
          f"{len(field.distinct_coins())} distinct coin(s)")
    angles = lambda0_set(field)
    print("degenerate phases: " + (", ".join(_fmt(a) for a in angles) or "none"))
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    field = _resolve_field(args)
    lines = ["lambda,abs_chi,in_lambda,near_lambda0"]
    for sample in grid_samples(field, args.grid):
        value = "" if sample.value is None else _fmt(abs(sample.value))
        lines.append(
            f"{_fmt(sample.lam)},{value},{int(sample.in_lambda)},{int(sample.near_lambda0)}"
        )
    out = Path(args.out)
    _write_atomic(out, "\n".join(lines) + "\n")
    _write_atomic(
        out.with_name(out.name + ".lambda0.json"),
        json.dumps({"lambda0": lambda0_set(field)}, sort_keys=True) + "\n",
    )
    _write_manifest(out, "scan", {"grid": args.grid}, field, started)
    return EXIT_OK


def cmd_roots(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    field = _resolve_field(args)
    records, diagnostics = _all_records(field, args.grid, args.refine_tol)
    doc = {"records": [_record_json(r) for r in records], "diagnostics": diagnostics}
    out = Path(args.out)
    _write_atomic(out, json.dumps(doc, sort_keys=True, indent=2) + "\n")
    _write_manifest(
        out, "roots", {"grid": args.grid, "refine_tol": args.refine_tol}, field, started
    )
    print(f"{len(records)} eigenvalue(s) written to {out}")
    return EXIT_NUMERICAL if diagnostics else EXIT_OK


def cmd_eigvec(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    field = _resolve_field(args)
    records, _ = _all_records(field, args.grid, args.refine_tol)
    matches = [r for r in records if abs(r.lam - args.lam) <= args.refine_tol]
    if not matches:
        nearest = sorted(records, key=lambda r: abs(r.lam - args.lam))[:3]
        hint = ", ".join(_fmt(r.lam) for r in nearest) or "none found"
        print(
            f"error: lambda={_fmt(args.lam)} is not an accepted root; "
            f"nearest roots: {hint}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    psi = matches[0].eigvec
    lines = ["x,re1,im1,re2,im2,re3,im3,site_norm"]
    norms = psi.site_norms()
    for i, x in enumerate(range(psi.lo, psi.hi + 1)):
        a = psi.amps[i]
        lines.append(
            ",".join(
                [str(x)]
                + [_fmt(v) for v in (a[0].real, a[0].imag, a[1].real,
                                     a[1].imag, a[2].real, a[2].imag)]
                + [_fmt(norms[i])]
            )
        )
    out = Path(args.out)
    _write_atomic(out, "\n".join(lines) + "\n")
    _write_manifest(
        out,
        "eigvec",
        {"grid": args.grid, "refine_tol": args.refine_tol, "lambda": args.lam},
        field,
        started,
    )
    return EXIT_OK


def _initial_state(args: argparse.Namespace, half_width: int) -> StateVector:
    psi = default_initial_state(half_width)
    if args.psi0 is not None or args.psi0_site:
        comps = (
            np.array([1.0, 1.0j, 1.0]) / np.sqrt(3.0)
            if args.psi0 is None
            else np.array(
                [complex(args.psi0[0], args.psi0[1]),
                 complex(args.psi0[2], args.psi0[3]),
                 complex(args.psi0[4], args.psi0[5])]
            )
        )
        n = np.linalg.norm(comps)
        if n == 0:
            raise ConfigError("--psi0 must be a nonzero spinor")
        if not psi.lo <= args.psi0_site <= psi.hi:
            raise ConfigError(
                f"--psi0-site {args.psi0_site} outside the window "
                f"[{psi.lo}, {psi.hi}]"
            )
        psi.amps[:] = 0.0
        psi.amps[args.psi0_site - psi.lo] = comps / n
    return psi


def cmd_evolve(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    field = _resolve_field(args)
    half_width = args.window if args.window is not None else args.t + 6
    psi0 = _initial_state(args, half_width)
    trajectory = evolve(field, psi0, args.t)
    if args.trajectory:
        lines = ["t,x,prob"]
        for dist in trajectory:
            for i, x in enumerate(range(dist.lo, dist.hi + 1)):
                lines.append(f"{dist.time},{x},{_fmt(dist.probs[i])}")
    else:
        final = trajectory[-1]
        lines = ["x,prob"]
        for i, x in enumerate(range(final.lo, final.hi + 1)):
            lines.append(f"{x},{_fmt(final.probs[i])}")
    out = Path(args.out)
    _write_atomic(out, "\n".join(lines) + "\n")
    _write_manifest(
        out,
        "evolve",
        {"t": args.t, "window": half_width, "trajectory": bool(args.trajectory)},
        field,
        started,
    )
    return EXIT_OK


def cmd_demo(args: argparse.Namespace) -> int:
    theta = THETA_PRESETS[args.theta_index]
    args.config = None
    args.coin = "fourier"
    args.theta = theta
    args.model = "one-defect" if args.figure in ("fig1", "fig2") else "two-phase"
    if args.figure in ("fig1", "fig3"):
        return cmd_scan(args)
    args.t = 100
    args.window = None
    args.trajectory = False
    args.psi0 = None
    args.psi0_site = 0
    return cmd_evolve(args)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qw3",
        description="Spectral analysis and simulation of three-state quantum "
        "walks on the integer lattice.",
        epilog="Set QW3_THREADS to bound the number of scan workers.",
    )
    parser.add_argument("--version", action="version", version=f"qw3 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="coin field config (JSON)")
        p.add_argument(
            "--model", choices=("one-defect", "two-phase", "homogeneous"),
            help="preset model built from --coin and --theta",
        )
        p.add_argument("--coin", choices=("fourier", "grover"), default="fourier")
        p.add_argument(
            "--theta", type=float, default=0.0,
            help="phase of the defect/right-half coin (presets only)",
        )

    p = sub.add_parser("validate", help="check a configuration and report its shape")
    add_model_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("scan", help="tabulate |chi| over a phase grid (CSV)")
    add_model_flags(p)
    p.add_argument("--grid", type=int, default=4000)
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("roots", help="locate and certify all eigenvalues (JSON)")
    add_model_flags(p)
    p.add_argument("--grid", type=int, default=4000)
    p.add_argument("--refine-tol", type=float, default=1e-12, dest="refine_tol")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("eigvec", help="export one eigenvector (CSV)")
    add_model_flags(p)
    p.add_argument("--grid", type=int, default=4000)
    p.add_argument("--refine-tol", type=float, default=1e-12, dest="refine_tol")
    p.add_argument("--lambda", type=float, required=True, dest="lam",
                   help="eigenphase of an accepted root")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_eigvec)

    p = sub.add_parser("evolve", help="run the walk and export the distribution (CSV)")
    add_model_flags(p)
    p.add_argument("--t", type=int, default=100)
    p.add_argument("--window", type=int, help="window half-width (default t + 6)")
    p.add_argument("--trajectory", action="store_true",
                   help="emit all time steps, not just the final one")
    p.add_argument("--psi0", type=float, nargs=6, metavar="V",
                   help="initial spinor re1 im1 re2 im2 re3 im3 (normalized)")
    p.add_argument("--psi0-site", type=int, default=0, dest="psi0_site")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("demo", help="regenerate one figure's data")
    p.add_argument("figure", choices=("fig1", "fig2", "fig3", "fig4"))
    p.add_argument("--theta-index", type=int, choices=(0, 1, 2, 3), default=0,
                   dest="theta_index")
    p.add_argument("--grid", type=int, default=4000)
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, ValueError) as exc:
        print(f"numerical-validity error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
