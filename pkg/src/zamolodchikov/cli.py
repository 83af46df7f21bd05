"""Command-line front end: seeded verification sweeps, diagnostics and dumps.

Exit codes: 0 when every run passes, 1 when a verification fails, 2 on
usage errors, 3 on numeric errors (a replay configuration goes to stderr).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .elliptic import EllipticContext, complete_K, jacobi_array
from .errors import ZamolodchikovError
from .geometry import random_prism, random_tetrahedron, solve_triangle
from .param import angles_from_w, invert_angles, modulus_from_vertex
from .verify import (
    VerificationReport,
    check_TE,
    check_TE2,
    check_TE2_params,
    check_TE3,
    check_TZA,
)
from .weights import build_R, build_S

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
STATIC_MODULI = (0.0, 0.3, 0.6, 0.9)


class NumericFailure(Exception):
    def __init__(self, replay: dict, cause: Exception):
        super().__init__(str(cause))
        self.replay = replay
        self.cause = cause


def cx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def matrix_json(M) -> list:
    return [[cx(v) for v in row] for row in np.asarray(M)]


def parse_complex(text: str) -> complex:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}") from None
    if len(parts) == 1:
        return complex(parts[0], 0.0)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 're,im', got {text!r}")
    return complex(*parts)


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="first seed of the sweep")
    common.add_argument("--count", type=positive_int, default=1, help="number of seeded runs")
    common.add_argument("--tol", type=positive_float, default=1e-10, help="absolute residual tolerance")
    common.add_argument("--k", type=float, default=None, help="elliptic modulus override")
    for i in range(1, 5):
        common.add_argument(f"--u{i}", type=parse_complex, default=None, metavar="RE,IM")
    common.add_argument("--theta", type=float, nargs=3, default=None, metavar="RAD")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", default=None, help="write the bundle here instead of stdout")
    common.add_argument("--jobs", type=positive_int, default=1, help="worker threads for sweeps")

    parser = argparse.ArgumentParser(prog="zamolodchikov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify-te": "general tetrahedron equation on random tetrahedra",
        "verify-prism": "prismatic identity on random prisms or explicit k, u1..u3",
        "verify-static-elliptic": "static-elliptic identity for k, u1..u4",
        "verify-tza": "tetrahedral Zamolodchikov algebra for k, u1..u3",
        "selftest-elliptic": "Jacobi identities, complete integral and trigonometric limit",
        "dump-weights": "print the vertex operator for --theta",
        "invert": "angle-to-parameter diagnostics for --theta",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


# ---------------------------------------------------------------- runs

def _explicit_u(args, n: int):
    values = [getattr(args, f"u{i}") for i in range(1, n + 1)]
    if all(v is None for v in values):
        return None
    if any(v is None for v in values):
        raise argparse.ArgumentTypeError(f"give all of --u1..--u{n} or none")
    return values


def _random_static_params(seed: int, k: float | None):
    rng = np.random.default_rng(seed)
    if k is None:
        k = STATIC_MODULI[int(rng.integers(len(STATIC_MODULI)))]
    ctx = EllipticContext.from_modulus(k)
    return k, rng.uniform(0.0, 0.5 * ctx.big_K, 4)


def _random_tza_params(seed: int, k: float | None):
    rng = np.random.default_rng(seed)
    if k is None:
        k = STATIC_MODULI[int(rng.integers(len(STATIC_MODULI)))]
    ctx = EllipticContext.from_modulus(k)
    return k, rng.uniform(0.0, ctx.big_K, 3) + 1j * rng.uniform(0.0, 0.3, 3)


def _one_run(command: str, seed: int, args) -> VerificationReport:
    if command == "verify-te":
        return check_TE(random_tetrahedron(seed), args.tol)
    if command == "verify-prism":
        u = _explicit_u(args, 3)
        if u is not None:
            if args.k is None:
                raise argparse.ArgumentTypeError("--k is required with explicit u values")
            return check_TE2_params(args.k, u, args.tol)
        return check_TE2(random_prism(seed), args.tol)
    if command == "verify-static-elliptic":
        u = _explicit_u(args, 4)
        if u is None:
            k, u = _random_static_params(seed, args.k)
        else:
            k = 0.0 if args.k is None else args.k
        report = check_TE3(k, u, args.tol)
        report.config["seed"] = seed
        return report
    if command == "verify-tza":
        u = _explicit_u(args, 3)
        if u is None:
            k, u = _random_tza_params(seed, args.k)
        else:
            k = 0.0 if args.k is None else args.k
        report = check_TZA(k, u, args.tol)
        report.config["seed"] = seed
        return report
    raise ValueError(command)


def _replay(args, seed: int) -> dict:
    out = {"command": args.command, "seed": seed, "tol": args.tol}
    if args.k is not None:
        out["k"] = args.k
    for i in range(1, 5):
        value = getattr(args, f"u{i}")
        if value is not None:
            out[f"u{i}"] = cx(value)
    if args.theta is not None:
        out["theta"] = list(args.theta)
    return out


def _guarded(args, seed: int) -> VerificationReport:
    try:
        return _one_run(args.command, seed, args)
    except argparse.ArgumentTypeError:
        raise
    except (ZamolodchikovError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        raise NumericFailure(_replay(args, seed), exc) from exc


def run_sweep(args) -> dict:
    explicit = args.command != "verify-te" and (
        _explicit_u(args, 4 if args.command == "verify-static-elliptic" else 3) is not None)
    seeds = [args.seed] if explicit else [args.seed + i for i in range(args.count)]
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(lambda s: _guarded(args, s), seeds))
    else:
        reports = [_guarded(args, s) for s in seeds]
    worst = max(range(len(reports)), key=lambda i: reports[i].residual_max)
    return {
        "request": _replay(args, args.seed) | {"count": len(seeds)},
        "runs": [r.to_dict() for r in reports],
        "summary": {
            "count": len(reports),
            "passed": sum(r.passed for r in reports),
            "worst_residual": reports[worst].residual_max,
            "worst_seed": seeds[worst],
        },
    }


# ---------------------------------------------------------------- diagnostics

def elliptic_selftest(moduli=STATIC_MODULI, grid: int = 20, tol: float = 1e-11) -> dict:
    """Jacobi identities on a complex grid, K against quadrature, k = 0 limit."""
    checks = []
    nodes, weights = np.polynomial.legendre.leggauss(200)
    for k in moduli:
        ctx = EllipticContext.from_modulus(k)
        height = 0.45 * ctx.big_K_prime if math.isfinite(ctx.big_K_prime) else 1.0
        x = np.linspace(0.0, 4.0 * ctx.big_K, grid)
        y = np.linspace(-height, height, grid)
        w = x[:, None] + 1j * y[None, :]
        sn, cn, dn = jacobi_array(w, k)
        r1 = float(np.abs(sn ** 2 + cn ** 2 - 1).max())
        r2 = float(np.abs(dn ** 2 + k * k * sn ** 2 - 1).max())
        phi = 0.25 * math.pi * (nodes + 1.0)
        quad = 0.25 * math.pi * float(np.sum(weights / np.sqrt(1.0 - (k * np.sin(phi)) ** 2)))
        rk = abs(complete_K(k) - quad)
        checks.append({"k": k, "sn2_cn2": r1, "dn2_k2sn2": r2, "K_vs_quadrature": rk,
                       "pass": r1 < tol and r2 < tol and rk < 1e-12})
    u = np.linspace(-7.0, 7.0, 101)
    sn, cn, dn = jacobi_array(u + 0.3j, 0.0)
    z = u + 0.3j
    trig = float(max(np.abs(sn - np.sin(z)).max(), np.abs(cn - np.cos(z)).max(), np.abs(dn - 1).max()))
    checks.append({"k": 0.0, "trigonometric_limit": trig, "pass": trig < 1e-12})
    return {"checks": checks, "summary": {"count": len(checks), "passed": sum(c["pass"] for c in checks)}}


def dump_weights(theta) -> dict:
    theta = [float(x) for x in theta]
    if abs(sum(theta) - math.pi) < 1e-10:
        name, M = "S", build_S(theta)
    else:
        name, M = "R", build_R(solve_triangle(theta))
    return {"theta": theta, "operator": name, "convention": "rows incoming, columns outgoing",
            "matrix": matrix_json(M)}


def invert_diagnostics(theta) -> dict:
    theta = [float(x) for x in theta]
    mod = modulus_from_vertex(theta)
    out = {"theta": theta, "k": mod.k, "phi": mod.phi,
           "sin_phi": mod.sin_phi, "sin_phi_check": mod.sin_phi_check}
    if mod.ctx.trigonometric:
        out["note"] = "k = 0: the parameters w1, w2 lie at infinity"
        return out
    pair = invert_angles(theta, mod)
    back = angles_from_w(pair.w1.w, pair.w2_lifted, mod.k)
    out.update(pair.to_dict())
    out["round_trip"] = [float(abs(np.exp(1j * b) - np.exp(1j * t))) for b, t in zip(back, theta)]
    return out


# ---------------------------------------------------------------- output

def _text(bundle: dict) -> str:
    lines = []
    for r in bundle.get("runs", []):
        seed = r["config"].get("seed")
        lines.append(f"{r['identity_name']:>20} seed={seed} residual={r['residual_max']:.3e} "
                     f"tol={r['tol']:.1e} {'PASS' if r['pass'] else 'FAIL'}")
    for c in bundle.get("checks", []):
        lines.append("  ".join(f"{k}={v}" for k, v in c.items()))
    if "summary" in bundle:
        lines.append("summary: " + ", ".join(f"{k}={v}" for k, v in bundle["summary"].items()))
    for key in ("operator", "k", "w1", "w2", "branch_tag", "theta1_candidates", "round_trip", "note"):
        if key in bundle and "runs" not in bundle:
            lines.append(f"{key}: {bundle[key]}")
    if "matrix" in bundle:
        for row in bundle["matrix"]:
            lines.append(" ".join(f"{re:+.6f}{im:+.6f}j" for re, im in row))
    return "\n".join(lines) + "\n"


def _emit(bundle: dict, args) -> None:
    text = json.dumps(bundle, indent=2) + "\n" if args.format == "json" else _text(bundle)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command in ("dump-weights", "invert"):
            if args.theta is None:
                parser.error(f"{args.command} needs --theta")
            try:
                bundle = dump_weights(args.theta) if args.command == "dump-weights" else invert_diagnostics(args.theta)
            except (ZamolodchikovError, ArithmeticError, ValueError) as exc:
                raise NumericFailure(_replay(args, args.seed), exc) from exc
            _emit(bundle, args)
            return EXIT_OK
        if args.command == "selftest-elliptic":
            moduli = STATIC_MODULI if args.k is None else (args.k,)
            bundle = elliptic_selftest(moduli)
            _emit(bundle, args)
            ok = bundle["summary"]["passed"] == bundle["summary"]["count"]
            return EXIT_OK if ok else EXIT_FAIL
        bundle = run_sweep(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        record = {"error": type(exc.cause).__name__, "message": str(exc.cause), "replay": exc.replay}
        print(json.dumps(record, indent=2), file=sys.stderr)
        return EXIT_NUMERIC
    _emit(bundle, args)
    summary = bundle["summary"]
    return EXIT_OK if summary["passed"] == summary["count"] else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
