"""Command-line interface: parse a period matrix, dispatch, emit stable JSON.

Output is byte-stable: field order is fixed by construction order and every
float is formatted with 17 significant digits, so identical invocations
produce identical bytes.

Exit codes: 0 success, 2 input error, 3 numerical-flag failure,
4 selftest failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from .chars import (
    Characteristic,
    add,
    build_fundamental_system,
    difference_representation_count,
    enumerate_all,
    enumerate_by_parity,
    parity_sign,
    pencil_representatives,
    pencil_statistics,
)
from .errors import BadCharacteristic, G3Error, NotPositiveDefinite
from .frobenius import (
    build_frobenius_context,
    f_a_value,
    find_vanishing_even_null,
    frobenius_phi,
    locate_hyperelliptic,
    norm_phi,
    norm_xi_log,
    psi_log,
    xi_log,
)
from .integrate import NearDecomposableWarning, QmcPlan
from .invariants import ceresa_height, hyperelliptic_cross_check, invariants_report
from .selftest import run_selftest
from .theta import PeriodMatrix, Tolerance, eta_factor, norm_theta, theta_char


@dataclass
class CliConfig:
    """Validated global options shared by the numeric subcommands."""

    tau_path: str | None = None
    points: int = 2**20
    shifts: int = 8
    seed: int = 0
    tol: float = 1e-14
    threads: int = 0
    frobenius_b: str | None = None
    output: str | None = None

    def plan(self) -> QmcPlan:
        return QmcPlan(n_points=self.points, n_shifts=self.shifts, seed=self.seed)

    def tolerance(self) -> Tolerance:
        return Tolerance(eps_trunc=self.tol)


class InputError(Exception):
    """Bad user input; maps to exit code 2."""


def _format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _stable(obj):
    """Recursively convert to JSON-safe values with stable float strings."""
    if isinstance(obj, dict):
        return {k: _stable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stable(v) for v in obj]
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (np.floating, float)):
        return _RawFloat(_format_float(float(obj)))
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": _RawFloat(_format_float(obj.real)),
                "im": _RawFloat(_format_float(obj.imag))}
    return obj


class _RawFloat:
    def __init__(self, text: str):
        self.text = text


def dump_json(obj) -> str:
    """Serialize with fixed field order and 17-significant-digit floats."""
    stable = _stable(obj)

    def render(v, indent=0):
        pad = " " * indent
        if isinstance(v, dict):
            if not v:
                return "{}"
            items = ",\n".join(
                f'{pad}  {json.dumps(k)}: {render(val, indent + 2)}'
                for k, val in v.items()
            )
            return "{\n" + items + "\n" + pad + "}"
        if isinstance(v, list):
            if not v:
                return "[]"
            items = ",\n".join(f"{pad}  {render(val, indent + 2)}" for val in v)
            return "[\n" + items + "\n" + pad + "]"
        if isinstance(v, _RawFloat):
            return v.text
        return json.dumps(v)

    return render(stable) + "\n"


def parse_tau(path: str) -> PeriodMatrix:
    """Load a period matrix from JSON {"g": 3, "re": [[..]], "im": [[..]]}."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read tau file: {exc}")
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed tau JSON: {exc}")
    for field in ("g", "re", "im"):
        if field not in data:
            raise InputError(f"tau JSON missing field {field!r}")
    g = data["g"]
    try:
        re = np.asarray(data["re"], dtype=np.float64)
        im = np.asarray(data["im"], dtype=np.float64)
    except (TypeError, ValueError):
        raise InputError("tau JSON fields 're'/'im' must be numeric matrices")
    if re.shape != (g, g):
        raise InputError(f"tau JSON field 're' must be {g}x{g}, got {re.shape}")
    if im.shape != (g, g):
        raise InputError(f"tau JSON field 'im' must be {g}x{g}, got {im.shape}")
    try:
        return PeriodMatrix(re + 1j * im)
    except NotPositiveDefinite:
        raise InputError("imaginary part not positive definite")
    except G3Error as exc:
        raise InputError(str(exc))


def parse_char(text: str) -> Characteristic:
    try:
        return Characteristic.from_string(text)
    except BadCharacteristic as exc:
        raise InputError(str(exc))


def parse_point(text: str, g: int = 3) -> np.ndarray:
    """Parse a point of C^g from JSON: a list of [re, im] pairs."""
    try:
        data = json.loads(text)
        arr = np.asarray(data, dtype=np.float64)
    except (json.JSONDecodeError, TypeError, ValueError):
        raise InputError(f"malformed point JSON (expected [[re, im], ...]): {text!r}")
    if arr.shape != (g, 2):
        raise InputError(f"point must be {g} pairs [re, im], got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def _emit(cfg: CliConfig, payload: dict) -> None:
    text = dump_json(payload)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_chars(cfg: CliConfig, args) -> int:
    even, odd = enumerate_by_parity(args.g)
    hist: dict = {}
    for a in enumerate_all(args.g):
        n = difference_representation_count(a)
        hist[str(n)] = hist.get(str(n), 0) + 1
    payload = {
        "even": len(even),
        "odd": len(odd),
        "diff_reps": 4 ** (args.g - 1),
        "diff_rep_histogram": dict(sorted(hist.items(), key=lambda kv: int(kv[0]))),
    }
    _emit(cfg, payload)
    return 0


def cmd_fundsys(cfg: CliConfig, args) -> int:
    base = build_fundamental_system()
    stats = pencil_statistics(base)
    reps = pencil_representatives(base)
    payload = {
        "base_system": [str(m) for m in base.members],
        "odd_count": base.odd_count,
        "k": str(base.k),
        "j_twice": list(base.j.twice),
        "pencil": {
            "translates": len(stats.translates),
            "seven_odd": stats.seven_odd_count,
            "three_odd": stats.three_odd_count,
        },
        "representatives": [
            {"k": str(r.k), "members": [str(m) for m in r.members]} for r in reps
        ],
    }
    _emit(cfg, payload)
    return 0


def cmd_theta(cfg: CliConfig, args) -> int:
    tau = parse_tau(cfg.tau_path)
    a = parse_char(args.a)
    z = parse_point(args.z, tau.g)
    tol = cfg.tolerance()
    value = theta_char(a, z, tau, tol)
    payload = {
        "a": str(a),
        "value": value,
        "norm": norm_theta(a, z, tau, tol),
    }
    _emit(cfg, payload)
    return 0


def _context(cfg: CliConfig, tau: PeriodMatrix):
    b = parse_char(cfg.frobenius_b) if cfg.frobenius_b else None
    return build_frobenius_context(tau, cfg.tolerance(), b=b)


def cmd_frobenius(cfg: CliConfig, args) -> int:
    tau = parse_tau(cfg.tau_path)
    ctx = _context(cfg, tau)
    payload: dict = {"k_star": str(ctx.k_star), "flags": list(ctx.flags)}
    if args.z is not None:
        z = parse_point(args.z, tau.g)
        payload["value"] = frobenius_phi(z, ctx)
        payload["norm"] = norm_phi(z, ctx)
    residuals = []
    zero = np.zeros(tau.g)
    vals = {a: ctx.h_table[a].to_complex() * eta_factor(a, zero, tau) ** 2
            for a in enumerate_all(3)}
    scale = max(abs(v) for v in vals.values())
    for a, rhs in vals.items():
        zt = tau.tau @ (np.array(a.top) / 2.0) + np.array(a.bottom) / 2.0
        residuals.append(abs(frobenius_phi(zt, ctx) - rhs) / scale)
    payload["two_torsion_max_residual"] = max(residuals)
    if args.dump_context:
        payload["nulls"] = {str(a): v for a, v in ctx.nulls.items()}
        payload["h_table"] = {
            str(a): [h.logabs, h.arg] for a, h in ctx.h_table.items()
        }
    _emit(cfg, payload)
    return 0


def cmd_invariants(cfg: CliConfig, args) -> int:
    tau = parse_tau(cfg.tau_path)
    ctx = _context(cfg, tau)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearDecomposableWarning)
        report = invariants_report(tau, cfg.plan(), cfg.tolerance(), ctx=ctx)
    _emit(cfg, report.to_json())
    return 3 if report.flags else 0


def cmd_hyperelliptic(cfg: CliConfig, args) -> int:
    tau0 = parse_tau(cfg.tau_path)
    k = parse_char(args.k)
    tol = cfg.tolerance()
    if find_vanishing_even_null(tau0, tol=tol) == k:
        tau_star = tau0
    else:
        tau_star = locate_hyperelliptic(tau0, k, tol=tol)
    ctx = _context(cfg, tau_star)
    a = next(c for c in enumerate_all(3)
             if not c.is_zero and parity_sign(add(k, c)) == 1)
    psi = psi_log(ctx, a)
    xi = xi_log(tau_star, tol)
    payload = {
        "vanishing": str(find_vanishing_even_null(tau_star, tol=tol)),
        "tau_star": {
            "g": tau_star.g,
            "re": [[float(v) for v in row] for row in tau_star.tau.real],
            "im": [[float(v) for v in row] for row in tau_star.tau.imag],
        },
        "psi_log": [psi.logabs, psi.arg],
        "xi_log": [xi.logabs, xi.arg],
        "norm_xi_log": norm_xi_log(tau_star, tol),
    }
    if args.cross_check:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearDecomposableWarning)
            payload["cross_check"] = hyperelliptic_cross_check(
                tau_star, cfg.plan(), tol).to_json()
    _emit(cfg, payload)
    return 0


def cmd_height(cfg: CliConfig, args) -> int:
    tau = parse_tau(cfg.tau_path)
    ctx = _context(cfg, tau)
    a = parse_char(args.a)
    d = parse_point(args.D, tau.g)
    result = ceresa_height(a, d, ctx, cfg.plan())
    _emit(cfg, {"a": str(a), "height": result.value, "err": result.err})
    return 0


def cmd_selftest(cfg: CliConfig, args) -> int:
    ok, report = run_selftest(seed=cfg.seed)
    _emit(cfg, report)
    return 0 if ok else 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="g3theta",
        description="Theta functions and Arakelov-type invariants of "
                    "genus-three period matrices",
    )
    parser.add_argument("--tau", help="path to a period-matrix JSON file")
    parser.add_argument("--points", type=int, default=2**20,
                        help="QMC points per shift (power of two)")
    parser.add_argument("--shifts", type=int, default=8,
                        help="number of random shifts")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--tol", type=float, default=1e-14,
                        help="series truncation target")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads (0 = all); affects wall time only")
    parser.add_argument("--frobenius-b", help="translation characteristic b")
    parser.add_argument("--output", help="write JSON here instead of stdout")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("chars", help="characteristic combinatorics summary")
    p.add_argument("--g", type=int, default=3)
    sub.add_parser("fundsys", help="fundamental system and pencil data")
    p = sub.add_parser("theta", help="theta value and norm at a point")
    p.add_argument("--a", required=True, help='characteristic, e.g. "101/011"')
    p.add_argument("--z", required=True, help="point as JSON [[re, im], ...]")
    p = sub.add_parser("frobenius", help="second-order theta function report")
    p.add_argument("--z", help="optional evaluation point")
    p.add_argument("--dump-context", action="store_true",
                   help="include the null and reduced-value tables")
    sub.add_parser("invariants", help="full invariant report (two integrals)")
    p = sub.add_parser("hyperelliptic", help="locate/report a hyperelliptic point")
    p.add_argument("--k", required=True, help="target even characteristic")
    p.add_argument("--cross-check", action="store_true",
                   help="run the two-route phi comparison")
    p = sub.add_parser("height", help="archimedean height pairing")
    p.add_argument("--a", required=True)
    p.add_argument("--D", required=True, help="divisor point as JSON")
    sub.add_parser("selftest", help="reduced acceptance battery")
    return parser


_NEEDS_TAU = {"theta", "frobenius", "invariants", "hyperelliptic", "height"}

_DISPATCH = {
    "chars": cmd_chars,
    "fundsys": cmd_fundsys,
    "theta": cmd_theta,
    "frobenius": cmd_frobenius,
    "invariants": cmd_invariants,
    "hyperelliptic": cmd_hyperelliptic,
    "height": cmd_height,
    "selftest": cmd_selftest,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads > 0:
        try:
            import numba

            numba.set_num_threads(args.threads)
        except ValueError:
            pass
    cfg = CliConfig(
        tau_path=args.tau,
        points=args.points,
        shifts=args.shifts,
        seed=args.seed,
        tol=args.tol,
        threads=args.threads,
        frobenius_b=args.frobenius_b,
        output=args.output,
    )
    try:
        cfg.plan()
        cfg.tolerance()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command in _NEEDS_TAU and not cfg.tau_path:
        print("error: this subcommand requires --tau", file=sys.stderr)
        return 2
    try:
        return _DISPATCH[args.command](cfg, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except G3Error as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
