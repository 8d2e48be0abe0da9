"""Batch front-end: argument parsing, experiment orchestration, and
bit-stable machine-readable outputs.

One binary with subcommands sharing the numerical configuration.  Every
run logs one provenance line (version, seed, tolerances) to stderr; JSON
outputs embed the same fields, while CSV stays pure rows so downstream
tools can ingest it without comment-stripping.  Exit codes: 0 success,
1 a quantitative assertion failed, 2 invalid input, 3 numerical
non-convergence, 4 output I/O failure.  The summary line on standard
output is "command status max_residual runtime_s".
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .dpp import DiscretizationError, _cached_spectrum, clt_report, sample
from .fredholm import (
    helton_howe_residual,
    jacobi_dodgson_residual,
    mercer_residual,
)
from .identity import bo_residual, rate_scan, trace_decay_scan
from .special import BesselOrder, ResolutionError
from .symbols import SymbolSpec, norms_B, szego_constants

COMMANDS = (
    "verify-identity",
    "rate-scan",
    "trace-scan",
    "clt",
    "sample",
    "norms",
    "selftest",
)
NEEDS_R = {"verify-identity", "rate-scan", "trace-scan", "clt", "sample"}
NEEDS_SYMBOL = {"verify-identity", "rate-scan", "trace-scan", "clt", "norms"}
SYMBOL_KEYS = {"family", "amplitude", "scale", "k"}
METHODS = {
    "verify-identity": ("direct", "hankel"),
    "clt": ("cf_inversion", "monte_carlo"),
}
DEFAULT_TOLERANCES = {
    "verify-identity": {"residual": 1e-5, "convergence": 1e-8},
    "rate-scan": {"slope": -0.45},
    "trace-scan": {"slope": -0.45},
    "clt": {"band": 0.1},
    "sample": {},
    "norms": {},
    "selftest": {"residual": 1e-9},
}
PRIMARY_TOL = {
    "verify-identity": "residual",
    "rate-scan": "slope",
    "trace-scan": "slope",
    "clt": "band",
    "selftest": "residual",
}
SAMPLE_COUNT = 100


class ConfigError(ValueError):
    """Invalid command line or config content; maps to exit code 2."""


class EmitError(RuntimeError):
    """Output could not be written; maps to exit code 4."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    symbol: SymbolSpec | None
    nu: float
    r_values: tuple
    seed: int
    tolerances: dict
    output_path: str | None
    format: str
    method: str
    c1_factor: float
    figures_dir: str | None = None


# ---------------------------------------------------------------------------
# Parsing


def _parse_symbol(text: str) -> SymbolSpec:
    if text.startswith("@"):
        try:
            with open(text[1:], "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read symbol file: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"symbol is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("symbol JSON must be an object")
    unknown = set(payload) - SYMBOL_KEYS
    if unknown:
        raise ConfigError(f"unknown symbol keys: {sorted(unknown)}")
    if "family" not in payload or "amplitude" not in payload:
        raise ConfigError("symbol needs at least family and amplitude")
    kwargs = {}
    if "scale" in payload:
        kwargs["scale"] = float(payload["scale"])
    if "k" in payload and payload["k"] is not None:
        kwargs["k"] = int(payload["k"])
    try:
        return SymbolSpec(str(payload["family"]), float(payload["amplitude"]), **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad symbol: {exc}") from exc


def _parse_r_list(text: str) -> tuple:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --R list: {exc}") from exc
    if not values:
        raise ConfigError("empty --R list")
    if any(v <= 0.0 for v in values):
        raise ConfigError("every R must be positive")
    return values


def _parse_tol(text: str, command: str) -> dict:
    result = dict(DEFAULT_TOLERANCES[command])
    if "=" not in text:
        key = PRIMARY_TOL.get(command)
        if key is None:
            raise ConfigError(f"{command} takes no bare tolerance")
        try:
            result[key] = float(text)
        except ValueError as exc:
            raise ConfigError(f"bad --tol: {exc}") from exc
        return result
    for part in text.split(","):
        if not part.strip():
            continue
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in result:
            raise ConfigError(f"unknown tolerance key {key!r} for {command}")
        try:
            result[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad --tol entry {part!r}") from exc
    return result


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="besseldet",
        description="determinant laboratory batch runner",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--symbol", help="SymbolSpec JSON or @file")
    parser.add_argument("--nu", type=float, default=0.0)
    parser.add_argument("--R", dest="r_list", help="comma-separated radii")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--method", default=None)
    parser.add_argument("--tol", default=None)
    parser.add_argument("--out", default=None)
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--c1-factor", dest="c1_factor", type=float, default=1.0)
    parser.add_argument("--figures", dest="figures_dir", default=None,
                        help="directory for rendered figures (off by default)")
    return parser


def parse_config(argv) -> RunConfig:
    """Validated RunConfig from argv; raises ConfigError on bad input."""
    args = _build_parser().parse_args(argv)
    if args.nu <= -1.0:
        raise ConfigError("nu must exceed -1")
    if args.seed < 0:
        raise ConfigError("seed must be nonnegative")
    if args.c1_factor <= 0.0:
        raise ConfigError("c1-factor must be positive")

    symbol = None
    if args.symbol is not None:
        symbol = _parse_symbol(args.symbol)
    elif args.command in NEEDS_SYMBOL:
        raise ConfigError(f"missing --symbol for {args.command}")

    r_values: tuple = ()
    if args.r_list is not None:
        r_values = _parse_r_list(args.r_list)
    elif args.command in NEEDS_R:
        raise ConfigError(f"missing --R for {args.command}")

    allowed = METHODS.get(args.command)
    if args.method is None:
        method = allowed[0] if allowed else ""
    else:
        if allowed is None:
            raise ConfigError(f"{args.command} takes no --method")
        if args.method not in allowed:
            raise ConfigError(f"method must be one of {allowed}")
        method = args.method

    tolerances = dict(DEFAULT_TOLERANCES[args.command])
    if args.tol is not None:
        tolerances = _parse_tol(args.tol, args.command)

    return RunConfig(
        command=args.command,
        symbol=symbol,
        nu=args.nu,
        r_values=r_values,
        seed=args.seed,
        tolerances=tolerances,
        output_path=args.out,
        format=args.format,
        method=method,
        c1_factor=args.c1_factor,
        figures_dir=args.figures_dir,
    )


# ---------------------------------------------------------------------------
# Bit-stable emission


def _scalar_text(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_text(value, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = [
            f"{inner}{json.dumps(str(key))}: {_json_text(item, indent + 1)}"
            for key, item in value.items()
        ]
        return "{\n" + ",\n".join(parts) + f"\n{pad}}}"
    if isinstance(value, (list, tuple, np.ndarray)):
        items = [_json_text(item, indent + 1) for item in value]
        if sum(len(item) for item in items) < 100:
            return "[" + ", ".join(items) + "]"
        return "[\n" + ",\n".join(inner + item for item in items) + f"\n{pad}]"
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            return "null"
        return format(float(value), ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value)!r}")


def _tolerance_text(tolerances: dict) -> str:
    return ";".join(
        f"{key}={_scalar_text(value)}" for key, value in sorted(tolerances.items())
    )


def emit(payload: dict, fmt: str, path: str) -> None:
    """Write results with fixed column order and 17-significant-digit
    floats; byte-identical for identical configuration and seed."""
    if fmt == "csv":
        lines = [",".join(payload["columns"])]
        for row in payload["rows"]:
            lines.append(",".join(_scalar_text(cell) for cell in row))
        text = "\n".join(lines) + "\n"
    else:
        text = _json_text(payload) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise EmitError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Command bodies: each returns (columns, rows, extra, max_residual,
# failures, nonconverged)


def _running_slopes(radii, values):
    slopes = [None]
    for i in range(1, len(values)):
        if all(v > 0.0 for v in values[: i + 1]):
            fit = np.polyfit(np.log(radii[: i + 1]), np.log(values[: i + 1]), 1)
            slopes.append(float(fit[0]))
        else:
            slopes.append(None)
    return slopes


def _run_verify(config: RunConfig):
    order = BesselOrder(config.nu)
    columns = ["R", "lhs", "rhs", "q_remainder", "residual", "convergence"]
    rows = []
    failures = []
    nonconverged = False
    max_residual = 0.0
    for radius in config.r_values:
        report = bo_residual(config.symbol, order, radius)
        rows.append(
            [
                radius,
                float(report.lhs.value.real),
                float(report.rhs.real),
                float(report.q_r.real),
                report.rel_residual,
                report.lhs.convergence_estimate,
            ]
        )
        max_residual = max(max_residual, report.rel_residual)
        if report.rel_residual > config.tolerances["residual"]:
            failures.append(
                f"R={radius:g}: residual {report.rel_residual:.3e} above tolerance"
            )
        if (
            not report.lhs.converged
            or report.lhs.convergence_estimate > config.tolerances["convergence"]
        ):
            nonconverged = True
    return columns, rows, {}, max_residual, failures, nonconverged


def _run_scan(config: RunConfig):
    order = BesselOrder(config.nu)
    runner = rate_scan if config.command == "rate-scan" else trace_decay_scan
    scan = runner(config.symbol, order, config.r_values)
    radii = [row[0] for row in scan.rows]
    values = [row[1] for row in scan.rows]
    bounds = [row[2] for row in scan.rows]
    slopes = _running_slopes(radii, values)
    columns = ["R", "value", "bound", "slope_running"]
    rows = [
        [r, v, bound, slope]
        for r, v, bound, slope in zip(radii, values, bounds, slopes)
    ]
    failures = []
    if math.isnan(scan.fitted_slope) or scan.fitted_slope > config.tolerances["slope"]:
        failures.append(
            f"fitted slope {scan.fitted_slope:.3f} above {config.tolerances['slope']}"
        )
    excess = 0.0
    for r, v, bound in zip(radii, values, bounds):
        if bound > 0.0:
            excess = max(excess, v / bound)
        if v > bound * (1.0 + 1e-9):
            failures.append(f"R={r:g}: value {v:.3e} escapes envelope {bound:.3e}")
    return columns, rows, {}, excess, failures, False


def _run_clt(config: RunConfig):
    order = BesselOrder(config.nu)
    constants = szego_constants(config.symbol, order)
    if abs(constants.c3B - 0.5) > 1e-8:
        raise ConfigError(
            f"clt needs the normalized symbol (c3B = 1/2, got {constants.c3B:.6f})"
        )
    reports = [
        clt_report(
            config.symbol,
            order,
            radius,
            config.method,
            seed=config.seed,
            c1_factor=config.c1_factor,
        )
        for radius in sorted(config.r_values)
    ]
    constant = reports[0].ks_distance * math.log(reports[0].R)
    columns = ["R", "ks_distance", "mean_shift", "envelope"]
    rows = [
        [rep.R, rep.ks_distance, rep.mean_shift, constant / math.log(rep.R)]
        for rep in reports
    ]
    failures = []
    band = config.tolerances["band"]
    for prev, nxt in zip(reports, reports[1:]):
        if nxt.ks_distance > prev.ks_distance * (1.0 + band):
            failures.append(
                f"ks not decreasing: {prev.R:g}->{nxt.R:g} "
                f"{prev.ks_distance:.4f}->{nxt.ks_distance:.4f}"
            )
    for row in rows:
        if row[1] > row[3] * (1.0 + 1e-9):
            failures.append(f"R={row[0]:g}: ks {row[1]:.4f} escapes envelope")
    extra = {
        "reports": [
            {
                "R": rep.R,
                "ks_distance": rep.ks_distance,
                "method": rep.method,
                "mean_shift": rep.mean_shift,
                "cdf_grid": list(rep.cdf_grid),
                "cdf_values": list(rep.cdf_values),
                "normal_values": list(rep.normal_values),
            }
            for rep in reports
        ]
    }
    max_residual = max(rep.ks_distance for rep in reports)
    return columns, rows, extra, max_residual, failures, False


def _run_sample(config: RunConfig):
    order = BesselOrder(config.nu)
    radius = config.r_values[0]
    batch = sample(order, radius, config.seed, SAMPLE_COUNT)
    columns = ["config_index", "point"]
    rows = [
        [index, float(point)]
        for index, cfg in enumerate(batch.configs)
        for point in cfg.points
    ]
    return columns, rows, {}, 0.0, [], False


def _run_norms(config: RunConfig):
    report = norms_B(config.symbol)
    columns = [
        "l1",
        "l2",
        "linf",
        "xb_linf",
        "xbprime_linf",
        "normB_semi",
        "normB_full",
        "L_b",
    ]
    rows = [
        [
            report.l1,
            report.l2,
            report.linf,
            report.xb_linf,
            report.xbprime_linf,
            report.normB_semi,
            report.normB_full,
            report.L_b,
        ]
    ]
    return columns, rows, {}, 0.0, [], False


def _selftest_instances(rng: np.random.Generator):
    for index in range(100):
        n = int(rng.integers(2, 21))
        sym = rng.standard_normal((n, n))
        sym = 0.5 * (sym + sym.T)
        yield index, "mercer", mercer_residual(sym)
        a = np.eye(n) + 0.3 * rng.standard_normal((n, n)) / math.sqrt(n)
        mask = rng.random(n) < 0.5
        yield index, "jacobi_dodgson", jacobi_dodgson_residual(a, mask)
        x = 0.3 * rng.standard_normal((n, n))
        y = 0.3 * rng.standard_normal((n, n))
        yield index, "helton_howe", helton_howe_residual(x, y)
        m = 0.5 * rng.standard_normal((n, n))
        det = complex(np.linalg.det(np.eye(n) + m))
        prod = complex(np.prod(1.0 + np.linalg.eigvals(m)))
        yield index, "det_vs_eigenproduct", abs(det - prod) / max(1.0, abs(det))


def _run_selftest(config: RunConfig):
    rng = np.random.default_rng(config.seed)
    columns = ["instance", "check", "residual"]
    rows = []
    failures = []
    max_residual = 0.0
    for index, name, residual in _selftest_instances(rng):
        rows.append([index, name, residual])
        max_residual = max(max_residual, residual)
        if residual >= config.tolerances["residual"]:
            failures.append(f"instance {index} {name}: residual {residual:.3e}")
    return columns, rows, {}, max_residual, failures, False


_RUNNERS = {
    "verify-identity": _run_verify,
    "rate-scan": _run_scan,
    "trace-scan": _run_scan,
    "clt": _run_clt,
    "sample": _run_sample,
    "norms": _run_norms,
    "selftest": _run_selftest,
}


def run(config: RunConfig) -> int:
    """Execute one command; writes the output file when --out is given
    and prints the one-line summary."""
    start = time.perf_counter()
    print(
        "besseldet %s %s seed=%d tolerances=%s"
        % (__version__, config.command, config.seed, _tolerance_text(config.tolerances)),
        file=sys.stderr,
    )
    columns, rows, extra, max_residual, failures, nonconverged = _RUNNERS[
        config.command
    ](config)
    payload = {
        "command": config.command,
        "version": __version__,
        "seed": config.seed,
        "tolerances": config.tolerances,
        "columns": columns,
        "rows": rows,
    }
    payload.update(extra)
    if config.output_path is not None:
        emit(payload, config.format, config.output_path)
    if config.figures_dir is not None:
        from .figures import FigureError, render_figures

        try:
            render_figures(payload, config.figures_dir)
        except FigureError as exc:
            raise EmitError(str(exc)) from exc
    if nonconverged:
        status, code = "nonconverged", 3
    elif failures:
        status, code = "fail", 1
    else:
        status, code = "ok", 0
    runtime = time.perf_counter() - start
    print(f"{config.command} {status} {_scalar_text(max_residual)} {runtime:.3f}")
    for message in failures:
        print(f"fail: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(config)
    except EmitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ResolutionError, DiscretizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
