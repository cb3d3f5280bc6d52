"""Command-line interface: simulate | classify | verify | sweep | compare.

Exit codes: 0 success, 2 configuration error, 3 integration failure,
4 verification failure.  Outputs are deterministic: identical configurations
(including the seed) produce byte-identical artifact files.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import closed_form, flow_ode, oracle
from .errors import DomainError, IntegrationFailure, InvalidInputError
from .state import FlowParams, FlowState, FlowVariant, IntegratorConfig, TerminationKind
from .trajectory_io import format_float, write_rows_csv, write_trajectory

_CLASSIFY_EPS = 1e-12


class ConfigError(Exception):
    """Configuration could not be resolved; maps to exit code 2."""


@dataclass
class RunConfig:
    mode: str
    k0: float | None
    f0_norm: float | None
    variant: FlowVariant
    integrator_kwargs: dict
    out: str
    fmt: str
    sweep_grid: list[tuple[float, float]] | None
    seed: int | None
    fd_step: float
    grid_n: int
    sphere_grid_n: int
    random_points: int
    initial_lambda: float
    initial_f: float


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bundleflow",
        description=(
            "Curvature tensors and reduced Ricci-flow dynamics of circle-bundle "
            "metrics over constant-curvature surfaces."
        ),
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None,
                        help="TOML or JSON file with defaults; flags override it")
    common.add_argument("--k0", type=float, default=None,
                        help="constant Gauss curvature of the base surface")
    common.add_argument("--f0", type=float, default=None,
                        help="squared norm of the curvature 2-form (>= 0)")
    common.add_argument("--chern", type=int, default=None,
                        help="bundle degree; with --area, sets f0 via the "
                             "balanced-connection constant (alternative to --f0)")
    common.add_argument("--area", type=float, default=None,
                        help="base surface area accompanying --chern")
    group = common.add_mutually_exclusive_group()
    group.add_argument("--normalized", dest="variant", action="store_const",
                       const="normalized", help="volume-normalized flow (default)")
    group.add_argument("--unnormalized", dest="variant", action="store_const",
                       const="unnormalized", help="plain flow")
    common.add_argument("--t-end", type=float, default=None, help="integration horizon")
    common.add_argument("--rel-tol", type=float, default=None)
    common.add_argument("--abs-tol", type=float, default=None)
    common.add_argument("--max-step", type=float, default=None)
    common.add_argument("--min-step", type=float, default=None)
    common.add_argument("--floor", type=float, default=None,
                        help="singularity detection floor for lambda and f")
    common.add_argument("--dwell", type=int, default=None,
                        help="consecutive quiet steps for convergence; 0 disables")
    common.add_argument("--lambda0", type=float, default=None,
                        help="initial conformal factor (default 1)")
    common.add_argument("--fiber0", type=float, default=None,
                        help="initial fiber size (default 1)")
    common.add_argument("--out", type=str, default=None,
                        help="output path, '-' for stdout (default)")
    common.add_argument("--format", dest="fmt", choices=("csv", "jsonl"), default=None)
    common.add_argument("--seed", type=int, default=None,
                        help="seed for randomized verification sampling")

    sub.add_parser("simulate", parents=[common],
                   help="integrate one flow and write the trajectory table")
    sub.add_parser("classify", parents=[common],
                   help="print the model geometry and its limit prediction")

    verify = sub.add_parser("verify", parents=[common],
                            help="run the finite-difference curvature checks")
    verify.add_argument("--fd-step", type=float, default=None,
                        help="finite-difference step h (default 1e-3)")
    verify.add_argument("--grid-n", type=int, default=None,
                        help="grid points per axis, twisted-product charts (default 3)")
    verify.add_argument("--sphere-grid-n", type=int, default=None,
                        help="grid points per axis, sphere chart (default 5)")
    verify.add_argument("--random-points", type=int, default=None,
                        help="extra random chart samples per family (default 0)")

    sweep = sub.add_parser("sweep", parents=[common],
                           help="simulate+classify a parameter grid, one row per cell")
    sweep.add_argument("--grid", type=str, default=None,
                       help="cells as 'k0,f0;k0,f0;...' (or 'grid' in the config file)")

    sub.add_parser("compare", parents=[common],
                   help="tabulate integration error against the applicable closed form")
    return parser


def _load_config_file(path: str) -> dict:
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = file_path.read_bytes()
    if file_path.suffix.lower() == ".toml":
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            return tomllib.loads(text.decode("utf-8"))
        except Exception as exc:
            raise ConfigError(f"config file {path}: TOML parse error: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config file {path}: JSON parse error at line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}"
        ) from exc


_CONFIG_KEYS = {
    "k0", "f0", "chern", "area", "variant", "t_end", "rel_tol", "abs_tol",
    "max_step", "min_step", "floor", "dwell", "lambda0", "fiber0", "out",
    "format", "seed", "grid", "fd_step", "grid_n", "sphere_grid_n",
    "random_points",
}


def _pick(args: argparse.Namespace, config: dict, key: str, default=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _parse_grid(spec) -> list[tuple[float, float]]:
    cells: list[tuple[float, float]] = []
    if isinstance(spec, str):
        for chunk in spec.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            parts = chunk.split(",")
            if len(parts) != 2:
                raise ConfigError(f"grid cell {chunk!r} is not 'k0,f0'")
            try:
                cells.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ConfigError(f"grid cell {chunk!r}: {exc}") from exc
    elif isinstance(spec, (list, tuple)):
        for item in spec:
            if not (isinstance(item, (list, tuple)) and len(item) == 2):
                raise ConfigError(f"grid entry {item!r} is not a [k0, f0] pair")
            cells.append((float(item[0]), float(item[1])))
    else:
        raise ConfigError(f"unrecognized grid specification: {spec!r}")
    if not cells:
        raise ConfigError("sweep grid is empty")
    return cells


def _resolve(args: argparse.Namespace) -> RunConfig:
    config = {}
    if getattr(args, "config", None):
        config = _load_config_file(args.config)
        unknown = set(config) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(
                f"config file has unknown keys: {', '.join(sorted(unknown))}"
            )

    f0 = _pick(args, config, "f0")
    chern = _pick(args, config, "chern")
    area = _pick(args, config, "area")
    if chern is not None or area is not None:
        if f0 is not None:
            raise ConfigError("--f0 conflicts with --chern/--area; give one of them")
        if chern is None or area is None:
            raise ConfigError("--chern and --area must be given together")
        try:
            f0 = flow_ode.chern_curvature_constant(int(chern), float(area)) ** 2
        except (DomainError, InvalidInputError) as exc:
            raise ConfigError(str(exc)) from exc
    if f0 is not None and f0 < 0.0:
        raise ConfigError(f"f0 must be nonnegative, got {f0!r}")

    variant_name = _pick(args, config, "variant", "normalized")
    try:
        variant = FlowVariant(variant_name)
    except ValueError as exc:
        raise ConfigError(f"unknown variant {variant_name!r}") from exc

    integrator_kwargs = {"t_end": float(_pick(args, config, "t_end", 10.0))}
    for key, field in (
        ("rel_tol", "rel_tol"),
        ("abs_tol", "abs_tol"),
        ("max_step", "max_step"),
        ("min_step", "min_step"),
        ("floor", "singularity_floor"),
        ("dwell", "convergence_dwell"),
    ):
        value = _pick(args, config, key)
        if value is not None:
            integrator_kwargs[field] = value

    grid_spec = _pick(args, config, "grid")
    k0 = _pick(args, config, "k0")
    return RunConfig(
        mode=args.mode,
        k0=None if k0 is None else float(k0),
        f0_norm=None if f0 is None else float(f0),
        variant=variant,
        integrator_kwargs=integrator_kwargs,
        out=str(_pick(args, config, "out", "-")),
        fmt=str(_pick(args, config, "format", "csv")),
        sweep_grid=None if grid_spec is None else _parse_grid(grid_spec),
        seed=_pick(args, config, "seed"),
        fd_step=float(_pick(args, config, "fd_step", oracle.DEFAULT_FD_STEP)),
        grid_n=int(_pick(args, config, "grid_n", 3)),
        sphere_grid_n=int(_pick(args, config, "sphere_grid_n", 5)),
        random_points=int(_pick(args, config, "random_points", 0)),
        initial_lambda=float(_pick(args, config, "lambda0", 1.0)),
        initial_f=float(_pick(args, config, "fiber0", 1.0)),
    )


def _require_params(cfg: RunConfig) -> FlowParams:
    if cfg.k0 is None:
        raise ConfigError("--k0 is required for this command")
    if cfg.f0_norm is None:
        raise ConfigError("--f0 (or --chern with --area) is required for this command")
    try:
        return FlowParams(k0=cfg.k0, f0_norm=cfg.f0_norm, variant=cfg.variant)
    except (DomainError, InvalidInputError) as exc:
        raise ConfigError(str(exc)) from exc


def _integrator(cfg: RunConfig) -> IntegratorConfig:
    try:
        return IntegratorConfig(**cfg.integrator_kwargs)
    except (DomainError, InvalidInputError) as exc:
        raise ConfigError(str(exc)) from exc


def _initial_state(cfg: RunConfig) -> FlowState:
    try:
        return FlowState(t=0.0, lam=cfg.initial_lambda, f=cfg.initial_f)
    except (DomainError, InvalidInputError) as exc:
        raise ConfigError(str(exc)) from exc


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as stream:
            yield stream


def _report_termination(trajectory) -> None:
    term = trajectory.termination
    parts = [f"termination: {term.kind.value}"]
    if term.t_star is not None:
        parts.append(f"t_star={format_float(term.t_star)}")
    if term.limit_state is not None:
        parts.append(
            f"limit lambda={format_float(term.limit_state.lam)} "
            f"f={format_float(term.limit_state.f)}"
        )
    parts.append(f"samples={len(trajectory.samples)}")
    print(" ".join(parts), file=sys.stderr)


def _cmd_simulate(cfg: RunConfig) -> int:
    params = _require_params(cfg)
    initial = _initial_state(cfg)
    integrator = _integrator(cfg)
    try:
        trajectory = flow_ode.integrate(params, initial, integrator)
    except IntegrationFailure as failure:
        with _open_out(cfg.out) as stream:
            write_trajectory(failure.trajectory, stream, cfg.fmt)
        print(f"integration failure: {failure}", file=sys.stderr)
        _report_termination(failure.trajectory)
        return 3
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from exc
    with _open_out(cfg.out) as stream:
        write_trajectory(trajectory, stream, cfg.fmt)
    _report_termination(trajectory)
    return 0


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)  # 'inf', '-inf', 'nan'
    return value


def _prediction_dict(prediction: closed_form.AsymptoticPrediction) -> dict:
    return {
        "geometry": prediction.geometry.value,
        "lambda_limit": _json_safe(prediction.lambda_limit),
        "f_limit": _json_safe(prediction.f_limit),
        "scalar_limit": _json_safe(prediction.scalar_limit),
        "singular_time": _json_safe(prediction.singular_time),
        "lower_bound_slope": _json_safe(prediction.lower_bound_slope),
        "lower_bound_intercept": _json_safe(prediction.lower_bound_intercept),
        "lower_bound_exponent": prediction.lower_bound_exponent,
    }


def _cmd_classify(cfg: RunConfig) -> int:
    params = _require_params(cfg)
    geometry = closed_form.classify(params.k0, params.f0_norm, _CLASSIFY_EPS)
    prediction = closed_form.asymptotic_prediction(
        geometry, params.k0, params.f0_norm, _CLASSIFY_EPS
    )
    with _open_out(cfg.out) as stream:
        stream.write(geometry.value + "\n")
        stream.write(json.dumps(_prediction_dict(prediction)) + "\n")
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    rng = None
    if cfg.random_points > 0:
        rng = np.random.default_rng(0 if cfg.seed is None else cfg.seed)
    reports = oracle.standard_suite(
        h=cfg.fd_step,
        nil_n_per_axis=cfg.grid_n,
        sphere_n_per_axis=cfg.sphere_grid_n,
        rng=rng,
        n_random_points=cfg.random_points,
    )
    passed, reasons = oracle.suite_passes(reports)
    payload = {
        "fd_step": cfg.fd_step,
        "families": {
            name: {
                key: _json_safe(value)
                for key, value in report.as_dict().items()
            }
            for name, report in reports.items()
        },
        "passed": passed,
        "failures": reasons,
    }
    with _open_out(cfg.out) as stream:
        stream.write(json.dumps(payload, indent=2) + "\n")
    if not passed:
        for reason in reasons:
            print(f"verification failure: {reason}", file=sys.stderr)
        return 4
    return 0


_SWEEP_COLUMNS = (
    "k0",
    "f0_norm",
    "geometry",
    "termination",
    "t_star",
    "t_final",
    "lambda_final",
    "f_final",
    "scalar_curvature_final",
    "max_abs_product_drift",
)


def _cmd_sweep(cfg: RunConfig) -> int:
    if cfg.sweep_grid is None:
        raise ConfigError("sweep requires --grid or a 'grid' entry in the config file")
    integrator = _integrator(cfg)
    initial = _initial_state(cfg)
    rows = []
    any_failed = False
    for k0, f0 in cfg.sweep_grid:
        if f0 < 0.0:
            raise ConfigError(f"grid cell ({k0}, {f0}): f0 must be nonnegative")
        params = FlowParams(k0=k0, f0_norm=f0, variant=cfg.variant)
        geometry = closed_form.classify(k0, f0, _CLASSIFY_EPS)
        try:
            trajectory = flow_ode.integrate(params, initial, integrator)
        except IntegrationFailure as failure:
            trajectory = failure.trajectory
            any_failed = True
        term = trajectory.termination
        product = trajectory.column("f_lambda_product")
        drift = float(np.max(np.abs(product - product[0])))
        final = trajectory.final_state
        rows.append((
            k0,
            f0,
            geometry.value,
            term.kind.value,
            term.t_star,
            final.t,
            final.lam,
            final.f,
            trajectory.samples[-1].scalar_curvature,
            drift,
        ))
    with _open_out(cfg.out) as stream:
        write_rows_csv(_SWEEP_COLUMNS, rows, stream)
    if any_failed:
        print("integration failure in at least one sweep cell", file=sys.stderr)
        return 3
    return 0


def _closed_form_for(params: FlowParams):
    """Pick the closed-form companion of a parameter regime, or explain why not."""
    k0, f0 = params.k0, params.f0_norm
    flat_connection = f0 <= _CLASSIFY_EPS
    flat_base = abs(k0) <= _CLASSIFY_EPS
    if params.variant is FlowVariant.NORMALIZED:
        if flat_base and flat_connection:
            return lambda t: FlowState(t=t, lam=1.0, f=1.0)
        if flat_base:
            return lambda t: closed_form.nil_solution(f0, t)
        if flat_connection:
            return lambda t: closed_form.product_flat_solution(k0, t)
        raise ConfigError(
            "no explicit closed form for a normalized run with k0 != 0 and f0 > 0; "
            "use simulate and inspect the implicit_residual column"
        )
    if flat_base and flat_connection:
        return lambda t: FlowState(t=t, lam=1.0, f=1.0)
    if k0 > 0.0 and abs(f0 - k0) <= 1e-9 * max(1.0, abs(k0)):
        return lambda t: closed_form.spherical_unnormalized_solution(k0, t)
    raise ConfigError(
        "no closed form for an unnormalized run unless f0 == k0 > 0 or both vanish"
    )


_COMPARE_COLUMNS = (
    "t",
    "lambda",
    "f",
    "lambda_closed",
    "f_closed",
    "lambda_abs_err",
    "f_abs_err",
)


def _cmd_compare(cfg: RunConfig) -> int:
    params = _require_params(cfg)
    reference = _closed_form_for(params)
    initial = _initial_state(cfg)
    if abs(initial.lam - 1.0) > 0.0 or abs(initial.f - 1.0) > 0.0:
        raise ConfigError("closed-form comparison requires the initial state lambda=f=1")
    integrator = _integrator(cfg)
    try:
        trajectory = flow_ode.integrate(params, initial, integrator)
    except IntegrationFailure as failure:
        print(f"integration failure: {failure}", file=sys.stderr)
        return 3
    rows = []
    for sample in trajectory.samples:
        state = sample.state
        exact = reference(state.t)
        rows.append((
            state.t,
            state.lam,
            state.f,
            exact.lam,
            exact.f,
            abs(state.lam - exact.lam),
            abs(state.f - exact.f),
        ))
    with _open_out(cfg.out) as stream:
        write_rows_csv(_COMPARE_COLUMNS, rows, stream)
    _report_termination(trajectory)
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        return _HANDLERS[args.mode](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
