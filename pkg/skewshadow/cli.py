"""skewshadow command line.

Usage:
    skewshadow exponent --lambda0 0.5 --lambda1 3
    skewshadow simulate --length 500 --noise 1e-3 --seed 7 --emit-instance run.inst
    skewshadow radius run.inst
    skewshadow sweep --c 1 --c 3 --n 200 --n 800 --n 3200 --samples 2000 -o sweep.csv
    skewshadow ruin --level 3 --level 5 --level 8 --samples 1000000
    skewshadow rate --eps 0.05 --eps 0.2

Results go to stdout (or --output, written atomically); logs and errors go
to stderr. Exit codes: 0 success, 2 invalid input, 3 internal failure.
"""

import csv
import io
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence

import typer
from pydantic import BaseModel
from rich.console import Console

from skewshadow import __version__
from skewshadow.asymptotics import (
    default_horizon,
    empirical_exponent,
    rate_function,
    ruin_bounds,
    ruin_probability_mc,
    solve_ruin_exponent,
)
from skewshadow.instance import (
    Instance,
    atomic_write,
    format_float,
    read_instance,
    write_instance,
)
from skewshadow.logging import get_logger, setup_logging
from skewshadow.metrics import get_metrics
from skewshadow.model import normalize, validate
from skewshadow.montecarlo import phase_sweep, regime
from skewshadow.shadow import ShadowReport, shadow_report
from skewshadow.utils.config import ExperimentConfig, load_config
from skewshadow.utils.exceptions import (
    ConfigurationError,
    ConsistencyError,
    InstanceFormatError,
    ParameterError,
    SolverError,
)
from skewshadow.walk import derive_stream, sample_noise, sample_walk

EXIT_USAGE = 2
EXIT_INTERNAL = 3

SWEEP_COLUMNS = (
    "n",
    "c",
    "L",
    "samples",
    "successes",
    "p_hat",
    "ci_low",
    "ci_high",
    "seed",
)
RUIN_COLUMNS = (
    "C",
    "horizon",
    "samples",
    "p_hat",
    "ci_low",
    "ci_high",
    "minus_log_p_over_C",
    "b_reference",
)
RATE_COLUMNS = ("eps", "h")

app = typer.Typer(
    name="skewshadow",
    help="Shadowing of random pseudotrajectories of a linear skew product.",
    no_args_is_help=True,
    add_completion=False,
)
err_console = Console(stderr=True)
logger = get_logger("skewshadow.cli")


# Report models


class ExponentReport(BaseModel):
    lambda0: float
    lambda1: float
    inverted: bool
    v: float
    b: float
    c0: float
    residual: float
    hgy_violated: bool


class RadiusReport(BaseModel):
    n: int
    d: float
    K: float
    witness_k: int
    witness_n: int
    radius: float
    optimal_y0: float
    D: float
    oracle_radius: Optional[float] = None
    oracle_y0: Optional[float] = None
    agreement_flag: Optional[bool] = None


class SimulateReport(RadiusReport):
    lambda0: float
    lambda1: float
    inverted: bool
    seed: int
    sample_index: int
    instance_path: Optional[str] = None


class SweepCellReport(BaseModel):
    n: int
    c: float
    L: float
    d: float
    samples: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int
    regime: str


class SweepReport(BaseModel):
    lambda0: float
    lambda1: float
    epsilon: float
    c0: float
    cells: List[SweepCellReport]


class RuinRow(BaseModel):
    C: float
    horizon: int
    samples: int
    p_hat: float
    ci_low: float
    ci_high: float
    minus_log_p_over_C: Optional[float] = None
    b_reference: float
    lower_bound: float
    upper_bound: float


class RuinReport(BaseModel):
    lambda0: float
    lambda1: float
    seed: int
    rows: List[RuinRow]


class RateRow(BaseModel):
    eps: float
    h: float


class RateReport(BaseModel):
    lambda0: float
    lambda1: float
    rows: List[RateRow]


# Plumbing


def _report_error(message: str) -> None:
    err_console.print(
        message, style="bold red", markup=False, highlight=False, soft_wrap=True
    )


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Map package errors to exit codes, message on stderr."""
    try:
        yield
    except (ParameterError, ConfigurationError, InstanceFormatError) as e:
        _report_error(f"error: {e}")
        raise typer.Exit(EXIT_USAGE)
    except (ConsistencyError, SolverError) as e:
        _report_error(f"internal error: {e}")
        raise typer.Exit(EXIT_INTERNAL)


def _load(
    ctx: typer.Context, command: str, overrides: Dict[str, Any]
) -> ExperimentConfig:
    options = ctx.obj or {}
    overrides = {
        **overrides,
        "command": command,
        "log_level": options.get("log_level"),
        "log_json": options.get("log_json"),
    }
    config = load_config(options.get("config"), overrides=overrides)
    setup_logging(config.log_level, json_format=config.log_json)
    get_metrics(enabled=config.enable_metrics)
    logger.debug("config loaded", extra={"command": command, "seed": config.seed})
    return config


def _emit(config: ExperimentConfig, text: str) -> None:
    if config.output_path:
        atomic_write(config.output_path, text)
        logger.info("output written", extra={"path": config.output_path})
    else:
        typer.echo(text, nl=False)


def _json(model: BaseModel) -> str:
    return model.model_dump_json(indent=2) + "\n"


def _csv(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def _path(value: Optional[Path]) -> Optional[str]:
    return str(value) if value else None


def _or_nan(value: Optional[float]) -> float:
    return math.nan if value is None else value


def _listed(values: Optional[Sequence[Any]]) -> Optional[List[Any]]:
    return list(values) if values else None


def _radius_fields(report: ShadowReport, n: int) -> Dict[str, Any]:
    return {
        "n": n,
        "d": report.scale,
        "K": report.k_statistic,
        "witness_k": report.witness[0],
        "witness_n": report.witness[1],
        "radius": report.radius,
        "optimal_y0": report.optimal_y0,
        "D": report.d_bound,
        "oracle_radius": report.oracle_radius,
        "oracle_y0": report.oracle_y0,
        "agreement_flag": report.agreement,
    }


# Commands


def _print_version(value: bool) -> None:
    if value:
        typer.echo(__version__)
        raise typer.Exit()


@app.callback()
def main_callback(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(
        None, "--config", help="YAML or JSON config file."
    ),
    log_level: Optional[str] = typer.Option(
        None, "--log-level", help="DEBUG, INFO, WARNING, ERROR."
    ),
    log_json: Optional[bool] = typer.Option(
        None, "--log-json/--log-text", help="Log record format."
    ),
    version: bool = typer.Option(
        False,
        "--version",
        callback=_print_version,
        is_eager=True,
        help="Print version and exit.",
    ),
) -> None:
    ctx.obj = {"config": config, "log_level": log_level, "log_json": log_json}


@app.command()
def exponent(
    ctx: typer.Context,
    lambda0: Optional[float] = typer.Option(
        None, "--lambda0", help="Contracting multiplier."
    ),
    lambda1: Optional[float] = typer.Option(
        None, "--lambda1", help="Expanding multiplier."
    ),
    tol: Optional[float] = typer.Option(None, "--tol", help="Bound on |Phi(b)|."),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
) -> None:
    """Ruin exponent b and critical exponent c0 = 1/b."""
    with _exit_codes():
        overrides: Dict[str, Any] = {
            "lambda0": lambda0,
            "lambda1": lambda1,
            "output_path": _path(output),
        }
        if tol is not None:
            overrides["tolerances"] = {"ruin": tol}
        config = _load(ctx, "exponent", overrides)

        params = validate(config.lambda0, config.lambda1)
        model = normalize(params)
        solution = solve_ruin_exponent(model, config.tolerances.ruin)
        report = ExponentReport(
            lambda0=params.lambda0,
            lambda1=params.lambda1,
            inverted=model.inverted,
            v=model.v,
            b=solution.b,
            c0=solution.c0,
            residual=solution.residual,
            hgy_violated=solution.c0 > 1.0,
        )
        _emit(config, _json(report))


@app.command()
def radius(
    ctx: typer.Context,
    instance: Path = typer.Argument(
        ..., help="Instance file (skewshadow-instance v1)."
    ),
    check: Optional[bool] = typer.Option(
        None, "--check/--no-check", help="Fail on oracle mismatch."
    ),
    tol: Optional[float] = typer.Option(
        None, "--tol", help="Relative bisection width of K."
    ),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
) -> None:
    """Optimal shadowing radius of the pseudo-orbit in an instance file."""
    with _exit_codes():
        config = _load(
            ctx,
            "radius",
            {
                "instance_path": str(instance),
                "check": check,
                "tol": tol,
                "output_path": _path(output),
            },
        )
        loaded = read_instance(config.instance_path)
        report = shadow_report(
            loaded.walk,
            loaded.pseudo,
            config.tolerances.statistic,
            config.tolerances.oracle,
            check=config.check,
        )
        _emit(config, _json(RadiusReport(**_radius_fields(report, loaded.length))))


@app.command()
def simulate(
    ctx: typer.Context,
    lambda0: Optional[float] = typer.Option(None, "--lambda0"),
    lambda1: Optional[float] = typer.Option(None, "--lambda1"),
    length: Optional[int] = typer.Option(
        None, "--length", "-N", help="Trajectory length N."
    ),
    noise: Optional[float] = typer.Option(
        None, "--noise", "-d", help="Noise amplitude d."
    ),
    seed: Optional[int] = typer.Option(
        None, "--seed", help="Master seed (default $SKEWSHADOW_SEED)."
    ),
    index: Optional[int] = typer.Option(
        None, "--index", help="Sample index of the stream."
    ),
    emit_instance: Optional[Path] = typer.Option(
        None, "--emit-instance", help="Write the instance here."
    ),
    check: Optional[bool] = typer.Option(None, "--check/--no-check"),
    tol: Optional[float] = typer.Option(None, "--tol"),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
) -> None:
    """Draw one random pseudo-orbit and report its shadowing radius."""
    with _exit_codes():
        config = _load(
            ctx,
            "simulate",
            {
                "lambda0": lambda0,
                "lambda1": lambda1,
                "length": length,
                "noise": noise,
                "seed": seed,
                "sample_index": index,
                "emit_instance": str(emit_instance) if emit_instance else None,
                "check": check,
                "tol": tol,
                "output_path": _path(output),
            },
        )
        model = normalize(validate(config.lambda0, config.lambda1))
        stream = derive_stream(config.seed, config.sample_index)
        walk = sample_walk(model, config.length, stream)
        pseudo = sample_noise(walk, config.noise, stream)
        if config.emit_instance:
            # normalized multipliers, so `radius` replays the same walk
            write_instance(
                config.emit_instance,
                Instance(params=model.params, walk=walk, pseudo=pseudo),
            )

        report = shadow_report(
            walk,
            pseudo,
            config.tolerances.statistic,
            config.tolerances.oracle,
            check=config.check,
        )
        _emit(
            config,
            _json(
                SimulateReport(
                    **_radius_fields(report, walk.length),
                    lambda0=model.params.lambda0,
                    lambda1=model.params.lambda1,
                    inverted=model.inverted,
                    seed=config.seed,
                    sample_index=config.sample_index,
                    instance_path=config.emit_instance,
                )
            ),
        )


@app.command()
def sweep(
    ctx: typer.Context,
    lambda0: Optional[float] = typer.Option(None, "--lambda0"),
    lambda1: Optional[float] = typer.Option(None, "--lambda1"),
    epsilon: Optional[float] = typer.Option(
        None, "--epsilon", help="Target precision eps."
    ),
    c: Optional[List[float]] = typer.Option(
        None, "--c", help="Noise exponent (repeatable)."
    ),
    n: Optional[List[int]] = typer.Option(
        None, "--n", help="Trajectory length (repeatable)."
    ),
    samples: Optional[int] = typer.Option(None, "--samples"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    threads: Optional[int] = typer.Option(None, "--threads", help="0 = all cores."),
    tol: Optional[float] = typer.Option(None, "--tol"),
    fmt: Optional[str] = typer.Option(None, "--format", help="csv or json."),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
) -> None:
    """Estimate p(eps / N^c, N, eps) over an (n, c) grid."""
    with _exit_codes():
        config = _load(
            ctx,
            "sweep",
            {
                "lambda0": lambda0,
                "lambda1": lambda1,
                "epsilon": epsilon,
                "c_values": _listed(c),
                "n_values": _listed(n),
                "samples": samples,
                "seed": seed,
                "threads": threads,
                "tol": tol,
                "format": fmt,
                "output_path": _path(output),
            },
        )
        model = normalize(validate(config.lambda0, config.lambda1))
        cells = phase_sweep(
            model,
            config.epsilon,
            config.c_values,
            config.n_values,
            config.samples,
            config.seed,
            threads=config.threads,
            tol=config.tolerances.statistic,
            guard=config.tolerances.guard,
        )

        if config.format == "csv":
            rows = [
                (
                    cell.n,
                    float(cell.c),
                    cell.l,
                    cell.estimate.samples,
                    cell.estimate.successes,
                    cell.estimate.p_hat,
                    cell.estimate.ci_low,
                    cell.estimate.ci_high,
                    config.seed,
                )
                for cell in cells
            ]
            _emit(config, _csv(SWEEP_COLUMNS, rows))
            return

        c0 = solve_ruin_exponent(model, config.tolerances.ruin).c0
        report = SweepReport(
            lambda0=model.params.lambda0,
            lambda1=model.params.lambda1,
            epsilon=config.epsilon,
            c0=c0,
            cells=[
                SweepCellReport(
                    n=cell.n,
                    c=cell.c,
                    L=cell.l,
                    d=cell.d,
                    samples=cell.estimate.samples,
                    successes=cell.estimate.successes,
                    p_hat=cell.estimate.p_hat,
                    ci_low=cell.estimate.ci_low,
                    ci_high=cell.estimate.ci_high,
                    seed=cell.estimate.master_seed,
                    regime=regime(cell.c, c0),
                )
                for cell in cells
            ],
        )
        _emit(config, _json(report))


@app.command()
def ruin(
    ctx: typer.Context,
    lambda0: Optional[float] = typer.Option(None, "--lambda0"),
    lambda1: Optional[float] = typer.Option(None, "--lambda1"),
    level: Optional[List[float]] = typer.Option(
        None, "--level", "-C", help="Ruin level C (repeatable)."
    ),
    horizon: Optional[int] = typer.Option(
        None, "--horizon", help="Steps simulated per path."
    ),
    samples: Optional[int] = typer.Option(None, "--samples"),
    seed: Optional[int] = typer.Option(None, "--seed"),
    threads: Optional[int] = typer.Option(None, "--threads"),
    fmt: Optional[str] = typer.Option(None, "--format"),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
) -> None:
    """Monte Carlo ruin probabilities against the exponent b."""
    with _exit_codes():
        config = _load(
            ctx,
            "ruin",
            {
                "lambda0": lambda0,
                "lambda1": lambda1,
                "ruin_levels": _listed(level),
                "horizon": horizon,
                "samples": samples,
                "seed": seed,
                "threads": threads,
                "format": fmt,
                "output_path": _path(output),
            },
        )
        model = normalize(validate(config.lambda0, config.lambda1))
        b = solve_ruin_exponent(model, config.tolerances.ruin).b

        rows: List[RuinRow] = []
        for value in config.ruin_levels:
            steps = config.horizon or default_horizon(model, value)
            estimate = ruin_probability_mc(
                model,
                value,
                config.samples,
                config.seed,
                horizon=steps,
                threads=config.threads,
            )
            exponent_hat: Optional[float] = empirical_exponent(estimate.p_hat, value)
            if math.isnan(exponent_hat):
                exponent_hat = None
            lower, upper = ruin_bounds(model, value, config.tolerances.ruin)
            rows.append(
                RuinRow(
                    C=value,
                    horizon=steps,
                    samples=estimate.samples,
                    p_hat=estimate.p_hat,
                    ci_low=estimate.ci_low,
                    ci_high=estimate.ci_high,
                    minus_log_p_over_C=exponent_hat,
                    b_reference=b,
                    lower_bound=lower,
                    upper_bound=upper,
                )
            )

        if config.format == "csv":
            table = [
                (
                    float(row.C),
                    row.horizon,
                    row.samples,
                    row.p_hat,
                    row.ci_low,
                    row.ci_high,
                    _or_nan(row.minus_log_p_over_C),
                    row.b_reference,
                )
                for row in rows
            ]
            _emit(config, _csv(RUIN_COLUMNS, table))
        else:
            report = RuinReport(
                lambda0=model.params.lambda0,
                lambda1=model.params.lambda1,
                seed=config.seed,
                rows=rows,
            )
            _emit(config, _json(report))


@app.command()
def rate(
    ctx: typer.Context,
    lambda0: Optional[float] = typer.Option(None, "--lambda0"),
    lambda1: Optional[float] = typer.Option(None, "--lambda1"),
    eps: Optional[List[float]] = typer.Option(
        None, "--eps", help="Deviation eps (repeatable)."
    ),
    tol: Optional[float] = typer.Option(None, "--tol"),
    fmt: Optional[str] = typer.Option(None, "--format"),
    output: Optional[Path] = typer.Option(None, "--output", "-o"),
) -> None:
    """Large-deviation rate h(eps) of the walk's empirical mean."""
    with _exit_codes():
        overrides: Dict[str, Any] = {
            "lambda0": lambda0,
            "lambda1": lambda1,
            "eps_values": _listed(eps),
            "format": fmt,
            "output_path": _path(output),
        }
        if tol is not None:
            overrides["tolerances"] = {"rate": tol}
        config = _load(ctx, "rate", overrides)

        model = normalize(validate(config.lambda0, config.lambda1))
        rows = [
            RateRow(eps=value, h=rate_function(model, value, config.tolerances.rate))
            for value in config.eps_values
        ]
        if config.format == "csv":
            _emit(config, _csv(RATE_COLUMNS, [(float(row.eps), row.h) for row in rows]))
        else:
            report = RateReport(
                lambda0=model.params.lambda0, lambda1=model.params.lambda1, rows=rows
            )
            _emit(config, _json(report))


def main() -> None:
    """Console script entry point."""
    app()


if __name__ == "__main__":
    main()
