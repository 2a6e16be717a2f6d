"""Command-line entry point.

    periodscope <system|period|monotonicity|isochrony|repro-km|repro-sect3>
        --f EXPR --g EXPR [--domain LO HI] [--energies E1,E2,... | --e-range MIN MAX N]
        [--a3 A1,A2,...] [--tol-q X] [--tol-iso X] [--samples N]
        [--format csv|json] [--out PATH] [--workers N]

Exit codes: 0 success, 2 malformed input, 3 violated hypothesis,
4 numerical failure (including any failed row of a sweep).
"""

import sys
from collections.abc import Callable
from contextlib import nullcontext
from typing import TextIO

import argh
import structlog
from pydantic import ValidationError

from periodscope.cli.commands import CommandResult, run
from periodscope.cli.output import write_csv, write_json
from periodscope.config import get_settings
from periodscope.core.exceptions import ConfigurationError, PeriodScopeError, RowFailures
from periodscope.core.logging import setup_logging
from periodscope.schemas.common import ErrorResponse, OutputDocument
from periodscope.schemas.run import Command, EnergyRange, OutputFormat, RunConfig

logger = structlog.get_logger(__name__)


# =============================================================================
# Configuration and output
# =============================================================================


def _float_list(text: str | None, name: str) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"--{name} expects comma-separated numbers: {exc}", name) from exc


def _build_config(
    command: Command,
    *,
    f: str | None,
    g: str | None,
    domain: list[float] | None,
    energies: str | None,
    e_range: list[float] | None,
    a3: str | None,
    tol_q: float | None,
    tol_iso: float | None,
    samples: int | None,
    output_format: str | None,
    out: str | None,
    workers: int | None,
) -> RunConfig:
    """Merge flags with settings defaults and validate."""
    settings = get_settings()
    try:
        return RunConfig(
            command=command,
            f_text=f,
            g_text=g,
            domain=tuple(domain) if domain else (settings.domain_lo, settings.domain_hi),
            energies=_float_list(energies, "energies"),
            e_range=(
                EnergyRange(e_min=e_range[0], e_max=e_range[1], count=e_range[2])
                if e_range
                else None
            ),
            a3=_float_list(a3, "a3") or [],
            tol_q=tol_q if tol_q is not None else settings.tol_quadrature,
            tol_iso=tol_iso if tol_iso is not None else settings.tol_iso,
            samples=samples if samples is not None else settings.samples,
            output_format=output_format or settings.output_format,
            out=out,
            workers=workers if workers is not None else settings.workers,
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigurationError(f"Invalid arguments: {first['msg']}", field) from exc


def _emit(config: RunConfig, result: CommandResult, stream: TextIO) -> None:
    if config.output_format == OutputFormat.JSON.value:
        settings = get_settings()
        document = OutputDocument(
            program=settings.app_name,
            version=settings.app_version,
            config=config.model_dump(mode="json"),
            rows=[row.model_dump(mode="json") for row in result.rows],
            diagnostics=result.diagnostics,
        )
        write_json(document, stream)
    else:
        write_csv(result.rows, result.row_model, stream)


def execute(config: RunConfig) -> None:
    """Run a command, write its table, and raise RowFailures if any row failed."""
    result = run(config)
    target = (
        open(config.out, "w", newline="", encoding="utf-8")  # noqa: SIM115
        if config.out
        else nullcontext(sys.stdout)
    )
    with target as stream:
        _emit(config, result, stream)
    logger.info("command_finished", command=config.command, rows=len(result.rows))
    if result.failed:
        raise RowFailures(result.failed, len(result.rows))


# =============================================================================
# Commands
# =============================================================================

_COMMON_ARGS = (
    argh.arg("--f", help="f(x), coefficient of the velocity-squared term"),
    argh.arg("--g", help="g(x), restoring term"),
    argh.arg("--domain", nargs=2, type=float, metavar=("LO", "HI"), help="scan domain"),
    argh.arg("--energies", help="comma-separated energies"),
    argh.arg("--e-range", nargs=3, type=float, metavar=("MIN", "MAX", "N"), help="energy sweep"),
    argh.arg("--a3", help="comma-separated cubic coefficients (repro-km)"),
    argh.arg("--tol-q", type=float, help="absolute quadrature tolerance"),
    argh.arg("--tol-iso", type=float, help="relative zero threshold for N and R"),
    argh.arg("--samples", type=int, help="Chebyshev samples per orbit window"),
    argh.arg("--format", choices=[fmt.value for fmt in OutputFormat], help="csv or json"),
    argh.arg("--out", help="output path (default stdout)"),
    argh.arg("--workers", type=int, help="threads for sweeps"),
)


def _command(kind: Command) -> Callable[..., None]:
    """Build an argh command function for one subcommand."""

    def handler(
        *,
        f: str | None = None,
        g: str | None = None,
        domain: list[float] | None = None,
        energies: str | None = None,
        e_range: list[float] | None = None,
        a3: str | None = None,
        tol_q: float | None = None,
        tol_iso: float | None = None,
        samples: int | None = None,
        format: str | None = None,
        out: str | None = None,
        workers: int | None = None,
    ) -> None:
        execute(
            _build_config(
                kind,
                f=f,
                g=g,
                domain=domain,
                energies=energies,
                e_range=e_range,
                a3=a3,
                tol_q=tol_q,
                tol_iso=tol_iso,
                samples=samples,
                output_format=format,
                out=out,
                workers=workers,
            )
        )

    handler.__name__ = kind.value.replace("-", "_")
    handler.__doc__ = _HELP[kind]
    for decorator in reversed(_COMMON_ARGS):
        handler = decorator(handler)
    return handler


_HELP = {
    Command.SYSTEM: "Validate the system and report V''(0), u(0) and the energy ceiling.",
    Command.PERIOD: "T(E) by x- and theta-quadrature and ODE return time, with dT/dE.",
    Command.MONOTONICITY: "Sample N on the orbit window and classify T as monotone or not.",
    Command.ISOCHRONY: "Isochronicity residual, guards and the constants C and D.",
    Command.REPRO_KM: "Rational-mass family: coefficients, polynomial sign and T ordering per a3.",
    Command.REPRO_SECT3: "Even-f family: T against 2*pi and the N verdict.",
}

COMMAND_FUNCTIONS = [_command(kind) for kind in Command]


def main(argv: list[str] | None = None) -> None:
    """Dispatch the subcommand; PeriodScopeError becomes an exit code and a JSON error body."""
    setup_logging()
    settings = get_settings()
    logger.info(
        "application_starting",
        app=settings.app_name,
        version=settings.app_version,
        environment=settings.environment,
    )
    try:
        argh.dispatch_commands(COMMAND_FUNCTIONS, argv=argv)
    except PeriodScopeError as exc:
        logger.warning("command_failed", error_code=exc.error_code, exit_code=exc.exit_code)
        print(ErrorResponse.from_exception(exc).model_dump_json(), file=sys.stderr)
        sys.exit(exc.exit_code)


if __name__ == "__main__":
    main()
