"""Command operations: RunConfig in, table rows and diagnostics out.

Sweep rows are computed on a thread pool in input order. A row whose
computation raises a PeriodScopeError is kept in the table, marked failed,
and the remaining rows still run.
"""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, TypeVar

import numpy as np
import structlog

from periodscope.core.exceptions import ConfigurationError, PeriodScopeError
from periodscope.core.logging import clear_log_context, log_context
from periodscope.schemas.common import RowModel
from periodscope.schemas.rows import (
    IsochronyRow,
    MonotonicityRow,
    PeriodRow,
    ReproKMRow,
    ReproSect3Row,
    SystemRow,
)
from periodscope.schemas.run import Command, RunConfig
from periodscope.services.criteria import assess_isochrony, classify_monotonicity
from periodscope.services.liesys import LienardSystem, build_system
from periodscope.services.period import compare_methods, period_ode_return, period_theta_quadrature
from periodscope.services.repro import (
    km_coefficients,
    km_polynomial_check,
    km_system,
    period_trend,
    sect3_family,
)

logger = structlog.get_logger(__name__)

T = TypeVar("T")

DEFAULT_A3 = (0.9, 0.96, 0.999, 1.0, 1.001, 1.055)
DEFAULT_KM_ENERGIES = (0.02, 0.05, 0.08, 0.11, 0.14)
DEFAULT_SECT3_F = "1+x^2"


@dataclass
class CommandResult:
    """Rows of one table, their model, and free-form diagnostics."""

    rows: list[RowModel]
    row_model: type[RowModel]
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> int:
        return sum(1 for row in self.rows if row.status != "ok")


# =============================================================================
# Helpers
# =============================================================================


def _system(config: RunConfig) -> LienardSystem:
    if config.g_text is None:
        raise ConfigurationError(f"{config.command} needs --g", "g")
    return build_system(config.f_text or "0", config.g_text, config.domain, config.tol_q)


def _energies(config: RunConfig, system: LienardSystem) -> list[float]:
    """Requested energies, or half the energy ceiling when none were given."""
    energies = config.energy_list()
    return energies if energies is not None else [0.5 * system.energy_ceiling()]


def _failed(exc: PeriodScopeError) -> dict[str, Any]:
    return {"status": "failed", "error_code": exc.error_code}


def _sweep(
    config: RunConfig,
    items: Sequence[T],
    compute: Callable[[T], list[RowModel]],
    on_error: Callable[[T, PeriodScopeError], RowModel],
    context: str,
) -> list[RowModel]:
    """compute(item) for every item on a thread pool; failures become marked rows."""

    def run_one(item: T) -> list[RowModel]:
        log_context(command=str(config.command), **{context: item})
        try:
            return compute(item)
        except PeriodScopeError as exc:
            logger.warning("row_failed", error_code=exc.error_code, message=exc.message)
            return [on_error(item, exc)]
        finally:
            clear_log_context()

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return [row for rows in pool.map(run_one, items) for row in rows]


# =============================================================================
# Commands
# =============================================================================


def cmd_system(config: RunConfig) -> CommandResult:
    """V″(0), u(0), E_star and the scan limits of the system."""
    system = _system(config)
    v2 = float(system.potential_jet(np.float64(0.0), 2).derivative(2))
    ceiling = system.energy_ceiling()
    scan = system.ceiling_scan()
    row = SystemRow(
        f=system.f.text,
        g=system.g.text,
        domain_lo=system.domain[0],
        domain_hi=system.domain[1],
        v2_origin=v2,
        energy_ceiling=ceiling,
        left_limit=scan.left_limit,
        right_limit=scan.right_limit,
        left_critical=scan.left_critical,
        right_critical=scan.right_critical,
        u_origin=float(system.origin_series().u.value),
    )
    return CommandResult(rows=[row], row_model=SystemRow)


def cmd_period(config: RunConfig) -> CommandResult:
    """T by the three methods and dT/dE at each energy."""
    system = _system(config)

    def compute(energy: float) -> list[RowModel]:
        cmp = compare_methods(system, energy)
        return [
            PeriodRow(
                energy=energy,
                t_x=cmp.x_quadrature.period,
                t_theta=cmp.theta_quadrature.period,
                t_ode=cmp.ode_return.period,
                dt_de=cmp.derivative.derivative,
                max_pairwise_rel_diff=cmp.max_pairwise_rel_diff,
                est_error_x=cmp.x_quadrature.est_error,
                est_error_theta=cmp.theta_quadrature.est_error,
                est_error_ode=cmp.ode_return.est_error,
                est_error_dt_de=cmp.derivative.est_error,
                derivative_method=cmp.derivative.method.value,
            )
        ]

    rows = _sweep(
        config,
        _energies(config, system),
        compute,
        lambda energy, exc: PeriodRow(energy=energy, **_failed(exc)),
        "energy",
    )
    return CommandResult(rows=rows, row_model=PeriodRow)


def cmd_monotonicity(config: RunConfig) -> CommandResult:
    """N samples on each orbit window with the verdict."""
    system = _system(config)
    summaries: dict[float, dict[str, Any]] = {}

    def compute(energy: float) -> list[RowModel]:
        report = classify_monotonicity(system, energy, config.samples, config.tol_iso)
        summaries[energy] = {
            "energy": energy,
            "verdict": report.verdict.value,
            "min_n": report.min_n,
            "max_n": report.max_n,
            "argmin_x": report.argmin_x,
            "argmax_x": report.argmax_x,
            "scale": report.scale,
            "tol_iso": report.tol_iso,
            "x1": report.window.x1,
            "x2": report.window.x2,
        }
        return [
            MonotonicityRow(energy=energy, x=x, n=n, verdict=report.verdict.value)
            for x, n in report.samples
        ]

    energies = _energies(config, system)
    rows = _sweep(
        config,
        energies,
        compute,
        lambda energy, exc: MonotonicityRow(energy=energy, **_failed(exc)),
        "energy",
    )
    return CommandResult(
        rows=rows,
        row_model=MonotonicityRow,
        diagnostics={"reports": [summaries[e] for e in energies if e in summaries]},
    )


def cmd_isochrony(config: RunConfig) -> CommandResult:
    """Isochronicity residual, guards and C/D samples with the verdict."""
    system = _system(config)
    summaries: dict[float, dict[str, Any]] = {}

    def compute(energy: float) -> list[RowModel]:
        report = assess_isochrony(system, energy, config.samples, config.tol_iso)
        summaries[energy] = {"energy": energy, "verdict": report.verdict, **report.diagnostics}
        guards: list[tuple[float | None, ...]] = [
            (w, g2, c, d)
            for (_, w), (_, g2), (_, c), (_, d) in zip(
                report.guard_w_samples,
                report.guard2_samples,
                report.c_samples,
                report.d_samples,
                strict=True,
            )
        ] or [(None, None, None, None)] * len(report.residual_samples)
        return [
            IsochronyRow(
                energy=energy,
                x=x,
                residual=r,
                guard_w=w,
                guard2=g2,
                c=c,
                d=d,
                verdict=report.verdict,
            )
            for (x, r), (w, g2, c, d) in zip(report.residual_samples, guards, strict=True)
        ]

    energies = _energies(config, system)
    rows = _sweep(
        config,
        energies,
        compute,
        lambda energy, exc: IsochronyRow(energy=energy, **_failed(exc)),
        "energy",
    )
    return CommandResult(
        rows=rows,
        row_model=IsochronyRow,
        diagnostics={"reports": [summaries[e] for e in energies if e in summaries]},
    )


def cmd_repro_km(config: RunConfig) -> CommandResult:
    """Coefficients, polynomial sign, N verdict and T ordering per a₃."""
    a3_values = config.a3 or list(DEFAULT_A3)
    energies = config.energy_list() or list(DEFAULT_KM_ENERGIES)

    def compute(a3: float) -> list[RowModel]:
        c = km_coefficients(a3)
        check = km_polynomial_check(a3)
        system = km_system(a3, config.domain)
        report = classify_monotonicity(system, energies[0], config.samples, config.tol_iso)
        periods = [period_theta_quadrature(system, e).period for e in energies]
        return [
            ReproKMRow(
                a3=a3,
                c0=c[0],
                c1=c[1],
                c2=c[2],
                c3=c[3],
                c4=c[4],
                c5=c[5],
                prefactor=check.prefactor,
                discrepancy=check.discrepancy,
                poly_sign=check.sign,
                verdict=report.verdict.value,
                period_trend=period_trend(periods),
                period_min=min(periods),
                period_max=max(periods),
            )
        ]

    rows = _sweep(
        config,
        a3_values,
        compute,
        lambda a3, exc: ReproKMRow(a3=a3, **_failed(exc)),
        "a3",
    )
    return CommandResult(rows=rows, row_model=ReproKMRow, diagnostics={"energies": energies})


def cmd_repro_sect3(config: RunConfig) -> CommandResult:
    """T against 2π and the N verdict for the even-f family."""
    f_text = config.f_text or DEFAULT_SECT3_F
    system = sect3_family(f_text, config.domain)

    def compute(energy: float) -> list[RowModel]:
        theta = period_theta_quadrature(system, energy)
        ode = period_ode_return(system, energy)
        report = classify_monotonicity(system, energy, config.samples, config.tol_iso)
        return [
            ReproSect3Row(
                energy=energy,
                t_theta=theta.period,
                t_ode=ode.period,
                rel_diff_two_pi=abs(theta.period - 2.0 * np.pi) / (2.0 * np.pi),
                verdict=report.verdict.value,
                max_abs_n=max(abs(report.min_n), abs(report.max_n)),
                n_scale=report.scale,
            )
        ]

    rows = _sweep(
        config,
        _energies(config, system),
        compute,
        lambda energy, exc: ReproSect3Row(energy=energy, **_failed(exc)),
        "energy",
    )
    return CommandResult(rows=rows, row_model=ReproSect3Row, diagnostics={"f": f_text})


COMMANDS: dict[Command, Callable[[RunConfig], CommandResult]] = {
    Command.SYSTEM: cmd_system,
    Command.PERIOD: cmd_period,
    Command.MONOTONICITY: cmd_monotonicity,
    Command.ISOCHRONY: cmd_isochrony,
    Command.REPRO_KM: cmd_repro_km,
    Command.REPRO_SECT3: cmd_repro_sect3,
}


def run(config: RunConfig) -> CommandResult:
    """Dispatch a validated configuration to its command."""
    return COMMANDS[Command(config.command)](config)
