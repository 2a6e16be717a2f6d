"""Table rows emitted by the commands, one model per table."""

from pydantic import Field

from periodscope.schemas.common import RowModel


class SystemRow(RowModel):
    f: str
    g: str
    domain_lo: float
    domain_hi: float
    v2_origin: float | None = Field(default=None, description="V''(0) = g'(0)")
    energy_ceiling: float | None = None
    left_limit: float | None = None
    right_limit: float | None = None
    left_critical: bool | None = None
    right_critical: bool | None = None
    u_origin: float | None = Field(default=None, description="u(0) = 1/(2V''(0))")


class PeriodRow(RowModel):
    energy: float
    t_x: float | None = None
    t_theta: float | None = None
    t_ode: float | None = None
    dt_de: float | None = None
    max_pairwise_rel_diff: float | None = None
    est_error_x: float | None = None
    est_error_theta: float | None = None
    est_error_ode: float | None = None
    est_error_dt_de: float | None = None
    derivative_method: str = "derivative-quadrature"


class MonotonicityRow(RowModel):
    energy: float
    x: float | None = None
    n: float | None = None
    verdict: str | None = None


class IsochronyRow(RowModel):
    energy: float
    x: float | None = None
    residual: float | None = None
    guard_w: float | None = None
    guard2: float | None = None
    c: float | None = None
    d: float | None = None
    verdict: bool | None = None


class ReproKMRow(RowModel):
    a3: float
    c0: float | None = None
    c1: float | None = None
    c2: float | None = None
    c3: float | None = None
    c4: float | None = None
    c5: float | None = None
    prefactor: float | None = None
    discrepancy: float | None = None
    poly_sign: int | None = None
    verdict: str | None = Field(default=None, description="N-based verdict at the lowest energy")
    period_trend: str | None = None
    period_min: float | None = None
    period_max: float | None = None


class ReproSect3Row(RowModel):
    energy: float
    t_theta: float | None = None
    t_ode: float | None = None
    rel_diff_two_pi: float | None = None
    verdict: str | None = None
    max_abs_n: float | None = None
    n_scale: float | None = None
