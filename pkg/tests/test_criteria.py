"""Tests for the monotonicity function, isochronicity residual and guards."""

from collections.abc import Callable
from unittest.mock import patch

import numpy as np
import pytest

from periodscope.config import Settings
from periodscope.core.exceptions import DegenerateCritical, GuardViolation, NotConservative
from periodscope.services.criteria import (
    MonotonicityVerdict,
    assess_isochrony,
    classify_monotonicity,
    g_two_ways,
    isochrony_guards,
    isochrony_residual,
    n_function,
    n_terms,
    orbit_samples,
    residual_terms,
    schaaf_sign,
    schaaf_value,
)
from periodscope.services.liesys import LienardSystem, build_system

# =============================================================================
# N(x)
# =============================================================================


class TestMonotonicityFunction:
    """Tests for n_terms and n_function."""

    def test_harmonic_is_zero(self, harmonic: LienardSystem) -> None:
        """Test N vanishes relative to its terms, through and away from the origin."""
        xs = np.array([-0.7, -0.005, 0.0, 0.003, 0.4, 1.1])

        terms = n_terms(harmonic, xs)

        assert np.all(np.abs(terms.value) <= 1e-12 * np.maximum(terms.scale, 1.0))

    def test_series_and_direct_forms_meet(self, km: Callable[[float], LienardSystem]) -> None:
        """Test N is continuous across the series radius."""
        system = km(0.96)

        inside = float(n_function(system, 0.0099))
        outside = float(n_function(system, 0.0101))

        assert inside == pytest.approx(outside, rel=1e-3)

    def test_scalar_shape(self, km: Callable[[float], LienardSystem]) -> None:
        """Test a scalar x gives a scalar N."""
        assert np.shape(n_function(km(1.055), 0.3)) == ()

    def test_degenerate_critical_point(self, duffing_soft: LienardSystem) -> None:
        """Test N at a critical point of V other than 0."""
        with pytest.raises(DegenerateCritical) as info:
            n_terms(duffing_soft, np.array([0.5, 1.0]))

        assert info.value.details == {"x": 1.0}


class TestGTwoWays:
    """The expanded and succinct forms of G agree."""

    def test_rational_mass_family(self, km: Callable[[float], LienardSystem]) -> None:
        """Test a3 = 0.96 at x = 0.3."""
        expanded, succinct = g_two_ways(km(0.96), 0.3)

        assert float(expanded) == pytest.approx(float(succinct), rel=1e-8)

    def test_random_polynomial_springs(self) -> None:
        """Test conservative odd-and-even polynomial g at random points."""
        rng = np.random.default_rng(11)

        for _ in range(5):
            c2, c3 = float(rng.uniform(-0.3, 0.3)), float(rng.uniform(0.0, 1.0))
            system = build_system("0", f"x + {c2!r}*x^2 + {c3!r}*x^3", (-1.0, 1.0))
            xs = rng.uniform(0.05, 0.8, 10) * rng.choice([-1.0, 1.0], 10)

            expanded, succinct = g_two_ways(system, xs)

            np.testing.assert_allclose(expanded, succinct, rtol=1e-8, atol=1e-12)


# =============================================================================
# Classification
# =============================================================================


class TestClassifyMonotonicity:
    """Tests for classify_monotonicity."""

    def test_harmonic_isochronous(self, harmonic: LienardSystem) -> None:
        """Test the harmonic oscillator is classified isochronous."""
        report = classify_monotonicity(harmonic, 0.3)

        assert report.verdict is MonotonicityVerdict.ISOCHRONOUS
        assert len(report.samples) == 64
        assert report.tol_iso == 1e-9

    @pytest.mark.parametrize(
        ("a3", "verdict"),
        [
            (0.96, MonotonicityVerdict.INCREASING),
            (0.999, MonotonicityVerdict.INCREASING),
            (1.0, MonotonicityVerdict.ISOCHRONOUS),
            (1.001, MonotonicityVerdict.DECREASING),
            (1.055, MonotonicityVerdict.DECREASING),
        ],
    )
    def test_rational_mass_family(
        self, km: Callable[[float], LienardSystem], a3: float, verdict: MonotonicityVerdict
    ) -> None:
        """Test the sign of N follows the sign of 1 - a3."""
        report = classify_monotonicity(km(a3), 0.05)

        assert report.verdict is verdict

    def test_report_extremes(self, km: Callable[[float], LienardSystem]) -> None:
        """Test min/max and their locations are consistent with the samples."""
        report = classify_monotonicity(km(0.96), 0.05, n_samples=32)
        values = [n for _, n in report.samples]

        assert report.min_n == min(values)
        assert report.max_n == max(values)
        assert report.window.x1 <= report.argmin_x <= report.window.x2
        assert report.min_n > 0.0

    def test_hard_spring_decreasing(self, duffing_hard: LienardSystem) -> None:
        """Test x + x^3 has a decreasing period."""
        assert classify_monotonicity(duffing_hard, 0.1).verdict is MonotonicityVerdict.DECREASING

    def test_too_few_samples(self, harmonic: LienardSystem) -> None:
        """Test fewer than 16 samples is rejected."""
        with pytest.raises(ValueError):
            classify_monotonicity(harmonic, 0.3, n_samples=8)

    def test_orbit_samples_inside_window(self, duffing_soft: LienardSystem) -> None:
        """Test samples lie strictly inside the turning points."""
        window, xs = orbit_samples(duffing_soft, 0.2, 20)

        assert xs.shape == (20,)
        assert window.x1 < xs.min() < xs.max() < window.x2


# =============================================================================
# Isochronicity residual and guards
# =============================================================================


class TestResidual:
    """Tests for R(x) = 3P²P′f + 5PP′² − 3P²P″."""

    def test_hard_spring_value(self, duffing_hard: LienardSystem) -> None:
        """Test g = x + x^3 at x = 1: P = 4, P' = 6, P'' = 6 gives R = 432."""
        assert float(isochrony_residual(duffing_hard, 1.0)) == pytest.approx(432.0, rel=1e-14)

    def test_harmonic_is_zero(self, harmonic: LienardSystem) -> None:
        """Test R ≡ 0 for constant P."""
        np.testing.assert_array_equal(
            isochrony_residual(harmonic, np.linspace(-1.0, 1.0, 5)), np.zeros(5)
        )

    def test_isochronous_rational_mass(self, km: Callable[[float], LienardSystem]) -> None:
        """Test P = g' + gf ≡ 1 for a3 = 1 makes R vanish relative to its terms."""
        terms = residual_terms(km(1.0), np.linspace(-2.0, 2.0, 9))

        assert np.all(np.abs(terms.value) <= 1e-12 * terms.scale)

    def test_non_isochronous_rational_mass(self, km: Callable[[float], LienardSystem]) -> None:
        """Test a3 = 0.9 leaves a residual well above rounding."""
        terms = residual_terms(km(0.9), np.array([0.5]))

        assert abs(float(terms.value[0])) > 1e-4 * float(terms.scale[0])


class TestGuards:
    """Tests for W, the second guard and the constants C, D."""

    def test_harmonic(self, harmonic: LienardSystem) -> None:
        """Test W = 3, C = 0 and D = 1/2 for the harmonic oscillator."""
        xs = np.array([-0.8, 0.2, 0.6])

        guards = isochrony_guards(harmonic, xs)

        np.testing.assert_allclose(guards.w, np.full(3, 3.0))
        np.testing.assert_allclose(guards.c, np.zeros(3), atol=1e-15)
        np.testing.assert_allclose(guards.d, np.full(3, 0.5))
        np.testing.assert_allclose(guards.guard2, 3.0 * xs, atol=1e-12)

    def test_hard_spring_w(self, duffing_hard: LienardSystem) -> None:
        """Test W(1) = 3·16 − 2·6 = 36."""
        assert float(isochrony_guards(duffing_hard, 1.0).w) == pytest.approx(36.0, rel=1e-14)

    def test_w_vanishing(self) -> None:
        """Test W = 3P² − gP′ hitting zero raises GuardViolation."""
        # g = x, f = 3x - 3: P = 1 + 3x^2 - 3x, so P(1) = 1, P'(1) = 3 and W(1) = 0
        system = build_system("3*x - 3", "x", (-2.0, 2.0))

        with pytest.raises(GuardViolation) as info:
            isochrony_guards(system, np.array([0.1, 1.0]))

        assert info.value.locations == [1.0]


class TestAssessIsochrony:
    """Tests for assess_isochrony."""

    def test_isochronous_rational_mass(self, km: Callable[[float], LienardSystem]) -> None:
        """Test a3 = 1 passes with constant C and D."""
        report = assess_isochrony(km(1.0), 0.1)

        assert report.verdict is True
        assert report.diagnostics["residual_ok"]
        assert report.diagnostics["guard2_ok"]
        assert report.diagnostics["c_constant"]
        assert report.diagnostics["d_constant"]
        assert all(d == pytest.approx(0.5, rel=1e-9) for _, d in report.d_samples)

    def test_non_isochronous_rational_mass(self, km: Callable[[float], LienardSystem]) -> None:
        """Test a3 = 0.9 fails on the residual."""
        report = assess_isochrony(km(0.9), 0.1)

        assert report.verdict is False
        assert not report.diagnostics["residual_ok"]

    def test_origin_sample_dropped(self, harmonic: LienardSystem) -> None:
        """Test an odd sample count, whose middle node is 0, drops that node."""
        report = assess_isochrony(harmonic, 0.3, n_samples=33)

        assert len(report.residual_samples) == 32
        assert report.verdict is True

    def test_constancy_threshold_from_settings(
        self, km: Callable[[float], LienardSystem]
    ) -> None:
        """Test C and D constancy follows tol_constancy without touching the verdict."""
        strict = Settings(environment="test", tol_constancy=-1.0)

        with patch("periodscope.services.criteria.get_settings", return_value=strict):
            report = assess_isochrony(km(1.0), 0.1)

        assert report.verdict is True
        assert not report.diagnostics["c_constant"]
        assert not report.diagnostics["d_constant"]
        assert Settings().tol_constancy == 1e-8


# =============================================================================
# Conservative systems
# =============================================================================


class TestSchaaf:
    """Tests for 5g′g″² − 3g′²g‴."""

    def test_hard_spring_value(self, duffing_hard: LienardSystem) -> None:
        """Test 18(1 + 3x²)(7x² − 1) at x = 1."""
        assert float(schaaf_value(duffing_hard, 1.0)) == pytest.approx(432.0, rel=1e-14)

    def test_requires_conservative(self, km: Callable[[float], LienardSystem]) -> None:
        """Test f ≢ 0 is rejected."""
        with pytest.raises(NotConservative) as info:
            schaaf_value(km(1.0), 0.5)

        assert info.value.exit_code == 3

    @pytest.mark.parametrize(
        ("g", "domain", "energy", "sign"),
        [
            ("x + x^3", (-10.0, 10.0), 0.05, -1),
            ("x + x^2", (-0.9, 3.0), 0.05, 1),
            ("x - x^3", (-2.0, 2.0), 0.1, 1),
            ("x + x^3", (-10.0, 10.0), 2.0, 0),
        ],
    )
    def test_sign(self, g: str, domain: tuple[float, float], energy: float, sign: int) -> None:
        """Test the sign of the expression on the orbit window."""
        assert schaaf_sign(build_system("0", g, domain), energy) == sign
