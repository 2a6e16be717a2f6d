"""Tests for system construction, mass, potential and energy windows."""

from collections.abc import Callable

import numpy as np
import pytest

from periodscope.core.exceptions import (
    CenterHypothesisViolated,
    ConfigurationError,
    DomainError,
    EnergyOutOfRange,
)
from periodscope.services.expr import finite_difference
from periodscope.services.liesys import LienardSystem, build_system
from periodscope.services.repro import km_closed_forms

# =============================================================================
# Construction
# =============================================================================


class TestBuildSystem:
    """Tests for build_system validation."""

    def test_harmonic(self, harmonic: LienardSystem) -> None:
        """Test the harmonic oscillator builds with the default domain."""
        assert harmonic.domain == (-10.0, 10.0)
        assert harmonic.f.text == "0.0"
        assert "x" in repr(harmonic)

    def test_rational_mass_family(self, km: Callable[[float], LienardSystem]) -> None:
        """Test the rational-mass system builds for a3 = 1.055."""
        system = km(1.055)

        assert system.g.text == "(x + (1.055 * (x ^ 3.0)))"

    @pytest.mark.parametrize(
        ("g", "reason"),
        [("1", "g(0)"), ("-x", "V''(0)"), ("x^2", "V''(0)"), ("sin(x) + 0.1", "g(0)")],
    )
    def test_center_hypothesis(self, g: str, reason: str) -> None:
        """Test g without a nondegenerate minimum at 0 is rejected."""
        with pytest.raises(CenterHypothesisViolated) as info:
            build_system("0", g)

        assert reason in info.value.message
        assert info.value.exit_code == 3

    def test_domain_must_contain_origin(self) -> None:
        """Test a domain on one side of 0."""
        with pytest.raises(ConfigurationError) as info:
            build_system("0", "x", (1.0, 2.0))

        assert info.value.details == {"field": "domain"}

    def test_f_undefined_at_origin(self) -> None:
        """Test f = ln(x) is a DomainError."""
        with pytest.raises(DomainError):
            build_system("ln(x)", "x")


# =============================================================================
# F, mass and potential
# =============================================================================


class TestMassAndPotential:
    """Tests for F, μ, V and their jets."""

    def test_harmonic(self, harmonic: LienardSystem) -> None:
        """Test μ ≡ 1 and V = x²/2."""
        xs = np.linspace(-3.0, 3.0, 13)

        np.testing.assert_allclose(harmonic.mass(xs), np.ones_like(xs))
        np.testing.assert_allclose(harmonic.potential(xs), 0.5 * xs**2, rtol=0, atol=1e-12)
        np.testing.assert_allclose(harmonic.exp_f_integral(xs), xs, rtol=0, atol=1e-12)

    def test_rational_mass_closed_forms(self, km: Callable[[float], LienardSystem]) -> None:
        """Test F, μ and V of the a3 = 1 system against closed forms on random points."""
        system = km(1.0)
        xs = np.random.default_rng(3).uniform(-3.0, 3.0, 100)
        forms = km_closed_forms(1.0, xs)

        np.testing.assert_allclose(system.F(xs), -1.5 * np.log1p(xs**2), rtol=0, atol=1e-10)
        np.testing.assert_allclose(system.mass(xs), (1.0 + xs**2) ** -3, rtol=1e-9)
        np.testing.assert_allclose(system.potential(xs), forms.potential, rtol=0, atol=1e-9)
        np.testing.assert_allclose(
            system.potential_slope(xs), forms.potential_slope, rtol=0, atol=1e-9
        )

    def test_rational_mass_point_values(self, km: Callable[[float], LienardSystem]) -> None:
        """Test V(1) = V'(1) = 1/4 for a3 = 1."""
        system = km(1.0)

        assert float(system.potential(1.0)) == pytest.approx(0.25, abs=1e-10)
        assert float(system.potential_slope(1.0)) == pytest.approx(0.25, abs=1e-10)

    def test_f_is_derivative_of_F(self, km: Callable[[float], LienardSystem]) -> None:
        """Test finite differences of F reproduce f."""
        system = km(0.96)
        xs = np.array([-2.1, -0.4, 0.3, 1.7])

        np.testing.assert_allclose(
            finite_difference(system.F, xs, 1), system.f(xs), rtol=0, atol=1e-8
        )

    def test_potential_jet_slope(self, km: Callable[[float], LienardSystem]) -> None:
        """Test derivative 1 of the V jet is μg."""
        system = km(1.055)
        xs = np.array([-1.2, 0.25, 0.9])

        np.testing.assert_allclose(
            system.potential_jet(xs, 3).derivative(1), system.potential_slope(xs), rtol=1e-14
        )

    def test_potential_jet_higher_derivatives(self, km: Callable[[float], LienardSystem]) -> None:
        """Test V'' and V''' against finite differences of the quadrature V."""
        system = km(1.0)
        x = 0.7
        j = system.potential_jet(x, 3)

        for k in (2, 3):
            exact = float(j.derivative(k))
            approx = float(finite_difference(system.potential, x, k))
            assert abs(exact - approx) <= 1e-6 + 1e-5 * abs(exact)

    def test_mass_jet(self, km: Callable[[float], LienardSystem]) -> None:
        """Test μ' = 2fμ."""
        system = km(1.0)
        x = 0.6

        mu = float(system.mass(x))
        assert float(system.mass_jet(x, 2).derivative(1)) == pytest.approx(
            2.0 * float(system.f(x)) * mu, rel=1e-9
        )

    def test_outside_domain(self, duffing_soft: LienardSystem) -> None:
        """Test V beyond the domain is a DomainError."""
        with pytest.raises(DomainError):
            duffing_soft.potential(2.5)


# =============================================================================
# Energy window
# =============================================================================


class TestEnergyWindow:
    """Tests for the energy ceiling and turning points."""

    def test_harmonic_ceiling_is_domain_edge(self, harmonic: LienardSystem) -> None:
        """Test V reaches 50 at the domain edge with no critical point."""
        scan = harmonic.ceiling_scan()

        assert harmonic.energy_ceiling() == pytest.approx(50.0, rel=1e-8)
        assert not scan.left_critical
        assert not scan.right_critical
        assert scan.right_limit == 10.0

    def test_soft_spring_ceiling_is_saddle(self, duffing_soft: LienardSystem) -> None:
        """Test x - x^3 is bounded by its critical points at ±1."""
        scan = duffing_soft.ceiling_scan()

        assert duffing_soft.energy_ceiling() == pytest.approx(0.25, rel=1e-8)
        assert scan.right_critical
        assert scan.left_critical
        assert scan.right_limit == pytest.approx(1.0, abs=1e-12)
        assert scan.left_limit == pytest.approx(-1.0, abs=1e-12)

    def test_ceiling_is_cached(self, duffing_hard: LienardSystem) -> None:
        """Test repeated calls return the same scan."""
        assert duffing_hard.ceiling_scan() is duffing_hard.ceiling_scan()

    def test_harmonic_turning_points(self, harmonic: LienardSystem) -> None:
        """Test E = 1/2 turns at ±1."""
        window = harmonic.turning_points(0.5)

        assert window.x1 == pytest.approx(-1.0, abs=1e-10)
        assert window.x2 == pytest.approx(1.0, abs=1e-10)
        assert window.width == pytest.approx(2.0, abs=1e-10)

    def test_soft_spring_turning_points(self, duffing_soft: LienardSystem) -> None:
        """Test x²/2 - x⁴/4 = 0.2 at x² = 1 - √0.2, symmetric for odd g."""
        window = duffing_soft.turning_points(0.2)
        expected = np.sqrt(1.0 - np.sqrt(0.2))

        assert window.x2 == pytest.approx(expected, abs=1e-9)
        assert window.x1 == pytest.approx(-expected, abs=1e-9)

    @pytest.mark.parametrize(
        ("f", "potential"),
        [
            ("x", lambda x: 0.5 * np.expm1(x**2)),
            ("0.5*x", lambda x: np.expm1(0.5 * x**2)),
        ],
    )
    def test_growing_mass_on_default_domain(
        self, f: str, potential: Callable[[float], float]
    ) -> None:
        """Test μ = exp(2F) growing to e^100 still gives V and E_star relative to their size."""
        system = build_system(f, "x")
        scan = system.ceiling_scan()

        assert system.energy_ceiling() == pytest.approx(potential(10.0), rel=1e-8)
        assert (scan.left_limit, scan.right_limit) == (-10.0, 10.0)
        assert not scan.left_critical
        assert not scan.right_critical
        assert float(system.potential(5.8)) == pytest.approx(potential(5.8), rel=1e-9)

    def test_growing_mass_turning_points(self) -> None:
        """Test f = g = x turns where (e^{x²} - 1)/2 = E."""
        system = build_system("x", "x")

        window = system.turning_points(10.0)

        assert window.x2 == pytest.approx(np.sqrt(np.log(21.0)), abs=1e-9)
        assert window.x1 == pytest.approx(-np.sqrt(np.log(21.0)), abs=1e-9)

    def test_overflowing_mass_stops_scan(self) -> None:
        """Test f = x^3, whose μ = exp(x⁴/2) overflows past |x| ≈ 6.13, ends the scan there."""
        system = build_system("x^3", "x")
        scan = system.ceiling_scan()

        assert 6.0 < scan.right_limit < 6.14
        assert -6.14 < scan.left_limit < -6.0
        assert not scan.left_critical
        assert not scan.right_critical
        assert np.isfinite(scan.energy)
        assert scan.energy > 1e300
        window = system.turning_points(1.0)
        assert float(system.potential(window.x2)) == pytest.approx(1.0, rel=1e-9)

    def test_asymmetric_turning_points(self) -> None:
        """Test g = x + x^2 has a shorter excursion on the stiff side."""
        system = build_system("0", "x + x^2", (-0.9, 3.0))

        window = system.turning_points(0.05)

        assert window.x2 < -window.x1
        assert float(system.potential(window.x1)) == pytest.approx(0.05, abs=1e-12)
        assert float(system.potential(window.x2)) == pytest.approx(0.05, abs=1e-12)

    @pytest.mark.parametrize("energy", [0.0, -0.1, 0.25, 1.0])
    def test_energy_out_of_range(self, duffing_soft: LienardSystem, energy: float) -> None:
        """Test energies outside (0, E_star)."""
        with pytest.raises(EnergyOutOfRange) as info:
            duffing_soft.turning_points(energy)

        assert info.value.details["energy"] == energy


# =============================================================================
# Origin expansions
# =============================================================================


class TestOriginSeries:
    """Tests for the series of V/x², h and u at 0."""

    def test_harmonic_series(self, harmonic: LienardSystem) -> None:
        """Test V/x² = 1/2, h = x/√2 and u(0) = 1/(2g'(0)) = 1/2."""
        series = harmonic.origin_series()

        assert float(series.potential_ratio.value) == pytest.approx(0.5, rel=1e-12)
        assert float(series.h.derivative(1)) == pytest.approx(np.sqrt(0.5), rel=1e-12)
        assert float(series.u.value) == pytest.approx(0.5, rel=1e-12)

    def test_stiffer_spring_scales_u(self) -> None:
        """Test u(0) = 1/(2g'(0)) with g'(0) = 4."""
        system = build_system("0", "4*x + x^3")

        assert float(system.origin_series().u.value) == pytest.approx(0.125, rel=1e-10)

    def test_branch_function_near_and_far(self, harmonic: LienardSystem) -> None:
        """Test h = x/√2 from the series near 0 and from jets elsewhere."""
        xs = np.array([-0.3, -5e-5, 0.0, 5e-5, 0.5])

        h, dh, d2h = harmonic.branch_function(xs)

        np.testing.assert_allclose(h, xs / np.sqrt(2.0), rtol=0, atol=1e-12)
        np.testing.assert_allclose(dh, np.full(5, 1.0 / np.sqrt(2.0)), rtol=1e-9)
        np.testing.assert_allclose(d2h, np.zeros(5), atol=1e-8)

    def test_branch_function_squares_to_potential(
        self, km: Callable[[float], LienardSystem]
    ) -> None:
        """Test h² = V with sign(h) = sign(x)."""
        system = km(0.9)
        xs = np.array([-1.5, -0.2, 0.4, 2.0])

        h, _, _ = system.branch_function(xs)

        np.testing.assert_allclose(h**2, system.potential(xs), rtol=1e-12)
        np.testing.assert_array_equal(np.sign(h), np.sign(xs))

    def test_scalar_shape(self, harmonic: LienardSystem) -> None:
        """Test a scalar x gives scalar outputs."""
        h, dh, d2h = harmonic.branch_function(0.25)

        assert np.shape(h) == np.shape(dh) == np.shape(d2h) == ()
