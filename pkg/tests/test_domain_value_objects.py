"""Tests for Domain Value Objects."""
import numpy as np
import pytest

from app.domain.exceptions import ConfigurationError, InvalidGridError, InvariantViolationError
from app.domain.value_objects import (
    BoundaryMode,
    DivergentMoment,
    GeometryParams,
    Provenance,
    ResolvedWindow,
    SpaceKind,
)


class TestGeometryParams:
    """Tests for GeometryParams value object."""

    def test_analytic_walk_dimension_below_two_rejected(self):
        """Test that an analytic d_W below 2 violates the invariant."""
        with pytest.raises(InvariantViolationError):
            GeometryParams(d_H=1.0, d_W=1.5)

    def test_estimated_walk_dimension_below_two_allowed(self):
        """Test that fitted walk dimensions are not held to d_W >= 2."""
        geometry = GeometryParams(d_H=1.0, d_W=1.5, d_W_provenance=Provenance.ESTIMATED)
        assert geometry.d_W == 1.5

    @pytest.mark.parametrize("kappa", [0.0, 2.0, 3.0, -1.0])
    def test_kappa_outside_range_rejected(self, kappa):
        """Test that kappa must lie in (0, d_W)."""
        with pytest.raises(InvariantViolationError):
            GeometryParams(d_H=1.0, d_W=2.0, kappa=kappa, kappa_provenance=Provenance.ANALYTIC)

    def test_unset_kappa_with_provenance_rejected(self):
        """Test that a missing kappa cannot claim a provenance."""
        with pytest.raises(InvariantViolationError):
            GeometryParams(d_H=1.0, d_W=2.0, kappa_provenance=Provenance.ESTIMATED)

    def test_with_kappa_returns_copy(self):
        """Test that with_kappa leaves the original untouched."""
        geometry = GeometryParams(d_H=1.0, d_W=2.0)
        updated = geometry.with_kappa(0.8)

        assert geometry.has_kappa is False
        assert updated.kappa == 0.8
        assert updated.kappa_provenance == Provenance.ESTIMATED

    def test_require_kappa_prefers_supplied_value(self):
        """Test that a supplied kappa wins over the stored one."""
        geometry = GeometryParams(d_H=1.0, d_W=2.0, kappa=1.0, kappa_provenance=Provenance.ANALYTIC)
        assert geometry.require_kappa(0.5) == 0.5
        assert geometry.require_kappa() == 1.0

    def test_require_kappa_raises_when_unknown(self):
        """Test that an unset kappa with no override is a configuration error."""
        with pytest.raises(ConfigurationError):
            GeometryParams(d_H=1.0, d_W=2.0).require_kappa()

    def test_unset_geometry_requires_dimensions(self):
        """Test that raw adjacency geometry refuses dimension queries."""
        with pytest.raises(ConfigurationError):
            GeometryParams.unset().require_dimensions()

    def test_critical_exponent_l1(self):
        """Test min{1, (1 - kappa/d_W)/delta} on the circle."""
        geometry = GeometryParams(d_H=1.0, d_W=2.0, kappa=1.0, kappa_provenance=Provenance.ANALYTIC)

        assert geometry.critical_exponent_l1(0.8) == pytest.approx(0.625)
        assert geometry.critical_exponent_l1(0.25) == 1.0

    def test_dict_round_trip(self):
        """Test that to_dict/from_dict preserve values and provenance."""
        geometry = GeometryParams(d_H=np.log(3) / np.log(2), d_W=np.log(5) / np.log(2)).with_kappa(0.7)
        restored = GeometryParams.from_dict(geometry.to_dict())

        assert restored == geometry
        assert geometry.to_dict()["provenance"]["kappa"] == "estimated"


class TestResolvedWindow:
    """Tests for ResolvedWindow value object."""

    def test_empty_window_rejected(self):
        """Test that lower >= upper is an invalid grid."""
        with pytest.raises(InvalidGridError):
            ResolvedWindow(1.0, 0.5)

    def test_restrict_keeps_inside_points(self):
        """Test that restrict sorts and filters a grid."""
        window = ResolvedWindow(0.1, 1.0)
        assert window.restrict([2.0, 0.5, 0.05, 0.1]).tolist() == [0.1, 0.5]

    def test_log_grid_spans_window(self):
        """Test that the log grid hits both edges."""
        window = ResolvedWindow(1e-3, 1e-1)
        grid = window.log_grid(5)

        assert grid[0] == pytest.approx(1e-3)
        assert grid[-1] == pytest.approx(1e-1)
        assert all(window.contains(t) for t in grid)
        assert window.decades == pytest.approx(2.0)

    def test_collapsing_multipliers_rejected(self):
        """Test that multipliers that invert the window are refused."""
        with pytest.raises(InvalidGridError):
            ResolvedWindow(0.1, 1.0).log_grid(8, lower_multiplier=20.0)


class TestSpaceKind:
    """Tests for space kind enumerations."""

    def test_level_parametrized_kinds(self):
        """Test that only fractal builders take a level."""
        assert SpaceKind.GASKET.uses_level
        assert SpaceKind.VICSEK.uses_level
        assert not SpaceKind.CIRCLE.uses_level
        assert BoundaryMode("absorbing") == BoundaryMode.ABSORBING


class TestDivergentMoment:
    """Tests for DivergentMoment value object."""

    def test_divergent_moment_description(self):
        """Test the tagged description of an infinite moment."""
        moment = DivergentMoment(delta=0.5, t=1.0, alpha=0.7)

        assert moment.to_dict()["divergent"] is True
        assert "alpha=0.7 >= delta=0.5" in str(moment)
