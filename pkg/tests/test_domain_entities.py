"""Tests for Domain Entities."""
import numpy as np
import pytest

from app.domain.entities import (
    CheckStatus,
    CriticalExponentReport,
    EnergyCurve,
    InequalityReport,
    KernelMatrix,
    SeminormReport,
    SlopeFit,
)
from app.domain.entities.reports import json_safe
from app.domain.exceptions import InvariantViolationError


def _fit(points: int = 5) -> SlopeFit:
    x = tuple(float(v) for v in range(points))
    return SlopeFit(log_x=x, log_y=x, slope=1.0, intercept=0.0, r_squared=1.0, slope_stderr=0.0,
                    window=(1.0, float(np.e ** (points - 1))))


class TestMetricMeasureGraph:
    """Tests for MetricMeasureGraph entity."""

    def test_circle_passes_validation(self, circle):
        """Test that the circle builder satisfies every structural invariant."""
        circle.validate()
        assert circle.total_mass == pytest.approx(1.0)
        assert circle.diameter == pytest.approx(0.5)

    def test_killed_interval_boundary(self, killed_interval):
        """Test boundary bookkeeping on the absorbing interval."""
        killed_interval.validate()

        assert killed_interval.is_killed
        assert killed_interval.boundary == (0, 32)
        assert killed_interval.interior.size == 31
        assert killed_interval.killed(np.ones(33))[[0, 32]].tolist() == [0.0, 0.0]

    def test_lp_norm(self, circle):
        """Test L^p(mu) and sup norms of a constant."""
        f = np.full(circle.node_count, 2.0)

        assert circle.lp_norm(f, 1.0) == pytest.approx(2.0)
        assert circle.lp_norm(f, 3.0) == pytest.approx(2.0)
        assert circle.lp_norm(f, np.inf) == 2.0

    def test_quadratic_form_vanishes_on_constants(self, circle):
        """Test that constants have zero energy on a conservative space."""
        assert circle.quadratic_form(np.ones(circle.node_count)) == pytest.approx(0.0, abs=1e-9)

    def test_arrays_are_read_only(self, circle):
        """Test that node data cannot be mutated in place."""
        with pytest.raises(ValueError):
            circle.measure[0] = 1.0

    def test_names(self, circle, killed_interval, gasket):
        """Test the display names of built spaces."""
        assert circle.name == "circle(n=64)"
        assert killed_interval.name == "interval-absorbing(n=33)"
        assert gasket.name == "gasket(m=3)"


class TestKernelMatrix:
    """Tests for KernelMatrix entity."""

    def test_from_raw_clips_round_off(self):
        """Test that tiny negative entries are zeroed."""
        raw = np.array([[1.0, -1e-13], [-1e-13, 1.0]])
        kernel = KernelMatrix.from_raw(1.0, 1.0, raw, np.array([0.5, 0.5]), stochastic=False)
        assert kernel.entries.min() == 0.0

    def test_from_raw_rejects_negative_entries(self):
        """Test that genuinely negative kernels violate the invariant."""
        raw = np.array([[1.0, -1e-3], [-1e-3, 1.0]])
        with pytest.raises(InvariantViolationError):
            KernelMatrix.from_raw(1.0, 1.0, raw, np.array([0.5, 0.5]), stochastic=False)

    def test_check_mass_detects_leak(self):
        """Test that a stochastic kernel must integrate to one."""
        kernel = KernelMatrix.from_raw(1.0, 1.0, np.eye(2), np.array([0.5, 0.5]), stochastic=True)
        with pytest.raises(InvariantViolationError):
            kernel.check_mass()


class TestEnergyCurve:
    """Tests for EnergyCurve entity."""

    def test_descending_grid_rejected(self):
        """Test that the grid must ascend."""
        with pytest.raises(InvariantViolationError):
            EnergyCurve(p=1.0, delta=0.5, grid=np.array([2.0, 1.0]), energies=np.ones(2), function_id="f")

    def test_scaled_curve(self):
        """Test t^-alpha E^(1/p) and the CSV rows."""
        curve = EnergyCurve(p=2.0, delta=0.5, grid=np.array([1.0, 4.0]), energies=np.array([4.0, 16.0]),
                            function_id="f")

        assert curve.scaled(0.5).tolist() == pytest.approx([2.0, 2.0])
        assert curve.rows(0.5)[1] == pytest.approx((4.0, 16.0, 2.0))
        assert curve.is_constant_function is False


class TestReports:
    """Tests for report entities."""

    def test_slope_fit_needs_five_points(self):
        """Test the minimum point count of a fit."""
        with pytest.raises(InvariantViolationError):
            _fit(points=4)

    def test_inequality_report_status(self):
        """Test pass, fail and inconclusive statuses."""
        passed = InequalityReport("x", 1.0, 1.0, 1.0, 10.0, True, 0.0)
        failed = InequalityReport("x", 1.0, 1.0, 1.0, 10.0, False, 0.0)
        unknown = InequalityReport("x", 1.0, 1.0, 1.0, 10.0, False, 0.0, inconclusive=True)

        assert passed.status == CheckStatus.PASS
        assert failed.status == CheckStatus.FAIL
        assert unknown.status == CheckStatus.INCONCLUSIVE
        assert passed.to_dict()["status"] == "pass"

    def test_critical_exponent_estimate_bounded(self):
        """Test that estimates outside (0, 1] are rejected."""
        with pytest.raises(InvariantViolationError):
            CriticalExponentReport(p=1.0, delta=0.5, estimate=1.2, prediction=1.0, bracket=None, beta_p=None,
                                   fits={}, witness=None, tolerance=0.05, status=CheckStatus.FAIL)

    def test_seminorm_report_ordering(self):
        """Test that the limsup cannot exceed the sup."""
        with pytest.raises(InvariantViolationError):
            SeminormReport("f", 1.0, 0.1, 2.0, 1.0, 1.0, 1.0, 1.0, False, (0.1, 1.0))

    def test_json_safe_converts_numpy_and_infinities(self):
        """Test numpy scalars become Python values and infinities become None."""
        payload = json_safe({"a": np.float64(np.inf), "b": np.arange(2), "c": np.bool_(True),
                             "d": CheckStatus.FAIL})
        assert payload == {"a": None, "b": [0, 1], "c": True, "d": "fail"}
