"""Tests for variational capacity and the capacitary inequalities."""
import numpy as np
import pytest

from app.domain.entities import CheckStatus
from app.domain.exceptions import (
    ConfigurationError,
    DegenerateCapacityError,
    InvalidGridError,
    WrongRegimeError,
)
from app.services.capacity import (
    STRONG_TYPE_CONSTANT,
    cap1,
    capacitary_strong_type_check,
    capacity,
    capacity_properties_check,
    capacity_sobolev_check,
    fractional_form_matrix,
)
from app.services.families import FunctionKind, build_function, canonical_family, dyadic_sets
from app.services.spectral import fractional_laplacian

DELTA = 0.25


def _green_capacity(q: np.ndarray, positions: list[int]) -> float:
    """1^T [(Q^-1)_KK]^-1 1, the constrained minimum through the Green matrix."""
    green = np.linalg.inv(q)[np.ix_(positions, positions)]
    ones = np.ones(len(positions))
    return float(ones @ np.linalg.solve(green, ones))


class TestFormMatrix:
    """Tests for the quadratic form of E^(delta)."""

    def test_matches_fractional_laplacian(self, circle, circle_spec):
        """Test Q = M (-L)^delta on a conservative space."""
        q = fractional_form_matrix(circle_spec, circle, 0.5)
        expected = np.diag(circle.measure) @ fractional_laplacian(circle_spec, 0.5).matrix()
        assert np.max(np.abs(q - expected)) / np.abs(expected).max() < 1e-8

    def test_interior_block_on_killed_space(self, killed_interval, killed_interval_spec):
        """Test that the form lives on interior nodes."""
        q = fractional_form_matrix(killed_interval_spec, killed_interval, DELTA)

        assert q.shape == (31, 31)
        assert np.allclose(q, q.T)
        assert np.all(np.linalg.eigvalsh(q) > 0)


class TestCapacity:
    """Tests for Cap_0 and Cap_1."""

    def test_conservative_space_is_degenerate(self, circle, circle_spec):
        """Test that Cap_0 needs an absorbing boundary."""
        with pytest.raises(DegenerateCapacityError):
            capacity(circle_spec, circle, 0.5, [3])

    def test_empty_set(self, killed_interval, killed_interval_spec):
        """Test Cap_0 of the empty set."""
        assert capacity(killed_interval_spec, killed_interval, DELTA, []) == 0.0

    def test_boundary_set_rejected(self, killed_interval, killed_interval_spec):
        """Test that K may not meet the absorbing nodes."""
        with pytest.raises(ConfigurationError):
            capacity(killed_interval_spec, killed_interval, DELTA, [0, 1])

    @pytest.mark.parametrize("nodes", [[16], [10, 11, 12], [4, 20, 27]])
    def test_matches_green_matrix(self, killed_interval, killed_interval_spec, nodes):
        """Test the complement solve against the Green matrix formula."""
        q = fractional_form_matrix(killed_interval_spec, killed_interval, DELTA)
        positions = [int(np.flatnonzero(killed_interval.interior == node)[0]) for node in nodes]

        value = capacity(killed_interval_spec, killed_interval, DELTA, nodes)

        assert value == pytest.approx(_green_capacity(q, positions), rel=1e-8)

    def test_matches_projected_gradient(self, killed_interval, killed_interval_spec):
        """Test the direct solve against projected gradient descent on [0, 1]."""
        q = fractional_form_matrix(killed_interval_spec, killed_interval, DELTA)
        pinned = np.zeros(q.shape[0], dtype=bool)
        pinned[[9, 10, 11]] = True
        step = 0.5 / np.linalg.eigvalsh(q).max()
        f = np.where(pinned, 1.0, 0.0)
        for _ in range(3000):
            f = np.clip(f - step * 2.0 * (q @ f), 0.0, 1.0)
            f[pinned] = 1.0

        value = capacity(killed_interval_spec, killed_interval, DELTA, [10, 11, 12])

        assert value == pytest.approx(float(f @ q @ f), rel=1e-6)

    def test_mask_and_indices_agree(self, killed_interval, killed_interval_spec):
        """Test that K may be a mask or a list of nodes."""
        mask = np.zeros(killed_interval.node_count, dtype=bool)
        mask[[8, 9]] = True

        assert capacity(killed_interval_spec, killed_interval, DELTA, mask) == pytest.approx(
            capacity(killed_interval_spec, killed_interval, DELTA, [8, 9])
        )

    def test_monotone_in_the_set(self, killed_interval, killed_interval_spec):
        """Test Cap_0(A) <= Cap_0(B) for A inside B."""
        small = capacity(killed_interval_spec, killed_interval, DELTA, [16])
        large = capacity(killed_interval_spec, killed_interval, DELTA, list(range(12, 21)))
        assert 0.0 < small < large

    def test_total_capacity_of_whole_circle(self, circle, circle_spec):
        """Test Cap_1(X) = mu(X) on a conservative space."""
        value = cap1(circle_spec, circle, 0.5, np.ones(circle.node_count, dtype=bool))
        assert value == pytest.approx(1.0, rel=1e-8)


class TestCapacityChecks:
    """Tests for the capacity property and capacitary inequality checks."""

    def test_properties_on_dyadic_sets(self, killed_interval, killed_interval_spec):
        """Test monotonicity and subadditivity over dyadic sets."""
        report = capacity_properties_check(
            killed_interval_spec, killed_interval, DELTA, dyadic_sets(killed_interval, 10)
        )

        assert report.status == CheckStatus.PASS
        assert report.values["monotonicity_violations"] == 0
        assert report.constant <= 1.0 + 1e-9

    def test_properties_need_two_sets(self, killed_interval, killed_interval_spec):
        """Test that a single set cannot be compared."""
        with pytest.raises(InvalidGridError):
            capacity_properties_check(
                killed_interval_spec, killed_interval, DELTA, dyadic_sets(killed_interval, 1)
            )

    def test_strong_type_bound(self, killed_interval, killed_interval_spec):
        """Test int 2t Cap_0({|f| > t}) dt <= 4 E(f, f) for a tent."""
        f = build_function(killed_interval, killed_interval_spec, FunctionKind.TENT)
        report = capacitary_strong_type_check(killed_interval_spec, killed_interval, DELTA, f)

        assert report.cap == STRONG_TYPE_CONSTANT
        assert 0.0 < report.constant <= STRONG_TYPE_CONSTANT
        assert report.status == CheckStatus.PASS

    def test_capacity_sobolev_in_transient_regime(self, killed_interval, killed_interval_spec):
        """Test finite constants for delta below d_H/d_W."""
        report = capacity_sobolev_check(
            killed_interval_spec,
            killed_interval,
            DELTA,
            dyadic_sets(killed_interval, 10),
            canonical_family(killed_interval, killed_interval_spec),
        )

        assert report.values["kappa_cap"] == pytest.approx(2.0)
        assert np.isfinite(report.values["theta"])
        assert report.values["witness"] in report.values["ratios"]

    def test_capacity_sobolev_recurrent_regime(self, killed_interval, killed_interval_spec):
        """Test the wrong regime for delta >= d_H/d_W."""
        with pytest.raises(WrongRegimeError):
            capacity_sobolev_check(
                killed_interval_spec,
                killed_interval,
                0.6,
                dyadic_sets(killed_interval, 10),
                canonical_family(killed_interval, killed_interval_spec),
            )
