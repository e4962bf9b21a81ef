"""Tests for the space builders and metric queries."""
import numpy as np
import pytest

from app.domain.exceptions import InvalidGridError, InvalidResolutionError, ParameterDomainError
from app.domain.value_objects import BoundaryMode, Provenance, SpaceKind
from app.services.space import (
    ahlfors_fit,
    ball,
    ball_masses,
    build_gasket,
    build_interval,
    build_space,
    build_vicsek,
    gasket_node_count,
    load_adjacency,
    radius_grid,
    resolved_radii,
    vicsek_node_count,
)


class TestBuilders:
    """Tests for the space builders."""

    @pytest.mark.parametrize("level,count", [(1, 6), (2, 15), (3, 42), (4, 123)])
    def test_gasket_node_counts(self, level, count):
        """Test (3^(m+1) + 3)/2 nodes at level m."""
        assert gasket_node_count(level) == count
        assert build_gasket(level).node_count == count

    def test_gasket_geometry(self, gasket):
        """Test the analytic gasket exponents and unit mass."""
        gasket.validate()

        assert gasket.geometry.d_H == pytest.approx(np.log(3) / np.log(2))
        assert gasket.geometry.d_W == pytest.approx(np.log(5) / np.log(2))
        assert gasket.geometry.has_kappa is False
        assert gasket.total_mass == pytest.approx(1.0)

    def test_vicsek_level_one(self):
        """Test the first Vicsek graph: 16 nodes and unit mass."""
        graph = build_vicsek(1)
        graph.validate()

        assert vicsek_node_count(1) == 16
        assert graph.node_count == 16
        assert graph.total_mass == pytest.approx(1.0)

    def test_interval_trapezoid_masses(self):
        """Test half masses at the interval endpoints."""
        graph = build_interval(11)

        assert graph.measure[0] == pytest.approx(0.05)
        assert graph.measure[5] == pytest.approx(0.1)
        assert graph.total_mass == pytest.approx(1.0)
        assert graph.is_killed is False

    def test_circle_geometry_is_analytic(self, circle):
        """Test that the circle carries kappa = 1 in closed form."""
        assert circle.geometry.kappa == 1.0
        assert circle.geometry.kappa_provenance == Provenance.ANALYTIC

    @pytest.mark.parametrize("kind,resolution", [("circle", 4), ("gasket", 0), ("gasket", 9), ("vicsek", 7)])
    def test_invalid_resolution(self, kind, resolution):
        """Test that out-of-range resolutions are refused."""
        with pytest.raises(InvalidResolutionError):
            build_space(kind, resolution)

    def test_interval_without_boundary_mode(self):
        """Test that the interval needs a boundary behaviour."""
        with pytest.raises(ParameterDomainError):
            build_interval(16, BoundaryMode.NONE)

    def test_build_space_defaults_interval_to_reflecting(self):
        """Test the dispatcher's interval default."""
        graph = build_space(SpaceKind.INTERVAL, 16)
        assert graph.boundary_mode == BoundaryMode.REFLECTING


class TestAdjacencyLoader:
    """Tests for the raw edge-list loader."""

    def test_load_weighted_path(self, tmp_path):
        """Test metric, masses and unset geometry of a loaded graph."""
        path = tmp_path / "path.txt"
        path.write_text("# path on four nodes\n0 1 1.0\n1 2 2.0\n2 3 1.0\n")

        graph = load_adjacency(path)

        assert graph.node_count == 4
        assert graph.metric[0, 3] == pytest.approx(2.5)
        assert graph.measure.tolist() == [0.25] * 4
        assert graph.geometry.d_H is None
        assert graph.name == "adjacency(path.txt)"

    def test_disconnected_edge_list_rejected(self, tmp_path):
        """Test that every node must be reachable."""
        path = tmp_path / "split.txt"
        path.write_text("0 1 1\n2 3 1\n")

        with pytest.raises(InvalidResolutionError):
            load_adjacency(path)

    def test_malformed_line_rejected(self, tmp_path):
        """Test that lines must read 'i j conductance'."""
        path = tmp_path / "bad.txt"
        path.write_text("0 1\n")

        with pytest.raises(ParameterDomainError):
            load_adjacency(path)


class TestBallsAndRadii:
    """Tests for balls, radius grids and the volume fit."""

    def test_ball_is_open(self, circle):
        """Test that d(center, y) = r is excluded."""
        h = circle.spacing
        assert ball(circle, 0, 2 * h + 1e-12).tolist() == [0, 1, 2, 62, 63]
        assert ball(circle, 0, 2 * h - 1e-12).tolist() == [0, 1, 63]

    def test_ball_masses_on_circle(self, circle):
        """Test mu(B(x, (k + 1/2) h)) = (2k + 1) h everywhere."""
        h = circle.spacing
        masses = ball_masses(circle, 3.5 * h)
        assert masses == pytest.approx(np.full(circle.node_count, 7 * h))

    def test_radius_grid_inside_window(self, circle):
        """Test that snapped radii stay inside the resolved window."""
        window = resolved_radii(circle)
        radii = radius_grid(circle)

        assert radii.size >= 3
        assert np.all(np.diff(radii) > 0)
        assert all(window.contains(r) for r in radii)

    def test_radius_grid_too_coarse(self):
        """Test that a window with too few half-lattice radii is refused."""
        with pytest.raises(InvalidGridError):
            radius_grid(build_interval(17))

    def test_ahlfors_fit_on_circle(self, fine_circle):
        """Test that the circle has volume growth exponent 1."""
        fit = ahlfors_fit(fine_circle)

        assert fit.d_H == pytest.approx(1.0, abs=1e-9)
        assert fit.c1 == pytest.approx(2.0)
        assert fit.c2 == pytest.approx(2.0)

    def test_ahlfors_fit_on_gasket(self):
        """Test that the gasket fit lands near log 3 / log 2."""
        fit = ahlfors_fit(build_gasket(5))
        assert fit.d_H == pytest.approx(np.log(3) / np.log(2), abs=0.1)

    @pytest.mark.slow
    def test_ahlfors_fit_on_vicsek(self):
        """Test that the level-4 Vicsek fit lands near log 5 / log 3."""
        fit = ahlfors_fit(build_vicsek(4))

        assert fit.d_H == pytest.approx(np.log(5) / np.log(3), abs=0.1)
        assert np.isfinite(fit.c2 / fit.c1)
