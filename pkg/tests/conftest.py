import pytest

from app.domain.value_objects import BoundaryMode
from app.infrastructure.container import reset_container
from app.services.space import build_circle, build_gasket, build_interval
from app.services.spectral import eigendecompose


@pytest.fixture(scope="session")
def circle():
    """Cycle graph with 64 nodes."""
    return build_circle(64)


@pytest.fixture(scope="session")
def circle_spec(circle):
    return eigendecompose(circle)


@pytest.fixture(scope="session")
def fine_circle():
    """Cycle graph with 256 nodes, fine enough for continuum comparisons."""
    return build_circle(256)


@pytest.fixture(scope="session")
def fine_circle_spec(fine_circle):
    return eigendecompose(fine_circle)


@pytest.fixture(scope="session")
def killed_interval():
    """Interval with absorbing endpoints."""
    return build_interval(33, BoundaryMode.ABSORBING)


@pytest.fixture(scope="session")
def killed_interval_spec(killed_interval):
    return eigendecompose(killed_interval)


@pytest.fixture(scope="session")
def gasket():
    """Level-3 Sierpinski gasket graph (42 nodes)."""
    return build_gasket(3)


@pytest.fixture(scope="session")
def gasket_spec(gasket):
    return eigendecompose(gasket)


@pytest.fixture(autouse=True)
def fresh_container():
    """Drop the global container around every test."""
    reset_container()
    yield
    reset_container()


@pytest.fixture
def scenario_payload():
    """Minimal valid scenario document."""
    return {
        "space": {"kind": "interval", "resolution": 33, "boundary_mode": "absorbing"},
        "deltas": [0.25],
        "ps": [1.0],
        "suites": ["capacity"],
        "output_dir": "out",
    }
