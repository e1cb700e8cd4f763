import numpy as np
import pytest

from app import create_app
from app.models import db
from app.services.grid import ScalarField, SpaceTimeGrid
from app.services.reflected_spde import ReflectionLedger, Trajectory, solve_reflected
from app.services.samplers import RngStream, sample_bessel3_bridge


@pytest.fixture
def app(tmp_path):
    app = create_app({
        'SQLALCHEMY_DATABASE_URI': 'sqlite:///:memory:',
        'TESTING': True,
        'LAB_OUTPUT_DIR': str(tmp_path / 'resultados'),
        'LAB_WORKERS': 1,
        'LAB_MAX_REPLICAS_API': 64,
    })
    yield app
    with app.app_context():
        db.session.remove()
        db.drop_all()


@pytest.fixture
def client(app):
    return app.test_client()


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def small_grid():
    return SpaceTimeGrid(N=15, dt=1e-3, T=0.05)


@pytest.fixture
def reflected_path(small_grid):
    """Trajetória LCP pareada, com ruído armazenado, partindo de ν."""
    rng = RngStream(7)
    x0 = sample_bessel3_bridge(small_grid, rng.spawn(0))
    return solve_reflected(x0, small_grid, rng.spawn(1), paired=True, store_noise=True)


def synthetic_trajectory(site_values, eta_final=0.0, N=3, dt=0.1):
    """Trajetória montada à mão: u do sítio central recebe site_values (n ≥ 1)."""
    site_values = np.asarray(site_values, float)
    n_steps = site_values.size
    grid = SpaceTimeGrid(N=N, dt=dt, T=n_steps * dt)
    times = np.arange(n_steps + 1) * dt
    u = np.ones((n_steps + 1, N))
    u[1:, N // 2] = site_values
    eta = np.zeros((n_steps + 1, N))
    eta[-1, N // 2] = eta_final
    return Trajectory(grid=grid, times=times, u=u, ledger=ReflectionLedger(grid, times, eta),
                      x0=np.ones(N), scheme='lcp', snapshot_every=1, provenance={})


@pytest.fixture
def make_trajectory():
    return synthetic_trajectory


@pytest.fixture
def zero_start(small_grid):
    return ScalarField(small_grid, np.zeros(small_grid.N))
