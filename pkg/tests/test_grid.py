import numpy as np
import pytest

from app.services.grid import ScalarField, SpaceTimeGrid, VectorField3, second_difference


def test_grid_geometria():
    grid = SpaceTimeGrid(N=3, dt=0.1, T=1.0)
    assert grid.h == pytest.approx(0.25)
    np.testing.assert_allclose(grid.theta, [0.25, 0.5, 0.75])
    assert grid.n_steps == 10
    assert grid.times[-1] == pytest.approx(1.0)


@pytest.mark.parametrize('kwargs', [
    {'N': 0, 'dt': 0.1, 'T': 1.0},
    {'N': 3, 'dt': 0.0, 'T': 1.0},
    {'N': 3, 'dt': 0.5, 'T': 0.1},
])
def test_grid_invalida(kwargs):
    with pytest.raises(ValueError):
        SpaceTimeGrid(**kwargs)


def test_site_index():
    grid = SpaceTimeGrid(N=31, dt=1e-3, T=1.0)
    assert grid.site_index(0.5) == 15
    with pytest.raises(ValueError):
        grid.site_index(0.51)
    with pytest.raises(ValueError):
        grid.site_index(1.0)


def test_refine_preserva_razao():
    grid = SpaceTimeGrid(N=15, dt=1e-3, T=0.1)
    fine = grid.refine()
    assert fine.N == 31
    assert fine.dt / fine.h ** 2 == pytest.approx(grid.dt / grid.h ** 2)


def test_campo_recusa_shape_errado():
    grid = SpaceTimeGrid(N=5, dt=0.1, T=1.0)
    with pytest.raises(ValueError):
        ScalarField(grid, np.zeros(4))
    with pytest.raises(ValueError):
        VectorField3(grid, np.zeros((5, 2)))


def test_modo_de_seno_tem_um_coeficiente():
    grid = SpaceTimeGrid(N=31, dt=1e-3, T=1.0)
    field = ScalarField(grid, np.sqrt(2) * np.sin(2 * np.pi * grid.theta))
    coefs = field.sine_coefficients()
    assert coefs[1] == pytest.approx(1.0)
    assert np.max(np.abs(np.delete(coefs, 1))) < 1e-12


def test_interpolante_passa_pelos_nos():
    grid = SpaceTimeGrid(N=15, dt=1e-3, T=1.0)
    values = np.random.default_rng(0).random(grid.N)
    field = ScalarField(grid, values)
    np.testing.assert_allclose(field.evaluate_at(grid.theta), values, atol=1e-12)


def test_norma_e_rotacao():
    grid = SpaceTimeGrid(N=7, dt=1e-3, T=1.0)
    field = VectorField3(grid, np.random.default_rng(1).normal(size=(7, 3)))
    rotation, _ = np.linalg.qr(np.random.default_rng(2).normal(size=(3, 3)))
    np.testing.assert_allclose(field.rotate(rotation).norm().values, field.norm().values, rtol=1e-12)


def test_second_difference_autovetor():
    grid = SpaceTimeGrid(N=31, dt=1e-3, T=1.0)
    v = np.sin(np.pi * grid.theta)
    eig = -(2 - 2 * np.cos(np.pi * grid.h)) / grid.h ** 2
    np.testing.assert_allclose(second_difference(v, grid.h), eig * v, rtol=1e-10, atol=1e-12)
