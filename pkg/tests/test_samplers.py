import numpy as np
import pytest

from app.services.estatisticas import ks_test, ks_two_sample
from app.services.grid import ScalarField, SpaceTimeGrid, VectorField3
from app.services.heat_kernels import KernelParams
from app.services.potentials import marginal_cdf
from app.services.reflected_spde import solve_reflected
from app.services.samplers import (RngStream, sample_bessel3_bridge, sample_brownian_bridge_3d,
                                   sample_white_noise_increment, stochastic_convolution_path, string_transition)


def test_mesma_semente_mesmos_numeros():
    grid = SpaceTimeGrid(N=15, dt=1e-3, T=1.0)
    a = sample_brownian_bridge_3d(grid, RngStream(3, 2)).values
    b = sample_brownian_bridge_3d(grid, RngStream(3, 2)).values
    c = sample_brownian_bridge_3d(grid, RngStream(3, 4)).values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_spawn_gera_fluxos_distintos():
    root = RngStream(11)
    assert not np.array_equal(root.spawn(0).generator().random(4), root.spawn(1).generator().random(4))
    assert root.spawn(0, 5).provenance() == {'seed': 11, 'stream_id': 0, 'subkeys': [0, 5]}


def test_semente_invalida():
    with pytest.raises(ValueError):
        RngStream(-1)


def test_covariancia_da_ponte():
    grid = SpaceTimeGrid(N=3, dt=1e-3, T=1.0)
    values = sample_brownian_bridge_3d(grid, RngStream(5), n_draws=20_000).values
    assert values.shape == (20_000, 3, 3)
    var = values[:, 1, :].var(axis=0)
    np.testing.assert_allclose(var, 0.25, rtol=0.05)
    cov = np.mean(values[:, 0, 0] * values[:, 2, 0])
    assert cov == pytest.approx(0.25 - 0.25 * 0.75, abs=0.01)


def test_media_da_ponte_de_bessel():
    grid = SpaceTimeGrid(N=3, dt=1e-3, T=1.0)
    values = sample_bessel3_bridge(grid, RngStream(9), n_draws=20_000).values
    assert np.all(values >= 0)
    assert values[:, 1].mean() == pytest.approx(np.sqrt(8 / np.pi) * 0.5, abs=0.02)


def test_ruido_branco_de_celula():
    grid = SpaceTimeGrid(N=7, dt=1e-3, T=1.0)
    noise = sample_white_noise_increment(grid, 0.01, RngStream(1), n_steps=5000)
    assert noise.values.shape == (5000, 7)
    assert noise.values.var() == pytest.approx(1 / (grid.h * 0.01), rel=0.05)
    vec = sample_white_noise_increment(grid, 0.01, RngStream(1), components=3)
    assert vec.values.shape == (7, 3)
    with pytest.raises(ValueError):
        sample_white_noise_increment(grid, 0.01, RngStream(1), components=2)


def test_transicao_da_corda():
    grid = SpaceTimeGrid(N=15, dt=1e-3, T=1.0)
    xbar = sample_brownian_bridge_3d(grid, RngStream(2))
    out = string_transition(xbar, 0.1, RngStream(3))
    assert out.values.shape == (15, 3)
    batch = string_transition(xbar, 0.1, RngStream(3), n_draws=4)
    assert batch.values.shape == (4, 15, 3)
    with pytest.raises(ValueError):
        string_transition(xbar, 0.0, RngStream(3))


@pytest.mark.parametrize('scheme', ['spectral', 'implicit'])
def test_convolucao_comeca_em_zero(scheme):
    grid = SpaceTimeGrid(N=15, dt=1e-3, T=0.02)
    path = stochastic_convolution_path(grid, grid.dt, grid.n_steps, RngStream(4), scheme=scheme,
                                       snapshot_every=5)
    assert len(path) == 5
    np.testing.assert_array_equal(path[0].values, 0.0)
    assert path.values.shape == (5, 15)


def test_convolucao_implicita_igual_a_pareada(small_grid, zero_start):
    rng = RngStream(21)
    traj = solve_reflected(zero_start, small_grid, rng, paired=True, store_noise=False)
    path = stochastic_convolution_path(small_grid, small_grid.dt, small_grid.n_steps, rng, scheme='implicit')
    np.testing.assert_allclose(path.values, traj.w, atol=1e-12)


def test_convolucao_esquema_invalido(small_grid):
    with pytest.raises(ValueError):
        stochastic_convolution_path(small_grid, small_grid.dt, 10, RngStream(0), scheme='euler')


def _variancia_espectral(theta, t, K):
    k = np.arange(1, K + 1)
    lam = k ** 2 * np.pi ** 2
    return np.sum(2 * np.sin(k * np.pi * theta) ** 2 * -np.expm1(-lam * t) / lam)


def test_transicao_da_corda_e_semigrupo():
    grid = SpaceTimeGrid(N=15, dt=1e-3, T=1.0)
    xbar = sample_brownian_bridge_3d(grid, RngStream(2))
    t = 0.1
    direto = string_transition(xbar, t, RngStream(3), n_draws=30_000).values
    meio = string_transition(xbar, t / 2, RngStream(4), n_draws=30_000)
    em_dois = string_transition(meio, t / 2, RngStream(5)).values
    np.testing.assert_allclose(em_dois.mean(axis=0), direto.mean(axis=0), atol=0.02)
    for i in (3, 7):
        alvo = _variancia_espectral(grid.theta[i], t, grid.N)
        assert direto[:, i, :].var(axis=0) == pytest.approx(np.full(3, alvo), rel=0.05)
        assert em_dois[:, i, :].var(axis=0) == pytest.approx(np.full(3, alvo), rel=0.05)


def test_mu3_invariante_pela_corda():
    grid = SpaceTimeGrid(N=63, dt=1e-3, T=1.0)
    centro = grid.site_index(0.5)
    xbar = sample_brownian_bridge_3d(grid, RngStream(6), n_draws=20_000)
    movida = string_transition(xbar, 0.1, RngStream(7))
    assert movida.values[:, centro, :].var(axis=0) == pytest.approx(np.full(3, 0.25), rel=0.05)
    fresca = sample_bessel3_bridge(grid, RngStream(8), n_draws=20_000).values[:, centro]
    assert ks_two_sample(movida.norm().values[:, centro], fresca) > 0.01


def test_norma_comuta_com_amostragem():
    grid = SpaceTimeGrid(N=3, dt=1e-3, T=1.0)
    c, s = np.cos(0.7), np.sin(0.7)
    rotacao = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    ponte = sample_brownian_bridge_3d(grid, RngStream(12), n_draws=100_000)
    np.testing.assert_allclose(ponte.rotate(rotacao).norm().values, ponte.norm().values, atol=1e-12)

    direta = sample_bessel3_bridge(grid, RngStream(13), n_draws=100_000).values[:, 1]
    girada = ponte.rotate(rotacao).norm().values[:, 1]
    assert ks_two_sample(direta, girada) > 0.01
    assert ks_test(direta, lambda a: marginal_cdf(0.5, a)) > 0.01


def test_variancia_estacionaria_da_convolucao():
    grid = SpaceTimeGrid(N=15, dt=0.02, T=1.0)
    path = stochastic_convolution_path(grid, grid.dt, grid.n_steps, RngStream(14), n_paths=20_000,
                                       snapshot_every=grid.n_steps)
    final = path.values[-1]
    for theta in (0.25, 0.5):
        alvo = _variancia_espectral(theta, grid.T, grid.N)
        assert alvo == pytest.approx(theta * (1 - theta), rel=0.05)
        assert final[:, grid.site_index(theta)].var() == pytest.approx(alvo, rel=0.04)


def test_truncamento_vem_dos_parametros():
    grid = SpaceTimeGrid(N=15, dt=1e-3, T=0.02)
    params = KernelParams(truncation_K=3)
    xbar = VectorField3(grid, np.zeros((grid.N, 3)))
    ruido = string_transition(xbar, 0.1, RngStream(15), params=params, n_draws=10)
    coefs = ruido.sine_coefficients()
    np.testing.assert_allclose(coefs[:, 3:, :], 0.0, atol=1e-12)
    assert np.all(np.abs(coefs[:, :3, :]).max(axis=(0, 2)) > 0)
    completo = string_transition(xbar, 0.1, RngStream(15), n_draws=10).sine_coefficients()
    assert np.abs(completo[:, 3:, :]).max() > 0

    path = stochastic_convolution_path(grid, grid.dt, grid.n_steps, RngStream(16), params=params)
    modos = ScalarField(grid, path.values[-1]).sine_coefficients()
    np.testing.assert_allclose(modos[3:], 0.0, atol=1e-12)
    assert np.abs(modos[:3]).max() > 0
