import numpy as np
import pytest
from scipy import integrate

from app.services.grid import SpaceTimeGrid, VectorField3
from app.services.potentials import (SQRT_2_PI, SQRT_8_PI, PotentialQuery, QuadratureError, TimeQuadrature,
                                     band_mass, boundary_surrogate, c_theta, check_uniform_bound, gamma3_ensemble,
                                     interval_mass_quadrature, level_target, marginal_cdf, marginal_density,
                                     noncentral_norm_mean, noncentral_norm_mean_closed, potential_table,
                                     renormalized_target, revuz_targets, u3_ball_quadrature, u3_band_oracle,
                                     u3_directional_derivative, u3_potential, zero_field)
from app.services.samplers import RngStream, sample_brownian_bridge_3d

GRID = SpaceTimeGrid(31, 1.0, 1.0)


def test_c_theta():
    assert c_theta(0.5) == pytest.approx(2 / np.sqrt(np.pi))
    assert c_theta(0.0) == pytest.approx(SQRT_8_PI)


def test_densidade_marginal_integra_um():
    total, _ = integrate.quad(lambda a: marginal_density(0.3, a), 0, np.inf)
    assert total == pytest.approx(1.0, abs=1e-9)
    assert marginal_cdf(0.3, 10.0) == pytest.approx(1.0)
    assert band_mass(0.3, 0.0, 0.2) == pytest.approx(integrate.quad(lambda a: marginal_density(0.3, a), 0, 0.2)[0])
    with pytest.raises(ValueError):
        marginal_density(0.3, -1.0)


def test_alvos_de_revuz():
    tg = revuz_targets(0.5, (0.25, 0.75))
    assert tg.eta_density_mass == pytest.approx(1 / (2 * np.sqrt(2 * np.pi / 64)))
    assert tg.l_mass == pytest.approx(4 * tg.eta_density_mass)
    assert tg.interval_mass == pytest.approx(0.92132, abs=1e-5)
    assert tg.interval_mass == pytest.approx(interval_mass_quadrature(0.25, 0.75), abs=1e-9)


def test_razao_quatro_para_um_entre_l_e_eta():
    for theta in (0.1, 0.5, 0.8):
        tg = revuz_targets(theta)
        assert tg.l_mass / tg.eta_density_mass == pytest.approx(4.0)


def test_intervalo_tocando_a_fronteira():
    with pytest.raises(ValueError):
        revuz_targets(0.5, (0.0, 0.5))


def test_substituto_de_fronteira_converge():
    values = [boundary_surrogate(e) for e in (0.1, 0.01, 0.001)]
    gaps = np.abs(np.array(values) - SQRT_2_PI)
    assert np.all(np.diff(gaps) < 0)
    assert gaps[-1] < 0.02 * SQRT_2_PI
    with pytest.raises(ValueError):
        boundary_surrogate(0.6)


def test_alvos_de_banda():
    eps = 0.1
    assert renormalized_target(0.5, eps) == pytest.approx(3 * band_mass(0.5, 0, eps) / eps ** 3)
    assert level_target(0.5, 0.2, 0.05, T=2.0) == pytest.approx(2.0 * band_mass(0.5, 0.2, 0.25) / (0.05 * 0.04))


@pytest.mark.parametrize('mu', [0.0, 0.3, 2.0, 5.0])
def test_media_da_norma_nao_central(mu):
    assert noncentral_norm_mean(np.array([mu]))[0] == pytest.approx(
        float(noncentral_norm_mean_closed(np.array([mu]))), abs=1e-8)


def test_quadratura_invalida():
    with pytest.raises(QuadratureError):
        TimeQuadrature.graded(cutoff=-1.0)


def test_u3_invariante_por_rotacao():
    xbar = sample_brownian_bridge_3d(GRID, RngStream(1))
    a = np.array([0.1, -0.2, 0.05])
    rotation, _ = np.linalg.qr(np.random.default_rng(3).normal(size=(3, 3)))
    base = u3_potential(PotentialQuery(0.4, a, xbar))
    rotated = u3_potential(PotentialQuery(0.4, rotation @ a, xbar.rotate(rotation)))
    assert rotated == pytest.approx(base, rel=1e-10)


def test_u3_contra_bola_pequena():
    q = PotentialQuery(0.5, np.array([0.3, 0.0, 0.0]), zero_field(GRID))
    assert u3_ball_quadrature(q, 0.01) == pytest.approx(u3_potential(q), rel=0.02)


def test_derivada_direcional_contra_diferencas_finitas():
    xbar = sample_brownian_bridge_3d(GRID, RngStream(4))
    hbar = sample_brownian_bridge_3d(GRID, RngStream(5))
    a = np.array([0.2, 0.1, -0.1])
    step = 1e-5
    exact = u3_directional_derivative(PotentialQuery(0.3, a, xbar), hbar)
    plus = u3_potential(PotentialQuery(0.3, a, VectorField3(GRID, xbar.values + step * hbar.values)))
    minus = u3_potential(PotentialQuery(0.3, a, VectorField3(GRID, xbar.values - step * hbar.values)))
    assert (plus - minus) / (2 * step) == pytest.approx(exact, rel=1e-4)


def test_consulta_invalida():
    with pytest.raises(ValueError):
        PotentialQuery(1.0, np.zeros(3), zero_field(GRID))


def test_cota_uniforme():
    xbars = [zero_field(GRID), sample_brownian_bridge_3d(GRID, RngStream(2))]
    report = check_uniform_bound((0.05, 0.5, 0.95), [np.zeros(3), np.array([0.2, 0.0, 0.0])], xbars)
    assert report.holds
    assert report.c0 > 0


def test_media_de_gamma3():
    values = gamma3_ensemble(0.5, 200, RngStream(6), N=63)
    se = values.std(ddof=1) / np.sqrt(values.size)
    assert values.mean() == pytest.approx(c_theta(0.5), abs=4 * se + 0.02 * c_theta(0.5))


def test_tabela_de_potenciais():
    frame = potential_table([0.5], [0.1, 0.2])
    assert len(frame) == 2
    assert {'theta', 'a', 'u3', 'gamma3', 'rho', 'eta_density_mass', 'l_mass', 'c_theta'} <= set(frame.columns)
    assert np.all(frame['u3'] > 0)


def test_oraculo_monte_carlo_da_bola():
    q = PotentialQuery(0.5, [0.3, 0.0, 0.0], zero_field(GRID))
    alvo = u3_ball_quadrature(q, 0.15)
    est, se = u3_band_oracle(q, 0.15, RngStream(11), n_samples=50_000)
    assert se > 0
    assert abs(est - alvo) <= 4 * se
    again = u3_band_oracle(q, 0.15, RngStream(11), n_samples=50_000)
    assert again == (est, se)
    with pytest.raises(ValueError):
        u3_band_oracle(q, 0.15, RngStream(11), n_samples=1)
