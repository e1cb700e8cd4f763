import numpy as np
import pytest

from app.services.local_times import (boundary_functional, boundary_gap, boundary_value_functional,
                                      check_decomposition, eta_density_check, occupation_band,
                                      occupation_formula_residual, renormalized_local_time, small_level_rescale,
                                      total_mass_profile, zero_set_stats)

VALORES = [0.05, 0.15, 0.25, 0.02, 0.45, 0.35, 0.08, 0.55, 0.65, 0.12]


def test_ocupacao_de_banda(make_trajectory):
    traj = make_trajectory(VALORES)
    occ = occupation_band(traj, 0.5, 0.0, 0.1)
    assert occ.n_in_band == 3
    assert occ.value == pytest.approx(3 * 0.1 / 0.1)
    shifted = occupation_band(traj, 0.5, 0.1, 0.2)
    assert shifted.n_in_band == 3


def test_banda_semiaberta(make_trajectory):
    traj = make_trajectory([0.1, 0.2, 0.3])
    assert occupation_band(traj, 0.5, 0.1, 0.1).n_in_band == 1
    assert occupation_band(traj, 0.5, 0.0, 0.1).n_in_band == 0


def test_aditividade_em_janelas(make_trajectory):
    traj = make_trajectory(VALORES)
    total = occupation_band(traj, 0.5, 0.0, 0.3).value
    first = occupation_band(traj, 0.5, 0.0, 0.3, window=(0.0, 0.5)).value
    second = occupation_band(traj, 0.5, 0.0, 0.3, window=(0.5, 1.0)).value
    assert first + second == pytest.approx(total)


def test_tempo_local_renormalizado(make_trajectory):
    traj = make_trajectory(VALORES)
    est = renormalized_local_time(traj, 0.5, 0.1)
    assert est.occupation == pytest.approx(0.3)
    assert est.value == pytest.approx(3 * 0.3 / 0.1 ** 3)
    assert not est.resolution_ok


def test_niveis_pequenos(make_trajectory):
    traj = make_trajectory(VALORES)
    assert small_level_rescale(traj, 0.5, 0.0, 0.1) == pytest.approx(3.0)
    assert small_level_rescale(traj, 0.5, 0.1, 0.1) == pytest.approx(2 * 0.1 / 0.1 / 0.01)
    with pytest.raises(ValueError):
        small_level_rescale(traj, 0.5, -0.1, 0.1)


def test_razao_eta_densidade(make_trajectory):
    traj = make_trajectory(VALORES, eta_final=0.5)
    check = eta_density_check(traj, 0.5, 0.1)
    assert check.ratio == pytest.approx(0.5 / (0.25 * 900.0))
    assert not check.inconclusive
    vazio = eta_density_check(make_trajectory([0.5, 0.6]), 0.5, 0.1)
    assert vazio.inconclusive


def test_formula_de_ocupacao_exata_para_F_em_degraus(make_trajectory):
    traj = make_trajectory(VALORES)
    edges = 0.1 * np.arange(8)
    F = lambda x: (np.asarray(x) >= 0.2 - 1e-12).astype(float) + 2 * (np.asarray(x) >= 0.5 - 1e-12)
    assert occupation_formula_residual(traj, 0.5, F, edges) < 1e-12


def test_formula_de_ocupacao_erros(make_trajectory):
    traj = make_trajectory(VALORES)
    with pytest.raises(ValueError):
        occupation_formula_residual(traj, 0.5, np.abs, [0.0, 0.3])
    with pytest.raises(ValueError):
        occupation_formula_residual(traj, 0.5, np.abs, [0.5, 0.1])


def test_funcional_de_fronteira_resolucao(reflected_path):
    h = reflected_path.grid.h
    with pytest.raises(ValueError):
        boundary_functional(reflected_path, h)
    with pytest.raises(ValueError):
        boundary_functional(reflected_path, 0.6)
    assert boundary_functional(reflected_path, 2 * h) >= 0


def test_funcional_de_valor(make_trajectory):
    traj = make_trajectory([0.2, 0.4])
    value = boundary_value_functional(traj, 0.5)
    assert value == pytest.approx(0.6 * 0.1 / (2 * np.sqrt(0.5)))
    with pytest.raises(ValueError):
        boundary_value_functional(traj, 0.5, side='top')


def test_gap_de_fronteira(reflected_path):
    eps = 4 * reflected_path.grid.h
    gap = boundary_gap(reflected_path, eps)
    assert gap == pytest.approx(boundary_value_functional(reflected_path, eps)
                                - boundary_functional(reflected_path, eps))


def test_perfil_de_massa_cresce(reflected_path):
    profile = total_mass_profile(reflected_path)
    masses = [profile[d] for d in sorted(profile, reverse=True)]
    assert np.all(np.diff(masses) >= 0)


def test_decomposicao(reflected_path):
    stats = check_decomposition(reflected_path)
    assert stats.max_u_on_support <= 1e-10
    assert stats.steps_with_mass <= reflected_path.steps_with_reflection
    assert 0.0 <= stats.single_cluster_fraction <= 1.0


def test_conjunto_de_zeros(reflected_path):
    fractions = [zero_set_stats(reflected_path, tol).fraction_time_touching for tol in (1e-3, 1e-2, 1e-1)]
    assert np.all(np.diff(fractions) >= 0)
    stats = zero_set_stats(reflected_path, 0.1, window=0.01)
    assert 0.0 <= stats.window_coverage <= 1.0
    with pytest.raises(ValueError):
        zero_set_stats(reflected_path, 0.0)
