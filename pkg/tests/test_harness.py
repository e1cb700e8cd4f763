import json

import numpy as np
import pytest

from app.services.harness import (CSV_COLUMNS, EXPERIMENTS, FD_REL_TOL, FD_STEP, LEVELS, EstimatorResult,
                                  ExperimentConfig, _directional_derivative_error,
                                  collect_replicas, result_paths, results_frame, run_experiment, verify_all)

RAPIDO = {'N': 15, 'replicas': 8, 'draws': 200}


def test_todos_os_experimentos_registrados():
    esperados = {'renormalized-local-time', 'boundary-scaling', 'small-level', 'occupation-formula', 'eta-density',
                 'decomposition', 'zero-set', 'boundary-value', 'revuz-mass', 'bessel-marginal',
                 'skorohod-baseline', 'kernel-identity', 'potential-machinery', 'level-zero', 'structural'}
    assert esperados == set(EXPERIMENTS)
    for nivel in LEVELS.values():
        assert {nome for nome, _ in nivel} == esperados


def test_configuracao_rejeita_zero_replicas():
    with pytest.raises(ValueError, match='replicas'):
        ExperimentConfig(experiment='revuz-mass', replicas=0)


@pytest.mark.parametrize('kwargs', [
    {'experiment': 'nao-existe'},
    {'experiment': 'revuz-mass', 'n_batches': 4},
    {'experiment': 'revuz-mass', 'replicas': 10, 'n_batches': 12},
    {'experiment': 'revuz-mass', 'scheme': 'penalized'},
    {'experiment': 'revuz-mass', 'theta_list': (1.0,)},
    {'experiment': 'renormalized-local-time', 'eps_list': ()},
    {'experiment': 'revuz-mass', 'init': 'uniforme'},
])
def test_configuracao_invalida(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_for_experiment_aplica_niveis_e_sobrescritas():
    smoke = ExperimentConfig.for_experiment('revuz-mass')
    full = ExperimentConfig.for_experiment('revuz-mass', 'full')
    assert full.replicas > smoke.replicas
    custom = ExperimentConfig.for_experiment('revuz-mass', replicas=24, seed=None)
    assert custom.replicas == 24
    assert custom.seed == ExperimentConfig.seed
    with pytest.raises(ValueError):
        ExperimentConfig.for_experiment('revuz-mass', 'medium')


def test_from_dict_rejeita_campos_desconhecidos():
    with pytest.raises(ValueError, match='desconhecidos'):
        ExperimentConfig.from_dict({'experiment': 'revuz-mass', 'semente': 1})
    with pytest.raises(ValueError):
        ExperimentConfig.from_json('[1, 2]')
    cfg = ExperimentConfig.from_json(json.dumps({'experiment': 'zero-set', 'eps_list': [0.1, 0.2]}))
    assert cfg.eps_list == (0.1, 0.2)


def test_impressao_digital():
    base = ExperimentConfig(experiment='bessel-marginal', **RAPIDO)
    assert base.fingerprint() == ExperimentConfig(experiment='bessel-marginal', workers=4, output_dir='/tmp/x',
                                                  **RAPIDO).fingerprint()
    assert base.fingerprint() != ExperimentConfig(experiment='bessel-marginal', seed=1, **RAPIDO).fingerprint()


def test_resultado_com_proveniencia_invalida():
    with pytest.raises(ValueError):
        EstimatorResult('x', 'p', 1.0, 0.0, 8, 1.0, 'inventada', True, 'abc')


def test_identidades_de_kernel(tmp_path):
    cfg = ExperimentConfig.for_experiment('kernel-identity', output_dir=str(tmp_path))
    results = run_experiment(cfg)
    assert all(r.passed for r in results), [r.parameter for r in results if not r.passed]
    assert all(r.stderr == 0.0 and r.n_batches == 0 for r in results)
    csv_path, json_path = result_paths(cfg)
    assert csv_path.exists()
    summary = json.loads(json_path.read_text(encoding='utf-8'))
    assert summary['passed'] is True
    assert summary['fingerprint'] == cfg.fingerprint()


def test_saida_identica_byte_a_byte(tmp_path):
    cfg = ExperimentConfig(experiment='bessel-marginal', output_dir=str(tmp_path), **RAPIDO)
    run_experiment(cfg)
    csv_path, _ = result_paths(cfg)
    primeiro = csv_path.read_bytes()
    run_experiment(cfg)
    assert csv_path.read_bytes() == primeiro
    assert primeiro.decode('utf-8').splitlines()[0] == ','.join(CSV_COLUMNS)


def test_processos_nao_alteram_resultados():
    serial = ExperimentConfig(experiment='bessel-marginal', **RAPIDO)
    paralelo = ExperimentConfig(experiment='bessel-marginal', workers=2, **RAPIDO)
    a = collect_replicas(serial)
    b = collect_replicas(paralelo)
    for key in a:
        np.testing.assert_array_equal(a[key], b[key])


def test_substituto_de_fronteira_sem_simulacao(tmp_path):
    cfg = ExperimentConfig.for_experiment('boundary-scaling', output_dir=str(tmp_path))
    assert cfg.surrogate_only
    results = run_experiment(cfg)
    assert len(results) == len(cfg.eps_list)
    assert all(r.passed and r.provenance == 'derived-quadrature' for r in results)


def test_fronteira_simulada_inclui_lado_direito_e_simetria():
    cfg = ExperimentConfig(experiment='boundary-scaling', N=31, dt=1e-3, T=0.05, replicas=8,
                           eps_list=(0.1, 0.05), surrogate_only=False)
    results = {r.parameter: r for r in run_experiment(cfg, write=False)}
    for e in ('0.1', '0.05'):
        esquerda = results[f'eps={e}']
        direita = results[f'eps={e} right']
        simetria = results[f'left-right symmetry eps={e}']
        assert direita.target == esquerda.target
        assert np.isfinite(direita.estimate) and direita.estimate > 0
        assert simetria.target == 0.0 and simetria.provenance == 'trivial'
        assert simetria.estimate == pytest.approx(esquerda.estimate - direita.estimate, abs=1e-12)
    assert 'limit eps=0.05' in results


def test_bessel_invariancia_pela_corda():
    cfg = ExperimentConfig(experiment='bessel-marginal', **RAPIDO)
    results = {r.parameter: r for r in run_experiment(cfg, write=False)}
    invariancia = results['two-sample KS invariance t=1 theta=0.5']
    assert invariancia.provenance == 'trivial'
    assert 0.0 <= invariancia.estimate <= 1.0
    assert invariancia.passed


def test_resolucao_estrita():
    cfg = ExperimentConfig.for_experiment('renormalized-local-time', dt=0.01, strict_resolution=True)
    with pytest.raises(ValueError, match='grosso'):
        run_experiment(cfg, write=False)


def test_experimento_estocastico_rapido():
    cfg = ExperimentConfig(experiment='structural', N=7, dt=1e-3, T=0.02, replicas=8)
    results = {r.parameter: r for r in run_experiment(cfg, write=False)}
    assert results['complementarity residual'].passed
    assert results['weak form (discrete operator)'].passed
    assert results['closed formula residual'].passed
    assert results['zero-set fraction monotone'].passed


def test_results_frame_colunas():
    assert list(results_frame([]).columns) == CSV_COLUMNS


def test_verify_all_filtrado(tmp_path):
    report = verify_all('smoke', out_dir=str(tmp_path), experiments=['kernel-identity', 'boundary-scaling'])
    assert report.passed
    assert [c.experiment for c in report.criteria] == ['boundary-scaling', 'kernel-identity']
    assert (tmp_path / 'verify-smoke' / 'results.csv').exists()
    summary = json.loads((tmp_path / 'verify-smoke' / 'summary.json').read_text(encoding='utf-8'))
    assert summary['passed'] is True
    with pytest.raises(ValueError):
        verify_all('smoke', out_dir=str(tmp_path), experiments=['nao-existe'])


def test_derivada_direcional_confere_com_diferencas_finitas():
    assert FD_STEP == 1e-4
    assert _directional_derivative_error(0) < FD_REL_TOL
