import json

import numpy as np
import pandas as pd

from app.models import AuditoriaLog, ExecucaoExperimento


def test_kernel_table(runner):
    result = runner.invoke(args=['kernel-table', '--t', '0.1', '--theta', '0.5'])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0] == 'kernel,t,theta,theta_p,value,err_bound'


def test_kernel_table_potenciais_em_arquivo(runner, tmp_path):
    destino = tmp_path / 'potenciais.csv'
    result = runner.invoke(args=['kernel-table', '--potentials', '--theta', '0.5', '--a', '0.1,0.2',
                                 '--out', str(destino)])
    assert result.exit_code == 0, result.output
    assert len(destino.read_text(encoding='utf-8').splitlines()) == 3


def test_kernel_table_parametro_invalido(runner):
    result = runner.invoke(args=['kernel-table', '--theta', '2.0'])
    assert result.exit_code != 0


def test_simulate(runner):
    result = runner.invoke(args=['simulate', '--process', 'bessel3', '--N', '7', '--draws', '3'])
    assert result.exit_code == 0, result.output
    assert result.output.splitlines()[0] == 't,theta,value,draw'
    assert len(result.output.splitlines()) == 1 + 3 * 7


def test_simulate_cabecalhos(runner):
    escalar = runner.invoke(args=['simulate', '--process', 'convolution', '--n', '7', '--dt', '0.01', '--T', '0.05'])
    assert escalar.exit_code == 0, escalar.output
    assert escalar.output.splitlines()[0] == 't,theta,value'
    assert len(escalar.output.splitlines()) == 1 + 6 * 7

    for processo in ('bridge3', 'string'):
        vetorial = runner.invoke(args=['simulate', '--process', processo, '--N', '7', '--T', '0.01'])
        assert vetorial.exit_code == 0, vetorial.output
        linhas = vetorial.output.splitlines()
        assert linhas[0] == 't,theta,v1,v2,v3'
        assert len(linhas) == 1 + 7


def test_simulate_refletida_com_registro(runner, tmp_path):
    destino = tmp_path / 'u.csv'
    result = runner.invoke(args=['simulate', '--process', 'reflected', '--n', '7', '--dt', '0.01', '--T', '0.05',
                                 '--init', 'bessel3', '--snapshots', '1', '--out', str(destino)])
    assert result.exit_code == 0, result.output
    campo = destino.read_text(encoding='utf-8').splitlines()
    assert campo[0] == 't,theta,value'
    assert len(campo) == 1 + 6 * 7

    registro = (tmp_path / 'u_ledger.csv').read_text(encoding='utf-8').splitlines()
    assert registro[0] == 't,theta,eta_density'
    assert len(registro) == 1 + 6 * 7
    # η começa nula e só cresce
    eta = pd.read_csv(tmp_path / 'u_ledger.csv').pivot(index='t', columns='theta', values='eta_density')
    assert (eta.iloc[0] == 0).all()
    assert (eta.diff().iloc[1:] >= -1e-12).all().all()


def test_simulate_x0_de_arquivo(runner, tmp_path):
    theta = np.arange(1, 8) / 8
    x0 = tmp_path / 'x0.csv'
    pd.DataFrame({'theta': theta, 'value': 0.3 * np.sin(np.pi * theta)}).to_csv(x0, index=False)
    destino = tmp_path / 'u.csv'
    registro = tmp_path / 'eta.csv'
    result = runner.invoke(args=['simulate', '--process', 'reflected', '--N', '7', '--dt', '0.01', '--T', '0.02',
                                 '--init', 'file', '--x0', str(x0), '--out', str(destino),
                                 '--ledger-out', str(registro)])
    assert result.exit_code == 0, result.output
    u = pd.read_csv(destino)
    inicial = u[u['t'] == 0]['value'].to_numpy()
    assert np.allclose(inicial, 0.3 * np.sin(np.pi * theta))
    assert registro.exists()


def test_simulate_x0_invalido(runner, tmp_path):
    theta = np.arange(1, 8) / 8
    negativo = tmp_path / 'negativo.csv'
    pd.DataFrame({'theta': theta, 'value': -np.ones(7)}).to_csv(negativo, index=False)
    curto = tmp_path / 'curto.csv'
    pd.DataFrame({'value': np.ones(3)}).to_csv(curto, index=False)

    base = ['simulate', '--process', 'reflected', '--N', '7', '--dt', '0.01', '--T', '0.02', '--init', 'file']
    assert runner.invoke(args=base).exit_code != 0
    for caminho in (negativo, curto):
        result = runner.invoke(args=base + ['--x0', str(caminho), '--out', str(tmp_path / 'u.csv')])
        assert result.exit_code != 0


def test_estimate(runner, app):
    result = runner.invoke(args=['estimate', '--experiment', 'kernel-identity'])
    assert result.exit_code == 0, result.output
    assert '[OK]' in result.output
    with app.app_context():
        assert AuditoriaLog.query.filter_by(origem='cli').count() == 1


def test_estimate_listas_da_linha_de_comando(runner, app, tmp_path):
    result = runner.invoke(args=['estimate', '--experiment', 'boundary-scaling', '--eps-list', '0.02,0.001',
                                 '--theta', '0.25,0.5', '--a-list', '0.1', '--out', str(tmp_path)])
    assert 'surrogate eps=0.02' in result.output
    assert 'surrogate eps=0.001' in result.output
    with app.app_context():
        cfg = ExecucaoExperimento.query.one().configuracao
    assert cfg['eps_list'] == [0.02, 0.001]
    assert cfg['theta_list'] == [0.25, 0.5]
    assert cfg['a_list'] == [0.1]


def test_estimate_lista_invalida(runner, tmp_path):
    result = runner.invoke(args=['estimate', '--experiment', 'boundary-scaling', '--eps-list', '0.1,abc',
                                 '--out', str(tmp_path)])
    assert result.exit_code != 0
    result = runner.invoke(args=['estimate', '--experiment', 'boundary-scaling', '--theta', '1.5',
                                 '--out', str(tmp_path)])
    assert result.exit_code != 0


def test_estimate_configuracao_json(runner, tmp_path):
    config = tmp_path / 'cfg.json'
    config.write_text(json.dumps({'experiment': 'boundary-scaling', 'surrogate_only': True,
                                  'output_dir': str(tmp_path)}), encoding='utf-8')
    result = runner.invoke(args=['estimate', '--config', str(config)])
    assert result.exit_code == 0, result.output


def test_estimate_sem_experimento(runner):
    result = runner.invoke(args=['estimate'])
    assert result.exit_code != 0


def test_estimate_resolucao_estrita(runner, tmp_path):
    config = tmp_path / 'cfg.json'
    config.write_text(json.dumps({'experiment': 'renormalized-local-time', 'dt': 0.01, 'eps_list': [0.2, 0.1],
                                  'strict_resolution': True, 'output_dir': str(tmp_path)}), encoding='utf-8')
    result = runner.invoke(args=['estimate', '--config', str(config)])
    assert result.exit_code != 0
    assert 'grosso' in result.output


def test_verify(runner, tmp_path):
    result = runner.invoke(args=['verify', '--experiment', 'kernel-identity', '--out', str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert '[OK] kernel-identity' in result.output
    assert (tmp_path / 'verify-smoke' / 'summary.json').exists()
