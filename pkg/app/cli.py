"""Comandos `flask kernel-table`, `flask simulate`, `flask estimate` e `flask verify`."""

import logging
import sys
from pathlib import Path

import click
from flask import current_app

from app.services.harness import EXPERIMENTS, LEVEL_NAMES, ExperimentConfig, results_frame, verify_all
from app.services.heat_kernels import KernelParams, kernel_table
from app.services.potentials import potential_table
from app.services.reflected_spde import SCHEMES, LCPConvergenceError
from app.utils.auditoria import executar_registrado, registrar_auditoria
from app.utils.csv_saida import INICIAIS, PROCESSOS, caminho_registro, para_csv, simular

logger = logging.getLogger(__name__)


def _floats(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise click.BadParameter('use números separados por vírgula')


def _emitir(texto: str, destino) -> None:
    if destino:
        Path(destino).write_text(texto, encoding='utf-8')
        click.echo(f'[OK] {destino}')
    else:
        click.echo(texto, nl=False)


def register_commands(app):

    @app.cli.command('kernel-table')
    @click.option('--t', 't_list', callback=_floats, default='0.01,0.1,0.5', help='Tempos separados por vírgula.')
    @click.option('--theta', 'theta_list', callback=_floats, default='0.25,0.5,0.75')
    @click.option('--a', 'a_list', callback=_floats, default='0.05,0.1,0.2,0.5', help='Níveis para --potentials.')
    @click.option('--K', 'truncation_K', type=int, default=200, show_default=True)
    @click.option('--method', type=click.Choice(['auto', 'series', 'images']), default='auto')
    @click.option('--potentials', is_flag=True, help='Emite a tabela de potenciais em vez da de kernels.')
    @click.option('--out', type=click.Path(dir_okay=False), default=None)
    def kernel_table_command(t_list, theta_list, a_list, truncation_K, method, potentials, out):
        """Tabela CSV de kernels (ou de potenciais)."""
        try:
            if potentials:
                frame = potential_table(theta_list, a_list)
            else:
                frame = kernel_table(t_list, theta_list, KernelParams(truncation_K=truncation_K, method=method))
        except ValueError as e:
            raise click.UsageError(str(e))
        registrar_auditoria('tabela_kernel', 'potencial' if potentials else 'kernel', origem='cli')
        _emitir(para_csv(frame), out)

    @app.cli.command('simulate')
    @click.option('--process', 'processo', type=click.Choice(PROCESSOS), required=True)
    @click.option('--N', '--n', 'N', type=int, default=31, show_default=True)
    @click.option('--dt', type=float, default=1e-3, show_default=True)
    @click.option('--T', 'T', type=float, default=0.1, show_default=True)
    @click.option('--seed', type=int, default=0, show_default=True)
    @click.option('--draws', type=int, default=1, show_default=True)
    @click.option('--scheme', type=click.Choice(SCHEMES), default='lcp')
    @click.option('--delta', type=float, default=None)
    @click.option('--init', type=click.Choice(INICIAIS), default='bessel3', show_default=True,
                  help='nu é sinônimo de bessel3; file lê x0 de --x0.')
    @click.option('--x0', 'x0_path', type=click.Path(exists=True, dir_okay=False), default=None,
                  help='CSV com colunas theta,value para --init file.')
    @click.option('--snapshot-every', '--snapshots', 'snapshot_every', type=int, default=1)
    @click.option('--conv-scheme', type=click.Choice(['spectral', 'implicit']), default='spectral')
    @click.option('--out', type=click.Path(dir_okay=False), default=None)
    @click.option('--ledger-out', type=click.Path(dir_okay=False), default=None,
                  help='Registro t,theta,eta_density da solução refletida.')
    def simulate_command(out, ledger_out, **parametros):
        """Simula um processo e emite os instantâneos em CSV."""
        if parametros['init'] == 'file' and not parametros['x0_path']:
            raise click.UsageError('--init file exige --x0')
        try:
            simulacao = simular(**parametros)
        except ValueError as e:
            raise click.UsageError(str(e))
        except LCPConvergenceError as e:
            click.echo(f'[ERROR] {e}', err=True)
            sys.exit(1)
        registrar_auditoria('simular', 'simulacao', detalhes=parametros, origem='cli')
        _emitir(para_csv(simulacao.frame), out)
        if simulacao.ledger is not None:
            destino = (Path(ledger_out) if ledger_out
                       else caminho_registro(out, current_app.config['LAB_OUTPUT_DIR']))
            destino.parent.mkdir(parents=True, exist_ok=True)
            destino.write_text(para_csv(simulacao.ledger), encoding='utf-8')
            click.echo(f'[OK] {destino}', err=out is None)

    @app.cli.command('estimate')
    @click.option('--experiment', type=click.Choice(sorted(EXPERIMENTS)), default=None)
    @click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False), default=None,
                  help='Configuração completa em JSON.')
    @click.option('--level', type=click.Choice(LEVEL_NAMES), default='smoke')
    @click.option('--seed', type=int, default=None)
    @click.option('--replicas', type=int, default=None)
    @click.option('--workers', type=int, default=None)
    @click.option('--surrogate-only/--simulate', 'surrogate_only', default=None)
    @click.option('--strict-resolution/--lenient-resolution', 'strict_resolution', default=None)
    @click.option('--theta', 'theta_list', callback=_floats, default=None, help='Sítios θ separados por vírgula.')
    @click.option('--eps-list', callback=_floats, default=None, help='Larguras ε separadas por vírgula.')
    @click.option('--a-list', callback=_floats, default=None, help='Níveis a separados por vírgula.')
    @click.option('--out', type=click.Path(file_okay=False), default=None)
    def estimate_command(experiment, config_file, level, seed, replicas, workers, surrogate_only,
                         strict_resolution, theta_list, eps_list, a_list, out):
        """Executa um experimento; sai com código 1 se algum critério falhar."""
        try:
            if config_file:
                cfg = ExperimentConfig.from_json(Path(config_file).read_text(encoding='utf-8'))
            elif experiment:
                cfg = ExperimentConfig.for_experiment(
                    experiment, level, seed=seed, replicas=replicas, surrogate_only=surrogate_only,
                    strict_resolution=strict_resolution, theta_list=theta_list, eps_list=eps_list,
                    a_list=a_list, workers=workers or current_app.config['LAB_WORKERS'],
                    output_dir=out or current_app.config['LAB_OUTPUT_DIR'])
            else:
                raise click.UsageError('informe --experiment ou --config')
            execucao, results = executar_registrado(cfg, origem='cli')
        except ValueError as e:
            raise click.BadParameter(str(e))
        except LCPConvergenceError as e:
            click.echo(f'[ERROR] {e}', err=True)
            sys.exit(1)
        click.echo(results_frame(results).to_string(index=False))
        click.echo(f'[INFO] execução #{execucao.id} em {execucao.caminho_csv}')
        if not execucao.aprovado:
            click.echo('[ERROR] critério(s) fora da tolerância', err=True)
            sys.exit(1)
        click.echo('[OK] todos os critérios aprovados')

    @app.cli.command('verify')
    @click.option('--level', type=click.Choice(LEVEL_NAMES), default='smoke')
    @click.option('--seed', type=int, default=None)
    @click.option('--out', type=click.Path(file_okay=False), default=None)
    @click.option('--workers', type=int, default=None)
    @click.option('--experiment', 'experiments', multiple=True, type=click.Choice(sorted(EXPERIMENTS)))
    def verify_command(level, seed, out, workers, experiments):
        """Roda a bateria de aceitação e imprime a tabela de aprovação."""
        report = verify_all(level=level, seed=seed, out_dir=out or current_app.config['LAB_OUTPUT_DIR'],
                            workers=workers or current_app.config['LAB_WORKERS'],
                            experiments=experiments or None)
        registrar_auditoria('verificar', 'verificacao', detalhes={'level': level, 'aprovado': report.passed},
                            origem='cli')
        for criterio in report.criteria:
            marca = '[OK]' if criterio.passed else '[FALHA]'
            click.echo(f'{marca} {criterio.experiment}: {criterio.anchor}')
        click.echo(report.to_frame().to_string(index=False))
        if not report.passed:
            sys.exit(1)
