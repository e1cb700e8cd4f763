from flask import Blueprint, current_app, request, jsonify, send_file, Response
from app.models import ExecucaoExperimento, db
from app.services.harness import CSV_COLUMNS, EXPERIMENTS, ExperimentConfig, LEVEL_NAMES, verify_all
from app.services.reflected_spde import LCPConvergenceError
from app.utils.auditoria import executar_registrado, registrar_auditoria
from app.utils.csv_saida import para_csv
from app.utils.excel_template import criar_planilha_resultados
import logging
import pandas as pd

logger = logging.getLogger(__name__)

bp = Blueprint('experimentos', __name__, url_prefix='/api/experimentos')


def _aplicar_padroes(data: dict) -> dict:
    data = dict(data)
    data.setdefault('workers', current_app.config['LAB_WORKERS'])
    data.setdefault('output_dir', current_app.config['LAB_OUTPUT_DIR'])
    return data


@bp.route('', methods=['GET'])
def listar_execucoes():
    try:
        experimento = request.args.get('experimento')
        status = request.args.get('status')
        limit = request.args.get('limit', 50, type=int)
        offset = request.args.get('offset', 0, type=int)

        query = ExecucaoExperimento.query
        if experimento:
            query = query.filter_by(experimento=experimento)
        if status:
            query = query.filter_by(status=status)

        total = query.count()
        execucoes = query.order_by(ExecucaoExperimento.data_inicio.desc()).limit(limit).offset(offset).all()

        return jsonify({
            'total': total,
            'limit': limit,
            'offset': offset,
            'experimentos_disponiveis': sorted(EXPERIMENTS),
            'execucoes': [e.to_dict() for e in execucoes]
        }), 200
    except Exception as e:
        logger.error(f'Erro ao listar execuções: {str(e)}')
        return jsonify({'erro': 'Erro ao listar execuções'}), 500


@bp.route('', methods=['POST'])
def executar_experimento():
    """Executa um experimento de forma síncrona e persiste os resultados"""
    try:
        data = request.get_json(silent=True)
        if not data:
            return jsonify({'erro': 'Dados não fornecidos'}), 400
        experimento = data.get('experiment')
        if not experimento:
            return jsonify({'erro': 'Experimento é obrigatório'}), 400

        nivel = data.pop('level', 'smoke')
        overrides = {k: v for k, v in data.items() if k != 'experiment'}
        cfg = ExperimentConfig.for_experiment(experimento, nivel, **_aplicar_padroes(overrides))

        teto = current_app.config['LAB_MAX_REPLICAS_API']
        if cfg.replicas > teto:
            return jsonify({'erro': f'Máximo de {teto} réplicas via API'}), 400

        execucao, _ = executar_registrado(cfg, origem='api')
        return jsonify(execucao.to_dict(incluir_resultados=True)), 201
    except (ValueError, TypeError) as e:
        db.session.rollback()
        return jsonify({'erro': str(e)}), 400
    except LCPConvergenceError as e:
        logger.error(f'Solver não convergiu no experimento: {str(e)}')
        return jsonify({'erro': str(e), 'passo': e.step}), 500
    except Exception as e:
        db.session.rollback()
        logger.error(f'Erro ao executar experimento: {str(e)}')
        return jsonify({'erro': 'Erro ao executar experimento'}), 500


@bp.route('/<int:id>', methods=['GET'])
def obter_execucao(id):
    execucao = ExecucaoExperimento.query.get(id)
    if not execucao:
        return jsonify({'erro': 'Execução não encontrada'}), 404
    return jsonify(execucao.to_dict(incluir_resultados=True)), 200


@bp.route('/<int:id>/resultados.csv', methods=['GET'])
def baixar_csv(id):
    execucao = ExecucaoExperimento.query.get(id)
    if not execucao:
        return jsonify({'erro': 'Execução não encontrada'}), 404
    linhas = [{
        'experiment': execucao.experimento,
        'param': r.parametro,
        'estimate': r.estimativa,
        'stderr': r.erro_padrao,
        'n': r.n_lotes,
        'target': r.alvo,
        'provenance': r.proveniencia,
        'pass': r.aprovado,
    } for r in execucao.resultados]
    frame = pd.DataFrame(linhas, columns=CSV_COLUMNS)
    return Response(para_csv(frame), mimetype='text/csv',
                    headers={'Content-Disposition': f'attachment; filename=resultados_{id}.csv'})


@bp.route('/<int:id>/planilha.xlsx', methods=['GET'])
def baixar_planilha(id):
    try:
        execucao = ExecucaoExperimento.query.get(id)
        if not execucao:
            return jsonify({'erro': 'Execução não encontrada'}), 404
        output = criar_planilha_resultados(execucao)
        return send_file(
            output,
            mimetype='application/vnd.openxmlformats-officedocument.spreadsheetml.sheet',
            as_attachment=True,
            download_name=f'experimento_{execucao.experimento}_{id}.xlsx'
        )
    except Exception as e:
        logger.error(f'Erro ao gerar planilha: {str(e)}')
        return jsonify({'erro': 'Erro ao gerar planilha'}), 500


@bp.route('/verificar', methods=['POST'])
def verificar():
    """Roda a bateria de aceitação (nível smoke por padrão)"""
    try:
        data = request.get_json(silent=True) or {}
        nivel = data.get('level', 'smoke')
        if nivel not in LEVEL_NAMES:
            return jsonify({'erro': f'Nível inválido: {nivel}'}), 400
        report = verify_all(
            level=nivel,
            seed=data.get('seed'),
            out_dir=current_app.config['LAB_OUTPUT_DIR'],
            workers=current_app.config['LAB_WORKERS'],
            experiments=data.get('experiments')
        )
        registrar_auditoria('verificar', 'verificacao',
                            detalhes={'level': nivel, 'aprovado': report.passed,
                                      'experimentos': [c.experiment for c in report.criteria]})
        status = 200 if report.passed else 422
        return jsonify(report.to_dict()), status
    except ValueError as e:
        return jsonify({'erro': str(e)}), 400
    except Exception as e:
        logger.error(f'Erro na verificação: {str(e)}')
        return jsonify({'erro': 'Erro na verificação'}), 500
