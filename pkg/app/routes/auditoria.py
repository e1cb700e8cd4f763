from flask import Blueprint, request, jsonify
from app.models import db, AuditoriaLog, ExecucaoExperimento
from datetime import datetime, timedelta
import logging

logger = logging.getLogger(__name__)

bp = Blueprint('auditoria', __name__, url_prefix='/api/auditoria')


def _data_param(nome):
    texto = request.args.get(nome)
    if not texto:
        return None
    return datetime.fromisoformat(texto)


@bp.route('', methods=['GET'])
def listar_logs():
    limit = request.args.get('limit', 100, type=int)
    offset = request.args.get('offset', 0, type=int)
    try:
        data_inicio = _data_param('data_inicio')
        data_fim = _data_param('data_fim')
    except ValueError:
        return jsonify({'erro': 'Data inválida, use o formato ISO (AAAA-MM-DD)'}), 400

    query = AuditoriaLog.query
    for campo in ('acao', 'origem', 'entidade_tipo'):
        valor = request.args.get(campo)
        if valor:
            query = query.filter(getattr(AuditoriaLog, campo) == valor)
    if data_inicio:
        query = query.filter(AuditoriaLog.data_acao >= data_inicio)
    if data_fim:
        query = query.filter(AuditoriaLog.data_acao <= data_fim)

    total = query.count()
    logs = query.order_by(AuditoriaLog.data_acao.desc()).limit(limit).offset(offset).all()

    return jsonify({
        'total': total,
        'limit': limit,
        'offset': offset,
        'logs': [log.to_dict() for log in logs]
    }), 200


@bp.route('/execucoes/<int:id>', methods=['GET'])
def trilha_execucao(id):
    """Logs de uma execução e as demais execuções com a mesma impressão digital."""
    execucao = ExecucaoExperimento.query.get(id)
    if not execucao:
        return jsonify({'erro': 'Execução não encontrada'}), 404

    logs = AuditoriaLog.query.filter_by(
        entidade_tipo='execucao_experimento',
        entidade_id=id
    ).order_by(AuditoriaLog.data_acao.desc()).all()

    mesmas = ExecucaoExperimento.query.filter(
        ExecucaoExperimento.impressao_digital == execucao.impressao_digital,
        ExecucaoExperimento.id != id
    ).order_by(ExecucaoExperimento.data_inicio.desc()).all()

    return jsonify({
        'execucao': execucao.to_dict(),
        'logs': [log.to_dict() for log in logs],
        'mesma_configuracao': [
            {'id': e.id, 'status': e.status, 'aprovado': e.aprovado,
             'data_inicio': e.data_inicio.isoformat() if e.data_inicio else None}
            for e in mesmas
        ]
    }), 200


@bp.route('/estatisticas', methods=['GET'])
def estatisticas():
    periodo_dias = request.args.get('dias', 30, type=int)
    if periodo_dias < 1:
        return jsonify({'erro': 'dias deve ser positivo'}), 400
    data_inicio = datetime.utcnow() - timedelta(days=periodo_dias)

    try:
        total_logs = AuditoriaLog.query.filter(AuditoriaLog.data_acao >= data_inicio).count()

        logs_por_acao = db.session.query(
            AuditoriaLog.acao,
            db.func.count(AuditoriaLog.id)
        ).filter(
            AuditoriaLog.data_acao >= data_inicio
        ).group_by(AuditoriaLog.acao).all()

        logs_por_origem = db.session.query(
            AuditoriaLog.origem,
            db.func.count(AuditoriaLog.id)
        ).filter(
            AuditoriaLog.data_acao >= data_inicio
        ).group_by(AuditoriaLog.origem).all()

        execucoes = db.session.query(
            ExecucaoExperimento.experimento,
            ExecucaoExperimento.status,
            db.func.count(ExecucaoExperimento.id)
        ).filter(
            ExecucaoExperimento.data_inicio >= data_inicio
        ).group_by(ExecucaoExperimento.experimento, ExecucaoExperimento.status).all()

        aprovadas = dict(db.session.query(
            ExecucaoExperimento.experimento,
            db.func.count(ExecucaoExperimento.id)
        ).filter(
            ExecucaoExperimento.data_inicio >= data_inicio,
            ExecucaoExperimento.aprovado.is_(True)
        ).group_by(ExecucaoExperimento.experimento).all())
    except Exception as e:
        logger.error(f'Erro ao calcular estatísticas de auditoria: {str(e)}')
        return jsonify({'erro': 'Erro ao calcular estatísticas'}), 500

    por_experimento = {}
    for experimento, status, total in execucoes:
        item = por_experimento.setdefault(experimento, {'experimento': experimento, 'aprovadas': 0})
        item[status] = total
    for experimento, total in aprovadas.items():
        por_experimento[experimento]['aprovadas'] = total

    return jsonify({
        'periodo_dias': periodo_dias,
        'total_logs': total_logs,
        'por_acao': [{'acao': a, 'total': c} for a, c in logs_por_acao],
        'por_origem': [{'origem': o, 'total': c} for o, c in logs_por_origem],
        'execucoes': sorted(por_experimento.values(), key=lambda i: i['experimento'])
    }), 200
