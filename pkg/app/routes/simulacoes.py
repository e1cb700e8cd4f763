from flask import Blueprint, request, jsonify, Response
from app.services.reflected_spde import LCPConvergenceError
from app.utils.auditoria import registrar_auditoria
from app.utils.csv_saida import para_csv, simular as simular_processo
import logging

logger = logging.getLogger(__name__)

bp = Blueprint('simulacoes', __name__, url_prefix='/api/simulacoes')

CAMPOS = {
    'processo': str, 'N': int, 'dt': float, 'T': float, 'seed': int, 'draws': int,
    'scheme': str, 'delta': float, 'init': str, 'snapshot_every': int, 'conv_scheme': str,
}
SAIDAS = ('campo', 'registro')


@bp.route('', methods=['POST'])
def simular():
    """Simula um processo e devolve os instantâneos (ou o registro de η) em CSV"""
    try:
        data = request.get_json(silent=True)
        if not data:
            return jsonify({'erro': 'Dados não fornecidos'}), 400
        if not data.get('processo'):
            return jsonify({'erro': 'Processo é obrigatório'}), 400

        data = dict(data)
        saida = data.pop('saida', None) or 'campo'
        if saida not in SAIDAS:
            return jsonify({'erro': f'saida deve ser uma de: {", ".join(SAIDAS)}'}), 400
        desconhecidos = set(data) - set(CAMPOS)
        if desconhecidos:
            return jsonify({'erro': f'Campos desconhecidos: {", ".join(sorted(desconhecidos))}'}), 400
        if data.get('init') == 'file':
            return jsonify({'erro': 'init=file só está disponível pela linha de comando'}), 400

        try:
            parametros = {k: CAMPOS[k](v) for k, v in data.items() if v is not None}
        except (ValueError, TypeError):
            return jsonify({'erro': 'Parâmetros numéricos inválidos'}), 400
        parametros.setdefault('N', 31)
        parametros.setdefault('dt', 1e-3)
        parametros.setdefault('T', 0.1)
        parametros.setdefault('seed', 0)

        simulacao = simular_processo(**parametros)
        if saida == 'registro' and simulacao.ledger is None:
            return jsonify({'erro': 'registro de η só existe para processo reflected'}), 400
        registrar_auditoria('simular', 'simulacao', detalhes={**parametros, 'saida': saida})
        frame = simulacao.ledger if saida == 'registro' else simulacao.frame
        sufixo = '_ledger' if saida == 'registro' else ''
        return Response(para_csv(frame), mimetype='text/csv',
                        headers={'Content-Disposition':
                                 f'attachment; filename={parametros["processo"]}{sufixo}.csv'})
    except ValueError as e:
        return jsonify({'erro': str(e)}), 400
    except LCPConvergenceError as e:
        logger.error(f'Solver não convergiu: {str(e)}')
        return jsonify({'erro': str(e), 'passo': e.step}), 500
    except Exception as e:
        logger.error(f'Erro ao simular: {str(e)}')
        return jsonify({'erro': 'Erro ao simular processo'}), 500
