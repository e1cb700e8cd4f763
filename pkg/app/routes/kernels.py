from flask import Blueprint, request, jsonify, Response
from app.services.heat_kernels import KernelParams, kernel_table
from app.services.potentials import potential_table
from app.utils.auditoria import registrar_auditoria
from app.utils.csv_saida import para_csv
import logging
import numpy as np

logger = logging.getLogger(__name__)

bp = Blueprint('kernels', __name__, url_prefix='/api/kernels')

T_PADRAO = '0.01,0.1,0.5'
THETA_PADRAO = '0.25,0.5,0.75'
A_PADRAO = '0.05,0.1,0.2,0.5'


def lista_floats(nome: str, padrao: str):
    texto = request.args.get(nome, padrao)
    try:
        valores = [float(v) for v in texto.split(',') if v.strip()]
    except ValueError:
        raise ValueError(f'Parâmetro {nome} deve ser uma lista de números separados por vírgula')
    if not valores:
        raise ValueError(f'Parâmetro {nome} vazio')
    return valores


def responder_tabela(frame, nome_arquivo: str):
    if request.args.get('formato') == 'csv':
        return Response(para_csv(frame), mimetype='text/csv',
                        headers={'Content-Disposition': f'attachment; filename={nome_arquivo}'})
    registros = frame.replace({np.nan: None}).to_dict(orient='records')
    return jsonify({'total': len(registros), 'linhas': registros}), 200


@bp.route('/tabela', methods=['GET'])
def tabela_kernels():
    """Tabela de g, G, q e q^t nos pares (θ,θ′) para cada t"""
    try:
        t_list = lista_floats('t', T_PADRAO)
        theta_list = lista_floats('theta', THETA_PADRAO)
        params = KernelParams(
            truncation_K=request.args.get('K', 200, type=int),
            tail_tol=request.args.get('tail_tol', 1e-10, type=float),
            method=request.args.get('method', 'auto')
        )
        frame = kernel_table(t_list, theta_list, params)
        registrar_auditoria('tabela_kernel', 'kernel', detalhes={'t': t_list, 'theta': theta_list})
        return responder_tabela(frame, 'kernels.csv')
    except ValueError as e:
        return jsonify({'erro': str(e)}), 400
    except Exception as e:
        logger.error(f'Erro ao gerar tabela de kernels: {str(e)}')
        return jsonify({'erro': 'Erro ao gerar tabela de kernels'}), 500


@bp.route('/potenciais', methods=['GET'])
def tabela_potenciais():
    """Tabela de U₃, Γ₃, ρ_θ e alvos de Revuz"""
    try:
        theta_list = lista_floats('theta', THETA_PADRAO)
        a_list = lista_floats('a', A_PADRAO)
        frame = potential_table(theta_list, a_list)
        registrar_auditoria('tabela_kernel', 'potencial', detalhes={'theta': theta_list, 'a': a_list})
        return responder_tabela(frame, 'potenciais.csv')
    except ValueError as e:
        return jsonify({'erro': str(e)}), 400
    except Exception as e:
        logger.error(f'Erro ao gerar tabela de potenciais: {str(e)}')
        return jsonify({'erro': 'Erro ao gerar tabela de potenciais'}), 500
