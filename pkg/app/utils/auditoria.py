from flask import has_request_context, request
from app.models import AuditoriaLog, ExecucaoExperimento, ResultadoEstimador, db
from datetime import datetime
from typing import Optional, Dict, Any, List
import logging

logger = logging.getLogger(__name__)


def registrar_auditoria(
    acao: str,
    entidade_tipo: str,
    entidade_id: Optional[int] = None,
    detalhes: Optional[Dict[str, Any]] = None,
    origem: str = 'api'
):
    try:
        ip_address = request.remote_addr if has_request_context() else None
        user_agent = request.headers.get('User-Agent') if has_request_context() else None

        log = AuditoriaLog(
            acao=acao,
            origem=origem,
            entidade_tipo=entidade_tipo,
            entidade_id=entidade_id,
            detalhes=detalhes,
            ip_address=ip_address,
            user_agent=user_agent
        )

        db.session.add(log)
        db.session.commit()

        return log
    except Exception as e:
        db.session.rollback()
        logger.error(f'Erro ao registrar auditoria: {str(e)}')
        return None


def iniciar_execucao(cfg, origem: str = 'api') -> ExecucaoExperimento:
    execucao = ExecucaoExperimento(
        experimento=cfg.experiment,
        impressao_digital=cfg.fingerprint(),
        configuracao=cfg.to_dict(),
        status='executando',
        origem=origem
    )
    db.session.add(execucao)
    db.session.commit()
    return execucao


def concluir_execucao(execucao: ExecucaoExperimento, results: List, caminho_csv: Optional[str] = None):
    """Grava os resultados do harness e fecha a execução."""
    try:
        for result in results:
            db.session.add(ResultadoEstimador.from_result(execucao.id, result))
        execucao.status = 'concluido'
        execucao.aprovado = all(r.passed for r in results)
        execucao.caminho_csv = caminho_csv
        execucao.data_fim = datetime.utcnow()
        execucao.duracao_segundos = (execucao.data_fim - execucao.data_inicio).total_seconds()
        db.session.commit()
    except Exception:
        db.session.rollback()
        raise
    registrar_auditoria('executar_experimento', 'execucao_experimento', execucao.id,
                        {'experimento': execucao.experimento, 'aprovado': execucao.aprovado},
                        origem=execucao.origem)
    return execucao


def falhar_execucao(execucao: ExecucaoExperimento, mensagem: str):
    try:
        execucao.status = 'erro'
        execucao.aprovado = False
        execucao.mensagem_erro = mensagem
        execucao.data_fim = datetime.utcnow()
        db.session.commit()
    except Exception as e:
        db.session.rollback()
        logger.error(f'Erro ao marcar execução {execucao.id} como falha: {str(e)}')
    return execucao


def executar_registrado(cfg, origem: str = 'api'):
    """Roda o harness para cfg com registro da execução; erros marcam a execução e propagam."""
    from app.services.harness import result_paths, run_experiment

    execucao = iniciar_execucao(cfg, origem)
    try:
        results = run_experiment(cfg)
    except Exception as e:
        falhar_execucao(execucao, str(e))
        raise
    caminho_csv, _ = result_paths(cfg)
    return concluir_execucao(execucao, results, str(caminho_csv)), results
