from flask_sqlalchemy import SQLAlchemy
from datetime import datetime
from typing import Any

db = SQLAlchemy()


class ExecucaoExperimento(db.Model):  # type: ignore
    __tablename__ = 'execucoes_experimento'
    __table_args__ = (
        db.Index('idx_experimento_data', 'experimento', 'data_inicio'),
    )

    id = db.Column(db.Integer, primary_key=True)
    experimento = db.Column(db.String(50), nullable=False)
    impressao_digital = db.Column(db.String(64), nullable=False, index=True)
    configuracao = db.Column(db.JSON, nullable=False)
    status = db.Column(db.String(20), nullable=False, default='executando')
    aprovado = db.Column(db.Boolean)
    origem = db.Column(db.String(10), nullable=False, default='api')
    mensagem_erro = db.Column(db.Text)
    caminho_csv = db.Column(db.String(500))
    data_inicio = db.Column(db.DateTime, default=datetime.utcnow, nullable=False)
    data_fim = db.Column(db.DateTime)
    duracao_segundos = db.Column(db.Float)

    resultados = db.relationship('ResultadoEstimador', backref='execucao', lazy=True,
                                 cascade='all, delete-orphan', order_by='ResultadoEstimador.id')

    STATUS_VALIDOS = ('executando', 'concluido', 'erro')

    def __init__(self, **kwargs: Any) -> None:
        super().__init__(**kwargs)
        if self.status and self.status not in self.STATUS_VALIDOS:
            raise ValueError(f'Status inválido: {self.status}')

    def to_dict(self, incluir_resultados: bool = False):
        data = {
            'id': self.id,
            'experimento': self.experimento,
            'impressao_digital': self.impressao_digital,
            'configuracao': self.configuracao,
            'status': self.status,
            'aprovado': self.aprovado,
            'origem': self.origem,
            'mensagem_erro': self.mensagem_erro,
            'caminho_csv': self.caminho_csv,
            'data_inicio': self.data_inicio.isoformat() if self.data_inicio else None,
            'data_fim': self.data_fim.isoformat() if self.data_fim else None,
            'duracao_segundos': self.duracao_segundos,
            'total_resultados': len(self.resultados),
        }
        if incluir_resultados:
            data['resultados'] = [r.to_dict() for r in self.resultados]
        return data


class ResultadoEstimador(db.Model):  # type: ignore
    __tablename__ = 'resultados_estimador'

    id = db.Column(db.Integer, primary_key=True)
    execucao_id = db.Column(db.Integer, db.ForeignKey('execucoes_experimento.id'), nullable=False, index=True)
    parametro = db.Column(db.String(120), nullable=False)
    estimativa = db.Column(db.Float)
    erro_padrao = db.Column(db.Float)
    n_lotes = db.Column(db.Integer, nullable=False, default=0)
    alvo = db.Column(db.Float)
    proveniencia = db.Column(db.String(30), nullable=False)
    aprovado = db.Column(db.Boolean, nullable=False)
    observacao = db.Column(db.String(255))

    def __init__(self, **kwargs: Any) -> None:
        super().__init__(**kwargs)

    @classmethod
    def from_result(cls, execucao_id: int, result) -> 'ResultadoEstimador':
        return cls(
            execucao_id=execucao_id,
            parametro=result.parameter,
            estimativa=_finite_or_none(result.estimate),
            erro_padrao=_finite_or_none(result.stderr),
            n_lotes=result.n_batches,
            alvo=_finite_or_none(result.target),
            proveniencia=result.provenance,
            aprovado=bool(result.passed),
            observacao=result.note or None,
        )

    def to_dict(self):
        return {
            'id': self.id,
            'execucao_id': self.execucao_id,
            'parametro': self.parametro,
            'estimativa': self.estimativa,
            'erro_padrao': self.erro_padrao,
            'n_lotes': self.n_lotes,
            'alvo': self.alvo,
            'proveniencia': self.proveniencia,
            'aprovado': self.aprovado,
            'observacao': self.observacao,
        }


def _finite_or_none(value):
    # colunas Float e JSON recebem None no lugar de NaN/inf
    value = float(value)
    return value if value == value and abs(value) != float('inf') else None


class AuditoriaLog(db.Model):  # type: ignore
    __tablename__ = 'auditoria_logs'
    __table_args__ = (
        db.Index('idx_entidade_acao', 'entidade_tipo', 'acao'),
    )

    id = db.Column(db.Integer, primary_key=True)
    acao = db.Column(db.String(50), nullable=False)
    origem = db.Column(db.String(10), nullable=False, default='api')
    entidade_tipo = db.Column(db.String(50), nullable=False)
    entidade_id = db.Column(db.Integer)
    detalhes = db.Column(db.JSON)
    ip_address = db.Column(db.String(50))
    user_agent = db.Column(db.String(500))
    data_acao = db.Column(db.DateTime, default=datetime.utcnow, nullable=False, index=True)

    def __init__(self, **kwargs: Any) -> None:
        super().__init__(**kwargs)

    def to_dict(self):
        return {
            'id': self.id,
            'acao': self.acao,
            'origem': self.origem,
            'entidade_tipo': self.entidade_tipo,
            'entidade_id': self.entidade_id,
            'detalhes': self.detalhes,
            'ip_address': self.ip_address,
            'user_agent': self.user_agent,
            'data_acao': self.data_acao.isoformat() if self.data_acao else None
        }
