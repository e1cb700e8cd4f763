from flask import Flask
from flask_cors import CORS
from app.models import db
from typing import Any, Dict, Optional
import logging
import os


def _database_url() -> str:
    database_url = os.getenv('DATABASE_URL', 'sqlite:///laboratorio.db')
    if database_url.startswith('postgres://'):
        database_url = database_url.replace('postgres://', 'postgresql://', 1)
    return database_url


def create_app(config: Optional[Dict[str, Any]] = None):
    app = Flask(__name__)

    app.config['SECRET_KEY'] = os.getenv('SESSION_SECRET', 'dev-secret-key')
    app.config['SQLALCHEMY_DATABASE_URI'] = _database_url()
    app.config['SQLALCHEMY_TRACK_MODIFICATIONS'] = False
    app.config['MAX_CONTENT_LENGTH'] = 1 * 1024 * 1024
    app.config['LAB_OUTPUT_DIR'] = os.getenv('LAB_OUTPUT_DIR', 'resultados')
    app.config['LAB_WORKERS'] = int(os.getenv('LAB_WORKERS', '1'))
    app.config['LAB_LOG_LEVEL'] = os.getenv('LAB_LOG_LEVEL', 'INFO')
    app.config['LAB_MAX_REPLICAS_API'] = int(os.getenv('LAB_MAX_REPLICAS_API', '2000'))
    if config:
        app.config.update(config)

    logging.basicConfig(format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    logging.getLogger().setLevel(app.config['LAB_LOG_LEVEL'].upper())

    db.init_app(app)
    CORS(app)

    from app.routes import auditoria, experimentos, kernels, simulacoes

    app.register_blueprint(kernels.bp)
    app.register_blueprint(simulacoes.bp)
    app.register_blueprint(experimentos.bp)
    app.register_blueprint(auditoria.bp)

    from app.cli import register_commands
    register_commands(app)

    with app.app_context():
        db.create_all()

    return app
