"""
WSGI entry point para Gunicorn
"""
from dotenv import load_dotenv

load_dotenv()

from app import create_app

# Cria a aplicação
try:
    application = create_app()
    app = application
except Exception as e:
    print(f"[ERROR] ERRO FATAL ao criar app: {e}")
    import traceback
    traceback.print_exc()
    raise e

if __name__ == '__main__':
    import os
    port = int(os.environ.get('PORT', 5000))
    app.run(host='0.0.0.0', port=port, debug=False)
