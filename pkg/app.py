from app import create_app
from flask import jsonify
from dotenv import load_dotenv
import os

load_dotenv()

application = create_app()
app = application


@app.route('/')
def index():
    return jsonify({
        'servico': 'laboratorio-calor-refletido',
        'rotas': sorted(str(r) for r in app.url_map.iter_rules() if str(r).startswith('/api/'))
    })


if __name__ == '__main__':
    port = int(os.environ.get('PORT', 5000))
    app.run(host='0.0.0.0', port=port, debug=False)
