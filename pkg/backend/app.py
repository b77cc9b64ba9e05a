from flask import Flask, jsonify
from flask_cors import CORS

import config
from errors import MaxGraphError, ParamsError
from utils.audit_logger import get_logger

# Import blueprints
from routes.api_routes import api_bp

logger = get_logger("app")


def create_app():
    app = Flask(__name__, static_folder="static")
    app.json.sort_keys = True
    app.config["EXPORT_DIR"] = config.EXPORT_DIR
    CORS(app)

    # Register Blueprints
    app.register_blueprint(api_bp, url_prefix="/api")

    @app.errorhandler(MaxGraphError)
    def handle_domain_error(e):
        status = 400 if isinstance(e, ParamsError) else 422
        logger.warning("request failed with %s: %s", e.code, e.message)
        return jsonify({"status": "error", "code": e.code, "message": e.message}), status

    @app.route("/")
    def index():
        return jsonify({"status": "ok", "endpoints": ["/api/catalog", "/api/verify", "/api/minimal"]})

    return app


app = create_app()

if __name__ == "__main__":
    # the tolerance ladder is process-wide state
    app.run(debug=True, port=5000, threaded=False)
