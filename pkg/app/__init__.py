# app/__init__.py - Flask App Factory
import os

from flask import Flask

from config import config


def create_app(config_name=None, **overrides):
    if config_name is None:
        config_name = os.environ.get('FLASK_ENV', 'default')

    app = Flask(__name__)
    app.config.from_object(config[config_name])
    app.config.update(overrides)

    app.logger.setLevel(app.config['LOG_LEVEL'])

    # Initialize configuration
    config[config_name].init_app(app)

    # Register blueprints
    from app.routes.cli import harness as harness_blueprint
    app.register_blueprint(harness_blueprint)

    return app
