"""
api/__init__.py
api/app.py     — FastAPI application factory
api/routes.py  — /health, /config/defaults, /analyze
api/schemas.py — Response models
"""
