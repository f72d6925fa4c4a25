"""
ingest/__init__.py
ingest/audio.py — WAV decoding, AudioBuffer, excerpt selection
ingest/grid.py  — Downsampling by D and fitting to the 2QK grid
"""
